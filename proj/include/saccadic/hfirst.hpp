#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "saccadic/event.hpp"

namespace saccadic {

/// Integrate-and-fire layer parameters.
struct LayerSpec {
  double v_thresh = 1.0;        ///< mV
  double leak_mv_per_ms = 0.0;  ///< I_l / C_m
  double t_refr_ms = 0.0;
  std::array<int, 3> kernel{1, 1, 1};  ///< w, h, channels (synapses)
  std::array<int, 3> layer{1, 1, 1};   ///< w, h, channels (neurons)

  void validate() const;
  std::size_t neurons() const { return static_cast<std::size_t>(layer[0]) * layer[1] * layer[2]; }
};

struct NeuronState {
  double potential = 0.0;
  std::int64_t last_update_us = 0;
  std::int64_t refractory_until_us = std::numeric_limits<std::int64_t>::min();
};

struct WeightedInput {
  std::uint32_t t_us = 0;
  std::uint32_t neuron = 0;
  double weight = 0.0;
};

struct Spike {
  std::uint32_t t_us = 0;
  std::uint32_t neuron = 0;
  friend bool operator==(const Spike&, const Spike&) = default;
};

/// Applies one synaptic input. The potential first leaks linearly toward 0
/// since the last update (never below 0); inputs arriving while refractory are
/// dropped. Returns true and resets to 0 when the threshold is reached.
bool integrate(const LayerSpec& spec, NeuronState& state, std::uint32_t t_us, double weight);

/// Event-driven pass over time-ordered inputs.
std::vector<Spike> run_layer(const LayerSpec& spec, std::span<NeuronState> states,
                             std::span<const WeightedInput> inputs);

/// Same layer advanced in fixed 1 ms steps: leak is applied once per step and
/// refractoriness is counted in whole steps. Returns spike counts per neuron.
std::vector<std::size_t> run_layer_dense(const LayerSpec& spec, std::size_t neurons,
                                         std::span<const WeightedInput> inputs);

struct GaborParams {
  double wavelength = 5.0;
  double aspect = 0.5;
  double sigma = 2.8;
  double phase = 0.0;
};

/// Oriented, zero-mean Gabor kernels (orientation k * 180/orientations degrees),
/// each scaled so its largest |weight| equals `weight_scale`. Row-major
/// `size * size` per kernel, indexed [dy][dx].
std::vector<std::vector<double>> build_s1_kernels(int orientations = 12, int size = 7, const GaborParams& gabor = {},
                                                  double weight_scale = 1.0);

enum class PolarityMode { Merge, OnOnly, OffOnly };

struct HfirstParams {
  LayerSpec s1;
  LayerSpec c1;
  LayerSpec s2;
  LayerSpec c2;
  GaborParams gabor;
  int orientations = 12;
  int pool = 4;
  double s1_weight_scale = 30.0;  ///< largest S1 synaptic weight, mV
  double s2_weight_l1 = 640.0;    ///< l1 norm of each trained S2 kernel, mV
  PolarityMode polarity = PolarityMode::Merge;

  /// S1/C1/S2/C2 thresholds, leaks, refractory periods and sizes for a 34x34
  /// input and ten classes.
  static HfirstParams table(int classes = 10);
};

/// S1 (oriented filters) -> C1 (max-like pooling) -> S2 (class templates) ->
/// C2 (per-class spike counters). Fresh neuron state for every recording.
///
/// Events sharing a timestamp are processed in (x, y, polarity) order, so the
/// output does not depend on how the input orders simultaneous events.
class HfirstNetwork {
 public:
  HfirstNetwork(int width, int height, HfirstParams params);

  const HfirstParams& params() const { return params_; }
  int c1_width() const { return c1_w_; }
  int c1_height() const { return c1_h_; }
  std::size_t c1_size() const;
  std::size_t classes() const { return s2_kernels_.size(); }
  const std::vector<std::vector<double>>& s1_kernels() const { return s1_kernels_; }
  const std::vector<std::vector<double>>& s2_kernels() const { return s2_kernels_; }

  /// C1 spikes per C1 neuron, index (y * c1_width + x) * orientations + o.
  std::vector<double> c1_counts(const EventStream& s) const;
  std::vector<Spike> c1_spikes(const EventStream& s) const;

  /// Installs one S2 kernel per class, each of size c1_size().
  void set_s2_kernels(std::vector<std::vector<double>> kernels);

  /// Output spike count per class.
  std::vector<std::size_t> c2_counts(const EventStream& s) const;

 private:
  template <typename Sink>
  void run_front(const EventStream& s, Sink&& on_c1) const;

  HfirstParams params_;
  int width_, height_;
  int c1_w_, c1_h_;
  std::vector<std::vector<double>> s1_kernels_;
  std::vector<std::vector<double>> s2_kernels_;
};

/// Sums C1 activity per class and normalises each class kernel to
/// `params().s2_weight_l1`. `recordings_by_class[c]` holds class c's samples.
/// Throws std::invalid_argument naming the class when it produced no C1 spikes
/// or has no samples.
std::vector<std::vector<double>> train_s2(const HfirstNetwork& net,
                                          std::span<const std::vector<EventStream>> recordings_by_class);

/// Normalises accumulated C1 counts into S2 kernels.
std::vector<std::vector<double>> normalise_s2(std::vector<std::vector<double>> counts, double l1);

/// Class with the most output spikes (ties to the lowest index); nullopt
/// without any output spike.
std::optional<std::size_t> classify_hard(std::span<const std::size_t> counts);

/// Share of output spikes per class; all zeros without output.
std::vector<double> classify_soft(std::span<const std::size_t> counts);

}  // namespace saccadic
