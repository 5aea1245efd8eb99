#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "saccadic/event.hpp"

namespace saccadic {

struct SkimConfig {
  int hidden = 500;
  int window_ms = 316;     ///< simulated timesteps (1 ms each); longer recordings are truncated
  int pulse_ms = 10;       ///< target pulse at the end of the window
  double delay_max_ms = 200.0;
  double tau_min_ms = 5.0;
  double tau_max_ms = 30.0;
  double input_gain = 1.0;  ///< input weights ~ U[-1, 1] * gain / sqrt(fan-in)
  double ridge = 1e-4;
  bool two_channel = false;  ///< separate ON and OFF channels per pixel
  int downsample = 1;        ///< square pooling factor on input channels
  std::uint64_t seed = 1;

  void validate() const;
};

/// Alpha kernel (t - d)/tau * exp(1 - (t - d)/tau) for t >= d, else 0. Peak 1 at t = d + tau.
double alpha_kernel(double t_ms, double delay_ms, double tau_ms);

/// Offset (in units of tau) past which the alpha kernel stays below 1e-3 of its peak.
inline constexpr double kAlphaSupportTaus = 10.24;

/// Random hidden layer: per neuron, static input weights and a delayed alpha
/// post-synaptic kernel followed by a logistic nonlinearity. The output layer
/// is linear with weights hidden x classes.
///
/// Delays are sampled as whole milliseconds from U[0, min(delay_max, window -
/// 10.24 tau)] so every kernel has decayed below 1e-3 of its peak inside the
/// window.
class SkimNetwork {
 public:
  SkimNetwork(int width, int height, const SkimConfig& config);

  const SkimConfig& config() const { return config_; }
  int input_channels() const { return static_cast<int>(weights_in_.rows()); }
  int hidden() const { return config_.hidden; }
  int delay(int n) const { return delays_[static_cast<std::size_t>(n)]; }
  double tau(int n) const { return taus_[static_cast<std::size_t>(n)]; }
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>& input_weights() const {
    return weights_in_;
  }
  void scale_input_weights(double factor) { weights_in_ *= factor; }

  /// Channel fed by an event.
  int channel_of(const Event& e) const;

  /// Per-timestep input spike counts, window_ms bins of (channel, count).
  /// Recordings smaller than the input layer occupy its top-left corner.
  std::vector<std::vector<std::pair<int, double>>> bin_input(const EventStream& s, bool* truncated = nullptr) const;

  /// Hidden activations, window_ms x hidden, values in (0, 1).
  Eigen::MatrixXd forward(const EventStream& s, bool* truncated = nullptr) const;

  /// Synaptic drive before the nonlinearity, window_ms x hidden.
  Eigen::MatrixXd drive(const EventStream& s, bool* truncated = nullptr) const;

  bool trained() const { return output_.size() > 0; }
  const Eigen::MatrixXd& output_weights() const { return output_; }
  void set_output_weights(Eigen::MatrixXd w);

  /// Output traces, window_ms x classes.
  Eigen::MatrixXd outputs(const EventStream& s) const;

  /// Class with the largest output inside the final pulse window; ties go to
  /// the lowest index.
  std::size_t classify(const EventStream& s) const;
  std::size_t classify_outputs(const Eigen::MatrixXd& outputs) const;

 private:
  SkimConfig config_;
  int width_, height_;
  int pooled_w_, pooled_h_;
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> weights_in_;  // channels x hidden
  std::vector<int> delays_;
  std::vector<double> taus_;
  Eigen::MatrixXd output_;
};

/// Target traces for one labelled recording: window_ms x classes, 1 during the
/// final pulse_ms steps of the true class, 0 elsewhere.
Eigen::MatrixXd skim_target(const SkimConfig& config, std::size_t label, std::size_t classes);

/// Accumulates the ridge normal equations one recording at a time, so memory
/// stays at hidden^2 regardless of the training set size.
class SkimTrainer {
 public:
  SkimTrainer(int hidden, std::size_t classes, const SkimConfig& config);

  void add(const Eigen::MatrixXd& hidden_activations, std::size_t label);
  std::size_t samples() const { return samples_; }

  /// Solves (H'H + ridge I) W = H'Y. When the system is numerically singular
  /// the ridge is raised tenfold (up to six times) and a warning is appended.
  Eigen::MatrixXd solve(std::vector<std::string>* warnings = nullptr) const;

 private:
  SkimConfig config_;
  std::size_t classes_;
  Eigen::MatrixXd gram_;
  Eigen::MatrixXd cross_;
  std::size_t samples_ = 0;
};

/// Reference ridge solve by Householder QR on the stacked system [H; sqrt(ridge) I].
Eigen::MatrixXd ridge_solve_qr(const Eigen::MatrixXd& h, const Eigen::MatrixXd& y, double ridge);

/// "SKIMOUT1", u32 rows, u32 cols, then little-endian float64 row-major.
void save_skim_weights(const std::filesystem::path& path, const Eigen::MatrixXd& w);
Eigen::MatrixXd load_skim_weights(const std::filesystem::path& path);

}  // namespace saccadic
