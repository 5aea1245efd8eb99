#include "saccadic/hfirst.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>
#include <tuple>

namespace saccadic {

void LayerSpec::validate() const {
  if (!(v_thresh > 0.0)) throw std::invalid_argument("layer threshold must be positive");
  if (!(leak_mv_per_ms >= 0.0)) throw std::invalid_argument("layer leak must be non-negative");
  if (!(t_refr_ms >= 0.0)) throw std::invalid_argument("refractory period must be non-negative");
  for (int v : kernel)
    if (v < 1) throw std::invalid_argument("kernel size must be positive");
  for (int v : layer)
    if (v < 1) throw std::invalid_argument("layer size must be positive");
}

bool integrate(const LayerSpec& spec, NeuronState& state, std::uint32_t t_us, double weight) {
  const auto t = static_cast<std::int64_t>(t_us);
  if (t < state.refractory_until_us) return false;
  const double dt_ms = static_cast<double>(t - state.last_update_us) / 1000.0;
  state.potential = std::max(0.0, state.potential - spec.leak_mv_per_ms * dt_ms);
  state.last_update_us = t;
  state.potential = std::max(0.0, state.potential + weight);
  if (state.potential < spec.v_thresh) return false;
  state.potential = 0.0;
  state.refractory_until_us = t + static_cast<std::int64_t>(std::llround(spec.t_refr_ms * 1000.0));
  return true;
}

std::vector<Spike> run_layer(const LayerSpec& spec, std::span<NeuronState> states,
                             std::span<const WeightedInput> inputs) {
  std::vector<Spike> out;
  for (const WeightedInput& in : inputs) {
    if (in.neuron >= states.size()) throw std::out_of_range("input targets a missing neuron");
    if (integrate(spec, states[in.neuron], in.t_us, in.weight)) out.push_back({in.t_us, in.neuron});
  }
  return out;
}

std::vector<std::size_t> run_layer_dense(const LayerSpec& spec, std::size_t neurons,
                                         std::span<const WeightedInput> inputs) {
  std::vector<std::size_t> counts(neurons, 0);
  if (inputs.empty()) return counts;
  const std::size_t steps = inputs.back().t_us / 1000 + 1;
  const auto refr_steps = static_cast<std::size_t>(std::llround(spec.t_refr_ms));
  std::vector<double> v(neurons, 0.0);
  std::vector<std::size_t> blocked_until(neurons, 0);
  std::size_t next = 0;
  for (std::size_t step = 0; step < steps; ++step) {
    if (step > 0)
      for (double& p : v) p = std::max(0.0, p - spec.leak_mv_per_ms);
    for (; next < inputs.size() && inputs[next].t_us / 1000 == step; ++next) {
      const WeightedInput& in = inputs[next];
      if (in.neuron >= neurons) throw std::out_of_range("input targets a missing neuron");
      if (step < blocked_until[in.neuron]) continue;
      double& p = v[in.neuron];
      p = std::max(0.0, p + in.weight);
      if (p >= spec.v_thresh) {
        p = 0.0;
        ++counts[in.neuron];
        blocked_until[in.neuron] = step + refr_steps;
      }
    }
  }
  return counts;
}

std::vector<std::vector<double>> build_s1_kernels(int orientations, int size, const GaborParams& g,
                                                  double weight_scale) {
  if (orientations < 1 || size < 1) throw std::invalid_argument("kernel bank dimensions must be positive");
  std::vector<std::vector<double>> bank;
  const double half = (size - 1) / 2.0;
  for (int k = 0; k < orientations; ++k) {
    const double theta = std::numbers::pi * k / orientations;
    const double c = std::cos(theta), s = std::sin(theta);
    std::vector<double> kern(static_cast<std::size_t>(size) * size);
    for (int dy = 0; dy < size; ++dy) {
      for (int dx = 0; dx < size; ++dx) {
        const double x = dx - half, y = dy - half;
        const double xr = x * c + y * s;
        const double yr = -x * s + y * c;
        kern[static_cast<std::size_t>(dy) * size + dx] =
            std::exp(-(xr * xr + g.aspect * g.aspect * yr * yr) / (2.0 * g.sigma * g.sigma)) *
            std::cos(2.0 * std::numbers::pi * xr / g.wavelength + g.phase);
      }
    }
    const double mean = std::accumulate(kern.begin(), kern.end(), 0.0) / static_cast<double>(kern.size());
    double peak = 0.0;
    for (double& w : kern) {
      w -= mean;
      peak = std::max(peak, std::abs(w));
    }
    if (peak > 0.0)
      for (double& w : kern) w *= weight_scale / peak;
    bank.push_back(std::move(kern));
  }
  return bank;
}

HfirstParams HfirstParams::table(int classes) {
  HfirstParams p;
  p.s1 = {150.0, 25.0, 5.0, {7, 7, 1}, {34, 34, 12}};
  p.c1 = {1.0, 0.0, 5.0, {4, 4, 1}, {9, 9, 12}};
  p.s2 = {150.0, 1.0, 5.0, {9, 9, 12}, {1, 1, classes}};
  p.c2 = {1.0, 0.0, 5.0, {1, 1, 1}, {1, 1, classes}};
  return p;
}

HfirstNetwork::HfirstNetwork(int width, int height, HfirstParams params)
    : params_(std::move(params)), width_(width), height_(height) {
  if (width < 1 || height < 1) throw std::invalid_argument("input size must be positive");
  if (params_.orientations < 1 || params_.pool < 1) throw std::invalid_argument("bad HFIRST layer geometry");
  c1_w_ = (width + params_.pool - 1) / params_.pool;
  c1_h_ = (height + params_.pool - 1) / params_.pool;
  params_.s1.layer = {width, height, params_.orientations};
  params_.c1.kernel = {params_.pool, params_.pool, 1};
  params_.c1.layer = {c1_w_, c1_h_, params_.orientations};
  params_.s2.kernel = params_.c1.layer;
  for (const LayerSpec* l : {&params_.s1, &params_.c1, &params_.s2, &params_.c2}) l->validate();
  s1_kernels_ = build_s1_kernels(params_.orientations, params_.s1.kernel[0], params_.gabor,
                                 params_.s1_weight_scale);
}

std::size_t HfirstNetwork::c1_size() const {
  return static_cast<std::size_t>(c1_w_) * c1_h_ * params_.orientations;
}

template <typename Sink>
void HfirstNetwork::run_front(const EventStream& s, Sink&& on_c1) const {
  if (s.width() != width_ || s.height() != height_)
    throw std::invalid_argument("recording size " + std::to_string(s.width()) + "x" + std::to_string(s.height()) +
                                " does not match the network input " + std::to_string(width_) + "x" +
                                std::to_string(height_));
  std::vector<Event> events;
  events.reserve(s.size());
  for (const Event& e : s) {
    if (params_.polarity == PolarityMode::OnOnly && !e.on()) continue;
    if (params_.polarity == PolarityMode::OffOnly && e.on()) continue;
    events.push_back(e);
  }
  std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
    return std::tuple(a.timestamp, a.x, a.y, a.polarity) < std::tuple(b.timestamp, b.x, b.y, b.polarity);
  });

  const int orient = params_.orientations;
  const int ksize = params_.s1.kernel[0];
  const int half = ksize / 2;
  std::vector<NeuronState> s1(static_cast<std::size_t>(width_) * height_ * orient);
  std::vector<NeuronState> c1(c1_size());
  for (const Event& e : events) {
    for (int j = std::max(0, e.y - half); j <= std::min(height_ - 1, e.y + half); ++j) {
      for (int i = std::max(0, e.x - half); i <= std::min(width_ - 1, e.x + half); ++i) {
        const std::size_t k = static_cast<std::size_t>(e.y - j + half) * ksize + (e.x - i + half);
        const std::size_t base = (static_cast<std::size_t>(j) * width_ + i) * orient;
        const std::size_t c1_base =
            (static_cast<std::size_t>(j / params_.pool) * c1_w_ + i / params_.pool) * orient;
        for (int o = 0; o < orient; ++o) {
          if (!integrate(params_.s1, s1[base + o], e.timestamp, s1_kernels_[o][k])) continue;
          const std::size_t c = c1_base + o;
          if (integrate(params_.c1, c1[c], e.timestamp, 1.0)) on_c1(Spike{e.timestamp, static_cast<std::uint32_t>(c)});
        }
      }
    }
  }
}

std::vector<double> HfirstNetwork::c1_counts(const EventStream& s) const {
  std::vector<double> counts(c1_size(), 0.0);
  run_front(s, [&](const Spike& sp) { counts[sp.neuron] += 1.0; });
  return counts;
}

std::vector<Spike> HfirstNetwork::c1_spikes(const EventStream& s) const {
  std::vector<Spike> out;
  run_front(s, [&](const Spike& sp) { out.push_back(sp); });
  return out;
}

void HfirstNetwork::set_s2_kernels(std::vector<std::vector<double>> kernels) {
  if (kernels.empty()) throw std::invalid_argument("at least one S2 kernel is required");
  for (const auto& k : kernels)
    if (k.size() != c1_size()) throw std::invalid_argument("S2 kernel size does not match the C1 layer");
  s2_kernels_ = std::move(kernels);
  params_.s2.layer = {1, 1, static_cast<int>(s2_kernels_.size())};
  params_.c2.layer = params_.s2.layer;
}

std::vector<std::size_t> HfirstNetwork::c2_counts(const EventStream& s) const {
  if (s2_kernels_.empty()) throw std::logic_error("HFIRST network has no trained S2 kernels");
  const std::size_t classes = s2_kernels_.size();
  std::vector<NeuronState> s2(classes), c2(classes);
  std::vector<std::size_t> counts(classes, 0);
  run_front(s, [&](const Spike& sp) {
    for (std::size_t c = 0; c < classes; ++c) {
      const double w = s2_kernels_[c][sp.neuron];
      if (w == 0.0 && s2[c].potential == 0.0) continue;
      if (integrate(params_.s2, s2[c], sp.t_us, w) && integrate(params_.c2, c2[c], sp.t_us, 1.0)) ++counts[c];
    }
  });
  return counts;
}

std::vector<std::vector<double>> normalise_s2(std::vector<std::vector<double>> counts, double l1) {
  for (std::size_t c = 0; c < counts.size(); ++c) {
    const double sum = std::accumulate(counts[c].begin(), counts[c].end(), 0.0);
    if (!(sum > 0.0)) throw std::invalid_argument("class " + std::to_string(c) + " produced no C1 spikes");
    for (double& w : counts[c]) w *= l1 / sum;
  }
  return counts;
}

std::vector<std::vector<double>> train_s2(const HfirstNetwork& net,
                                          std::span<const std::vector<EventStream>> recordings_by_class) {
  if (recordings_by_class.empty()) throw std::invalid_argument("train_s2 needs at least one class");
  std::vector<std::vector<double>> sums(recordings_by_class.size(), std::vector<double>(net.c1_size(), 0.0));
  for (std::size_t c = 0; c < recordings_by_class.size(); ++c) {
    if (recordings_by_class[c].empty())
      throw std::invalid_argument("class " + std::to_string(c) + " has no training recordings");
    for (const EventStream& r : recordings_by_class[c]) {
      const std::vector<double> counts = net.c1_counts(r);
      for (std::size_t i = 0; i < counts.size(); ++i) sums[c][i] += counts[i];
    }
  }
  return normalise_s2(std::move(sums), net.params().s2_weight_l1);
}

std::optional<std::size_t> classify_hard(std::span<const std::size_t> counts) {
  std::optional<std::size_t> best;
  for (std::size_t c = 0; c < counts.size(); ++c)
    if (counts[c] > 0 && (!best || counts[c] > counts[*best])) best = c;
  return best;
}

std::vector<double> classify_soft(std::span<const std::size_t> counts) {
  const double total = static_cast<double>(std::accumulate(counts.begin(), counts.end(), std::size_t{0}));
  std::vector<double> p(counts.size(), 0.0);
  if (total == 0.0) return p;
  for (std::size_t c = 0; c < counts.size(); ++c) p[c] = static_cast<double>(counts[c]) / total;
  return p;
}

}  // namespace saccadic
