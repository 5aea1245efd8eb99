#include "saccadic/skim.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <numbers>
#include <random>
#include <stdexcept>

namespace saccadic {

void SkimConfig::validate() const {
  if (hidden < 1) throw std::invalid_argument("SKIM needs at least one hidden neuron");
  if (window_ms < 1 || pulse_ms < 1 || pulse_ms > window_ms)
    throw std::invalid_argument("SKIM window must contain the target pulse");
  if (!(tau_min_ms > 0.0) || tau_max_ms < tau_min_ms) throw std::invalid_argument("bad SKIM tau range");
  if (!(delay_max_ms >= 0.0)) throw std::invalid_argument("SKIM delay bound must be non-negative");
  if (kAlphaSupportTaus * tau_max_ms > window_ms)
    throw std::invalid_argument("SKIM tau_max leaves no room for the kernel inside the window");
  if (!(input_gain > 0.0)) throw std::invalid_argument("SKIM input gain must be positive");
  if (!(ridge > 0.0)) throw std::invalid_argument("SKIM ridge must be positive");
  if (downsample < 1) throw std::invalid_argument("SKIM downsample factor must be at least 1");
}

double alpha_kernel(double t_ms, double delay_ms, double tau_ms) {
  if (t_ms < delay_ms) return 0.0;
  const double x = (t_ms - delay_ms) / tau_ms;
  return x * std::exp(1.0 - x);
}

SkimNetwork::SkimNetwork(int width, int height, const SkimConfig& config)
    : config_(config), width_(width), height_(height) {
  config_.validate();
  if (width < 1 || height < 1) throw std::invalid_argument("SKIM input size must be positive");
  pooled_w_ = (width + config_.downsample - 1) / config_.downsample;
  pooled_h_ = (height + config_.downsample - 1) / config_.downsample;
  const int channels = pooled_w_ * pooled_h_ * (config_.two_channel ? 2 : 1);

  std::mt19937_64 rng(config_.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const double scale = config_.input_gain / std::sqrt(static_cast<double>(channels));
  weights_in_.resize(channels, config_.hidden);
  for (int c = 0; c < channels; ++c)
    for (int n = 0; n < config_.hidden; ++n) weights_in_(c, n) = unit(rng) * scale;

  std::uniform_real_distribution<double> tau_dist(config_.tau_min_ms, config_.tau_max_ms);
  for (int n = 0; n < config_.hidden; ++n) {
    const double tau = tau_dist(rng);
    const double limit = std::min(config_.delay_max_ms, config_.window_ms - kAlphaSupportTaus * tau);
    std::uniform_int_distribution<int> delay_dist(0, std::max(0, static_cast<int>(std::floor(limit))));
    taus_.push_back(tau);
    delays_.push_back(delay_dist(rng));
  }
}

int SkimNetwork::channel_of(const Event& e) const {
  const int px = (e.y / config_.downsample) * pooled_w_ + e.x / config_.downsample;
  return config_.two_channel ? 2 * px + (e.on() ? 1 : 0) : px;
}

std::vector<std::vector<std::pair<int, double>>> SkimNetwork::bin_input(const EventStream& s,
                                                                        bool* truncated) const {
  if (s.width() > width_ || s.height() > height_)
    throw std::invalid_argument("recording does not fit the SKIM input layer");
  std::vector<std::vector<std::pair<int, double>>> bins(static_cast<std::size_t>(config_.window_ms));
  bool cut = false;
  for (const Event& e : s) {
    const std::uint32_t t = e.timestamp / 1000;
    if (t >= bins.size()) {
      cut = true;
      continue;
    }
    auto& bin = bins[t];
    const int c = channel_of(e);
    auto it = std::find_if(bin.begin(), bin.end(), [c](const auto& p) { return p.first == c; });
    if (it == bin.end()) bin.emplace_back(c, 1.0);
    else it->second += 1.0;
  }
  if (truncated) *truncated = cut;
  return bins;
}

Eigen::MatrixXd SkimNetwork::drive(const EventStream& s, bool* truncated) const {
  const auto bins = bin_input(s, truncated);
  const int steps = config_.window_ms;
  const int hidden = config_.hidden;
  Eigen::MatrixXd current = Eigen::MatrixXd::Zero(steps, hidden);
  for (int t = 0; t < steps; ++t)
    for (const auto& [c, count] : bins[static_cast<std::size_t>(t)])
      current.row(t) += count * weights_in_.row(c);

  // Sampled alpha kernel h[k] = (e/tau) k r^k, r = exp(-1/tau), run as a
  // second-order recursion and then shifted by the neuron's delay.
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(steps, hidden);
  std::vector<double> y(static_cast<std::size_t>(steps));
  for (int n = 0; n < hidden; ++n) {
    const double tau = taus_[static_cast<std::size_t>(n)];
    const double r = std::exp(-1.0 / tau);
    const double gain = std::numbers::e / tau * r;
    double y1 = 0.0, y2 = 0.0, u1 = 0.0;
    for (int t = 0; t < steps; ++t) {
      const double v = 2.0 * r * y1 - r * r * y2 + gain * u1;
      y[static_cast<std::size_t>(t)] = v;
      y2 = y1;
      y1 = v;
      u1 = current(t, n);
    }
    const int d = delays_[static_cast<std::size_t>(n)];
    for (int t = d; t < steps; ++t) out(t, n) = y[static_cast<std::size_t>(t - d)];
  }
  return out;
}

Eigen::MatrixXd SkimNetwork::forward(const EventStream& s, bool* truncated) const {
  Eigen::MatrixXd a = drive(s, truncated);
  return a.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
}

void SkimNetwork::set_output_weights(Eigen::MatrixXd w) {
  if (w.rows() != config_.hidden || w.cols() < 1)
    throw std::invalid_argument("SKIM output weights must have one row per hidden neuron");
  output_ = std::move(w);
}

Eigen::MatrixXd SkimNetwork::outputs(const EventStream& s) const {
  if (!trained()) throw std::logic_error("SKIM network has no output weights");
  return forward(s) * output_;
}

std::size_t SkimNetwork::classify_outputs(const Eigen::MatrixXd& out) const {
  const Eigen::Index rows = std::min<Eigen::Index>(config_.pulse_ms, out.rows());
  const Eigen::RowVectorXd peak = out.bottomRows(rows).colwise().maxCoeff();
  std::size_t best = 0;
  for (Eigen::Index c = 1; c < peak.size(); ++c)
    if (peak(c) > peak(static_cast<Eigen::Index>(best))) best = static_cast<std::size_t>(c);
  return best;
}

std::size_t SkimNetwork::classify(const EventStream& s) const { return classify_outputs(outputs(s)); }

Eigen::MatrixXd skim_target(const SkimConfig& config, std::size_t label, std::size_t classes) {
  if (label >= classes) throw std::out_of_range("label outside class range");
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(config.window_ms, static_cast<Eigen::Index>(classes));
  y.block(config.window_ms - config.pulse_ms, static_cast<Eigen::Index>(label), config.pulse_ms, 1).setOnes();
  return y;
}

SkimTrainer::SkimTrainer(int hidden, std::size_t classes, const SkimConfig& config)
    : config_(config), classes_(classes) {
  if (hidden < 1 || classes < 1) throw std::invalid_argument("SKIM trainer needs hidden neurons and classes");
  gram_ = Eigen::MatrixXd::Zero(hidden, hidden);
  cross_ = Eigen::MatrixXd::Zero(hidden, static_cast<Eigen::Index>(classes));
}

void SkimTrainer::add(const Eigen::MatrixXd& h, std::size_t label) {
  if (h.cols() != gram_.cols() || h.rows() != config_.window_ms)
    throw std::invalid_argument("hidden activation shape does not match the trainer");
  if (label >= classes_) throw std::out_of_range("label outside class range");
  gram_.selfadjointView<Eigen::Lower>().rankUpdate(h.transpose());
  cross_.col(static_cast<Eigen::Index>(label)) += h.bottomRows(config_.pulse_ms).colwise().sum().transpose();
  ++samples_;
}

Eigen::MatrixXd SkimTrainer::solve(std::vector<std::string>* warnings) const {
  if (samples_ == 0) throw std::logic_error("SKIM trainer has no samples");
  double ridge = config_.ridge;
  for (int attempt = 0; attempt <= 6; ++attempt) {
    Eigen::MatrixXd a = gram_.selfadjointView<Eigen::Lower>();
    a.diagonal().array() += ridge;
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() == Eigen::Success) {
      Eigen::MatrixXd w = llt.solve(cross_);
      if (w.allFinite()) return w;
    }
    if (warnings)
      warnings->push_back("normal equations singular at ridge " + std::to_string(ridge) + "; retrying at " +
                          std::to_string(ridge * 10.0));
    ridge *= 10.0;
  }
  throw std::runtime_error("SKIM normal equations remain singular after raising the ridge");
}

Eigen::MatrixXd ridge_solve_qr(const Eigen::MatrixXd& h, const Eigen::MatrixXd& y, double ridge) {
  const Eigen::Index rows = h.rows(), n = h.cols();
  Eigen::MatrixXd stacked(rows + n, n);
  stacked.topRows(rows) = h;
  stacked.bottomRows(n) = std::sqrt(ridge) * Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(rows + n, y.cols());
  rhs.topRows(rows) = y;
  return stacked.householderQr().solve(rhs);
}

namespace {

constexpr char kMagic[8] = {'S', 'K', 'I', 'M', 'O', 'U', 'T', '1'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::vector<std::uint8_t>& in, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in[at + i]) << (8 * i);
  return v;
}

}  // namespace

void save_skim_weights(const std::filesystem::path& path, const Eigen::MatrixXd& w) {
  std::vector<std::uint8_t> out(kMagic, kMagic + 8);
  put_u32(out, static_cast<std::uint32_t>(w.rows()));
  put_u32(out, static_cast<std::uint32_t>(w.cols()));
  for (Eigen::Index r = 0; r < w.rows(); ++r) {
    for (Eigen::Index c = 0; c < w.cols(); ++c) {
      const auto bits = std::bit_cast<std::uint64_t>(w(r, c));
      for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
    }
  }
  write_file_bytes(path, out);
}

Eigen::MatrixXd load_skim_weights(const std::filesystem::path& path) {
  const std::vector<std::uint8_t> in = read_file_bytes(path);
  if (in.size() < 16 || std::memcmp(in.data(), kMagic, 8) != 0)
    throw std::runtime_error(path.string() + ": not a SKIM weight file");
  const std::uint32_t rows = get_u32(in, 8), cols = get_u32(in, 12);
  if (in.size() != 16 + std::size_t{8} * rows * cols)
    throw std::runtime_error(path.string() + ": SKIM weight file size does not match its header");
  Eigen::MatrixXd w(rows, cols);
  std::size_t at = 16;
  for (std::uint32_t r = 0; r < rows; ++r) {
    for (std::uint32_t c = 0; c < cols; ++c) {
      std::uint64_t bits = 0;
      for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(in[at + i]) << (8 * i);
      at += 8;
      w(r, c) = std::bit_cast<double>(bits);
    }
  }
  return w;
}

}  // namespace saccadic
