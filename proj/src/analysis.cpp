#include "saccadic/analysis.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <numeric>
#include <random>
#include <stdexcept>

namespace saccadic {

std::string feature_name(Feature f) {
  switch (f) {
    case Feature::TotalEvents: return "total_events";
    case Feature::OnEvents: return "on_events";
    case Feature::OffEvents: return "off_events";
    case Feature::OnOffRatio: return "on_off_ratio";
    case Feature::MeanX: return "mean_x";
    case Feature::MeanY: return "mean_y";
    case Feature::StdX: return "std_x";
    case Feature::StdY: return "std_y";
    case Feature::MaxX: return "max_x";
    case Feature::MaxY: return "max_y";
  }
  return "unknown";
}

std::optional<Feature> parse_feature(const std::string& name) {
  for (Feature f : kAllFeatures)
    if (feature_name(f) == name) return f;
  return std::nullopt;
}

double FeatureVector::value(Feature f) const {
  switch (f) {
    case Feature::TotalEvents: return total;
    case Feature::OnEvents: return on;
    case Feature::OffEvents: return off;
    case Feature::OnOffRatio: return on_off_ratio;
    case Feature::MeanX: return mean_x;
    case Feature::MeanY: return mean_y;
    case Feature::StdX: return std_x;
    case Feature::StdY: return std_y;
    case Feature::MaxX: return max_x;
    case Feature::MaxY: return max_y;
  }
  return 0.0;
}

bool FeatureVector::defined(Feature f) const {
  switch (f) {
    case Feature::MeanX:
    case Feature::MeanY:
    case Feature::StdX:
    case Feature::StdY:
    case Feature::MaxX:
    case Feature::MaxY:
      return positions_defined;
    default:
      return true;
  }
}

FeatureVector compute_features(const EventStream& s) {
  FeatureVector fv;
  fv.total = static_cast<double>(s.size());
  double sx = 0.0, sy = 0.0;
  for (const Event& e : s) {
    if (e.on()) fv.on += 1.0;
    sx += e.x;
    sy += e.y;
    fv.max_x = std::max(fv.max_x, static_cast<double>(e.x));
    fv.max_y = std::max(fv.max_y, static_cast<double>(e.y));
  }
  fv.off = fv.total - fv.on;
  if (fv.off > 0.0) {
    fv.on_off_ratio = fv.on / fv.off;
  } else {
    fv.on_off_ratio = fv.on;
    fv.ratio_sentinel = true;
  }
  if (s.empty()) return fv;
  fv.positions_defined = true;
  fv.mean_x = sx / fv.total;
  fv.mean_y = sy / fv.total;
  double vx = 0.0, vy = 0.0;
  for (const Event& e : s) {
    vx += (e.x - fv.mean_x) * (e.x - fv.mean_x);
    vy += (e.y - fv.mean_y) * (e.y - fv.mean_y);
  }
  fv.std_x = std::sqrt(vx / fv.total);
  fv.std_y = std::sqrt(vy / fv.total);
  return fv;
}

MeanStd mean_std(std::span<const double> values) {
  MeanStd r;
  if (values.empty()) return r;
  r.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  if (values.size() < 2) return r;
  double ss = 0.0;
  for (double v : values) ss += (v - r.mean) * (v - r.mean);
  r.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
  return r;
}

std::array<MeanStd, kFeatureCount> aggregate_features(std::span<const FeatureVector> features) {
  if (features.empty()) throw std::invalid_argument("aggregate_features needs at least one recording");
  std::array<MeanStd, kFeatureCount> out;
  std::vector<double> col(features.size());
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    for (std::size_t i = 0; i < features.size(); ++i) col[i] = features[i].value(kAllFeatures[f]);
    out[f] = mean_std(col);
  }
  return out;
}

DatasetSummary summarize_dataset(std::span<const EventStream> recordings) {
  if (recordings.empty()) throw std::invalid_argument("summarize_dataset needs at least one recording");
  DatasetSummary s;
  s.recordings = recordings.size();
  std::vector<double> on, off, mx, my, rx, ry;
  for (const auto& r : recordings) {
    const FeatureVector fv = compute_features(r);
    on.push_back(fv.on);
    off.push_back(fv.off);
    if (fv.positions_defined) {
      mx.push_back(fv.mean_x);
      my.push_back(fv.mean_y);
    }
    rx.push_back(r.width());
    ry.push_back(r.height());
  }
  s.on_events = mean_std(on);
  s.off_events = mean_std(off);
  s.x_mean = mean_std(mx);
  s.y_mean = mean_std(my);
  s.x_range = mean_std(rx);
  s.y_range = mean_std(ry);
  return s;
}

RateProfile rate_profile(std::span<const EventStream> recordings, std::uint32_t bin_us) {
  if (recordings.empty()) throw std::invalid_argument("rate_profile needs at least one recording");
  if (bin_us == 0) throw std::invalid_argument("rate bin must be positive");
  const std::uint32_t duration = recordings.front().duration();
  for (const auto& r : recordings)
    if (r.duration() != duration) throw std::invalid_argument("recordings have mixed durations");
  const std::size_t bins = (duration + bin_us - 1) / bin_us;
  const double bin_ms = bin_us / 1000.0;
  std::vector<std::vector<double>> per_bin(bins, std::vector<double>(recordings.size(), 0.0));
  for (std::size_t r = 0; r < recordings.size(); ++r)
    for (const Event& e : recordings[r]) per_bin[e.timestamp / bin_us][r] += 1.0 / bin_ms;
  RateProfile p;
  p.bin_us = bin_us;
  p.mean.resize(bins);
  p.stddev.resize(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    const MeanStd ms = mean_std(per_bin[b]);
    p.mean[b] = ms.mean;
    p.stddev[b] = ms.stddev;
  }
  return p;
}

double mean_rate(std::span<const EventStream> recordings, std::uint32_t t0, std::uint32_t t1) {
  if (recordings.empty() || t1 <= t0) return 0.0;
  double n = 0.0;
  for (const auto& r : recordings)
    for (const Event& e : r)
      if (e.timestamp >= t0 && e.timestamp < t1) n += 1.0;
  return n / static_cast<double>(recordings.size()) / ((t1 - t0) / 1000.0);
}

std::size_t Spectrum::bin_of(double hz) const {
  if (magnitude.empty()) return 0;
  const long k = std::lround(hz / bin_hz);
  return static_cast<std::size_t>(std::clamp<long>(k, 0, static_cast<long>(magnitude.size()) - 1));
}

double Spectrum::energy() const {
  if (magnitude.empty()) return 0.0;
  const std::size_t last = magnitude.size() - 1;
  double e = magnitude[0] * magnitude[0] + magnitude[last] * magnitude[last];
  for (std::size_t k = 1; k < last; ++k) e += 2.0 * magnitude[k] * magnitude[k];
  return e;
}

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

}  // namespace

Spectrum spectrum_of_counts(std::vector<double> counts) {
  const std::size_t n = counts.size();
  if (n < 2 || (n & (n - 1)) != 0) throw std::invalid_argument("signal length must be a power of two");
  const double mean = std::accumulate(counts.begin(), counts.end(), 0.0) / static_cast<double>(n);
  double norm = 0.0;
  for (double& v : counts) {
    v -= mean;
    norm += v * v;
  }
  norm = std::sqrt(norm);
  if (!(norm > 0.0)) throw std::invalid_argument("signal has no variation to analyse");

  const std::size_t bins = n / 2 + 1;
  std::unique_ptr<double, FftwFree> in(static_cast<double*>(fftw_malloc(sizeof(double) * n)));
  std::unique_ptr<fftw_complex, FftwFree> out(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * bins)));
  if (!in || !out) throw std::bad_alloc();
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.get(), out.get(), FFTW_ESTIMATE);
  }
  for (std::size_t i = 0; i < n; ++i) in.get()[i] = counts[i] / norm;
  counts.clear();
  counts.shrink_to_fit();
  fftw_execute(plan);
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
  }

  Spectrum s;
  s.length_exp = static_cast<int>(std::lround(std::log2(static_cast<double>(n))));
  s.bin_hz = 1e6 / static_cast<double>(n);
  s.magnitude.resize(bins);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (std::size_t k = 0; k < bins; ++k) s.magnitude[k] = std::hypot(out.get()[k][0], out.get()[k][1]) * scale;
  return s;
}

Spectrum temporal_spectrum(std::span<const EventStream> recordings, int length_exp, std::uint64_t seed) {
  if (recordings.empty()) throw std::invalid_argument("temporal_spectrum needs at least one recording");
  if (length_exp < 16 || length_exp > 30) throw std::invalid_argument("length_exp must be in [16, 30]");
  const std::size_t n = std::size_t{1} << length_exp;
  std::vector<double> counts(n, 0.0);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, recordings.size() - 1);
  std::size_t offset = 0;
  while (offset < n) {
    const EventStream& r = recordings[pick(rng)];
    if (r.duration() == 0) throw std::invalid_argument("recording with zero duration");
    for (const Event& e : r) {
      const std::size_t t = offset + e.timestamp;
      if (t >= n) break;
      counts[t] += 1.0;
    }
    offset += r.duration();
  }
  return spectrum_of_counts(std::move(counts));
}

std::optional<std::size_t> find_peak(const Spectrum& s, double hz, double tolerance_hz, double ratio,
                                     double half_width_hz) {
  if (s.magnitude.size() < 3) return std::nullopt;
  const long last = static_cast<long>(s.magnitude.size()) - 1;
  const long lo = std::max(1L, static_cast<long>(std::ceil((hz - tolerance_hz) / s.bin_hz)));
  const long hi = std::min(last, static_cast<long>(std::floor((hz + tolerance_hz) / s.bin_hz)));
  const long hw = std::max(1L, std::lround(half_width_hz / s.bin_hz));
  std::optional<std::size_t> best;
  std::vector<double> neighbourhood;
  for (long k = lo; k <= hi; ++k) {
    const long a = std::max(1L, k - hw), b = std::min(last, k + hw);
    neighbourhood.assign(s.magnitude.begin() + a, s.magnitude.begin() + b + 1);
    auto mid = neighbourhood.begin() + static_cast<long>(neighbourhood.size() / 2);
    std::nth_element(neighbourhood.begin(), mid, neighbourhood.end());
    const double median = *mid;
    if (s.magnitude[k] > ratio * median && (!best || s.magnitude[k] > s.magnitude[*best]))
      best = static_cast<std::size_t>(k);
  }
  return best;
}

std::vector<RgbRaster> render_frames(const EventStream& s, std::uint32_t window_us) {
  if (window_us == 0) throw std::invalid_argument("render window must be positive");
  const std::size_t frames = (static_cast<std::size_t>(s.duration()) + window_us - 1) / window_us;
  std::vector<RgbRaster> out(frames, RgbRaster(s.width(), s.height()));
  for (const Event& e : s) {
    const std::size_t f = e.timestamp / window_us;
    if (f >= frames) continue;
    out[f].at(e.x, e.y) = e.on() ? Rgb{255, 0, 0} : Rgb{0, 0, 255};
  }
  return out;
}

}  // namespace saccadic
