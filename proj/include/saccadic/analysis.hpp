#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "saccadic/event.hpp"
#include "saccadic/image.hpp"

namespace saccadic {

enum class Feature {
  TotalEvents,
  OnEvents,
  OffEvents,
  OnOffRatio,
  MeanX,
  MeanY,
  StdX,
  StdY,
  MaxX,
  MaxY,
};

inline constexpr std::size_t kFeatureCount = 10;
inline constexpr std::array<Feature, kFeatureCount> kAllFeatures = {
    Feature::TotalEvents, Feature::OnEvents, Feature::OffEvents, Feature::OnOffRatio, Feature::MeanX,
    Feature::MeanY,       Feature::StdX,     Feature::StdY,      Feature::MaxX,       Feature::MaxY};

/// snake_case name used on the command line and in CSV headers.
std::string feature_name(Feature f);
std::optional<Feature> parse_feature(const std::string& name);

/// Per-recording statistics used by the kNN baselines.
struct FeatureVector {
  double total = 0.0;
  double on = 0.0;
  double off = 0.0;
  double on_off_ratio = 0.0;  ///< ON/OFF, or the ON count when there are no OFF events
  double mean_x = 0.0;
  double mean_y = 0.0;
  double std_x = 0.0;  ///< population standard deviation of x addresses
  double std_y = 0.0;
  double max_x = 0.0;
  double max_y = 0.0;
  bool ratio_sentinel = false;      ///< set when OFF = 0
  bool positions_defined = false;   ///< false for an empty recording

  double value(Feature f) const;
  /// Positional statistics of an empty recording are undefined.
  bool defined(Feature f) const;
};

FeatureVector compute_features(const EventStream& s);

struct MeanStd {
  double mean = 0.0;
  double stddev = 0.0;  ///< sample standard deviation, 0 for a single value
};

/// Two-pass mean and sample deviation.
MeanStd mean_std(std::span<const double> values);

/// Mean and deviation of every statistic over a set of recordings. Requires at
/// least one vector.
std::array<MeanStd, kFeatureCount> aggregate_features(std::span<const FeatureVector> features);

/// Dataset summary in the shape of the published statistics table.
struct DatasetSummary {
  MeanStd on_events;
  MeanStd off_events;
  MeanStd x_mean;
  MeanStd y_mean;
  MeanStd x_range;  ///< recording frame width, i.e. the image plus saccade excursion
  MeanStd y_range;
  std::size_t recordings = 0;
};

DatasetSummary summarize_dataset(std::span<const EventStream> recordings);

struct RateProfile {
  std::uint32_t bin_us = 0;
  std::vector<double> mean;    ///< events per ms, per bin
  std::vector<double> stddev;  ///< across recordings, events per ms

  std::size_t bins() const { return mean.size(); }
};

/// Per-bin event rate statistics. Throws std::invalid_argument when the
/// recordings disagree on duration or the set is empty.
RateProfile rate_profile(std::span<const EventStream> recordings, std::uint32_t bin_us);

/// Mean event rate (events/ms) over [t0, t1).
double mean_rate(std::span<const EventStream> recordings, std::uint32_t t0, std::uint32_t t1);

struct Spectrum {
  int length_exp = 0;
  double bin_hz = 0.0;
  std::vector<double> magnitude;  ///< bins 0..N/2; |X_k| / sqrt(N) of the unit-norm signal

  double frequency(std::size_t k) const { return k * bin_hz; }
  std::size_t bin_of(double hz) const;
  /// Two-sided energy; 1 by construction.
  double energy() const;
};

/// Randomly concatenates recordings (seeded, with replacement) into a
/// 2^length_exp microsecond signal of per-microsecond event counts, removes
/// the mean, normalises to unit l2 norm and returns the FFT magnitude.
/// Throws std::invalid_argument for an empty set, a signal with no variation,
/// or length_exp outside [16, 30].
Spectrum temporal_spectrum(std::span<const EventStream> recordings, int length_exp, std::uint64_t seed);

/// Spectrum of a single precomputed per-microsecond count vector whose length
/// is a power of two.
Spectrum spectrum_of_counts(std::vector<double> counts);

/// A peak is a bin exceeding `ratio` times the median magnitude of its
/// +/- `half_width_hz` neighbourhood. Returns the strongest such bin within
/// `tolerance_hz` of `hz`.
std::optional<std::size_t> find_peak(const Spectrum& s, double hz, double tolerance_hz, double ratio = 5.0,
                                     double half_width_hz = 2.0);

/// One raster per window: black background, red for ON, blue for OFF; the
/// latest event at a pixel decides its colour.
std::vector<RgbRaster> render_frames(const EventStream& s, std::uint32_t window_us = 10000);

}  // namespace saccadic
