#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "saccadic/analysis.hpp"

using namespace saccadic;

namespace {

EventStream two_by_two() {
  // ON at (0,0), (2,0); OFF at (0,2), (2,2).
  return EventStream({Event(0, 0, Polarity::On, 1), Event(2, 0, Polarity::On, 2), Event(0, 2, Polarity::Off, 3),
                      Event(2, 2, Polarity::Off, 4)},
                     34, 34, 300000);
}

// Textbook O(n^2) DFT used as the spectrum oracle.
std::vector<double> naive_magnitude(std::vector<double> x) {
  const std::size_t n = x.size();
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);
  double norm = 0.0;
  for (double& v : x) {
    v -= mean;
    norm += v * v;
  }
  norm = std::sqrt(norm);
  std::vector<double> out(n / 2 + 1);
  for (std::size_t k = 0; k < out.size(); ++k) {
    std::complex<double> acc;
    for (std::size_t t = 0; t < n; ++t)
      acc += x[t] / norm * std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k * t) / static_cast<double>(n));
    out[k] = std::abs(acc) / std::sqrt(static_cast<double>(n));
  }
  return out;
}

}  // namespace

TEST_CASE("features of a small recording") {
  const FeatureVector fv = compute_features(two_by_two());
  CHECK(fv.total == 4.0);
  CHECK(fv.on == 2.0);
  CHECK(fv.off == 2.0);
  CHECK(fv.on_off_ratio == 1.0);
  CHECK(fv.mean_x == 1.0);
  CHECK(fv.mean_y == 1.0);
  CHECK(fv.std_x == 1.0);
  CHECK(fv.std_y == 1.0);
  CHECK(fv.max_x == 2.0);
  CHECK(fv.max_y == 2.0);
  CHECK_FALSE(fv.ratio_sentinel);
  for (Feature f : kAllFeatures) {
    CHECK(fv.defined(f));
    CHECK(parse_feature(feature_name(f)) == f);
  }
  CHECK_FALSE(parse_feature("min_x").has_value());
}

TEST_CASE("edge cases of the statistics") {
  const FeatureVector empty = compute_features(EventStream({}, 34, 34, 100));
  CHECK(empty.total == 0.0);
  CHECK_FALSE(empty.defined(Feature::MeanX));
  CHECK(empty.defined(Feature::TotalEvents));

  const FeatureVector only_on =
      compute_features(EventStream({Event(3, 4, Polarity::On, 0), Event(3, 4, Polarity::On, 1)}, 34, 34, 10));
  CHECK(only_on.ratio_sentinel);
  CHECK(only_on.on_off_ratio == 2.0);
  CHECK(only_on.std_x == 0.0);
}

TEST_CASE("mean and sample deviation") {
  const std::vector<double> v{2, 4, 4, 4, 5, 5, 7, 9};
  const MeanStd m = mean_std(v);
  CHECK(m.mean == 5.0);
  CHECK(m.stddev == doctest::Approx(std::sqrt(32.0 / 7.0)));
  const std::vector<double> one{3.0};
  CHECK(mean_std(one).stddev == 0.0);

  const std::vector<FeatureVector> fvs{compute_features(two_by_two()), compute_features(two_by_two())};
  const auto agg = aggregate_features(fvs);
  CHECK(agg[0].mean == 4.0);
  CHECK(agg[0].stddev == 0.0);
  CHECK_THROWS_AS(aggregate_features(std::span<const FeatureVector>{}), std::invalid_argument);
}

TEST_CASE("dataset summary uses the frame extent as range") {
  const std::vector<EventStream> rs{two_by_two(), EventStream({Event(10, 10, Polarity::On, 5)}, 34, 34, 300000)};
  const DatasetSummary s = summarize_dataset(rs);
  CHECK(s.recordings == 2);
  CHECK(s.on_events.mean == 1.5);
  CHECK(s.off_events.mean == 1.0);
  CHECK(s.x_range.mean == 34.0);
  CHECK(s.x_range.stddev == 0.0);
  CHECK(s.x_mean.mean == doctest::Approx(5.5));
}

TEST_CASE("rate profile") {
  std::vector<Event> ev;
  for (std::uint32_t t = 0; t < 10000; t += 100) ev.emplace_back(1, 1, Polarity::On, t);
  const std::vector<EventStream> rs{EventStream(ev, 34, 34, 20000), EventStream({}, 34, 34, 20000)};
  const RateProfile p = rate_profile(rs, 5000);
  REQUIRE(p.bins() == 4);
  CHECK(p.mean[0] == doctest::Approx(5.0));  // 50 events in 5 ms, averaged with an empty recording
  CHECK(p.stddev[0] == doctest::Approx(std::sqrt(50.0)));
  CHECK(p.mean[3] == 0.0);
  CHECK(mean_rate(rs, 0, 10000) == doctest::Approx(5.0));

  const std::vector<EventStream> mixed{EventStream({}, 34, 34, 100), EventStream({}, 34, 34, 200)};
  CHECK_THROWS_AS(rate_profile(mixed, 10), std::invalid_argument);
  CHECK_THROWS_AS(rate_profile(rs, 0), std::invalid_argument);
}

TEST_CASE("spectrum matches a direct DFT") {
  std::mt19937_64 rng(1);
  std::poisson_distribution<int> p(0.3);
  std::vector<double> x(64);
  for (double& v : x) v = p(rng);
  const Spectrum s = spectrum_of_counts(x);
  const auto ref = naive_magnitude(x);
  REQUIRE(s.magnitude.size() == ref.size());
  for (std::size_t k = 0; k < ref.size(); ++k) CHECK(s.magnitude[k] == doctest::Approx(ref[k]).epsilon(1e-9));
  CHECK(s.bin_hz == doctest::Approx(1e6 / 64));
}

TEST_CASE("spectrum energy is one for any non-constant signal") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 5; ++trial) {
    std::exponential_distribution<double> e(1.0 + trial);
    std::vector<double> x(std::size_t{1} << (10 + trial));
    for (double& v : x) v = e(rng);
    CHECK(spectrum_of_counts(x).energy() == doctest::Approx(1.0).epsilon(1e-9));
  }
  CHECK_THROWS_AS(spectrum_of_counts(std::vector<double>(128, 2.0)), std::invalid_argument);
  CHECK_THROWS_AS(spectrum_of_counts(std::vector<double>(100, 0.0)), std::invalid_argument);
}

TEST_CASE("a 1 kHz impulse train peaks at 1 kHz") {
  std::vector<double> x(std::size_t{1} << 16, 0.0);
  for (std::size_t t = 0; t < x.size(); t += 1000) x[t] = 1.0;
  const Spectrum s = spectrum_of_counts(x);
  // Bins are ~15 Hz wide here, so the neighbourhood must span several of them.
  const auto peak = find_peak(s, 1000.0, 20.0, 5.0, 100.0);
  REQUIRE(peak.has_value());
  CHECK(std::abs(s.frequency(*peak) - 1000.0) <= s.bin_hz);
  CHECK(find_peak(s, 700.0, 20.0, 5.0, 100.0) == std::nullopt);
}

TEST_CASE("temporal spectrum of periodic recordings") {
  // Bursts every 100 ms in a 300 ms recording. Unequal bursts put energy at the
  // 300 ms period too; identical ones would not.
  std::vector<Event> ev;
  for (std::uint32_t onset : {0u, 100000u, 200000u})
    for (std::uint32_t t = onset; t < onset + 20000; t += 50 + onset / 2000) ev.emplace_back(1, 1, Polarity::On, t);
  const std::vector<EventStream> rs{EventStream(ev, 34, 34, 300000)};
  // 2^22 us gives ~0.24 Hz bins, fine enough to resolve 3.33 Hz within 0.2 Hz.
  const Spectrum s = temporal_spectrum(rs, 22, 3);
  CHECK(s.length_exp == 22);
  CHECK(find_peak(s, 10.0, 0.2).has_value());
  CHECK(find_peak(s, 3.33, 0.2).has_value());
  CHECK_FALSE(find_peak(s, 75.0, 0.2).has_value());
  CHECK_THROWS_AS(temporal_spectrum(rs, 12, 3), std::invalid_argument);
  CHECK_THROWS_AS(temporal_spectrum(std::span<const EventStream>{}, 20, 3), std::invalid_argument);
}

TEST_CASE("render frames") {
  const EventStream s({Event(1, 1, Polarity::On, 0), Event(1, 1, Polarity::Off, 5), Event(2, 2, Polarity::On, 15000)},
                      34, 34, 300000);
  const auto frames = render_frames(s);
  REQUIRE(frames.size() == 30);
  CHECK(frames[0].at(1, 1) == Rgb{0, 0, 255});
  CHECK(frames[1].at(2, 2) == Rgb{255, 0, 0});
  CHECK(frames[1].at(1, 1) == Rgb{0, 0, 0});
  CHECK(render_frames(s, 7000).size() == 43);
  CHECK_THROWS(render_frames(s, 0));
}
