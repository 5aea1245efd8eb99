#include <doctest.h>

#include <algorithm>
#include <random>

#include "saccadic/simulator.hpp"

using namespace saccadic;

namespace {

SimulationConfig quiet(double threshold = 0.95) {
  SimulationConfig c;
  c.threshold = threshold;
  c.noise = NoiseConfig::off();
  return c;
}

IntensityImage random_blobs(std::uint64_t seed, bool binary = false) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> px(28 * 28, 0.0);
  for (int k = 0; k < 6; ++k) {
    const double cx = 4 + 20 * u(rng), cy = 4 + 20 * u(rng), r = 1.5 + 3 * u(rng);
    const double v = binary ? 1.0 : u(rng);
    for (int y = 0; y < 28; ++y)
      for (int x = 0; x < 28; ++x)
        if ((x - cx) * (x - cx) + (y - cy) * (y - cy) < r * r) px[static_cast<std::size_t>(y * 28 + x)] = v;
  }
  return IntensityImage(28, 28, px);
}

IntensityImage stripes(bool horizontal) {
  std::vector<double> px(28 * 28);
  for (int y = 0; y < 28; ++y)
    for (int x = 0; x < 28; ++x) px[static_cast<std::size_t>(y * 28 + x)] = ((horizontal ? y : x) / 3) % 2 ? 1.0 : 0.0;
  return IntensityImage(28, 28, px);
}

std::size_t count_between(const EventStream& s, std::uint32_t t0, std::uint32_t t1) {
  return static_cast<std::size_t>(
      std::count_if(s.begin(), s.end(), [&](const Event& e) { return e.timestamp >= t0 && e.timestamp < t1; }));
}

std::vector<int> per_pixel(const EventStream& s, bool on) {
  std::vector<int> c(static_cast<std::size_t>(s.width() * s.height()), 0);
  for (const Event& e : s)
    if (e.on() == on) ++c[static_cast<std::size_t>(e.y * s.width() + e.x)];
  return c;
}

}  // namespace

TEST_CASE("uniform image produces no events") {
  const EventStream s = simulate(IntensityImage(28, 28, 0.6), SaccadeSchedule::standard(), SensorModel{}, quiet());
  CHECK(s.empty());
  CHECK(s.duration() == 300000);
  CHECK(s.width() == 34);
}

TEST_CASE("oversized image is a size error") {
  CHECK_THROWS_AS(simulate(IntensityImage(40, 20, 0.5), SaccadeSchedule::standard(), SensorModel{}, quiet()),
                  SizeError);
}

TEST_CASE("dwell intervals are silent without noise") {
  const EventStream s = simulate(random_blobs(1), SaccadeSchedule::standard(), SensorModel{}, quiet());
  REQUIRE(s.size() > 100);
  const std::uint32_t spill = quiet().step_us;
  for (std::uint32_t onset : {0u, 100000u, 200000u}) CHECK(count_between(s, onset + 50000 + spill, onset + 100000) == 0);
}

TEST_CASE("horizontal stripes barely respond to the horizontal saccade") {
  const SaccadeSchedule sched = SaccadeSchedule::standard();
  const EventStream h = simulate(stripes(true), sched, SensorModel{}, quiet());
  const EventStream v = simulate(stripes(false), sched, SensorModel{}, quiet());
  const std::size_t h1 = count_between(h, 0, 100000), h3 = count_between(h, 200000, 300000);
  const std::size_t v3 = count_between(v, 200000, 300000);
  REQUIRE(h1 > 0);
  CHECK(static_cast<double>(h3) <= 0.01 * static_cast<double>(h1));
  CHECK(static_cast<double>(v3) >= 5.0 * static_cast<double>(h3));
}

TEST_CASE("determinism with noise") {
  SimulationConfig c;
  c.noise.seed = 77;
  const IntensityImage img = random_blobs(2);
  const EventStream a = simulate(img, SaccadeSchedule::standard(), SensorModel{}, c);
  const EventStream b = simulate(img, SaccadeSchedule::standard(), SensorModel{}, c);
  CHECK(a == b);
  c.noise.seed = 78;
  CHECK_FALSE(simulate(img, SaccadeSchedule::standard(), SensorModel{}, c) == a);
  CHECK(derive_seed(1, "a/b.png") == derive_seed(1, "a/b.png"));
  CHECK(derive_seed(1, "a/b.png") != derive_seed(1, "a/c.png"));
  CHECK(derive_seed(1, "a/b.png") != derive_seed(2, "a/b.png"));
}

TEST_CASE("noise adds background events within the recording") {
  SimulationConfig c;
  c.noise = NoiseConfig::off();
  c.noise.background_rate_hz = 50.0;
  c.noise.seed = 3;
  const EventStream s = simulate(IntensityImage(28, 28, 0.5), SaccadeSchedule::standard(), SensorModel{}, c);
  // 34 * 34 pixels * 50 Hz * 0.3 s = 17340 expected.
  CHECK(static_cast<double>(s.size()) == doctest::Approx(17340.0).epsilon(0.05));
  CHECK(s.events().back().timestamp < s.duration());
}

// Exact only for two-level images: the log response maps I -> 1 - I to a
// mirror image of the log field only when every pixel is 0 or 1.
TEST_CASE("contrast negation swaps polarities") {
  for (std::uint64_t seed : {5u, 6u, 7u}) {
    const IntensityImage img = random_blobs(seed, true);
    std::vector<double> neg = img.pixels();
    for (double& v : neg) v = 1.0 - v;
    const EventStream a = simulate(img, SaccadeSchedule::standard(), SensorModel{}, quiet());
    const EventStream b = simulate(IntensityImage(28, 28, neg), SaccadeSchedule::standard(), SensorModel{}, quiet());
    CHECK(per_pixel(a, true) == per_pixel(b, false));
    CHECK(per_pixel(a, false) == per_pixel(b, true));
  }
}

TEST_CASE("closed trajectory balances polarities on pixels that stay in frame") {
  const SaccadeSchedule sched = SaccadeSchedule::standard();
  const SensorModel m;
  const IntensityImage img = random_blobs(8);
  std::vector<std::uint8_t> always(34 * 34, 1);
  for (std::uint32_t t = 0; t <= sched.duration_us(); t += 100) {
    const WarpedFrame w = warp_image(img, saccade_pose_closed(sched, t), m);
    for (std::size_t i = 0; i < always.size(); ++i) always[i] &= w.in_frame[i];
  }
  const EventStream s = simulate(img, sched, m, quiet());
  const auto on = per_pixel(s, true), off = per_pixel(s, false);
  std::size_t checked = 0;
  for (std::size_t i = 0; i < always.size(); ++i) {
    if (!always[i]) continue;
    ++checked;
    REQUIRE(std::abs(on[i] - off[i]) <= 1);
  }
  CHECK(checked >= 400);
}

TEST_CASE("event count per pixel does not grow with the threshold") {
  const IntensityImage img = random_blobs(9);
  std::vector<int> prev;
  for (double theta : {0.3, 0.5, 0.95, 1.5}) {
    const EventStream s = simulate(img, SaccadeSchedule::standard(), SensorModel{}, quiet(theta));
    std::vector<int> total = per_pixel(s, true);
    const auto off = per_pixel(s, false);
    for (std::size_t i = 0; i < total.size(); ++i) total[i] += off[i];
    if (!prev.empty())
      for (std::size_t i = 0; i < total.size(); ++i) REQUIRE(total[i] <= prev[i]);
    prev = total;
  }
}

TEST_CASE("configuration validation") {
  SimulationConfig c = quiet();
  c.threshold = 0.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = quiet();
  c.step_us = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  NoiseConfig n;
  n.latency_jitter_us = -1.0;
  CHECK_THROWS_AS(n.validate(), std::invalid_argument);
}
