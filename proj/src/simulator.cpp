#include "saccadic/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace saccadic {

namespace {

struct PendingEvent {
  std::int64_t t;
  std::uint16_t x;
  std::uint16_t y;
  Polarity p;
};

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace

void NoiseConfig::validate() const {
  if (!(background_rate_hz >= 0.0) || !(threshold_sigma >= 0.0) || !(latency_jitter_us >= 0.0))
    throw std::invalid_argument("noise rates and deviations must be non-negative");
}

void SimulationConfig::validate() const {
  if (!(threshold > 0.0)) throw std::invalid_argument("contrast threshold must be positive");
  if (step_us < 1) throw std::invalid_argument("integration step must be at least 1 us");
  noise.validate();
}

std::uint64_t derive_seed(std::uint64_t global_seed, std::string_view key) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : key) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return splitmix64(global_seed ^ splitmix64(h));
}

EventStream simulate(const IntensityImage& img, const SaccadeSchedule& schedule, const SensorModel& sensor,
                     const SimulationConfig& config) {
  config.validate();
  sensor.validate();
  if (img.empty()) throw SizeError("cannot simulate an empty image");
  if (img.width() > sensor.width || img.height() > sensor.height)
    throw SizeError("image " + std::to_string(img.width()) + "x" + std::to_string(img.height()) +
                    " exceeds sensor " + std::to_string(sensor.width) + "x" + std::to_string(sensor.height));
  if (sensor.width > 256 || sensor.height > 256) throw SizeError("sensor frame exceeds 8-bit addressing");

  const std::uint32_t duration = schedule.duration_us();
  if (duration > kMaxTimestamp + 1u) throw std::invalid_argument("schedule exceeds the 23-bit timestamp range");

  const int w = sensor.width, h = sensor.height;
  const std::size_t n = static_cast<std::size_t>(w) * h;
  std::mt19937_64 rng(config.noise.seed);

  std::vector<double> log_src(img.pixels().size());
  std::transform(img.pixels().begin(), img.pixels().end(), log_src.begin(),
                 [eps = sensor.log_epsilon](double v) { return std::log(v + eps); });

  std::vector<double> thresh(n, config.threshold);
  if (config.noise.threshold_sigma > 0.0) {
    std::normal_distribution<double> mismatch(0.0, config.noise.threshold_sigma);
    for (double& t : thresh) t = config.threshold * std::max(0.05, 1.0 + mismatch(rng));
  }

  const Vec2 origin = image_origin(img, sensor);
  // Each pixel's reference is base + k * threshold. Keeping k as an integer
  // avoids drift from repeated additions, and the tolerance lets a return to
  // the exact starting level fire regardless of rounding.
  constexpr double kTieTolerance = 1e-9;
  std::vector<double> level(n, 0.0), base(n, 0.0);
  std::vector<int> step(n, 0);
  std::vector<std::uint8_t> valid(n, 0);

  auto sample_all = [&](const Pose& pose, std::vector<double>& out, std::vector<std::uint8_t>& ok) {
    const RotationWarp warp(pose, sensor, config.warp);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const std::size_t i = static_cast<std::size_t>(y) * w + x;
        const Vec2 s = warp.sensor_to_scene({static_cast<double>(x), static_cast<double>(y)});
        ok[i] = sample_bilinear(log_src, img.width(), img.height(), s.x - origin.x, s.y - origin.y, out[i]);
      }
  };

  Pose prev_pose = saccade_pose_closed(schedule, 0.0);
  sample_all(prev_pose, level, valid);
  base = level;

  std::vector<PendingEvent> pending;
  std::vector<double> now(n, 0.0);
  std::vector<std::uint8_t> now_ok(n, 0);
  const std::uint32_t steps = (duration + config.step_us - 1) / config.step_us;
  for (std::uint32_t k = 1; k <= steps; ++k) {
    const double t0 = static_cast<double>(k - 1) * config.step_us;
    const double t1 = std::min<double>(static_cast<double>(k) * config.step_us, duration);
    const Pose pose = saccade_pose_closed(schedule, t1);
    if (pose.pan_deg == prev_pose.pan_deg && pose.tilt_deg == prev_pose.tilt_deg) continue;
    prev_pose = pose;
    sample_all(pose, now, now_ok);
    const double span = t1 - t0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!now_ok[i]) {
        valid[i] = 0;
        continue;
      }
      if (!valid[i]) {
        valid[i] = 1;
        level[i] = base[i] = now[i];
        step[i] = 0;
        continue;
      }
      const double from = level[i], to = now[i], th = thresh[i];
      const double rel = to - base[i];
      const auto emit = [&](Polarity p) {
        const double crossed = base[i] + step[i] * th;
        const double frac = std::clamp((crossed - from) / (to - from), 0.0, 1.0);
        pending.push_back({static_cast<std::int64_t>(std::floor(t0 + frac * span)),
                           static_cast<std::uint16_t>(i % w), static_cast<std::uint16_t>(i / w), p});
      };
      while (rel >= (step[i] + 1) * th - kTieTolerance) {
        ++step[i];
        emit(Polarity::On);
      }
      while (rel <= (step[i] - 1) * th + kTieTolerance) {
        --step[i];
        emit(Polarity::Off);
      }
      level[i] = to;
    }
  }

  if (config.noise.latency_jitter_us > 0.0) {
    std::normal_distribution<double> jitter(0.0, config.noise.latency_jitter_us);
    for (auto& e : pending) e.t += static_cast<std::int64_t>(std::llround(jitter(rng)));
  }
  if (config.noise.background_rate_hz > 0.0) {
    std::poisson_distribution<int> count(config.noise.background_rate_hz * duration * 1e-6);
    std::uniform_int_distribution<std::int64_t> when(0, static_cast<std::int64_t>(duration) - 1);
    std::bernoulli_distribution on(0.5);
    for (std::size_t i = 0; i < n; ++i) {
      const int c = count(rng);
      for (int j = 0; j < c; ++j) {
        const std::int64_t t = when(rng);
        pending.push_back({t, static_cast<std::uint16_t>(i % w), static_cast<std::uint16_t>(i / w),
                           on(rng) ? Polarity::On : Polarity::Off});
      }
    }
  }

  const std::int64_t last = static_cast<std::int64_t>(duration) - 1;
  for (auto& e : pending) e.t = std::clamp<std::int64_t>(e.t, 0, last);
  std::stable_sort(pending.begin(), pending.end(),
                   [](const PendingEvent& a, const PendingEvent& b) { return a.t < b.t; });
  std::vector<Event> events;
  events.reserve(pending.size());
  for (const auto& e : pending)
    events.emplace_back(static_cast<std::uint8_t>(e.x), static_cast<std::uint8_t>(e.y), e.p,
                        static_cast<std::uint32_t>(e.t));
  return EventStream(std::move(events), w, h, duration);
}

}  // namespace saccadic
