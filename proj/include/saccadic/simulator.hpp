#pragma once

#include <cstdint>
#include <string_view>

#include "saccadic/event.hpp"
#include "saccadic/image.hpp"
#include "saccadic/saccade.hpp"

namespace saccadic {

/// Sensor imperfections layered on the ideal change detector.
struct NoiseConfig {
  double background_rate_hz = 0.5;  ///< per-pixel Poisson rate of spurious events
  double threshold_sigma = 0.03;    ///< per-pixel multiplicative threshold mismatch
  double latency_jitter_us = 100.0; ///< Gaussian timestamp jitter
  std::uint64_t seed = 0;

  static NoiseConfig off() { return {0.0, 0.0, 0.0, 0}; }
  void validate() const;
};

struct SimulationConfig {
  double threshold = 0.95;  ///< log-intensity contrast per event
  std::uint32_t step_us = 100;
  WarpMode warp = WarpMode::Exact;
  NoiseConfig noise;

  void validate() const;
};

/// Thrown when the source image does not fit the sensor frame.
class SizeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Renders the event stream a rotating change-detecting sensor produces while
/// viewing `img` over `schedule`.
///
/// Each pixel keeps a reference log intensity, initialised at t = 0. At every
/// step the pixel's log intensity is resampled under the current pose; every
/// whole threshold between the reference and the new value emits one event,
/// timestamped by linear interpolation within the step, and moves the
/// reference by one threshold. Pixels whose sample leaves the source image are
/// silent and re-initialise when they come back. Log intensities are
/// ln(I + log_epsilon) computed per source pixel and interpolated bilinearly.
/// Noise events are added afterwards and the result is sorted by time.
EventStream simulate(const IntensityImage& img, const SaccadeSchedule& schedule, const SensorModel& sensor,
                     const SimulationConfig& config);

/// Mixes a global seed with a recording identifier (e.g. its relative path) so
/// per-recording noise is independent of scheduling order.
std::uint64_t derive_seed(std::uint64_t global_seed, std::string_view key);

}  // namespace saccadic
