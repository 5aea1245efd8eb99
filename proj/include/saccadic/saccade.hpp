#pragma once

#include <cstdint>
#include <vector>

#include "saccadic/image.hpp"

namespace saccadic {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

/// One micro-saccade: constant-speed move from start to end beginning at onset,
/// then dwell at end until the next onset. Angles are (pan, tilt) in degrees.
struct SaccadeSegment {
  double onset_ms = 0.0;
  Vec2 start_deg;
  Vec2 end_deg;
  Vec2 speed_deg_per_s;

  /// Motion time in ms; zero for a stationary segment.
  double motion_ms() const;
};

class SaccadeSchedule {
 public:
  SaccadeSchedule(std::vector<SaccadeSegment> segments, double period_ms);

  /// The three-saccade isosceles triangle with 100 ms onset spacing, time origin
  /// at the first saccade onset.
  static SaccadeSchedule standard();

  const std::vector<SaccadeSegment>& segments() const { return segments_; }
  double period_ms() const { return period_ms_; }
  /// Recording length: last onset plus one period.
  std::uint32_t duration_us() const;
  /// Largest pan and tilt excursion over the trajectory, in degrees.
  Vec2 excursion_deg() const;

 private:
  std::vector<SaccadeSegment> segments_;
  double period_ms_;
};

/// Sensor orientation and its rate of change at one instant.
struct Pose {
  double pan_deg = 0.0;
  double tilt_deg = 0.0;
  double pan_rate_deg_s = 0.0;
  double tilt_rate_deg_s = 0.0;

  bool moving() const { return pan_rate_deg_s != 0.0 || tilt_rate_deg_s != 0.0; }
};

/// Trajectory position at t_us. Throws std::out_of_range outside [0, duration).
Pose saccade_pose(const SaccadeSchedule& schedule, double t_us);

/// Same as saccade_pose but also accepts t == duration (the closing pose).
Pose saccade_pose_closed(const SaccadeSchedule& schedule, double t_us);

struct SensorModel {
  int width = 34;
  int height = 34;
  double pixels_per_degree = 6.0;
  Vec2 principal_point{16.5, 16.5};
  double log_epsilon = 0.01;

  /// Focal length in pixels per radian.
  double focal_px() const;
  void validate() const;

  /// Frame of the given size with the principal point at its centre.
  static SensorModel centred(int width, int height, double pixels_per_degree = 6.0);
};

/// Rigid sensor motion. Rates in deg/s; translation must stay zero.
struct SensorMotion {
  double omega_x = 0.0;
  double omega_y = 0.0;
  double omega_z = 0.0;
  double t_x = 0.0;
  double t_y = 0.0;
  double t_z = 0.0;
};

/// Body-frame angular velocity of the sensor at `pose`. Pan rotates about the
/// sensor y axis, tilt about x; the composition R = R_y(pan) R_x(tilt) adds a
/// small roll term away from the origin.
SensorMotion body_rates(const Pose& pose);

/// Image-plane velocity (px/s) of the static scene point seen at `pixel` under
/// pure rotation. Throws std::invalid_argument for non-zero translation.
Vec2 image_velocity(const SensorMotion& motion, Vec2 pixel, const SensorModel& sensor);

/// Brightness change rate -(I_x V_x + I_y V_y) at an image pixel.
double brightness_derivative(const IntensityImage& img, int x, int y, Vec2 velocity);

enum class WarpMode { Exact, Translation };

/// Maps sensor pixels to the scene plane (expressed in zero-pose sensor
/// coordinates) and back, for one pose.
class RotationWarp {
 public:
  RotationWarp(const Pose& pose, const SensorModel& sensor, WarpMode mode = WarpMode::Exact);

  Vec2 sensor_to_scene(Vec2 pixel) const;
  Vec2 scene_to_sensor(Vec2 scene) const;

 private:
  double r_[3][3];
  double f_;
  Vec2 c_;
  Vec2 shift_;
  WarpMode mode_;
};

/// Where a source image sits in zero-pose sensor coordinates: centred on the
/// principal point.
Vec2 image_origin(const IntensityImage& img, const SensorModel& sensor);

/// A sensor-sized view of the image. `in_frame` is 0 where the sample falls
/// outside the source.
struct WarpedFrame {
  int width = 0;
  int height = 0;
  std::vector<double> values;
  std::vector<std::uint8_t> in_frame;
};

/// Bilinear sample of a row-major field; returns false outside [0,w-1]x[0,h-1].
bool sample_bilinear(const std::vector<double>& field, int width, int height, double x, double y,
                     double& out);

WarpedFrame warp_image(const IntensityImage& img, const Pose& pose, const SensorModel& sensor,
                       WarpMode mode = WarpMode::Exact);

}  // namespace saccadic
