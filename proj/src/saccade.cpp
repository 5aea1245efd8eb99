#include "saccadic/saccade.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace saccadic {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

// Per-axis move time in ms; -1 marks a stationary axis.
double axis_motion_ms(double from, double to, double speed) {
  const double dist = std::abs(to - from);
  if (speed <= 0.0) {
    if (dist > 1e-12) throw std::invalid_argument("saccade axis moves with zero speed");
    return -1.0;
  }
  return dist / speed * 1000.0;
}

double axis_position(double from, double to, double speed, double elapsed_ms, double& rate) {
  const double dist = to - from;
  if (speed <= 0.0 || dist == 0.0) {
    rate = 0.0;
    return from;
  }
  const double sign = dist > 0.0 ? 1.0 : -1.0;
  rate = sign * speed;
  return from + rate * elapsed_ms / 1000.0;
}

}  // namespace

double SaccadeSegment::motion_ms() const {
  const double mx = axis_motion_ms(start_deg.x, end_deg.x, speed_deg_per_s.x);
  const double my = axis_motion_ms(start_deg.y, end_deg.y, speed_deg_per_s.y);
  return std::max({mx, my, 0.0});
}

SaccadeSchedule::SaccadeSchedule(std::vector<SaccadeSegment> segments, double period_ms)
    : segments_(std::move(segments)), period_ms_(period_ms) {
  if (segments_.empty()) throw std::invalid_argument("saccade schedule needs at least one segment");
  if (!(period_ms_ > 0.0)) throw std::invalid_argument("saccade period must be positive");
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    const SaccadeSegment& s = segments_[i];
    const double mx = axis_motion_ms(s.start_deg.x, s.end_deg.x, s.speed_deg_per_s.x);
    const double my = axis_motion_ms(s.start_deg.y, s.end_deg.y, s.speed_deg_per_s.y);
    if (mx >= 0.0 && my >= 0.0 && std::abs(mx - my) > 1e-9)
      throw std::invalid_argument("saccade axes finish at different times");
    if (s.motion_ms() > period_ms_ + 1e-9) throw std::invalid_argument("saccade outlasts its period");
    if (i > 0) {
      if (std::abs(s.onset_ms - segments_[i - 1].onset_ms - period_ms_) > 1e-9)
        throw std::invalid_argument("saccade onsets must be one period apart");
      if (!(s.start_deg == segments_[i - 1].end_deg))
        throw std::invalid_argument("saccade starts away from the previous end");
    }
  }
  if (!(segments_.back().end_deg == segments_.front().start_deg))
    throw std::invalid_argument("saccade trajectory is not closed");
  if (segments_.front().onset_ms < 0.0) throw std::invalid_argument("negative saccade onset");
}

SaccadeSchedule SaccadeSchedule::standard() {
  return SaccadeSchedule({{0.0, {-0.5, 0.5}, {0.0, -0.5}, {10.0, 20.0}},
                          {100.0, {0.0, -0.5}, {0.5, 0.5}, {10.0, 20.0}},
                          {200.0, {0.5, 0.5}, {-0.5, 0.5}, {20.0, 0.0}}},
                         100.0);
}

std::uint32_t SaccadeSchedule::duration_us() const {
  return static_cast<std::uint32_t>(std::llround((segments_.back().onset_ms + period_ms_) * 1000.0));
}

Vec2 SaccadeSchedule::excursion_deg() const {
  double lo_x = segments_.front().start_deg.x, hi_x = lo_x;
  double lo_y = segments_.front().start_deg.y, hi_y = lo_y;
  for (const auto& s : segments_) {
    for (const Vec2& p : {s.start_deg, s.end_deg}) {
      lo_x = std::min(lo_x, p.x);
      hi_x = std::max(hi_x, p.x);
      lo_y = std::min(lo_y, p.y);
      hi_y = std::max(hi_y, p.y);
    }
  }
  return {hi_x - lo_x, hi_y - lo_y};
}

Pose saccade_pose_closed(const SaccadeSchedule& schedule, double t_us) {
  if (!(t_us >= 0.0) || t_us > schedule.duration_us())
    throw std::out_of_range("time outside the recording");
  const auto& segs = schedule.segments();
  const double t_ms = t_us / 1000.0;
  if (t_ms < segs.front().onset_ms)
    return {segs.front().start_deg.x, segs.front().start_deg.y, 0.0, 0.0};
  std::size_t i = segs.size() - 1;
  for (std::size_t k = 1; k < segs.size(); ++k) {
    if (t_ms < segs[k].onset_ms) {
      i = k - 1;
      break;
    }
  }
  const SaccadeSegment& s = segs[i];
  const double elapsed = t_ms - s.onset_ms;
  if (elapsed >= s.motion_ms()) return {s.end_deg.x, s.end_deg.y, 0.0, 0.0};
  Pose p;
  p.pan_deg = axis_position(s.start_deg.x, s.end_deg.x, s.speed_deg_per_s.x, elapsed, p.pan_rate_deg_s);
  p.tilt_deg = axis_position(s.start_deg.y, s.end_deg.y, s.speed_deg_per_s.y, elapsed, p.tilt_rate_deg_s);
  return p;
}

Pose saccade_pose(const SaccadeSchedule& schedule, double t_us) {
  if (t_us >= schedule.duration_us()) throw std::out_of_range("time outside the recording");
  return saccade_pose_closed(schedule, t_us);
}

double SensorModel::focal_px() const { return pixels_per_degree / kDegToRad; }

void SensorModel::validate() const {
  if (width <= 0 || height <= 0) throw std::invalid_argument("sensor frame must be non-empty");
  if (!(pixels_per_degree > 0.0)) throw std::invalid_argument("pixels_per_degree must be positive");
  if (principal_point.x < 0.0 || principal_point.y < 0.0 || principal_point.x > width - 1.0 ||
      principal_point.y > height - 1.0)
    throw std::invalid_argument("principal point outside the frame");
  if (!(log_epsilon > 0.0)) throw std::invalid_argument("log_epsilon must be positive");
}

SensorModel SensorModel::centred(int width, int height, double pixels_per_degree) {
  SensorModel m;
  m.width = width;
  m.height = height;
  m.pixels_per_degree = pixels_per_degree;
  m.principal_point = {(width - 1) / 2.0, (height - 1) / 2.0};
  return m;
}

SensorMotion body_rates(const Pose& pose) {
  const double tilt = pose.tilt_deg * kDegToRad;
  SensorMotion m;
  m.omega_x = pose.tilt_rate_deg_s;
  m.omega_y = pose.pan_rate_deg_s * std::cos(tilt);
  m.omega_z = -pose.pan_rate_deg_s * std::sin(tilt);
  return m;
}

Vec2 image_velocity(const SensorMotion& motion, Vec2 pixel, const SensorModel& sensor) {
  if (motion.t_x != 0.0 || motion.t_y != 0.0 || motion.t_z != 0.0)
    throw std::invalid_argument("image_velocity models pure rotation only");
  const double f = sensor.focal_px();
  const double x = (pixel.x - sensor.principal_point.x) / f;
  const double y = (pixel.y - sensor.principal_point.y) / f;
  const double wx = motion.omega_x * kDegToRad;
  const double wy = motion.omega_y * kDegToRad;
  const double wz = motion.omega_z * kDegToRad;
  const double vx = -wy + wz * y + wx * x * y - wy * x * x;
  const double vy = wx - wz * x - wy * x * y + wx * y * y;
  return {vx * f, vy * f};
}

double brightness_derivative(const IntensityImage& img, int x, int y, Vec2 velocity) {
  if (x < 0 || y < 0 || x >= img.width() || y >= img.height())
    throw std::out_of_range("pixel outside the image");
  const auto [ix, iy] = img.gradient(x, y);
  return -ix * velocity.x - iy * velocity.y;
}

RotationWarp::RotationWarp(const Pose& pose, const SensorModel& sensor, WarpMode mode)
    : f_(sensor.focal_px()), c_(sensor.principal_point), mode_(mode) {
  const double a = pose.pan_deg * kDegToRad;
  const double b = pose.tilt_deg * kDegToRad;
  const double ca = std::cos(a), sa = std::sin(a), cb = std::cos(b), sb = std::sin(b);
  const double r[3][3] = {{ca, sa * sb, sa * cb}, {0.0, cb, -sb}, {-sa, ca * sb, ca * cb}};
  std::copy(&r[0][0], &r[0][0] + 9, &r_[0][0]);
  shift_ = {pose.pan_deg * sensor.pixels_per_degree, -pose.tilt_deg * sensor.pixels_per_degree};
}

Vec2 RotationWarp::sensor_to_scene(Vec2 p) const {
  if (mode_ == WarpMode::Translation) return {p.x + shift_.x, p.y + shift_.y};
  const double d[3] = {(p.x - c_.x) / f_, (p.y - c_.y) / f_, 1.0};
  double w[3];
  for (int i = 0; i < 3; ++i) w[i] = r_[i][0] * d[0] + r_[i][1] * d[1] + r_[i][2] * d[2];
  return {c_.x + f_ * w[0] / w[2], c_.y + f_ * w[1] / w[2]};
}

Vec2 RotationWarp::scene_to_sensor(Vec2 q) const {
  if (mode_ == WarpMode::Translation) return {q.x - shift_.x, q.y - shift_.y};
  const double d[3] = {(q.x - c_.x) / f_, (q.y - c_.y) / f_, 1.0};
  double w[3];
  for (int i = 0; i < 3; ++i) w[i] = r_[0][i] * d[0] + r_[1][i] * d[1] + r_[2][i] * d[2];
  return {c_.x + f_ * w[0] / w[2], c_.y + f_ * w[1] / w[2]};
}

Vec2 image_origin(const IntensityImage& img, const SensorModel& sensor) {
  return {sensor.principal_point.x - (img.width() - 1) / 2.0,
          sensor.principal_point.y - (img.height() - 1) / 2.0};
}

bool sample_bilinear(const std::vector<double>& field, int width, int height, double x, double y,
                     double& out) {
  constexpr double kSlack = 1e-9;
  if (x < -kSlack || y < -kSlack || x > width - 1 + kSlack || y > height - 1 + kSlack) return false;
  x = std::clamp(x, 0.0, static_cast<double>(width - 1));
  y = std::clamp(y, 0.0, static_cast<double>(height - 1));
  const int x0 = std::min(static_cast<int>(x), width - 1);
  const int y0 = std::min(static_cast<int>(y), height - 1);
  const int x1 = std::min(x0 + 1, width - 1);
  const int y1 = std::min(y0 + 1, height - 1);
  const double fx = x - x0, fy = y - y0;
  const std::size_t w = static_cast<std::size_t>(width);
  const double top = field[y0 * w + x0] * (1.0 - fx) + field[y0 * w + x1] * fx;
  const double bottom = field[y1 * w + x0] * (1.0 - fx) + field[y1 * w + x1] * fx;
  out = top * (1.0 - fy) + bottom * fy;
  return true;
}

WarpedFrame warp_image(const IntensityImage& img, const Pose& pose, const SensorModel& sensor, WarpMode mode) {
  sensor.validate();
  const RotationWarp warp(pose, sensor, mode);
  const Vec2 origin = image_origin(img, sensor);
  WarpedFrame out;
  out.width = sensor.width;
  out.height = sensor.height;
  out.values.assign(static_cast<std::size_t>(sensor.width) * sensor.height, 0.0);
  out.in_frame.assign(out.values.size(), 0);
  for (int y = 0; y < sensor.height; ++y)
    for (int x = 0; x < sensor.width; ++x) {
      const Vec2 s = warp.sensor_to_scene({static_cast<double>(x), static_cast<double>(y)});
      const std::size_t i = static_cast<std::size_t>(y) * sensor.width + x;
      double v = 0.0;
      if (sample_bilinear(img.pixels(), img.width(), img.height(), s.x - origin.x, s.y - origin.y, v)) {
        out.values[i] = v;
        out.in_frame[i] = 1;
      }
    }
  return out;
}

}  // namespace saccadic
