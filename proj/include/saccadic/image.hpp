#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace saccadic {

/// Row-major grayscale field with values in [0, 1].
class IntensityImage {
 public:
  IntensityImage() = default;
  IntensityImage(int width, int height, double fill = 0.0);
  IntensityImage(int width, int height, std::vector<double> pixels);

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return width_ == 0 || height_ == 0; }

  double at(int x, int y) const { return pixels_[static_cast<std::size_t>(y) * width_ + x]; }
  void set(int x, int y, double v);
  const std::vector<double>& pixels() const { return pixels_; }

  /// (I_x, I_y) by central differences, one-sided on the border.
  std::array<double, 2> gradient(int x, int y) const;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> pixels_;
};

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

struct RgbRaster {
  int width = 0;
  int height = 0;
  std::vector<Rgb> pixels;

  RgbRaster() = default;
  RgbRaster(int w, int h) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h) {}
  Rgb& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
  const Rgb& at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
};

/// Reads PNG, PGM (P2/P5) or PPM (P3/P6). Colour is reduced to luminance
/// 0.299 R + 0.587 G + 0.114 B. Throws std::runtime_error on unreadable input.
IntensityImage load_image(const std::filesystem::path& path);

/// Reads only the raster dimensions.
std::array<int, 2> probe_image_size(const std::filesystem::path& path);

void write_pgm(const std::filesystem::path& path, const IntensityImage& img);
void write_ppm(const std::filesystem::path& path, const RgbRaster& raster);

/// Area-averaging resample to an exact size.
IntensityImage resize_area(const IntensityImage& img, int width, int height);

}  // namespace saccadic
