#include "saccadic/image.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <stdexcept>
#include <string>

namespace saccadic {

IntensityImage::IntensityImage(int width, int height, double fill)
    : IntensityImage(width, height, std::vector<double>(static_cast<std::size_t>(std::max(width, 0)) *
                                                            std::max(height, 0), fill)) {}

IntensityImage::IntensityImage(int width, int height, std::vector<double> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
  if (width < 0 || height < 0) throw std::invalid_argument("negative image dimension");
  if (pixels_.size() != static_cast<std::size_t>(width) * height)
    throw std::invalid_argument("pixel count does not match image dimensions");
  for (double v : pixels_)
    if (!std::isfinite(v) || v < 0.0 || v > 1.0)
      throw std::invalid_argument("intensity values must be finite and in [0,1]");
}

void IntensityImage::set(int x, int y, double v) {
  if (!std::isfinite(v) || v < 0.0 || v > 1.0)
    throw std::invalid_argument("intensity values must be finite and in [0,1]");
  pixels_[static_cast<std::size_t>(y) * width_ + x] = v;
}

std::array<double, 2> IntensityImage::gradient(int x, int y) const {
  auto diff = [](double lo, double hi, int span) { return (hi - lo) / span; };
  double gx = 0.0, gy = 0.0;
  if (width_ > 1) {
    const int x0 = std::max(x - 1, 0), x1 = std::min(x + 1, width_ - 1);
    gx = diff(at(x0, y), at(x1, y), x1 - x0);
  }
  if (height_ > 1) {
    const int y0 = std::max(y - 1, 0), y1 = std::min(y + 1, height_ - 1);
    gy = diff(at(x, y0), at(x, y1), y1 - y0);
  }
  return {gx, gy};
}

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};

std::string lower_ext(const std::filesystem::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext;
}

double luminance(double r, double g, double b) { return 0.299 * r + 0.587 * g + 0.114 * b; }

// Netpbm header token reader that skips comments.
class PnmReader {
 public:
  explicit PnmReader(std::istream& in) : in_(in) {}

  std::string token() {
    std::string tok;
    int c;
    while ((c = in_.get()) != EOF) {
      if (c == '#') {
        while ((c = in_.get()) != EOF && c != '\n') {
        }
        continue;
      }
      if (std::isspace(c)) {
        if (!tok.empty()) break;
        continue;
      }
      tok.push_back(static_cast<char>(c));
    }
    return tok;
  }

  int integer() {
    const std::string tok = token();
    if (tok.empty()) throw std::runtime_error("truncated netpbm header");
    return std::stoi(tok);
  }

 private:
  std::istream& in_;
};

struct PnmHeader {
  std::string magic;
  int width = 0, height = 0, maxval = 1;
};

PnmHeader read_pnm_header(std::istream& in, PnmReader& reader) {
  PnmHeader h;
  h.magic = reader.token();
  if (h.magic != "P2" && h.magic != "P3" && h.magic != "P5" && h.magic != "P6")
    throw std::runtime_error("unsupported netpbm variant '" + h.magic + "'");
  h.width = reader.integer();
  h.height = reader.integer();
  h.maxval = reader.integer();
  if (h.width <= 0 || h.height <= 0 || h.maxval <= 0 || h.maxval > 65535)
    throw std::runtime_error("invalid netpbm header");
  (void)in;
  return h;
}

IntensityImage load_pnm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  PnmReader reader(in);
  const PnmHeader h = read_pnm_header(in, reader);
  const bool colour = h.magic == "P3" || h.magic == "P6";
  const bool binary = h.magic == "P5" || h.magic == "P6";
  const int channels = colour ? 3 : 1;
  const std::size_t n = static_cast<std::size_t>(h.width) * h.height;
  std::vector<double> raw(n * channels);
  if (binary) {
    const int bytes = h.maxval > 255 ? 2 : 1;
    std::vector<unsigned char> buf(raw.size() * bytes);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (static_cast<std::size_t>(in.gcount()) != buf.size())
      throw std::runtime_error("truncated raster in " + path.string());
    for (std::size_t i = 0; i < raw.size(); ++i)
      raw[i] = bytes == 2 ? (buf[2 * i] << 8 | buf[2 * i + 1]) : buf[i];
  } else {
    for (auto& v : raw) v = reader.integer();
  }
  std::vector<double> px(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double* c = &raw[i * channels];
    const double v = colour ? luminance(c[0], c[1], c[2]) : c[0];
    px[i] = std::clamp(v / h.maxval, 0.0, 1.0);
  }
  return IntensityImage(h.width, h.height, std::move(px));
}

struct PngHandle {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~PngHandle() {
    if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
  }
};

// Opens a PNG and configures libpng to deliver 8-bit gray or RGB rows.
void open_png(const std::filesystem::path& path, std::unique_ptr<std::FILE, FileCloser>& file, PngHandle& h) {
  file.reset(std::fopen(path.c_str(), "rb"));
  if (!file) throw std::runtime_error("cannot open " + path.string());
  unsigned char sig[8];
  if (std::fread(sig, 1, 8, file.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0)
    throw std::runtime_error("not a PNG file: " + path.string());
  h.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!h.png) throw std::runtime_error("libpng init failed");
  h.info = png_create_info_struct(h.png);
  if (!h.info) throw std::runtime_error("libpng init failed");
  png_init_io(h.png, file.get());
  png_set_sig_bytes(h.png, 8);
}

IntensityImage load_png(const std::filesystem::path& path) {
  std::unique_ptr<std::FILE, FileCloser> file;
  PngHandle h;
  open_png(path, file, h);
  std::vector<unsigned char> data;
  std::vector<png_bytep> rows;
  png_uint_32 w = 0, hgt = 0;
  int channels = 0;
  if (setjmp(png_jmpbuf(h.png))) throw std::runtime_error("corrupt PNG: " + path.string());
  png_read_info(h.png, h.info);
  w = png_get_image_width(h.png, h.info);
  hgt = png_get_image_height(h.png, h.info);
  const int colour_type = png_get_color_type(h.png, h.info);
  if (png_get_bit_depth(h.png, h.info) == 16) png_set_strip_16(h.png);
  if (colour_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(h.png);
  if (colour_type == PNG_COLOR_TYPE_GRAY && png_get_bit_depth(h.png, h.info) < 8)
    png_set_expand_gray_1_2_4_to_8(h.png);
  if (png_get_valid(h.png, h.info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(h.png);
  png_set_strip_alpha(h.png);
  png_read_update_info(h.png, h.info);
  channels = png_get_channels(h.png, h.info);
  data.resize(static_cast<std::size_t>(w) * hgt * channels);
  rows.resize(hgt);
  for (png_uint_32 y = 0; y < hgt; ++y) rows[y] = data.data() + static_cast<std::size_t>(y) * w * channels;
  png_read_image(h.png, rows.data());

  std::vector<double> px(static_cast<std::size_t>(w) * hgt);
  for (std::size_t i = 0; i < px.size(); ++i) {
    const unsigned char* c = &data[i * channels];
    const double v = channels >= 3 ? luminance(c[0], c[1], c[2]) : c[0];
    px[i] = std::clamp(v / 255.0, 0.0, 1.0);
  }
  return IntensityImage(static_cast<int>(w), static_cast<int>(hgt), std::move(px));
}

}  // namespace

IntensityImage load_image(const std::filesystem::path& path) {
  const std::string ext = lower_ext(path);
  if (ext == ".png") return load_png(path);
  if (ext == ".pgm" || ext == ".ppm" || ext == ".pnm") return load_pnm(path);
  throw std::runtime_error("unsupported image format: " + path.string());
}

std::array<int, 2> probe_image_size(const std::filesystem::path& path) {
  const std::string ext = lower_ext(path);
  if (ext == ".png") {
    std::unique_ptr<std::FILE, FileCloser> file;
    PngHandle h;
    open_png(path, file, h);
    if (setjmp(png_jmpbuf(h.png))) throw std::runtime_error("corrupt PNG: " + path.string());
    png_read_info(h.png, h.info);
    return {static_cast<int>(png_get_image_width(h.png, h.info)),
            static_cast<int>(png_get_image_height(h.png, h.info))};
  }
  if (ext == ".pgm" || ext == ".ppm" || ext == ".pnm") {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    PnmReader reader(in);
    const PnmHeader h = read_pnm_header(in, reader);
    return {h.width, h.height};
  }
  throw std::runtime_error("unsupported image format: " + path.string());
}

void write_pgm(const std::filesystem::path& path, const IntensityImage& img) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "P5\n" << img.width() << " " << img.height() << "\n255\n";
  for (double v : img.pixels()) out.put(static_cast<char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)));
}

void write_ppm(const std::filesystem::path& path, const RgbRaster& raster) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "P6\n" << raster.width << " " << raster.height << "\n255\n";
  for (const Rgb& p : raster.pixels) {
    out.put(static_cast<char>(p.r));
    out.put(static_cast<char>(p.g));
    out.put(static_cast<char>(p.b));
  }
}

namespace {

// Coverage weights of source cells [0, src) for each destination cell.
struct AxisWeights {
  std::vector<int> first;
  std::vector<std::vector<double>> weights;
};

AxisWeights area_weights(int src, int dst) {
  AxisWeights w;
  w.first.resize(dst);
  w.weights.resize(dst);
  const double scale = static_cast<double>(src) / dst;
  for (int i = 0; i < dst; ++i) {
    const double lo = i * scale, hi = (i + 1) * scale;
    const int a = static_cast<int>(std::floor(lo));
    const int b = std::min(static_cast<int>(std::ceil(hi)), src);
    w.first[i] = a;
    for (int s = a; s < b; ++s) {
      const double cover = std::min(hi, s + 1.0) - std::max(lo, static_cast<double>(s));
      w.weights[i].push_back(std::max(cover, 0.0) / scale);
    }
  }
  return w;
}

}  // namespace

IntensityImage resize_area(const IntensityImage& img, int width, int height) {
  if (img.empty()) throw std::invalid_argument("cannot resize an empty image");
  if (width <= 0 || height <= 0) throw std::invalid_argument("resize target must be positive");
  if (width == img.width() && height == img.height()) return img;
  const AxisWeights wx = area_weights(img.width(), width);
  const AxisWeights wy = area_weights(img.height(), height);
  std::vector<double> tmp(static_cast<std::size_t>(width) * img.height());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < width; ++x) {
      double acc = 0.0;
      for (std::size_t k = 0; k < wx.weights[x].size(); ++k) acc += wx.weights[x][k] * img.at(wx.first[x] + static_cast<int>(k), y);
      tmp[static_cast<std::size_t>(y) * width + x] = acc;
    }
  std::vector<double> out(static_cast<std::size_t>(width) * height);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      double acc = 0.0;
      for (std::size_t k = 0; k < wy.weights[y].size(); ++k)
        acc += wy.weights[y][k] * tmp[static_cast<std::size_t>(wy.first[y] + static_cast<int>(k)) * width + x];
      out[static_cast<std::size_t>(y) * width + x] = std::clamp(acc, 0.0, 1.0);
    }
  return IntensityImage(width, height, std::move(out));
}

}  // namespace saccadic
