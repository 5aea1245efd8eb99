#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace saccadic {

enum class Polarity : std::uint8_t { Off = 0, On = 1 };

/// Largest timestamp representable in the 23-bit field (microseconds).
inline constexpr std::uint32_t kMaxTimestamp = (1u << 23) - 1;

/// Width of one serialized event in bytes.
inline constexpr std::size_t kEventBytes = 5;

struct Event {
  std::uint8_t x = 0;
  std::uint8_t y = 0;
  Polarity polarity = Polarity::Off;
  std::uint32_t timestamp = 0;

  constexpr Event() = default;
  constexpr Event(std::uint8_t x_, std::uint8_t y_, Polarity p, std::uint32_t t)
      : x(x_), y(y_), polarity(p), timestamp(t) {
    if (t > kMaxTimestamp) throw std::out_of_range("event timestamp exceeds 23 bits");
  }

  bool on() const { return polarity == Polarity::On; }
  friend bool operator==(const Event&, const Event&) = default;
};

/// Errors raised while decoding or validating recordings.
class FormatError : public std::runtime_error {
 public:
  enum class Kind { TruncatedRecord, AddressRange, Monotonicity, Parse };

  FormatError(Kind kind, std::size_t position, const std::string& what)
      : std::runtime_error(what), kind_(kind), position_(position) {}

  Kind kind() const { return kind_; }
  /// Byte offset (truncation), event index (range, monotonicity) or 1-based line (parse).
  std::size_t position() const { return position_; }

 private:
  Kind kind_;
  std::size_t position_;
};

/// Half-open pixel rectangle [x_min, x_max) x [y_min, y_max).
struct Box {
  int x_min = 0;
  int y_min = 0;
  int x_max = 0;
  int y_max = 0;

  int width() const { return x_max > x_min ? x_max - x_min : 0; }
  int height() const { return y_max > y_min ? y_max - y_min : 0; }
  bool contains(int x, int y) const { return x >= x_min && x < x_max && y >= y_min && y < y_max; }
  friend bool operator==(const Box&, const Box&) = default;
};

/// Time-ordered events of one recording plus the frame they were recorded in.
///
/// The constructor enforces the stream invariants: non-decreasing timestamps,
/// addresses inside the frame, and duration not before the last event.
class EventStream {
 public:
  EventStream() = default;
  EventStream(std::vector<Event> events, int width, int height, std::uint32_t duration_us);

  const std::vector<Event>& events() const { return events_; }
  int width() const { return width_; }
  int height() const { return height_; }
  std::uint32_t duration() const { return duration_; }
  std::size_t size() const { return events_.size(); }
  bool empty() const { return events_.empty(); }

  auto begin() const { return events_.begin(); }
  auto end() const { return events_.end(); }

  friend bool operator==(const EventStream&, const EventStream&) = default;

 private:
  std::vector<Event> events_;
  int width_ = 0;
  int height_ = 0;
  std::uint32_t duration_ = 0;
};

using EventBlock = std::array<std::uint8_t, kEventBytes>;

/// Packs an event MSB-first: x, y, then polarity in bit 23 above the 23-bit timestamp.
EventBlock encode_event(const Event& e);

/// Unpacks one 5-byte block. `offset` is only used to report truncation.
Event decode_event(std::span<const std::uint8_t> block, std::size_t offset = 0);

/// Decodes a headerless event file. Without an explicit duration the stream ends
/// one microsecond after its last event.
EventStream read_stream(std::span<const std::uint8_t> bytes, int width, int height,
                        std::optional<std::uint32_t> duration_us = std::nullopt);

std::vector<std::uint8_t> write_stream(const EventStream& s);

/// Keeps events inside `box` and rebases them to its origin. A zero-area box
/// gives an empty stream.
EventStream crop_spatial(const EventStream& s, const Box& box);

/// Events with t0 <= t < t1; timestamps and duration are kept.
EventStream time_slice(const EventStream& s, std::uint32_t t0, std::uint32_t t1);

struct Vertex {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Vertex&, const Vertex&) = default;
};

/// Bounding box plus object contour, both in pixels.
struct Annotation {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;
  std::vector<Vertex> contour;

  /// Throws std::invalid_argument if the box is unordered or a vertex leaves the frame.
  void validate(int width, int height) const;
  friend bool operator==(const Annotation&, const Annotation&) = default;
};

/// `BBOX x_min y_min x_max y_max` followed by one `V x y` line per contour vertex.
std::string write_annotation(const Annotation& a);
Annotation read_annotation(const std::string& text);

/// Per-directory sidecar: `width height duration_us` on the first line, then
/// optional `name.bin width height` lines for recordings with their own frame.
struct DirectoryMeta {
  int width = 0;
  int height = 0;
  std::uint32_t duration_us = 0;
  std::map<std::string, std::pair<int, int>> frame_overrides;

  std::pair<int, int> frame_for(const std::string& file_name) const;
};

std::string write_meta(const DirectoryMeta& meta);
DirectoryMeta read_meta(const std::string& text);

inline constexpr const char* kMetaFileName = "meta.txt";

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

/// Loads `<dir>/<name>.bin` using the frame recorded in `<dir>/meta.txt`.
EventStream load_recording(const std::filesystem::path& bin_path);

}  // namespace saccadic
