#include "saccadic/event.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace saccadic {

namespace {

std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

bool parse_number(const std::string& token, double& out) {
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), out);
  return ec == std::errc() && ptr == token.data() + token.size();
}

bool parse_int(const std::string& token, long long& out) {
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), out);
  return ec == std::errc() && ptr == token.data() + token.size();
}

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  for (std::string tok; in >> tok;) out.push_back(tok);
  return out;
}

}  // namespace

EventStream::EventStream(std::vector<Event> events, int width, int height, std::uint32_t duration_us)
    : events_(std::move(events)), width_(width), height_(height), duration_(duration_us) {
  if (width < 0 || height < 0 || width > 256 || height > 256)
    throw std::invalid_argument("stream frame must be within 256x256 pixels");
  for (std::size_t i = 0; i < events_.size(); ++i) {
    const Event& e = events_[i];
    if (e.x >= width_ || e.y >= height_)
      throw FormatError(FormatError::Kind::AddressRange, i,
                        "event " + std::to_string(i) + " address (" + std::to_string(e.x) + "," +
                            std::to_string(e.y) + ") outside " + std::to_string(width_) + "x" +
                            std::to_string(height_) + " frame");
    if (i > 0 && e.timestamp < events_[i - 1].timestamp)
      throw FormatError(FormatError::Kind::Monotonicity, i,
                        "event " + std::to_string(i) + " timestamp decreases");
  }
  if (!events_.empty() && duration_ < events_.back().timestamp)
    throw std::invalid_argument("stream duration precedes its last event");
}

EventBlock encode_event(const Event& e) {
  const std::uint32_t t = e.timestamp & kMaxTimestamp;
  return {e.x, e.y,
          static_cast<std::uint8_t>((static_cast<std::uint8_t>(e.polarity) << 7) | ((t >> 16) & 0x7F)),
          static_cast<std::uint8_t>((t >> 8) & 0xFF), static_cast<std::uint8_t>(t & 0xFF)};
}

Event decode_event(std::span<const std::uint8_t> block, std::size_t offset) {
  if (block.size() != kEventBytes)
    throw FormatError(FormatError::Kind::TruncatedRecord, offset,
                      "truncated event record at byte offset " + std::to_string(offset));
  const std::uint32_t t = (static_cast<std::uint32_t>(block[2] & 0x7F) << 16) |
                          (static_cast<std::uint32_t>(block[3]) << 8) | block[4];
  return Event(block[0], block[1], (block[2] & 0x80) ? Polarity::On : Polarity::Off, t);
}

EventStream read_stream(std::span<const std::uint8_t> bytes, int width, int height,
                        std::optional<std::uint32_t> duration_us) {
  const std::size_t whole = bytes.size() / kEventBytes;
  if (bytes.size() % kEventBytes != 0) {
    const std::size_t offset = whole * kEventBytes;
    throw FormatError(FormatError::Kind::TruncatedRecord, offset,
                      "truncated event record at byte offset " + std::to_string(offset));
  }
  std::vector<Event> events;
  events.reserve(whole);
  for (std::size_t i = 0; i < whole; ++i)
    events.push_back(decode_event(bytes.subspan(i * kEventBytes, kEventBytes), i * kEventBytes));
  std::uint32_t duration = 0;
  if (duration_us) {
    duration = *duration_us;
  } else if (!events.empty()) {
    duration = std::max_element(events.begin(), events.end(), [](const Event& a, const Event& b) {
                 return a.timestamp < b.timestamp;
               })->timestamp + 1;
  }
  return EventStream(std::move(events), width, height, duration);
}

std::vector<std::uint8_t> write_stream(const EventStream& s) {
  std::vector<std::uint8_t> out;
  out.reserve(s.size() * kEventBytes);
  for (const Event& e : s) {
    const EventBlock b = encode_event(e);
    out.insert(out.end(), b.begin(), b.end());
  }
  return out;
}

EventStream crop_spatial(const EventStream& s, const Box& box) {
  const Box clipped{std::max(box.x_min, 0), std::max(box.y_min, 0), std::min(box.x_max, s.width()),
                    std::min(box.y_max, s.height())};
  std::vector<Event> kept;
  if (clipped.width() > 0 && clipped.height() > 0) {
    for (const Event& e : s) {
      if (!clipped.contains(e.x, e.y)) continue;
      kept.emplace_back(static_cast<std::uint8_t>(e.x - clipped.x_min),
                        static_cast<std::uint8_t>(e.y - clipped.y_min), e.polarity, e.timestamp);
    }
  }
  return EventStream(std::move(kept), clipped.width(), clipped.height(), s.duration());
}

EventStream time_slice(const EventStream& s, std::uint32_t t0, std::uint32_t t1) {
  if (t0 > t1) throw std::invalid_argument("time_slice requires t0 <= t1");
  auto lo = std::lower_bound(s.begin(), s.end(), t0,
                             [](const Event& e, std::uint32_t t) { return e.timestamp < t; });
  auto hi = std::lower_bound(lo, s.end(), t1,
                             [](const Event& e, std::uint32_t t) { return e.timestamp < t; });
  return EventStream(std::vector<Event>(lo, hi), s.width(), s.height(), s.duration());
}

void Annotation::validate(int width, int height) const {
  if (x_min > x_max || y_min > y_max) throw std::invalid_argument("annotation box corners unordered");
  for (const Vertex& v : contour) {
    if (v.x < 0.0 || v.y < 0.0 || v.x > width || v.y > height)
      throw std::invalid_argument("annotation contour vertex outside sensor bounds");
  }
}

std::string write_annotation(const Annotation& a) {
  std::string out = "BBOX " + format_number(a.x_min) + " " + format_number(a.y_min) + " " +
                    format_number(a.x_max) + " " + format_number(a.y_max) + "\n";
  for (const Vertex& v : a.contour) out += "V " + format_number(v.x) + " " + format_number(v.y) + "\n";
  return out;
}

Annotation read_annotation(const std::string& text) {
  Annotation a;
  std::istringstream in(text);
  std::size_t line_no = 0;
  bool have_box = false;
  auto fail = [&](const std::string& why) {
    throw FormatError(FormatError::Kind::Parse, line_no,
                      "annotation line " + std::to_string(line_no) + ": " + why);
  };
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    const auto tok = split_ws(line);
    if (tok.empty()) continue;
    if (!have_box) {
      if (tok[0] != "BBOX" || tok.size() != 5) fail("expected 'BBOX x_min y_min x_max y_max'");
      double v[4];
      for (int i = 0; i < 4; ++i)
        if (!parse_number(tok[i + 1], v[i])) fail("bad number '" + tok[i + 1] + "'");
      a.x_min = v[0];
      a.y_min = v[1];
      a.x_max = v[2];
      a.y_max = v[3];
      if (a.x_min > a.x_max || a.y_min > a.y_max) fail("box corners unordered");
      have_box = true;
      continue;
    }
    if (tok[0] != "V" || tok.size() != 3) fail("expected 'V x y'");
    Vertex v;
    if (!parse_number(tok[1], v.x) || !parse_number(tok[2], v.y)) fail("bad vertex coordinate");
    a.contour.push_back(v);
  }
  if (!have_box) {
    line_no = std::max<std::size_t>(line_no, 1);
    fail("missing BBOX line");
  }
  return a;
}

std::pair<int, int> DirectoryMeta::frame_for(const std::string& file_name) const {
  if (auto it = frame_overrides.find(file_name); it != frame_overrides.end()) return it->second;
  return {width, height};
}

std::string write_meta(const DirectoryMeta& meta) {
  std::string out = std::to_string(meta.width) + " " + std::to_string(meta.height) + " " +
                    std::to_string(meta.duration_us) + "\n";
  for (const auto& [name, frame] : meta.frame_overrides)
    out += name + " " + std::to_string(frame.first) + " " + std::to_string(frame.second) + "\n";
  return out;
}

DirectoryMeta read_meta(const std::string& text) {
  DirectoryMeta meta;
  std::istringstream in(text);
  std::size_t line_no = 0;
  bool have_header = false;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    const auto tok = split_ws(line);
    if (tok.empty()) continue;
    long long v[3];
    if (!have_header) {
      if (tok.size() != 3 || !parse_int(tok[0], v[0]) || !parse_int(tok[1], v[1]) ||
          !parse_int(tok[2], v[2]) || v[0] < 0 || v[1] < 0 || v[2] < 0)
        throw FormatError(FormatError::Kind::Parse, line_no, "meta.txt: expected 'width height duration_us'");
      meta.width = static_cast<int>(v[0]);
      meta.height = static_cast<int>(v[1]);
      meta.duration_us = static_cast<std::uint32_t>(v[2]);
      have_header = true;
      continue;
    }
    if (tok.size() != 3 || !parse_int(tok[1], v[0]) || !parse_int(tok[2], v[1]) || v[0] < 0 || v[1] < 0)
      throw FormatError(FormatError::Kind::Parse, line_no, "meta.txt: expected 'name width height'");
    meta.frame_overrides[tok[0]] = {static_cast<int>(v[0]), static_cast<int>(v[1])};
  }
  if (!have_header) throw FormatError(FormatError::Kind::Parse, 1, "meta.txt: empty");
  return meta;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("short write to " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

EventStream load_recording(const std::filesystem::path& bin_path) {
  const auto meta = read_meta(read_text_file(bin_path.parent_path() / kMetaFileName));
  const auto [w, h] = meta.frame_for(bin_path.filename().string());
  return read_stream(read_file_bytes(bin_path), w, h, meta.duration_us);
}

}  // namespace saccadic
