#include "saccadic/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <map>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <thread>

namespace saccadic {

namespace fs = std::filesystem;

namespace {

bool is_image_file(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".pgm" || ext == ".ppm";
}

}  // namespace

ConversionProfile ConversionProfile::by_name(const std::string& name) {
  ConversionProfile p;
  p.name = name;
  if (name == "nmnist") {
    p.resize = ResizeRule::mnist();
    p.sensor = SensorModel::centred(34, 34);
  } else if (name == "ncaltech101") {
    p.resize = ResizeRule::caltech();
    p.sensor = SensorModel::centred(246, 186);
  } else {
    throw std::invalid_argument("unknown conversion profile '" + name + "'");
  }
  return p;
}

void ConversionProfile::validate() const {
  sensor.validate();
  sim.validate();
  if (resize.width <= 0 || resize.height <= 0) throw std::invalid_argument("resize target must be positive");
  if (resize.width > sensor.width || resize.height > sensor.height)
    throw std::invalid_argument("resize target does not fit the sensor frame");
}

std::array<int, 2> ConversionProfile::excursion_px() const {
  const Vec2 deg = schedule.excursion_deg();
  return {static_cast<int>(std::ceil(deg.x * sensor.pixels_per_degree - 1e-6)),
          static_cast<int>(std::ceil(deg.y * sensor.pixels_per_degree - 1e-6))};
}

SensorModel ConversionProfile::sensor_for(int image_width, int image_height) const {
  const auto ex = excursion_px();
  SensorModel m = SensorModel::centred(std::min(image_width + ex[0], sensor.width),
                                       std::min(image_height + ex[1], sensor.height), sensor.pixels_per_degree);
  m.log_epsilon = sensor.log_epsilon;
  return m;
}

std::array<int, 2> resized_size(int width, int height, const ResizeRule& rule) {
  if (width <= 0 || height <= 0) throw std::invalid_argument("cannot resize a zero-dimension image");
  if (rule.kind != ResizeRule::Kind::Caltech) return {rule.width, rule.height};
  const double scale = std::min(static_cast<double>(rule.width) / width, static_cast<double>(rule.height) / height);
  const int w = std::clamp(static_cast<int>(std::lround(width * scale)), 1, rule.width);
  const int h = std::clamp(static_cast<int>(std::lround(height * scale)), 1, rule.height);
  return {w, h};
}

IntensityImage resize_for_profile(const IntensityImage& img, const ConversionProfile& profile) {
  if (img.empty()) throw std::invalid_argument("cannot resize a zero-dimension image");
  const auto [w, h] = resized_size(img.width(), img.height(), profile.resize);
  return resize_area(img, w, h);
}

Annotation project_annotation(const Annotation& a, int source_width, int source_height, int resized_width,
                              int resized_height, const SensorModel& envelope) {
  const double sx = static_cast<double>(resized_width) / source_width;
  const double sy = static_cast<double>(resized_height) / source_height;
  const Vec2 origin{envelope.principal_point.x - (resized_width - 1) / 2.0,
                    envelope.principal_point.y - (resized_height - 1) / 2.0};
  auto map_x = [&](double x) { return x * sx + origin.x; };
  auto map_y = [&](double y) { return y * sy + origin.y; };
  Annotation out;
  out.x_min = map_x(a.x_min);
  out.y_min = map_y(a.y_min);
  out.x_max = map_x(a.x_max);
  out.y_max = map_y(a.y_max);
  for (const Vertex& v : a.contour) out.contour.push_back({map_x(v.x), map_y(v.y)});
  return out;
}

std::size_t ConversionReport::failures() const {
  return static_cast<std::size_t>(std::count_if(entries.begin(), entries.end(), [](const ConversionEntry& e) {
    return e.status == ConversionEntry::Status::Failed;
  }));
}

std::size_t ConversionReport::total_on() const {
  std::size_t n = 0;
  for (const auto& e : entries) n += e.on_count;
  return n;
}

std::size_t ConversionReport::total_off() const {
  std::size_t n = 0;
  for (const auto& e : entries) n += e.off_count;
  return n;
}

std::string report_csv(const ConversionReport& report) {
  std::ostringstream out;
  out << "path,on_count,off_count,duration_us,status\n";
  for (const auto& e : report.entries) {
    const char* status = e.status == ConversionEntry::Status::Converted ? "ok"
                         : e.status == ConversionEntry::Status::Skipped ? "skipped"
                                                                        : "failed";
    out << e.path << ',' << e.on_count << ',' << e.off_count << ',' << e.duration_us << ',' << status << '\n';
  }
  return out.str();
}

namespace {

struct WorkItem {
  fs::path source;
  fs::path relative;  // relative source path
  fs::path output;
};

struct ItemResult {
  ConversionEntry entry;
  int width = 0;
  int height = 0;
};

void count_polarities(const EventStream& s, ConversionEntry& e) {
  e.on_count = static_cast<std::size_t>(std::count_if(s.begin(), s.end(), [](const Event& ev) { return ev.on(); }));
  e.off_count = s.size() - e.on_count;
  e.duration_us = s.duration();
}

ItemResult convert_one(const WorkItem& item, const ConversionProfile& profile, const ConversionOptions& options) {
  ItemResult r;
  r.entry.path = fs::path(item.relative).replace_extension(".bin").generic_string();
  const auto start = std::chrono::steady_clock::now();
  try {
    const auto [src_w, src_h] = probe_image_size(item.source);
    const auto [w, h] = resized_size(src_w, src_h, profile.resize);
    const SensorModel envelope = profile.sensor_for(w, h);
    r.width = envelope.width;
    r.height = envelope.height;

    if (!options.force && fs::exists(item.output)) {
      const EventStream existing =
          read_stream(read_file_bytes(item.output), envelope.width, envelope.height, profile.schedule.duration_us());
      count_polarities(existing, r.entry);
      r.entry.status = ConversionEntry::Status::Skipped;
    } else {
      const IntensityImage resized = resize_for_profile(load_image(item.source), profile);
      SimulationConfig sim = profile.sim;
      sim.noise.seed = derive_seed(options.seed, item.relative.generic_string());
      const EventStream s = simulate(resized, profile.schedule, envelope, sim);
      write_file_bytes(item.output, write_stream(s));
      count_polarities(s, r.entry);
      r.entry.status = ConversionEntry::Status::Converted;
    }

    const fs::path ann_src = fs::path(item.source).replace_extension(".ann");
    if (fs::exists(ann_src)) {
      const Annotation a = read_annotation(read_text_file(ann_src));
      const Annotation projected = project_annotation(a, src_w, src_h, w, h, envelope);
      write_text_file(fs::path(item.output).replace_extension(".ann"), write_annotation(projected));
    }
  } catch (const std::exception& ex) {
    r.entry.status = ConversionEntry::Status::Failed;
    r.entry.message = ex.what();
    r.entry.on_count = r.entry.off_count = 0;
  }
  r.entry.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return r;
}

}  // namespace

ConversionReport convert_directory(const fs::path& in_dir, const fs::path& out_dir, const ConversionProfile& profile,
                                   const ConversionOptions& options) {
  profile.validate();
  if (!fs::is_directory(in_dir)) throw std::invalid_argument("input is not a directory: " + in_dir.string());
  const auto start = std::chrono::steady_clock::now();

  std::vector<WorkItem> items;
  std::set<fs::path> dirs;
  for (const auto& de : fs::recursive_directory_iterator(in_dir)) {
    const fs::path rel = fs::relative(de.path(), in_dir);
    if (de.is_directory()) {
      dirs.insert(rel);
    } else if (de.is_regular_file() && is_image_file(de.path())) {
      items.push_back({de.path(), rel, out_dir / fs::path(rel).replace_extension(".bin")});
    }
  }
  std::sort(items.begin(), items.end(), [](const WorkItem& a, const WorkItem& b) { return a.relative < b.relative; });

  fs::create_directories(out_dir);
  for (const auto& d : dirs) fs::create_directories(out_dir / d);

  std::vector<ItemResult> results(items.size());
  std::atomic<std::size_t> next{0};
  std::mutex callback_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < items.size(); i = next++) {
      results[i] = convert_one(items[i], profile, options);
      if (options.on_entry) {
        std::lock_guard lock(callback_mutex);
        options.on_entry(results[i].entry);
      }
    }
  };
  const unsigned jobs = std::max(1u, std::min<unsigned>(options.jobs, static_cast<unsigned>(items.size())));
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }

  // Sidecar per output directory; the most common frame is the default line.
  std::map<fs::path, std::vector<std::size_t>> by_dir;
  for (std::size_t i = 0; i < items.size(); ++i)
    if (results[i].width > 0) by_dir[items[i].output.parent_path()].push_back(i);
  for (const auto& [dir, idx] : by_dir) {
    std::map<std::pair<int, int>, std::size_t> votes;
    for (std::size_t i : idx) ++votes[{results[i].width, results[i].height}];
    const auto common = std::max_element(votes.begin(), votes.end(), [](const auto& a, const auto& b) {
                          return a.second < b.second;
                        })->first;
    DirectoryMeta meta;
    meta.width = common.first;
    meta.height = common.second;
    meta.duration_us = profile.schedule.duration_us();
    for (std::size_t i : idx)
      if (std::pair{results[i].width, results[i].height} != common)
        meta.frame_overrides[items[i].output.filename().string()] = {results[i].width, results[i].height};
    write_text_file(dir / kMetaFileName, write_meta(meta));
  }

  ConversionReport report;
  report.entries.reserve(results.size());
  for (auto& r : results) report.entries.push_back(std::move(r.entry));
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_text_file(out_dir / "report.csv", report_csv(report));
  return report;
}

std::size_t Dataset::count(std::size_t label) const {
  return static_cast<std::size_t>(
      std::count_if(items.begin(), items.end(), [label](const Item& it) { return it.label == label; }));
}

Dataset scan_dataset(const fs::path& root) {
  if (!fs::is_directory(root)) throw std::invalid_argument("dataset root is not a directory: " + root.string());
  Dataset ds;
  std::vector<fs::path> class_dirs;
  for (const auto& de : fs::directory_iterator(root))
    if (de.is_directory()) class_dirs.push_back(de.path());
  std::sort(class_dirs.begin(), class_dirs.end());
  for (const auto& dir : class_dirs) {
    const std::size_t label = ds.classes.size();
    ds.classes.push_back(dir.filename().string());
    for (const auto& p : scan_recordings(dir)) ds.items.push_back({p, label});
  }
  return ds;
}

std::vector<fs::path> scan_recordings(const fs::path& root) {
  std::vector<fs::path> out;
  if (fs::is_regular_file(root)) {
    if (root.extension() == ".bin") out.push_back(root);
    return out;
  }
  if (!fs::is_directory(root)) throw std::invalid_argument("no such file or directory: " + root.string());
  for (const auto& de : fs::recursive_directory_iterator(root))
    if (de.is_regular_file() && de.path().extension() == ".bin") out.push_back(de.path());
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

std::vector<std::vector<std::size_t>> shuffled_by_class(const Dataset& ds, std::uint64_t seed) {
  std::vector<std::vector<std::size_t>> by_class(ds.classes.size());
  for (std::size_t i = 0; i < ds.items.size(); ++i) by_class[ds.items[i].label].push_back(i);
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    std::mt19937_64 rng(derive_seed(seed, ds.classes[c]));
    std::shuffle(by_class[c].begin(), by_class[c].end(), rng);
  }
  return by_class;
}

}  // namespace

Split split_fixed(const Dataset& dataset, int per_class_train, int per_class_test, std::uint64_t seed) {
  if (per_class_train < 0 || per_class_test < 0) throw std::invalid_argument("split sizes must be non-negative");
  Split s;
  s.train.classes = s.test.classes = dataset.classes;
  const auto by_class = shuffled_by_class(dataset, seed);
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    const auto& idx = by_class[c];
    std::size_t n_train = static_cast<std::size_t>(per_class_train);
    std::size_t n_test = static_cast<std::size_t>(per_class_test);
    if (idx.size() < n_train + n_test) {
      const std::size_t want = n_train + n_test;
      n_train = want == 0 ? 0 : idx.size() * n_train / want;
      n_test = idx.size() - n_train;
      s.warnings.push_back("class '" + dataset.classes[c] + "' has " + std::to_string(idx.size()) +
                           " recordings, fewer than " + std::to_string(want) + "; using " + std::to_string(n_train) +
                           " train / " + std::to_string(n_test) + " test");
    }
    for (std::size_t k = 0; k < n_train; ++k) s.train.items.push_back(dataset.items[idx[k]]);
    for (std::size_t k = n_train; k < n_train + n_test; ++k) s.test.items.push_back(dataset.items[idx[k]]);
  }
  return s;
}

Dataset subsample(const Dataset& dataset, int per_class, std::uint64_t seed) {
  if (per_class < 0) return dataset;
  Dataset out;
  out.classes = dataset.classes;
  const auto by_class = shuffled_by_class(dataset, seed);
  for (const auto& idx : by_class)
    for (std::size_t k = 0; k < std::min<std::size_t>(idx.size(), per_class); ++k)
      out.items.push_back(dataset.items[idx[k]]);
  return out;
}

}  // namespace saccadic
