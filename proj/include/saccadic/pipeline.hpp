#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "saccadic/event.hpp"
#include "saccadic/image.hpp"
#include "saccadic/saccade.hpp"
#include "saccadic/simulator.hpp"

namespace saccadic {

struct ResizeRule {
  enum class Kind {
    Mnist,    ///< exactly 28x28
    Caltech,  ///< largest aspect-preserving fit inside 240x180
    Custom,   ///< exactly width x height
  };
  Kind kind = Kind::Mnist;
  int width = 28;
  int height = 28;

  static ResizeRule mnist() { return {Kind::Mnist, 28, 28}; }
  static ResizeRule caltech() { return {Kind::Caltech, 240, 180}; }
  static ResizeRule custom(int w, int h) { return {Kind::Custom, w, h}; }
};

struct ConversionProfile {
  std::string name;
  ResizeRule resize;
  SensorModel sensor;
  SaccadeSchedule schedule = SaccadeSchedule::standard();
  SimulationConfig sim;

  /// "nmnist" (34x34 frame) or "ncaltech101" (246x186 frame). Throws
  /// std::invalid_argument for anything else.
  static ConversionProfile by_name(const std::string& name);

  void validate() const;

  /// Pixels of image motion spanned by the trajectory on each axis.
  std::array<int, 2> excursion_px() const;

  /// The sensor frame actually simulated for a resized image: the image plus
  /// the trajectory excursion, centred, capped at the profile frame. Events
  /// can never fall outside this envelope, so simulating it is equivalent to
  /// simulating the full frame and cropping.
  SensorModel sensor_for(int image_width, int image_height) const;
};

/// Target size of `resize_for_profile` without touching pixels.
std::array<int, 2> resized_size(int width, int height, const ResizeRule& rule);

IntensityImage resize_for_profile(const IntensityImage& img, const ConversionProfile& profile);

/// Maps an annotation from source-image pixels into recording pixels.
Annotation project_annotation(const Annotation& a, int source_width, int source_height, int resized_width,
                              int resized_height, const SensorModel& envelope);

struct ConversionEntry {
  enum class Status { Converted, Skipped, Failed };

  std::string path;  ///< output .bin path relative to the output root
  std::size_t on_count = 0;
  std::size_t off_count = 0;
  std::uint32_t duration_us = 0;
  double wall_ms = 0.0;
  Status status = Status::Converted;
  std::string message;
};

struct ConversionReport {
  std::vector<ConversionEntry> entries;
  double wall_seconds = 0.0;

  std::size_t failures() const;
  std::size_t total_on() const;
  std::size_t total_off() const;
};

/// `path,on_count,off_count,duration_us,status`. Timing is left out so reruns
/// stay byte-identical.
std::string report_csv(const ConversionReport& report);

struct ConversionOptions {
  std::uint64_t seed = 0;
  bool force = false;
  unsigned jobs = 1;
  std::function<void(const ConversionEntry&)> on_entry;  ///< called from worker threads
};

/// Mirrors `in_dir` under `out_dir`, one `.bin` per PNG/PGM/PPM image plus a
/// `meta.txt` per directory and `report.csv` at the root. Source `.ann` files
/// next to an image are projected into the recording frame. Failed images are
/// reported and skipped. Throws std::invalid_argument if `in_dir` is not a
/// directory.
ConversionReport convert_directory(const std::filesystem::path& in_dir, const std::filesystem::path& out_dir,
                                   const ConversionProfile& profile, const ConversionOptions& options = {});

/// Recordings grouped by class directory name.
struct Dataset {
  struct Item {
    std::filesystem::path path;
    std::size_t label = 0;
  };
  std::vector<std::string> classes;
  std::vector<Item> items;

  std::size_t count(std::size_t label) const;
};

/// Each immediate subdirectory of `root` is a class; its `.bin` files (searched
/// recursively) are the recordings. Classes and items are sorted by name.
Dataset scan_dataset(const std::filesystem::path& root);

/// Every `.bin` under `root`, sorted.
std::vector<std::filesystem::path> scan_recordings(const std::filesystem::path& root);

struct Split {
  Dataset train;
  Dataset test;
  std::vector<std::string> warnings;
};

/// Seeded per-class selection of disjoint train/test subsets. A class with
/// fewer than train+test items is divided proportionally and a warning recorded.
Split split_fixed(const Dataset& dataset, int per_class_train, int per_class_test, std::uint64_t seed);

/// Keeps at most `per_class` items of each class, chosen by seed. Negative
/// keeps everything.
Dataset subsample(const Dataset& dataset, int per_class, std::uint64_t seed);

}  // namespace saccadic
