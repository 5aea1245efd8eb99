#include "saccadic/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "saccadic/analysis.hpp"
#include "saccadic/hfirst.hpp"
#include "saccadic/knn.hpp"
#include "saccadic/parallel.hpp"
#include "saccadic/pipeline.hpp"
#include "saccadic/skim.hpp"

namespace fs = std::filesystem;

namespace saccadic {
namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EmptyDataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string num(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

void write_output(const std::string& path, const std::string& text) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  write_text_file(p, text);
}

std::vector<EventStream> load_all(const std::vector<fs::path>& paths, unsigned jobs) {
  std::vector<EventStream> out(paths.size());
  parallel_for(paths.size(), jobs, [&](std::size_t i) { out[i] = load_recording(paths[i]); });
  return out;
}

std::vector<fs::path> recordings_at(const std::string& input) {
  if (!fs::exists(input)) throw UsageError("input does not exist: " + input);
  std::vector<fs::path> paths = scan_recordings(input);
  if (paths.empty()) throw EmptyDataError("no recordings found under " + input);
  return paths;
}

// ---- convert ---------------------------------------------------------------

struct ConvertArgs {
  std::string input, output, profile = "nmnist";
  std::uint64_t seed = 0;
  bool force = false;
  std::optional<double> threshold, noise_rate, noise_sigma, noise_jitter, ppd;
  std::optional<std::uint32_t> step_us;
};

int cmd_convert(const ConvertArgs& a, unsigned jobs, std::ostream& out, std::ostream& err) {
  if (!fs::is_directory(a.input)) throw UsageError("input is not a directory: " + a.input);
  ConversionProfile profile;
  try {
    profile = ConversionProfile::by_name(a.profile);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (a.threshold) profile.sim.threshold = *a.threshold;
  if (a.step_us) profile.sim.step_us = *a.step_us;
  if (a.noise_rate) profile.sim.noise.background_rate_hz = *a.noise_rate;
  if (a.noise_sigma) profile.sim.noise.threshold_sigma = *a.noise_sigma;
  if (a.noise_jitter) profile.sim.noise.latency_jitter_us = *a.noise_jitter;
  if (a.ppd) profile.sensor.pixels_per_degree = *a.ppd;
  try {
    profile.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  ConversionOptions opts;
  opts.seed = a.seed;
  opts.force = a.force;
  opts.jobs = jobs;
  opts.on_entry = [&err](const ConversionEntry& e) {
    if (e.status == ConversionEntry::Status::Failed) err << "failed: " << e.path << ": " << e.message << '\n';
  };
  const ConversionReport report = convert_directory(a.input, a.output, profile, opts);
  std::size_t converted = 0, skipped = 0;
  double wall_ms = 0.0;
  for (const auto& e : report.entries) {
    if (e.status == ConversionEntry::Status::Converted) {
      ++converted;
      wall_ms += e.wall_ms;
    } else if (e.status == ConversionEntry::Status::Skipped) {
      ++skipped;
    }
  }
  out << "converted " << converted << ", skipped " << skipped << ", failed " << report.failures() << '\n';
  out << "events: " << report.total_on() << " ON, " << report.total_off() << " OFF\n";
  if (converted) out << "mean conversion time: " << num(wall_ms / static_cast<double>(converted)) << " ms/image\n";
  out << "report: " << (fs::path(a.output) / "report.csv").string() << '\n';
  return report.failures() ? kExitFailure : kExitOk;
}

// ---- stats / fft / rates / render -------------------------------------------

int cmd_stats(const std::string& input, const std::string& out_path, unsigned jobs, std::ostream& out) {
  const auto paths = recordings_at(input);
  const auto recs = load_all(paths, jobs);
  std::vector<FeatureVector> fvs(recs.size());
  parallel_for(recs.size(), jobs, [&](std::size_t i) { fvs[i] = compute_features(recs[i]); });

  std::ostringstream csv;
  csv << "path";
  for (Feature f : kAllFeatures) csv << ',' << feature_name(f);
  csv << '\n';
  const fs::path root = fs::is_directory(input) ? fs::path(input) : fs::path(input).parent_path();
  for (std::size_t i = 0; i < recs.size(); ++i) {
    csv << fs::relative(paths[i], root).generic_string();
    for (Feature f : kAllFeatures) csv << ',' << (fvs[i].defined(f) ? num(fvs[i].value(f)) : "");
    csv << '\n';
  }
  if (!out_path.empty()) write_output(out_path, csv.str());

  const auto agg = aggregate_features(fvs);
  out << "recordings: " << recs.size() << '\n';
  for (std::size_t f = 0; f < kFeatureCount; ++f)
    out << feature_name(kAllFeatures[f]) << ": " << num(agg[f].mean) << " +/- " << num(agg[f].stddev) << '\n';
  const DatasetSummary s = summarize_dataset(recs);
  out << "x range: " << num(s.x_range.mean) << " +/- " << num(s.x_range.stddev) << '\n';
  out << "y range: " << num(s.y_range.mean) << " +/- " << num(s.y_range.stddev) << '\n';
  return kExitOk;
}

int cmd_fft(const std::string& input, const std::string& out_path, int length_exp, std::uint64_t seed,
            double max_hz, std::ostream& out) {
  const auto recs = load_all(recordings_at(input), 1);
  Spectrum s;
  try {
    s = temporal_spectrum(recs, length_exp, seed);
  } catch (const std::invalid_argument& e) {
    throw EmptyDataError(e.what());
  }
  std::string csv = "frequency_hz,magnitude\n";
  for (std::size_t k = 0; k < s.magnitude.size(); ++k) {
    if (max_hz > 0.0 && s.frequency(k) > max_hz) break;
    csv += num(s.frequency(k)) + ',' + num(s.magnitude[k]) + '\n';
  }
  write_output(out_path, csv);
  out << "bins: " << s.magnitude.size() << ", resolution " << num(s.bin_hz) << " Hz\n";
  for (double hz : {10.0 / 3.0, 10.0, 75.0}) {
    const auto peak = find_peak(s, hz, 0.2);
    out << "peak near " << num(hz) << " Hz: " << (peak ? "yes (" + num(s.frequency(*peak)) + " Hz)" : "no") << '\n';
  }
  return kExitOk;
}

int cmd_rates(const std::string& input, const std::string& out_path, double bin_ms, std::ostream& out) {
  const auto recs = load_all(recordings_at(input), 1);
  const auto bin_us = static_cast<std::uint32_t>(std::llround(bin_ms * 1000.0));
  if (bin_us == 0) throw UsageError("--bin-ms must be at least 0.001");
  RateProfile p;
  try {
    p = rate_profile(recs, bin_us);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  std::string csv = "bin_start_us,mean,std\n";
  for (std::size_t b = 0; b < p.bins(); ++b)
    csv += std::to_string(b * bin_us) + ',' + num(p.mean[b]) + ',' + num(p.stddev[b]) + '\n';
  write_output(out_path, csv);
  out << "recordings: " << recs.size() << ", bins: " << p.bins() << '\n';
  return kExitOk;
}

int cmd_render(const std::string& input, const std::string& out_dir, double window_ms, std::ostream& out) {
  if (!fs::is_regular_file(input)) throw UsageError("input is not a recording file: " + input);
  const EventStream s = load_recording(input);
  const auto window_us = static_cast<std::uint32_t>(std::llround(window_ms * 1000.0));
  if (window_us == 0) throw UsageError("--window-ms must be at least 0.001");
  const auto frames = render_frames(s, window_us);
  fs::create_directories(out_dir);
  for (std::size_t i = 0; i < frames.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "frame_%04zu.ppm", i);
    write_ppm(fs::path(out_dir) / name, frames[i]);
  }
  out << "frames: " << frames.size() << '\n';
  return kExitOk;
}

// ---- classify ---------------------------------------------------------------

struct ClassifyArgs {
  std::string input, algo = "knn", out, feature = "std_y", weights_out, kernels_out;
  int train_per_class = 100, test_per_class = 100;
  std::size_t k = 10;
  int hidden = 500;
  int downsample = 1;
  bool two_channel = false;
  double skim_gain = SkimConfig{}.input_gain;
  double s1_scale = HfirstParams{}.s1_weight_scale;
  double s2_l1 = HfirstParams{}.s2_weight_l1;
  std::string polarity = "merge";
  std::uint64_t seed = 1;
};

struct LabelledSet {
  std::vector<EventStream> recordings;
  std::vector<std::size_t> labels;
};

std::optional<fs::path> child_named(const fs::path& dir, const std::string& lower) {
  for (const auto& de : fs::directory_iterator(dir)) {
    if (!de.is_directory()) continue;
    std::string n = de.path().filename().string();
    std::transform(n.begin(), n.end(), n.begin(), [](unsigned char c) { return std::tolower(c); });
    if (n == lower) return de.path();
  }
  return std::nullopt;
}

// A `train/` + `test/` layout is used as given (subsampled per class);
// otherwise disjoint per-class subsets are drawn from one pool.
Split resolve_split(const ClassifyArgs& a) {
  if (!fs::is_directory(a.input)) throw UsageError("input is not a directory: " + a.input);
  const auto train_dir = child_named(a.input, "train");
  const auto test_dir = child_named(a.input, "test");
  Split split;
  if (train_dir && test_dir) {
    split.train = subsample(scan_dataset(*train_dir), a.train_per_class, derive_seed(a.seed, "train"));
    Dataset test = subsample(scan_dataset(*test_dir), a.test_per_class, derive_seed(a.seed, "test"));
    std::map<std::string, std::size_t> index;
    for (std::size_t c = 0; c < split.train.classes.size(); ++c) index[split.train.classes[c]] = c;
    split.test.classes = split.train.classes;
    for (auto item : test.items) {
      const auto it = index.find(test.classes[item.label]);
      if (it == index.end()) throw UsageError("test class missing from training data: " + test.classes[item.label]);
      item.label = it->second;
      split.test.items.push_back(item);
    }
  } else {
    split = split_fixed(scan_dataset(a.input), a.train_per_class, a.test_per_class, a.seed);
  }
  if (split.train.items.empty() || split.test.items.empty())
    throw EmptyDataError("no recordings available for training and testing under " + a.input);
  return split;
}

LabelledSet load_set(const Dataset& d, unsigned jobs) {
  std::vector<fs::path> paths;
  LabelledSet s;
  for (const auto& item : d.items) {
    paths.push_back(item.path);
    s.labels.push_back(item.label);
  }
  s.recordings = load_all(paths, jobs);
  return s;
}

std::string accuracy_csv(const std::vector<std::string>& classes, const Evaluation& hard,
                         const Evaluation* soft = nullptr) {
  std::string csv = soft ? "class,accuracy,soft_accuracy\n" : "class,accuracy\n";
  for (std::size_t c = 0; c < classes.size(); ++c) {
    csv += classes[c] + ',' + (std::isnan(hard.per_class[c]) ? "" : num(hard.per_class[c]));
    if (soft) csv += ',' + (std::isnan(soft->per_class[c]) ? "" : num(soft->per_class[c]));
    csv += '\n';
  }
  csv += "balanced," + num(hard.balanced);
  if (soft) csv += ',' + num(soft->balanced);
  return csv + '\n';
}

std::vector<Feature> parse_features(const std::string& list) {
  std::vector<Feature> out;
  std::stringstream ss(list);
  std::string name;
  while (std::getline(ss, name, ',')) {
    const auto f = parse_feature(name);
    if (!f) throw UsageError("unknown feature: " + name);
    out.push_back(*f);
  }
  if (out.empty()) throw UsageError("--feature needs at least one name");
  return out;
}

Evaluation run_knn(const ClassifyArgs& a, const Split& split, const LabelledSet& train, const LabelledSet& test,
                   unsigned jobs) {
  KnnModel model(a.k, parse_features(a.feature));
  for (std::size_t i = 0; i < train.recordings.size(); ++i)
    model.add(compute_features(train.recordings[i]), train.labels[i]);
  if (model.size() == 0) throw EmptyDataError("no training recording has the selected features defined");
  std::vector<std::optional<std::size_t>> pred(test.recordings.size());
  parallel_for(test.recordings.size(), jobs,
               [&](std::size_t i) { pred[i] = model.classify(compute_features(test.recordings[i])); });
  return evaluate(pred, test.labels, split.train.classes.size());
}

void dump_hfirst_kernels(const HfirstNetwork& net, const fs::path& dir) {
  fs::create_directories(dir);
  const int ks = net.params().s1.kernel[0];
  std::string s1 = "orientation,dy,dx,weight\n";
  for (std::size_t o = 0; o < net.s1_kernels().size(); ++o)
    for (int dy = 0; dy < ks; ++dy)
      for (int dx = 0; dx < ks; ++dx)
        s1 += std::to_string(o) + ',' + std::to_string(dy) + ',' + std::to_string(dx) + ',' +
              num(net.s1_kernels()[o][static_cast<std::size_t>(dy * ks + dx)]) + '\n';
  write_text_file(dir / "s1_kernels.csv", s1);
  const int orient = net.params().orientations;
  std::string s2 = "class,x,y,orientation,weight\n";
  for (std::size_t c = 0; c < net.s2_kernels().size(); ++c)
    for (int y = 0; y < net.c1_height(); ++y)
      for (int x = 0; x < net.c1_width(); ++x)
        for (int o = 0; o < orient; ++o)
          s2 += std::to_string(c) + ',' + std::to_string(x) + ',' + std::to_string(y) + ',' + std::to_string(o) +
                ',' + num(net.s2_kernels()[c][static_cast<std::size_t>((y * net.c1_width() + x) * orient + o)]) +
                '\n';
  write_text_file(dir / "s2_kernels.csv", s2);
}

std::pair<Evaluation, Evaluation> run_hfirst(const ClassifyArgs& a, const Split& split, const LabelledSet& train,
                                             const LabelledSet& test, unsigned jobs) {
  const EventStream& first = train.recordings.front();
  for (const auto* set : {&train, &test})
    for (const auto& r : set->recordings)
      if (r.width() != first.width() || r.height() != first.height())
        throw UsageError("HFIRST needs recordings of one frame size");
  HfirstParams params = HfirstParams::table(static_cast<int>(split.train.classes.size()));
  params.s1_weight_scale = a.s1_scale;
  params.s2_weight_l1 = a.s2_l1;
  if (a.polarity == "on") params.polarity = PolarityMode::OnOnly;
  else if (a.polarity == "off") params.polarity = PolarityMode::OffOnly;
  HfirstNetwork net(first.width(), first.height(), params);

  const std::size_t classes = split.train.classes.size();
  std::vector<std::vector<double>> c1(train.recordings.size());
  parallel_for(train.recordings.size(), jobs, [&](std::size_t i) { c1[i] = net.c1_counts(train.recordings[i]); });
  std::vector<std::vector<double>> sums(classes, std::vector<double>(net.c1_size(), 0.0));
  for (std::size_t i = 0; i < c1.size(); ++i)
    for (std::size_t j = 0; j < c1[i].size(); ++j) sums[train.labels[i]][j] += c1[i][j];
  try {
    net.set_s2_kernels(normalise_s2(std::move(sums), params.s2_weight_l1));
  } catch (const std::invalid_argument& e) {
    throw EmptyDataError(e.what());
  }
  if (!a.kernels_out.empty()) dump_hfirst_kernels(net, a.kernels_out);

  std::vector<std::optional<std::size_t>> hard(test.recordings.size());
  std::vector<double> credit(test.recordings.size());
  parallel_for(test.recordings.size(), jobs, [&](std::size_t i) {
    const auto counts = net.c2_counts(test.recordings[i]);
    hard[i] = classify_hard(counts);
    credit[i] = classify_soft(counts)[test.labels[i]];
  });
  return {evaluate(hard, test.labels, classes), evaluate_credit(credit, test.labels, classes)};
}

Evaluation run_skim(const ClassifyArgs& a, const Split& split, const LabelledSet& train, const LabelledSet& test,
                    unsigned jobs, std::ostream& err) {
  int w = 0, h = 0;
  for (const auto* set : {&train, &test})
    for (const auto& r : set->recordings) {
      w = std::max(w, r.width());
      h = std::max(h, r.height());
    }
  SkimConfig cfg;
  cfg.hidden = a.hidden;
  cfg.seed = a.seed;
  cfg.input_gain = a.skim_gain;
  cfg.two_channel = a.two_channel;
  cfg.downsample = a.downsample;
  SkimNetwork net(w, h, cfg);
  const std::size_t classes = split.train.classes.size();

  SkimTrainer trainer(cfg.hidden, classes, cfg);
  std::size_t truncated = 0;
  constexpr std::size_t kChunk = 32;
  std::vector<Eigen::MatrixXd> acts(kChunk);
  std::vector<char> cut(kChunk);
  for (std::size_t start = 0; start < train.recordings.size(); start += kChunk) {
    const std::size_t n = std::min(kChunk, train.recordings.size() - start);
    parallel_for(n, jobs, [&](std::size_t i) {
      bool t = false;
      acts[i] = net.forward(train.recordings[start + i], &t);
      cut[i] = t;
    });
    for (std::size_t i = 0; i < n; ++i) {
      trainer.add(acts[i], train.labels[start + i]);
      truncated += cut[i] ? 1 : 0;
    }
  }
  if (truncated) err << "warning: " << truncated << " training recordings truncated to " << cfg.window_ms << " ms\n";
  std::vector<std::string> warnings;
  net.set_output_weights(trainer.solve(&warnings));
  for (const auto& wmsg : warnings) err << "warning: " << wmsg << '\n';
  if (!a.weights_out.empty()) save_skim_weights(a.weights_out, net.output_weights());

  std::vector<std::optional<std::size_t>> pred(test.recordings.size());
  parallel_for(test.recordings.size(), jobs, [&](std::size_t i) { pred[i] = net.classify(test.recordings[i]); });
  return evaluate(pred, test.labels, classes);
}

int cmd_classify(const ClassifyArgs& a, unsigned jobs, std::ostream& out, std::ostream& err) {
  if (a.algo != "knn" && a.algo != "hfirst" && a.algo != "skim") throw UsageError("unknown algorithm: " + a.algo);
  if (a.algo == "knn") parse_features(a.feature);
  const Split split = resolve_split(a);
  for (const auto& w : split.warnings) err << "warning: " << w << '\n';
  const LabelledSet train = load_set(split.train, jobs);
  const LabelledSet test = load_set(split.test, jobs);
  out << "classes: " << split.train.classes.size() << ", train " << train.recordings.size() << ", test "
      << test.recordings.size() << '\n';

  std::string csv;
  if (a.algo == "knn") {
    const Evaluation ev = run_knn(a, split, train, test, jobs);
    out << "kNN (" << a.feature << ", k=" << a.k << ") balanced accuracy: " << num(ev.balanced) << '\n';
    csv = accuracy_csv(split.train.classes, ev);
  } else if (a.algo == "hfirst") {
    const auto [hard, soft] = run_hfirst(a, split, train, test, jobs);
    out << "HFIRST balanced accuracy: hard " << num(hard.balanced) << ", soft " << num(soft.balanced) << '\n';
    csv = accuracy_csv(split.train.classes, hard, &soft);
  } else {
    const Evaluation ev = run_skim(a, split, train, test, jobs, err);
    out << "SKIM (" << a.hidden << " hidden) balanced accuracy: " << num(ev.balanced) << '\n';
    csv = accuracy_csv(split.train.classes, ev);
  }
  if (!a.out.empty()) write_output(a.out, csv);
  else out << csv;
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Convert still images into event-camera recordings and analyse them."};
  app.name("saccadic");
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "Read options from a key=value file; command-line flags take precedence");
  unsigned jobs = default_jobs();
  app.add_option("--jobs,-j", jobs, "Worker threads")->check(CLI::Range(1u, 4096u));

  ConvertArgs conv;
  auto* convert = app.add_subcommand("convert", "Simulate saccades over an image tree");
  convert->add_option("--input", conv.input, "Source image directory")->required();
  convert->add_option("--output", conv.output, "Destination directory")->required();
  convert->add_option("--profile", conv.profile, "nmnist or ncaltech101")->capture_default_str();
  convert->add_option("--seed", conv.seed, "Noise seed")->capture_default_str();
  convert->add_flag("--force", conv.force, "Overwrite existing recordings");
  convert->add_option("--threshold", conv.threshold, "Log-intensity contrast threshold")->check(CLI::PositiveNumber);
  convert->add_option("--step-us", conv.step_us, "Simulation step")->check(CLI::PositiveNumber);
  convert->add_option("--noise-rate", conv.noise_rate, "Background events per pixel per second")
      ->check(CLI::NonNegativeNumber);
  convert->add_option("--noise-sigma", conv.noise_sigma, "Relative threshold mismatch")->check(CLI::NonNegativeNumber);
  convert->add_option("--noise-jitter", conv.noise_jitter, "Timestamp jitter, us")->check(CLI::NonNegativeNumber);
  convert->add_option("--ppd", conv.ppd, "Pixels per degree")->check(CLI::PositiveNumber);

  std::string input, out_path;
  auto* stats = app.add_subcommand("stats", "Per-recording statistics");
  stats->add_option("--input", input, "Recording or directory")->required();
  stats->add_option("--out", out_path, "Feature CSV");

  int length_exp = 22;
  std::uint64_t seed = 1;
  double max_hz = 0.0;
  auto* fft = app.add_subcommand("fft", "Temporal spectrum of concatenated recordings");
  fft->add_option("--input", input, "Recording or directory")->required();
  fft->add_option("--out", out_path, "Spectrum CSV")->required();
  fft->add_option("--length-exp", length_exp, "Signal length 2^n microseconds")->check(CLI::Range(16, 30));
  fft->add_option("--seed", seed, "Concatenation seed");
  fft->add_option("--max-hz", max_hz, "Only write bins up to this frequency (0 = all)")->check(CLI::NonNegativeNumber);

  double bin_ms = 1.0;
  auto* rates = app.add_subcommand("rates", "Event-rate profile across recordings");
  rates->add_option("--input", input, "Recording or directory")->required();
  rates->add_option("--out", out_path, "Rate CSV")->required();
  rates->add_option("--bin-ms", bin_ms, "Bin width")->check(CLI::PositiveNumber);

  double window_ms = 10.0;
  auto* render = app.add_subcommand("render", "Render a recording as colour frames");
  render->add_option("--input", input, "Recording (.bin)")->required();
  render->add_option("--out", out_path, "Frame directory")->required();
  render->add_option("--window-ms", window_ms, "Accumulation window")->check(CLI::PositiveNumber);

  ClassifyArgs cls;
  auto* classify = app.add_subcommand("classify", "Train and evaluate a classifier");
  classify->add_option("--input", cls.input, "Dataset root (class directories, or train/ and test/)")->required();
  classify->add_option("--algo", cls.algo, "knn, hfirst or skim")->capture_default_str();
  classify->add_option("--out", cls.out, "Accuracy CSV (stdout when omitted)");
  classify->add_option("--feature", cls.feature, "kNN statistic(s), comma-separated")->capture_default_str();
  classify->add_option("--k", cls.k, "kNN neighbours")->check(CLI::PositiveNumber)->capture_default_str();
  classify->add_option("--train-per-class", cls.train_per_class, "Training recordings per class (-1 = all)");
  classify->add_option("--test-per-class", cls.test_per_class, "Test recordings per class (-1 = all)");
  classify->add_option("--hidden", cls.hidden, "SKIM hidden neurons")->check(CLI::PositiveNumber);
  classify->add_option("--downsample", cls.downsample, "SKIM input pooling factor")->check(CLI::PositiveNumber);
  classify->add_flag("--two-channel", cls.two_channel, "SKIM: separate ON/OFF input channels");
  classify->add_option("--skim-gain", cls.skim_gain, "SKIM input weight gain")->check(CLI::PositiveNumber);
  classify->add_option("--s1-scale", cls.s1_scale, "HFIRST peak S1 weight, mV")->check(CLI::PositiveNumber);
  classify->add_option("--s2-l1", cls.s2_l1, "HFIRST l1 norm of each S2 kernel, mV")->check(CLI::PositiveNumber);
  classify->add_option("--polarity", cls.polarity, "HFIRST input polarity: merge, on or off")
      ->check(CLI::IsMember({"merge", "on", "off"}));
  classify->add_option("--weights-out", cls.weights_out, "SKIM output weights file");
  classify->add_option("--kernels-out", cls.kernels_out, "HFIRST kernel CSV directory");
  classify->add_option("--seed", cls.seed, "Split and network seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (*convert) return cmd_convert(conv, jobs, out, err);
    if (*stats) return cmd_stats(input, out_path, jobs, out);
    if (*fft) return cmd_fft(input, out_path, length_exp, seed, max_hz, out);
    if (*rates) return cmd_rates(input, out_path, bin_ms, out);
    if (*render) return cmd_render(input, out_path, window_ms, out);
    if (*classify) return cmd_classify(cls, jobs, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const EmptyDataError& e) {
    err << "error: " << e.what() << '\n';
    return kExitEmpty;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace saccadic
