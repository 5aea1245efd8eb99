#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>

#include "saccadic/skim.hpp"

using namespace saccadic;

namespace {

SkimConfig small(int hidden = 40, std::uint64_t seed = 3) {
  SkimConfig c;
  c.hidden = hidden;
  c.seed = seed;
  return c;
}

EventStream random_recording(std::uint64_t seed, int events = 300, int x_lo = 0, int x_hi = 33) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> x(x_lo, x_hi), y(0, 33);
  std::uniform_int_distribution<std::uint32_t> t(0, 299999);
  std::vector<Event> ev;
  for (int i = 0; i < events; ++i)
    ev.emplace_back(static_cast<std::uint8_t>(x(rng)), static_cast<std::uint8_t>(y(rng)),
                    i % 2 ? Polarity::On : Polarity::Off, t(rng));
  std::stable_sort(ev.begin(), ev.end(), [](const Event& a, const Event& b) { return a.timestamp < b.timestamp; });
  return EventStream(ev, 34, 34, 300000);
}

}  // namespace

TEST_CASE("alpha kernel shape") {
  CHECK(alpha_kernel(3.0, 5.0, 10.0) == 0.0);
  CHECK(alpha_kernel(5.0, 5.0, 10.0) == 0.0);
  CHECK(alpha_kernel(15.0, 5.0, 10.0) == doctest::Approx(1.0));
  CHECK(alpha_kernel(14.0, 5.0, 10.0) < 1.0);
  CHECK(alpha_kernel(16.0, 5.0, 10.0) < 1.0);
  CHECK(alpha_kernel(5.0 + kAlphaSupportTaus * 10.0, 5.0, 10.0) < 1e-3);
  CHECK(alpha_kernel(5.0 + 10.0 * 10.0, 5.0, 10.0) > 1e-3);
}

TEST_CASE("sampled delays and time constants keep every kernel inside the window") {
  const SkimNetwork net(34, 34, SkimConfig{});
  CHECK(net.hidden() == 500);
  CHECK(net.input_channels() == 34 * 34);
  for (int n = 0; n < net.hidden(); ++n) {
    REQUIRE(net.tau(n) >= 5.0);
    REQUIRE(net.tau(n) <= 30.0);
    REQUIRE(net.delay(n) >= 0);
    REQUIRE(net.delay(n) <= 200);
    REQUIRE(net.delay(n) + kAlphaSupportTaus * net.tau(n) <= 316.0);
    REQUIRE(alpha_kernel(316.0, net.delay(n), net.tau(n)) < 1e-3);
  }
  const double bound = 1.0 / std::sqrt(34.0 * 34.0);
  CHECK(net.input_weights().cwiseAbs().maxCoeff() <= bound);

  SkimConfig bad;
  bad.tau_max_ms = 40.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = SkimConfig{};
  bad.hidden = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("no input leaves every activation at one half") {
  const SkimNetwork net(34, 34, small());
  const Eigen::MatrixXd a = net.forward(EventStream({}, 34, 34, 300000));
  CHECK(a.rows() == 316);
  CHECK(a.cols() == 40);
  CHECK((a.array() == 0.5).all());
}

TEST_CASE("an impulse peaks at delay plus tau") {
  const SkimNetwork net(34, 34, small());
  const std::uint32_t t0 = 20;
  const EventStream s({Event(7, 9, Polarity::On, t0 * 1000 + 400)}, 34, 34, 300000);
  const Eigen::MatrixXd drive = net.drive(s);
  const int ch = net.channel_of(s.events()[0]);
  for (int n = 0; n < net.hidden(); ++n) {
    Eigen::Index peak = 0;
    drive.col(n).cwiseAbs().maxCoeff(&peak);
    const double expected = t0 + net.delay(n) + net.tau(n);
    REQUIRE(std::abs(static_cast<double>(peak) - expected) <= 1.0);
    REQUIRE(std::abs(drive(peak, n)) <= std::abs(net.input_weights()(ch, n)) + 1e-12);
  }
}

TEST_CASE("recursive filtering matches direct convolution") {
  const SkimNetwork net(34, 34, small(25));
  const EventStream s = random_recording(5);
  const Eigen::MatrixXd drive = net.drive(s);
  const auto bins = net.bin_input(s);
  Eigen::MatrixXd current = Eigen::MatrixXd::Zero(316, 25);
  for (int t = 0; t < 316; ++t)
    for (const auto& [c, count] : bins[static_cast<std::size_t>(t)]) current.row(t) += count * net.input_weights().row(c);
  for (int n = 0; n < 25; ++n)
    for (int t = 0; t < 316; ++t) {
      double ref = 0.0;
      for (int u = 0; u <= t; ++u) ref += current(u, n) * alpha_kernel(t - u, net.delay(n), net.tau(n));
      REQUIRE(drive(t, n) == doctest::Approx(ref).epsilon(1e-9).scale(1.0));
    }
}

TEST_CASE("activations lie in (0, 1) and move away from one half as weights grow") {
  SkimNetwork net(34, 34, small());
  const EventStream s = random_recording(6, 2000);
  const Eigen::MatrixXd a1 = net.forward(s);
  CHECK((a1.array() > 0.0).all());
  CHECK((a1.array() < 1.0).all());
  net.scale_input_weights(2.0);
  const Eigen::MatrixXd a2 = net.forward(s);
  for (Eigen::Index i = 0; i < a1.size(); ++i) {
    const double d1 = a1.data()[i] - 0.5, d2 = a2.data()[i] - 0.5;
    REQUIRE(std::abs(d2) >= std::abs(d1));
    REQUIRE(d1 * d2 >= 0.0);
  }
}

TEST_CASE("input binning, channels and truncation") {
  SkimConfig two = small();
  two.two_channel = true;
  two.downsample = 2;
  const SkimNetwork net(34, 34, two);
  CHECK(net.input_channels() == 17 * 17 * 2);
  CHECK(net.channel_of(Event(3, 5, Polarity::On, 0)) == 2 * (2 * 17 + 1) + 1);
  CHECK(net.channel_of(Event(3, 5, Polarity::Off, 0)) == 2 * (2 * 17 + 1));

  const EventStream s({Event(0, 0, Polarity::On, 10), Event(1, 1, Polarity::On, 999), Event(0, 0, Polarity::On, 1000)},
                      34, 34, 2000);
  bool cut = true;
  const auto bins = net.bin_input(s, &cut);
  CHECK_FALSE(cut);
  REQUIRE(bins[0].size() == 1);
  CHECK(bins[0][0].second == 2.0);
  CHECK(bins[1].size() == 1);

  const EventStream longer({Event(0, 0, Polarity::On, 400000)}, 34, 34, 400001);
  net.bin_input(longer, &cut);
  CHECK(cut);
  const SkimNetwork plain(34, 34, small());
  CHECK_NOTHROW(plain.forward(EventStream({Event(27, 27, Polarity::On, 5)}, 28, 28, 300000)));
  CHECK_THROWS_AS(plain.forward(EventStream({}, 40, 40, 10)), std::invalid_argument);
}

TEST_CASE("target traces") {
  const SkimConfig c;
  const Eigen::MatrixXd y = skim_target(c, 2, 4);
  CHECK(y.rows() == 316);
  CHECK(y.sum() == 10.0);
  CHECK(y.col(2).tail(10).minCoeff() == 1.0);
  CHECK(y(305, 2) == 0.0);
  CHECK_THROWS(skim_target(c, 4, 4));
}

TEST_CASE("incremental training agrees with a batch QR solve") {
  const SkimConfig cfg = small(30);
  const SkimNetwork net(34, 34, cfg);
  const std::size_t classes = 3;
  SkimTrainer trainer(30, classes, cfg);
  Eigen::MatrixXd h_all(50 * 316, 30), y_all(50 * 316, static_cast<Eigen::Index>(classes));
  std::vector<Eigen::MatrixXd> hs;
  for (int i = 0; i < 50; ++i) {
    const std::size_t label = static_cast<std::size_t>(i) % classes;
    hs.push_back(net.forward(random_recording(100 + static_cast<std::uint64_t>(i), 400)));
    trainer.add(hs.back(), label);
    h_all.middleRows(i * 316, 316) = hs.back();
    y_all.middleRows(i * 316, 316) = skim_target(cfg, label, classes);
  }
  CHECK(trainer.samples() == 50);
  const Eigen::MatrixXd w = trainer.solve();
  const Eigen::MatrixXd ref = ridge_solve_qr(h_all, y_all, cfg.ridge);
  CHECK((w - ref).cwiseAbs().maxCoeff() <= 1e-6 * std::max(1.0, ref.cwiseAbs().maxCoeff()));

  // Order of the training samples does not matter.
  SkimTrainer reversed(30, classes, cfg);
  for (int i = 49; i >= 0; --i) reversed.add(hs[static_cast<std::size_t>(i)], static_cast<std::size_t>(i) % classes);
  CHECK((reversed.solve() - w).cwiseAbs().maxCoeff() <= 1e-9 * std::max(1.0, w.cwiseAbs().maxCoeff()));

  CHECK(ridge_solve_qr(h_all, Eigen::MatrixXd::Zero(h_all.rows(), 2), 1e-4).isZero());
  CHECK_THROWS(SkimTrainer(30, classes, cfg).solve());
  CHECK_THROWS_AS(trainer.add(Eigen::MatrixXd::Zero(10, 30), 0), std::invalid_argument);
  CHECK_THROWS_AS(trainer.add(hs[0], 3), std::out_of_range);
}

TEST_CASE("two recordings are memorised") {
  const SkimConfig cfg = small(200);
  SkimNetwork net(34, 34, cfg);
  const EventStream a = random_recording(1, 500, 0, 10), b = random_recording(2, 500, 23, 33);
  SkimTrainer t(200, 2, cfg);
  t.add(net.forward(a), 0);
  t.add(net.forward(b), 1);
  net.set_output_weights(t.solve());
  CHECK(net.trained());
  CHECK(net.classify(a) == 0);
  CHECK(net.classify(b) == 1);
  CHECK_THROWS_AS(net.set_output_weights(Eigen::MatrixXd::Zero(3, 2)), std::invalid_argument);
}

TEST_CASE("readout ties go to the lowest class") {
  const SkimNetwork net(34, 34, small());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(316, 3);
  out.col(1).setConstant(0.7);
  out.col(2).setConstant(0.7);
  CHECK(net.classify_outputs(out) == 1);
  // Only the final pulse rows count.
  out(0, 0) = 5.0;
  CHECK(net.classify_outputs(out) == 1);
  out(315, 0) = 5.0;
  CHECK(net.classify_outputs(out) == 0);
  CHECK_THROWS_AS(net.outputs(EventStream({}, 34, 34, 10)), std::logic_error);
}

TEST_CASE("weight file round trip") {
  const auto dir = std::filesystem::temp_directory_path() / "saccadic_skim_tests";
  std::filesystem::create_directories(dir);
  Eigen::MatrixXd w(3, 2);
  w << 1.5, -2.0, 0.0, 1e-300, -0.0, 3.25;
  save_skim_weights(dir / "w.skim", w);
  const auto bytes = read_file_bytes(dir / "w.skim");
  CHECK(bytes.size() == 16 + 6 * 8);
  CHECK(std::string(bytes.begin(), bytes.begin() + 8) == "SKIMOUT1");
  CHECK(bytes[8] == 3);
  CHECK(bytes[12] == 2);
  CHECK(load_skim_weights(dir / "w.skim") == w);

  write_file_bytes(dir / "bad.skim", std::vector<std::uint8_t>{'S', 'K', 'I', 'M'});
  CHECK_THROWS(load_skim_weights(dir / "bad.skim"));
  auto cut = bytes;
  cut.pop_back();
  write_file_bytes(dir / "cut.skim", cut);
  CHECK_THROWS(load_skim_weights(dir / "cut.skim"));
}
