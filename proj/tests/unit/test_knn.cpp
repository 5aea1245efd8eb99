#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "saccadic/knn.hpp"

using namespace saccadic;

namespace {

// Brute-force reference: stable sort by distance, count votes, break ties by
// summed distance then label.
std::size_t reference_knn(const std::vector<std::vector<double>>& pts, const std::vector<std::size_t>& labels,
                          const std::vector<double>& q, std::size_t k) {
  std::vector<std::size_t> order(pts.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  auto dist = [&](std::size_t i) {
    double s = 0.0;
    for (std::size_t j = 0; j < q.size(); ++j) s += (pts[i][j] - q[j]) * (pts[i][j] - q[j]);
    return std::sqrt(s);
  };
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return dist(a) < dist(b); });
  std::size_t classes = *std::max_element(labels.begin(), labels.end()) + 1;
  std::vector<std::size_t> votes(classes, 0);
  std::vector<double> sum(classes, 0.0);
  for (std::size_t i = 0; i < std::min(k, order.size()); ++i) {
    ++votes[labels[order[i]]];
    sum[labels[order[i]]] += dist(order[i]);
  }
  std::size_t best = 0;
  for (std::size_t c = 1; c < classes; ++c)
    if (votes[c] > votes[best] || (votes[c] == votes[best] && votes[c] > 0 && sum[c] < sum[best])) best = c;
  return best;
}

}  // namespace

TEST_CASE("k = 1 picks the nearest sample") {
  KnnModel m(1, {Feature::MeanX});
  m.add_point({1.0}, 0);
  m.add_point({5.0}, 1);
  m.add_point({9.0}, 2);
  const std::vector<double> q1{4.0}, q2{8.0}, q3{-3.0};
  CHECK(m.classify_point(q1) == 1);
  CHECK(m.classify_point(q2) == 2);
  CHECK(m.classify_point(q3) == 0);
  // Equidistant: first in training order.
  const std::vector<double> mid{3.0};
  CHECK(m.classify_point(mid) == 0);
}

TEST_CASE("majority vote with distance and label tie breaks") {
  KnnModel m(3, {Feature::MeanX, Feature::MeanY});
  m.add_point({0.0, 0.0}, 1);
  m.add_point({1.0, 0.0}, 1);
  m.add_point({0.0, 0.5}, 0);
  const std::vector<double> q{0.1, 0.1};
  CHECK(m.classify_point(q) == 1);

  KnnModel even(2, {Feature::MeanX});
  even.add_point({1.0}, 3);
  even.add_point({-2.0}, 2);
  const std::vector<double> zero{0.0};
  CHECK(even.classify_point(zero) == 3);  // one vote each, smaller distance
  KnnModel tied(2, {Feature::MeanX});
  tied.add_point({1.0}, 3);
  tied.add_point({-1.0}, 2);
  CHECK(tied.classify_point(zero) == 2);  // equal distance, smaller label
}

TEST_CASE("single-class training data always predicts that class") {
  KnnModel m(10, {Feature::TotalEvents});
  for (int i = 0; i < 5; ++i) m.add_point({static_cast<double>(i)}, 4);
  const std::vector<double> q{100.0};
  CHECK(m.classify_point(q) == 4);
}

TEST_CASE("agrees with a brute-force reference") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> lab(0, 4);
  for (std::size_t k : {1u, 3u, 10u}) {
    std::vector<std::vector<double>> pts;
    std::vector<std::size_t> labels;
    KnnModel m(k, {Feature::MeanX, Feature::StdY});
    for (int i = 0; i < 200; ++i) {
      // Integer-valued coordinates create plenty of exact distance ties.
      pts.push_back({std::round(3 * g(rng)), std::round(3 * g(rng))});
      labels.push_back(lab(rng));
      m.add_point(pts.back(), labels.back());
    }
    for (int i = 0; i < 200; ++i) {
      const std::vector<double> q{std::round(3 * g(rng)), std::round(3 * g(rng))};
      REQUIRE(m.classify_point(q) == reference_knn(pts, labels, q, k));
    }
  }
}

TEST_CASE("predictions are invariant to uniform scaling and translation") {
  std::mt19937_64 rng(23);
  std::normal_distribution<double> g(0.0, 1.0);
  KnnModel a(5, {Feature::MeanX, Feature::MeanY}), b(5, {Feature::MeanX, Feature::MeanY});
  for (int i = 0; i < 100; ++i) {
    const double x = g(rng), y = g(rng);
    const std::size_t label = static_cast<std::size_t>(i % 3);
    a.add_point({x, y}, label);
    // Power-of-two scale and a dyadic shift keep the arithmetic exact.
    b.add_point({x * 8.0 + 16.0, y * 8.0 - 4.0}, label);
  }
  for (int i = 0; i < 300; ++i) {
    const double x = g(rng), y = g(rng);
    const std::vector<double> qa{x, y}, qb{x * 8.0 + 16.0, y * 8.0 - 4.0};
    REQUIRE(a.classify_point(qa) == b.classify_point(qb));
  }
}

TEST_CASE("undefined features are skipped in training and refused in prediction") {
  KnnModel m(1, {Feature::MeanX});
  FeatureVector empty;
  m.add(empty, 0);
  CHECK(m.size() == 0);
  FeatureVector fv;
  fv.positions_defined = true;
  fv.mean_x = 3.0;
  m.add(fv, 2);
  CHECK(m.size() == 1);
  CHECK(m.classify(empty) == std::nullopt);
  CHECK(m.classify(fv) == 2);

  KnnModel totals(1, {Feature::TotalEvents});
  totals.add(empty, 1);
  CHECK(totals.size() == 1);

  CHECK_THROWS_AS(KnnModel(0, {Feature::MeanX}), std::invalid_argument);
  CHECK_THROWS_AS(KnnModel(1, {}), std::invalid_argument);
  CHECK_THROWS_AS(m.add_point({1.0, 2.0}, 0), std::invalid_argument);
  const std::vector<double> q{0.0};
  CHECK_THROWS(KnnModel(1, {Feature::MeanX}).classify_point(q));
}

TEST_CASE("balanced accuracy") {
  const std::vector<std::optional<std::size_t>> pred{0, 0, 1, std::nullopt, 1, 1};
  const std::vector<std::size_t> truth{0, 0, 0, 0, 1, 1};
  const Evaluation e = evaluate(pred, truth, 3);
  CHECK(e.per_class[0] == 0.5);
  CHECK(e.per_class[1] == 1.0);
  CHECK(std::isnan(e.per_class[2]));
  CHECK(e.balanced == 0.75);
  CHECK(e.refused == 1);

  const std::vector<double> credit{1.0, 0.5, 0.0, 0.0, 0.25, 0.25};
  CHECK(evaluate_credit(credit, truth, 2).balanced == doctest::Approx((1.5 / 4 + 0.25) / 2));

  const std::vector<std::size_t> bad{0, 0, 0, 0, 0, 7};
  CHECK_THROWS(evaluate(pred, bad, 3));
  const std::vector<std::size_t> short_truth{0};
  CHECK_THROWS(evaluate(pred, short_truth, 3));
}

TEST_CASE("constant features give chance balanced accuracy") {
  KnnModel m(10, {Feature::MaxX});
  for (std::size_t c = 0; c < 10; ++c)
    for (int i = 0; i < 20; ++i) m.add_point({33.0}, c);
  std::vector<std::optional<std::size_t>> pred;
  std::vector<std::size_t> truth;
  const std::vector<double> q{33.0};
  for (std::size_t c = 0; c < 10; ++c)
    for (int i = 0; i < 20; ++i) {
      pred.push_back(m.classify_point(q));
      truth.push_back(c);
    }
  CHECK(evaluate(pred, truth, 10).balanced == doctest::Approx(0.1));
}
