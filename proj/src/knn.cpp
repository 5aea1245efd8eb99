#include "saccadic/knn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

namespace saccadic {

KnnModel::KnnModel(std::size_t k, std::vector<Feature> features) : k_(k), features_(std::move(features)) {
  if (k_ < 1) throw std::invalid_argument("k must be at least 1");
  if (features_.empty()) throw std::invalid_argument("kNN needs at least one feature");
}

void KnnModel::add(const FeatureVector& fv, std::size_t label) {
  std::vector<double> point;
  for (Feature f : features_) {
    if (!fv.defined(f)) return;
    point.push_back(fv.value(f));
  }
  add_point(std::move(point), label);
}

void KnnModel::add_point(std::vector<double> point, std::size_t label) {
  if (point.size() != features_.size()) throw std::invalid_argument("feature dimension mismatch");
  points_.insert(points_.end(), point.begin(), point.end());
  labels_.push_back(label);
}

std::optional<std::size_t> KnnModel::classify(const FeatureVector& fv) const {
  std::vector<double> point;
  for (Feature f : features_) {
    if (!fv.defined(f) || !std::isfinite(fv.value(f))) return std::nullopt;
    point.push_back(fv.value(f));
  }
  return classify_point(point);
}

std::size_t KnnModel::classify_point(std::span<const double> point) const {
  if (labels_.empty()) throw std::logic_error("kNN model has no training samples");
  const std::size_t dim = features_.size();
  std::vector<std::pair<double, std::size_t>> dist(labels_.size());
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    double d2 = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
      const double d = points_[i * dim + j] - point[j];
      d2 += d * d;
    }
    dist[i] = {std::sqrt(d2), i};
  }
  const std::size_t k = std::min(k_, dist.size());
  std::partial_sort(dist.begin(), dist.begin() + static_cast<long>(k), dist.end());

  struct Tally {
    std::size_t votes = 0;
    double distance = 0.0;
  };
  std::map<std::size_t, Tally> tally;
  for (std::size_t i = 0; i < k; ++i) {
    Tally& t = tally[labels_[dist[i].second]];
    ++t.votes;
    t.distance += dist[i].first;
  }
  auto best = tally.begin();
  for (auto it = std::next(tally.begin()); it != tally.end(); ++it) {
    if (it->second.votes > best->second.votes ||
        (it->second.votes == best->second.votes && it->second.distance < best->second.distance))
      best = it;
  }
  return best->first;
}

namespace {

Evaluation balance(const std::vector<double>& correct, const std::vector<double>& seen, std::size_t refused) {
  Evaluation ev;
  ev.refused = refused;
  ev.per_class.resize(seen.size(), std::numeric_limits<double>::quiet_NaN());
  double sum = 0.0;
  std::size_t present = 0;
  for (std::size_t c = 0; c < seen.size(); ++c) {
    if (seen[c] == 0.0) continue;
    ev.per_class[c] = correct[c] / seen[c];
    sum += ev.per_class[c];
    ++present;
  }
  ev.balanced = present ? sum / static_cast<double>(present) : 0.0;
  return ev;
}

}  // namespace

Evaluation evaluate(std::span<const std::optional<std::size_t>> predictions, std::span<const std::size_t> truth,
                    std::size_t num_classes) {
  if (predictions.size() != truth.size()) throw std::invalid_argument("prediction/label count mismatch");
  std::vector<double> correct(num_classes, 0.0), seen(num_classes, 0.0);
  std::size_t refused = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] >= num_classes) throw std::out_of_range("label outside class range");
    seen[truth[i]] += 1.0;
    if (!predictions[i]) ++refused;
    else if (*predictions[i] == truth[i]) correct[truth[i]] += 1.0;
  }
  return balance(correct, seen, refused);
}

Evaluation evaluate_credit(std::span<const double> credit, std::span<const std::size_t> truth,
                           std::size_t num_classes) {
  if (credit.size() != truth.size()) throw std::invalid_argument("credit/label count mismatch");
  std::vector<double> correct(num_classes, 0.0), seen(num_classes, 0.0);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] >= num_classes) throw std::out_of_range("label outside class range");
    seen[truth[i]] += 1.0;
    correct[truth[i]] += credit[i];
  }
  return balance(correct, seen, 0);
}

}  // namespace saccadic
