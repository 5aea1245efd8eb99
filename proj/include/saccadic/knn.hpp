#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "saccadic/analysis.hpp"

namespace saccadic {

/// k-nearest-neighbour classifier over a subset of recording statistics.
///
/// Neighbours are ranked by Euclidean distance, ties in distance by training
/// order. The majority label wins; a tied vote goes to the label whose voters
/// have the smaller summed distance, then to the smaller label.
class KnnModel {
 public:
  KnnModel(std::size_t k, std::vector<Feature> features);

  /// Adds a training sample. Samples with undefined selected features are ignored.
  void add(const FeatureVector& fv, std::size_t label);
  void add_point(std::vector<double> point, std::size_t label);

  std::size_t size() const { return labels_.size(); }
  std::size_t k() const { return k_; }
  const std::vector<Feature>& features() const { return features_; }

  /// nullopt when a selected feature is undefined for the sample.
  std::optional<std::size_t> classify(const FeatureVector& fv) const;
  std::size_t classify_point(std::span<const double> point) const;

 private:
  std::size_t k_;
  std::vector<Feature> features_;
  std::vector<double> points_;  // row-major, features_.size() per sample
  std::vector<std::size_t> labels_;
};

struct Evaluation {
  std::vector<double> per_class;  ///< fraction correct per class; NaN for classes without test samples
  double balanced = 0.0;          ///< mean of per-class accuracy over classes present in the test set
  std::size_t refused = 0;
};

/// Balanced accuracy. A missing prediction counts as wrong.
Evaluation evaluate(std::span<const std::optional<std::size_t>> predictions, std::span<const std::size_t> truth,
                    std::size_t num_classes);

/// Balanced accuracy with fractional credit per sample (soft classifiers).
Evaluation evaluate_credit(std::span<const double> credit, std::span<const std::size_t> truth,
                           std::size_t num_classes);

}  // namespace saccadic
