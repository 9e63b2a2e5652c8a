#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "yseg/image.hpp"

namespace yseg {

/// counts[gt][pred] over pixels whose ground truth is not ignore.
struct ConfusionMatrix {
  int num_classes = 0;
  std::vector<std::uint64_t> counts;

  ConfusionMatrix() = default;
  explicit ConfusionMatrix(int l)
      : num_classes(l), counts(static_cast<std::size_t>(l) * l, 0) {}

  std::uint64_t at(int gt, int pred) const {
    return counts[static_cast<std::size_t>(gt) * num_classes + pred];
  }
  std::uint64_t total() const;
  ConfusionMatrix& operator+=(const ConfusionMatrix& other);
  bool operator==(const ConfusionMatrix&) const = default;
};

ConfusionMatrix confusion(const LabelMap& pred, const LabelMap& gt, int num_classes);

struct IouResult {
  std::vector<double> per_class;  // NaN where the union is empty
  double mean = 0.0;              // NaN if no class participates
};

IouResult miou(const ConfusionMatrix& m, bool include_background);

struct BoundaryScore {
  int thickness = 0;
  std::vector<double> precision;
  std::vector<double> recall;
  std::vector<double> f1;
  std::vector<bool> present;  // class has ground-truth pixels
  double mean_precision = 0.0;
  double mean_recall = 0.0;
  double mean_f1 = 0.0;  // over present classes
};

/// Contour-matching tallies, summed over images before scoring.
class BoundaryAccumulator {
 public:
  BoundaryAccumulator(int num_classes, int thickness);

  /// Predictions under ignored ground truth are dropped before contours are
  /// extracted.
  void add(const LabelMap& pred, const LabelMap& gt);
  BoundaryScore score() const;

 private:
  int num_classes_;
  int thickness_;
  std::vector<std::uint64_t> pred_matched_, pred_total_, gt_matched_, gt_total_;
  std::vector<bool> present_;
};

/// Per class, a predicted contour pixel is matched when it lies within
/// Euclidean distance `thickness` of a ground-truth contour pixel of the same
/// class; recall is the symmetric count. An empty contour set scores 1 on its
/// own side (both empty gives P = R = 1).
BoundaryScore f1_boundary(const LabelMap& pred, const LabelMap& gt, int num_classes,
                          int thickness);

/// Tab-separated table: header, one row per class, then `mean`.
void write_report(std::ostream& out, const IouResult& iou, const std::vector<BoundaryScore>& scores,
                  const std::vector<std::string>& class_names = {});

}  // namespace yseg
