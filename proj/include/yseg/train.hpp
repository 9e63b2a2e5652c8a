#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "yseg/checkpoint.hpp"
#include "yseg/dataset.hpp"
#include "yseg/metrics.hpp"

namespace yseg {

struct TrainLogRow {
  std::uint64_t iteration = 0;
  double lr = 0;
  double total = 0;
  double boundary = 0;
  double segmentation = 0;
  double aux = 0;

  bool operator==(const TrainLogRow&) const = default;
};

/// Header and rows of the training log (tab-separated).
std::string log_header();
std::string format_row(const TrainLogRow& row);

struct Batch {
  Tensor images;
  std::vector<LabelMap> labels;
  Tensor boundaries;
};

/// Batch for iteration `iteration`: sample indices from the "batch" stream,
/// per-sample augmentation from the "augment" stream, both keyed by
/// (root seed, iteration), so any iteration can be rebuilt in isolation.
Batch make_batch(const RunConfig& cfg, const Dataset& ds, std::uint64_t iteration);

class Trainer {
 public:
  Trainer(const RunConfig& cfg, const Dataset& ds);
  /// Continues from a checkpoint; its config replaces the constructor's.
  Trainer(const LoadedCheckpoint& ckpt, const Dataset& ds);

  /// One iteration. Throws ErrorCode::non_finite naming the first non-finite
  /// tensor when the loss is not finite.
  TrainLogRow step();

  /// Runs until `until` (default total_iters), writing log rows to `log` and
  /// checkpoints to `checkpoint_path` every checkpoint_every iterations and
  /// at the end.
  std::vector<TrainLogRow> run(std::ostream* log = nullptr, const std::string& checkpoint_path = "",
                               std::uint64_t until = 0);

  void save(const std::string& path) const;

  std::uint64_t iteration() const { return iteration_; }
  const RunConfig& config() const { return cfg_; }
  YModel& model() { return model_; }
  SgdOptimizer& optimizer() { return opt_; }

 private:
  RunConfig cfg_;
  const Dataset& ds_;
  YModel model_;
  SgdOptimizer opt_;
  std::uint64_t iteration_ = 0;
};

struct EvalResult {
  ConfusionMatrix confusion;
  IouResult iou;
  std::vector<BoundaryScore> boundary;  // one per thickness
  double pixel_accuracy = 0;
};

/// Eval-mode argmax of the final scores, `batch` images at a time.
std::vector<LabelMap> predict_labels(YModel& model, const std::vector<Sample>& samples,
                                     int batch = 8);

EvalResult evaluate_predictions(const std::vector<LabelMap>& pred, const std::vector<LabelMap>& gt,
                                int num_classes, const std::vector<int>& thicknesses,
                                bool include_background = true);

EvalResult evaluate(YModel& model, const Dataset& ds, const std::vector<int>& thicknesses,
                    bool include_background = true);

}  // namespace yseg
