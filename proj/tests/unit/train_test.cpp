#include <cmath>
#include <limits>
#include <sstream>

#include "doctest.h"
#include "support.hpp"
#include "yseg/train.hpp"

using namespace yseg;
using namespace yseg::test;

namespace {

RunConfig small_config() {
  RunConfig cfg;
  cfg.image_size = 32;
  cfg.crop_size = 32;
  cfg.batch_size = 2;
  cfg.num_images = 4;
  cfg.total_iters = 6;
  cfg.seed = 3;
  return cfg;
}

Dataset small_data(const RunConfig& cfg) {
  return synthetic_dataset(shapes_config(cfg), cfg.num_images, cfg.seed);
}

}  // namespace

TEST_CASE("initial loss is moderate") {
  const RunConfig cfg = small_config();
  const Dataset ds = small_data(cfg);
  Trainer t(cfg, ds);
  const TrainLogRow row = t.step();
  CHECK(row.iteration == 0);
  CHECK(row.total > 0.1);
  CHECK(row.total < 2.0);
  CHECK(row.total == doctest::Approx(row.boundary + row.segmentation).epsilon(1e-6));
  CHECK(row.lr == cfg.base_lr);
}

TEST_CASE("batches are rebuilt identically from the iteration") {
  const RunConfig cfg = small_config();
  const Dataset ds = small_data(cfg);
  const Batch a = make_batch(cfg, ds, 4), b = make_batch(cfg, ds, 4), c = make_batch(cfg, ds, 5);
  CHECK(a.images.to_vector() == b.images.to_vector());
  CHECK(a.boundaries.to_vector() == b.boundaries.to_vector());
  CHECK(a.labels == b.labels);
  CHECK(a.images.shape() == Shape{2, 3, 32, 32});
  CHECK(a.images.to_vector() != c.images.to_vector());
}

TEST_CASE("resume reproduces the loss trajectory exactly") {
  TempDir dir("resume");
  const RunConfig cfg = small_config();
  const Dataset ds = small_data(cfg);
  Trainer full(cfg, ds);
  const std::vector<TrainLogRow> want = full.run();
  REQUIRE(want.size() == 6);

  Trainer half(cfg, ds);
  half.run(nullptr, "", 3);
  half.save(dir.file("mid.ytc"));
  Trainer resumed(load_checkpoint(dir.file("mid.ytc")), ds);
  CHECK(resumed.iteration() == 3);
  const std::vector<TrainLogRow> rest = resumed.run();
  REQUIRE(rest.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) CHECK(rest[i] == want[3 + i]);

  // a rerun from scratch is bit-identical too
  Trainer again(cfg, ds);
  CHECK(again.run() == want);
}

TEST_CASE("non-finite loss names the offending tensor") {
  const RunConfig cfg = small_config();
  const Dataset ds = small_data(cfg);
  Trainer t(cfg, ds);
  fill(t.model().parameters().front(), std::numeric_limits<double>::quiet_NaN());
  try {
    t.step();
    FAIL("expected a non-finite error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::non_finite);
    const std::string what = e.what();
    CHECK(what.find("iteration 0") != std::string::npos);
    CHECK(what.find("first non-finite tensor is f1") != std::string::npos);
  }
}

TEST_CASE("log format") {
  TrainLogRow row{12, 0.5, 1.25, 0.5, 0.75, 0};
  const std::string line = format_row(row);
  const std::string header = log_header();
  CHECK(std::count(line.begin(), line.end(), '\t') == std::count(header.begin(), header.end(), '\t'));
  CHECK(line.rfind("12\t", 0) == 0);

  const RunConfig cfg = small_config();
  const Dataset ds = small_data(cfg);
  Trainer t(cfg, ds);
  std::ostringstream out;
  t.run(&out, "", 2);
  std::istringstream in(out.str());
  std::string l;
  std::vector<std::string> lines;
  while (std::getline(in, l)) lines.push_back(l);
  REQUIRE(lines.size() == 3);
  CHECK(lines[0] == log_header());
}

TEST_CASE("ground truth scored against itself is perfect") {
  const RunConfig cfg = small_config();
  const Dataset ds = small_data(cfg);
  const std::vector<LabelMap> gt = ds.labels();
  const EvalResult r = evaluate_predictions(gt, gt, cfg.num_classes, {3, 5});
  CHECK(r.iou.mean == 1.0);
  CHECK(r.pixel_accuracy == 1.0);
  REQUIRE(r.boundary.size() == 2);
  for (const BoundaryScore& s : r.boundary) CHECK(s.mean_f1 == 1.0);

  YModel model(model_config(cfg), 1);
  const std::vector<LabelMap> pred = predict_labels(model, ds.samples, 3);
  REQUIRE(pred.size() == ds.samples.size());
  const EvalResult e = evaluate(model, ds, {3});
  CHECK(e.iou.mean == evaluate_predictions(pred, gt, cfg.num_classes, {3}).iou.mean);
}
