#include "yseg/train.hpp"

#include <cstdio>
#include <ostream>

#include "yseg/error.hpp"
#include "yseg/rng.hpp"

namespace yseg {

std::string log_header() { return "iter\tlr\tloss\tboundary\tsegmentation\taux"; }

std::string format_row(const TrainLogRow& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%llu\t%.9g\t%.9g\t%.9g\t%.9g\t%.9g",
                static_cast<unsigned long long>(r.iteration), r.lr, r.total, r.boundary,
                r.segmentation, r.aux);
  return buf;
}

Batch make_batch(const RunConfig& cfg, const Dataset& ds, std::uint64_t iteration) {
  Rng pick(child_seed(child_seed(cfg.seed, "batch"), iteration));
  const std::uint64_t aug_root = child_seed(cfg.seed, "augment");
  const AugmentConfig acfg = augment_config(cfg);
  std::vector<Image> images;
  Batch b;
  std::vector<SemanticBoundaryMap> bounds;
  for (int k = 0; k < cfg.batch_size; ++k) {
    const Sample& s = ds.samples[pick.below(ds.samples.size())];
    Augmented a = augment(s, acfg, child_seed(aug_root, iteration * cfg.batch_size + k),
                          &ds.frequencies);
    if (!images.empty()) {
      require(a.sample.image.height == images[0].height && a.sample.image.width == images[0].width,
              ErrorCode::config, "train: augmented samples differ in size; use a crop mode or batch_size 1");
    }
    bounds.push_back(boundary_targets(a.sample.labels, cfg.boundary_thickness, cfg.num_classes));
    images.push_back(std::move(a.sample.image));
    b.labels.push_back(std::move(a.sample.labels));
  }
  b.images = images_to_tensor(images, cfg.precision);
  b.boundaries = boundaries_to_tensor(bounds, cfg.precision);
  return b;
}

namespace {

void check_dataset(const RunConfig& cfg, const Dataset& ds) {
  require(ds.num_classes == cfg.num_classes, ErrorCode::config,
          "dataset has L = " + std::to_string(ds.num_classes) + " but config has L = " +
              std::to_string(cfg.num_classes));
  require(!ds.samples.empty(), ErrorCode::dataset, "train: empty dataset");
}

void first_non_finite(const YOutput& o, const LossTerms& loss, std::uint64_t iteration) {
  std::vector<std::pair<std::string, Tensor>> order;
  for (int i = 0; i < 5; ++i) order.emplace_back("f" + std::to_string(i + 1), o.pyramid.levels[i]);
  order.emplace_back("css", o.css);
  for (int i = 0; i < 3; ++i) order.emplace_back("s" + std::to_string(i + 1), o.s.s[i]);
  order.emplace_back("nabla_f5", o.nabla_f5);
  order.emplace_back("upsampled", o.upsampled);
  order.emplace_back("f_edges", o.f_edges);
  order.emplace_back("l_adapt", o.l_adapt);
  order.emplace_back("sb", o.sb);
  order.emplace_back("css_prime", o.css_prime);
  order.emplace_back("a_map", o.a_map);
  order.emplace_back("final", o.final);
  order.emplace_back("loss.boundary", loss.boundary);
  order.emplace_back("loss.segmentation", loss.segmentation);
  order.emplace_back("loss.aux", loss.aux);
  order.emplace_back("loss.total", loss.total);
  for (const auto& [name, t] : order) {
    if (t.defined() && !t.all_finite()) {
      throw Error(ErrorCode::non_finite,
                  "iteration " + std::to_string(iteration) + ": first non-finite tensor is " + name);
    }
  }
}

}  // namespace

Trainer::Trainer(const RunConfig& cfg, const Dataset& ds)
    : cfg_(cfg),
      ds_(ds),
      model_((validate(cfg), model_config(cfg)), child_seed(cfg.seed, "init")),
      opt_(model_.parameters(), sgd_config(cfg)) {
  check_dataset(cfg_, ds_);
}

Trainer::Trainer(const LoadedCheckpoint& ckpt, const Dataset& ds) : Trainer(ckpt.config, ds) {
  restore(ckpt, model_, &opt_);
  iteration_ = ckpt.iteration;
}

TrainLogRow Trainer::step() {
  require(iteration_ < static_cast<std::uint64_t>(cfg_.total_iters), ErrorCode::invalid_argument,
          "train: already at total_iters");
  const Batch b = make_batch(cfg_, ds_, iteration_);
  const YOutput out = model_.forward(b.images, Mode::train);
  const LossTerms loss =
      multi_task_loss(out.final, out.sb, b.labels, b.boundaries, loss_weights(cfg_), out.css);
  if (!loss.total.all_finite()) first_non_finite(out, loss, iteration_);

  opt_.zero_grad();
  backward(loss.total);
  const double lr = poly_lr(cfg_.base_lr, static_cast<long>(iteration_), cfg_.total_iters, cfg_.power);
  opt_.step(lr);

  TrainLogRow row;
  row.iteration = iteration_;
  row.lr = lr;
  row.total = loss.total.item();
  row.boundary = loss.boundary.defined() ? loss.boundary.item() : 0.0;
  row.segmentation = loss.segmentation.defined() ? loss.segmentation.item() : 0.0;
  row.aux = loss.aux.defined() ? loss.aux.item() : 0.0;
  ++iteration_;
  return row;
}

void Trainer::save(const std::string& path) const {
  save_checkpoint(path, cfg_, iteration_, model_, &opt_);
}

std::vector<TrainLogRow> Trainer::run(std::ostream* log, const std::string& checkpoint_path,
                                      std::uint64_t until) {
  const auto total = static_cast<std::uint64_t>(cfg_.total_iters);
  if (until == 0 || until > total) until = total;
  std::vector<TrainLogRow> rows;
  if (log && iteration_ == 0) *log << log_header() << '\n';
  while (iteration_ < until) {
    rows.push_back(step());
    if (log) *log << format_row(rows.back()) << '\n' << std::flush;
    if (!checkpoint_path.empty() && cfg_.checkpoint_every > 0 &&
        iteration_ % static_cast<std::uint64_t>(cfg_.checkpoint_every) == 0) {
      save(checkpoint_path);
    }
  }
  if (!checkpoint_path.empty()) save(checkpoint_path);
  return rows;
}

std::vector<LabelMap> predict_labels(YModel& model, const std::vector<Sample>& samples, int batch) {
  NoGradGuard no_grad;
  std::vector<LabelMap> out;
  const Precision p = model.config().precision;
  std::size_t i = 0;
  while (i < samples.size()) {
    // Consecutive same-sized images share a forward pass.
    std::vector<Image> images{samples[i].image};
    for (++i; i < samples.size() && static_cast<int>(images.size()) < batch; ++i) {
      if (samples[i].image.height != images[0].height || samples[i].image.width != images[0].width) {
        break;
      }
      images.push_back(samples[i].image);
    }
    const YOutput o = model.forward(images_to_tensor(images, p), Mode::eval);
    for (LabelMap& m : argmax_labels(o.final)) out.push_back(std::move(m));
  }
  return out;
}

EvalResult evaluate_predictions(const std::vector<LabelMap>& pred, const std::vector<LabelMap>& gt,
                                int num_classes, const std::vector<int>& thicknesses,
                                bool include_background) {
  require(pred.size() == gt.size(), ErrorCode::invalid_argument,
          "evaluate: prediction and ground-truth counts differ");
  EvalResult r;
  r.confusion = ConfusionMatrix(num_classes);
  std::vector<BoundaryAccumulator> acc;
  for (int t : thicknesses) acc.emplace_back(num_classes, t);
  for (std::size_t i = 0; i < gt.size(); ++i) {
    r.confusion += confusion(pred[i], gt[i], num_classes);
    for (auto& a : acc) a.add(pred[i], gt[i]);
  }
  r.iou = miou(r.confusion, include_background);
  for (const auto& a : acc) r.boundary.push_back(a.score());
  std::uint64_t diag = 0;
  for (int c = 0; c < num_classes; ++c) diag += r.confusion.at(c, c);
  const std::uint64_t total = r.confusion.total();
  r.pixel_accuracy = total ? static_cast<double>(diag) / total : 0.0;
  return r;
}

EvalResult evaluate(YModel& model, const Dataset& ds, const std::vector<int>& thicknesses,
                    bool include_background) {
  require(model.config().num_classes == ds.num_classes, ErrorCode::config,
          "model has L = " + std::to_string(model.config().num_classes) + " but dataset has L = " +
              std::to_string(ds.num_classes));
  return evaluate_predictions(predict_labels(model, ds.samples), ds.labels(), ds.num_classes,
                              thicknesses, include_background);
}

}  // namespace yseg
