// Acceptance run: one PASS/FAIL line per criterion on stdout, progress on
// stderr. Exit status is nonzero when any selected criterion fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "oracles.hpp"
#include "support.hpp"
#include "yseg/boundary.hpp"
#include "yseg/fusion.hpp"
#include "yseg/gradcheck.hpp"
#include "yseg/inspect.hpp"
#include "yseg/train.hpp"

namespace fs = std::filesystem;
using namespace yseg;
using namespace yseg::test;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v, int digits = 4) {
  std::ostringstream s;
  s.precision(digits);
  s << v;
  return s.str();
}

// ---------------------------------------------------------------- 1

Outcome gradient_fidelity() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<GradcheckResult> results = gradcheck_suite(7);
  const double secs = seconds_since(t0);
  Outcome o{secs < 300.0, ""};
  double worst = 0;
  std::size_t composite_params = 0;
  std::string failed;
  for (const GradcheckResult& r : results) {
    worst = std::max(worst, r.max_rel_error);
    if (r.tolerance > 1e-4 || !r.passed()) {
      o.pass = false;
      failed += " " + r.name;
    }
    if (r.name == "y_model_multi_task_loss") composite_params = r.checked + r.skipped;
  }
  o.pass = o.pass && composite_params > 0 && composite_params <= 5000;
  o.detail = std::to_string(results.size()) + " checks, worst rel error " + fmt(worst, 3) + ", full model " +
             std::to_string(composite_params) + " params, " + fmt(secs, 3) + " s" +
             (failed.empty() ? "" : ", failed:" + failed);
  return o;
}

// ---------------------------------------------------------------- 2

Outcome oracle_equivalence() {
  std::size_t comparisons = 0, mismatches = 0;
  auto expect = [&](bool ok) {
    ++comparisons;
    mismatches += !ok;
  };
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const WeightMap wm = random_weights(16, 16, 1000 + seed, true);
    const IntegralTable t = integral_table(wm);
    for (int y = 0; y <= 16; ++y)
      for (int x = 0; x <= 16; ++x) expect(t.at(y, x) == naive_sum(wm, {0, 0, y, x}));
    for (int h : {1, 3, 4, 8, 16})
      for (int w : {1, 2, 5, 8, 16}) {
        double best = -1;
        for (int y = 0; y + h <= 16; ++y)
          for (int x = 0; x + w <= 16; ++x) {
            const double s = naive_sum(wm, {y, x, h, w});
            expect(rect_sum(t, {y, x, h, w}) == s);
            best = std::max(best, s);
          }
        expect(naive_sum(wm, best_crop(t, h, w, seed)) == best);
      }
  }
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const LabelMap m = seed % 2 ? random_labels(8, 8, 3, 2000 + seed, 0.05) : blocky_labels(8, 8, 3, 2000 + seed, 2);
    for (int t : {1, 3, 5}) expect(boundary_targets(m, t, 3).planes == brute_boundary(m, t, 3));
  }
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const LabelMap g = blocky_labels(16, 16, 4, 3000 + seed, 3);
    const LabelMap p = perturb(blocky_labels(16, 16, 4, 4000 + seed, 4), 4, seed, 0.1);
    for (int t : {3, 5, 9, 12}) {
      const BoundaryScore s = f1_boundary(p, g, 4, t);
      for (int c = 0; c < 4; ++c) {
        const PR want = brute_pr(p, g, c, t);
        expect(s.precision[c] == want.p);
        expect(s.recall[c] == want.r);
      }
    }
    const IouResult r = miou(confusion(p, g, 4), true);
    for (int c = 0; c < 4; ++c) {
      const double want = set_iou(p, g, c);
      expect(std::isnan(want) ? std::isnan(r.per_class[c]) : std::abs(r.per_class[c] - want) < 1e-12);
    }
  }
  return {mismatches == 0, std::to_string(comparisons) + " comparisons, " + std::to_string(mismatches) + " mismatches"};
}

// ---------------------------------------------------------------- 3

Outcome structural_invariants() {
  std::vector<std::string> broken;
  ModelConfig mc;
  mc.num_classes = 4;
  const Dataset ds = synthetic_dataset(ShapesConfig{}, 4, 17);
  std::vector<Image> images;
  for (const Sample& s : ds.samples) images.push_back(s.image);

  double nabla_lo = 1, nabla_hi = 0, a_lo = 1, a_hi = 0, convex_excess = 0, softmax_err = 0;
  for (FusionAttention att : {FusionAttention::sigmoid, FusionAttention::softmax}) {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      mc.attention = att;
      YModel model(mc, 50 + seed);
      NoGradGuard guard;
      const YOutput o = model.forward(images_to_tensor(images, mc.precision), seed ? Mode::train : Mode::eval);
      for (double v : o.nabla_f5.to_vector()) nabla_lo = std::min(nabla_lo, v), nabla_hi = std::max(nabla_hi, v);
      const auto a = o.a_map.to_vector(), cp = o.css_prime.to_vector(), sb = o.sb.to_vector(),
                 fin = o.final.to_vector();
      for (std::size_t i = 0; i < a.size(); ++i) {
        a_lo = std::min(a_lo, a[i]);
        a_hi = std::max(a_hi, a[i]);
        convex_excess = std::max({convex_excess, std::min(cp[i], sb[i]) - fin[i], fin[i] - std::max(cp[i], sb[i])});
      }
      if (att == FusionAttention::softmax) {
        const std::size_t plane = static_cast<std::size_t>(o.a_map.dim(2)) * o.a_map.dim(3);
        const int l = o.a_map.dim(1);
        for (int n = 0; n < o.a_map.dim(0); ++n)
          for (std::size_t p = 0; p < plane; ++p) {
            double s = 0;
            for (int c = 0; c < l; ++c) s += a[(static_cast<std::size_t>(n) * l + c) * plane + p];
            softmax_err = std::max(softmax_err, std::abs(s - 1.0));
          }
      }
    }
  }
  // Extreme F5 inputs: the local-max subtraction keeps outputs in (0, 0.5].
  {
    NoGradGuard guard;
    for (double scale : {1e-3, 1.0, 1e3}) {
      for (double v : grad_approx(random_tensor({2, 4, 8, 8}, 60, kV, -scale, scale)).to_vector())
        nabla_lo = std::min(nabla_lo, v), nabla_hi = std::max(nabla_hi, v);
    }
  }
  if (!(nabla_lo > 0.0 && nabla_hi <= 0.5)) broken.push_back("nabla_f5");
  if (!(a_lo >= 0.0 && a_hi <= 1.0)) broken.push_back("a_map range");
  if (convex_excess > 1e-6) broken.push_back("convex bound");
  if (softmax_err > 1e-6) broken.push_back("softmax sums");

  // f_edges: perturbing class 0's upsampling slice leaves the other groups alone.
  double leak = 0, moved = 0;
  for (int classes : {2, 4}) {
    mc.num_classes = classes;
    mc.attention = FusionAttention::sigmoid;
    YModel model(mc, 70);
    Tensor x = images_to_tensor(images, mc.precision);
    NoGradGuard guard;
    const YOutput before = model.forward(x, Mode::eval);
    Tensor w = model.fusion_boundary()->up2().weight;
    const int cin = w.dim(0), k = w.dim(2);
    for (int i = 0; i < cin; ++i)
      for (int t = 0; t < k * k; ++t) {
        const std::size_t idx = (static_cast<std::size_t>(i) * classes) * k * k + t;
        w.set_value(idx, w.value(idx) + 0.5);
      }
    const YOutput after = model.forward(x, Mode::eval);
    moved = std::max(moved, max_abs_diff(slice_channels(after.f_edges, 0, 4), slice_channels(before.f_edges, 0, 4)));
    leak = std::max(leak, max_abs_diff(slice_channels(after.f_edges, 4, 4 * classes),
                                       slice_channels(before.f_edges, 4, 4 * classes)));
  }
  if (!(moved > 0 && leak == 0.0)) broken.push_back("f_edges independence");

  std::string detail = "nabla_f5 in [" + fmt(nabla_lo, 3) + ", " + fmt(nabla_hi, 3) + "], a_map in [" +
                       fmt(a_lo, 3) + ", " + fmt(a_hi, 3) + "], convex excess " + fmt(convex_excess, 2) +
                       ", softmax sum error " + fmt(softmax_err, 2) + ", f_edges leak " + fmt(leak, 2);
  for (const std::string& b : broken) detail += ", broken: " + b;
  return {broken.empty(), detail};
}

// ---------------------------------------------------------------- 4

Outcome tiny_overfit() {
  RunConfig cfg;
  cfg.num_classes = 4;
  cfg.num_images = 4;
  cfg.crop_mode = CropMode::none;
  cfg.flip = false;
  cfg.scale_aug = false;
  cfg.batch_size = 4;
  cfg.base_lr = 0.1;
  cfg.total_iters = 1000;
  const Dataset ds = synthetic_dataset(shapes_config(cfg), cfg.num_images, child_seed(cfg.seed, "data"));
  const auto t0 = std::chrono::steady_clock::now();
  Trainer trainer(cfg, ds);
  double best = 0;
  std::uint64_t reached = 0;
  while (trainer.iteration() < 1000) {
    trainer.run(nullptr, "", trainer.iteration() + 100);
    best = evaluate(trainer.model(), ds, {3}).iou.mean;
    std::cerr << "  overfit it " << trainer.iteration() << " mIoU " << fmt(best) << '\n';
    if (best >= 0.95) {
      reached = trainer.iteration();
      break;
    }
  }
  const double secs = seconds_since(t0);
  return {best >= 0.95 && secs < 900.0,
          "train mIoU " + fmt(best) + (reached ? " at iteration " + std::to_string(reached) : " after 1000 iterations") +
              ", " + fmt(secs, 3) + " s"};
}

// ---------------------------------------------------------------- 5-7

struct Scores {
  double miou = 0;
  double f1_3 = 0;
  double rarest_iou = 0;
};

/// Synthetic benchmark: 200 train / 50 val images, 64×64, five classes with
/// geometric rarity. Variants are trained lazily and cached across criteria.
class Benchmark {
 public:
  Benchmark(long iters, int crop, double lr) {
    base_.num_classes = 5;
    base_.image_size = 64;
    base_.crop_size = crop;
    base_.total_iters = iters;
    base_.base_lr = lr;
    train_ = synthetic_dataset(shapes_config(base_), 200, child_seed(kDataSeed, "train"));
    val_ = synthetic_dataset(shapes_config(base_), 50, child_seed(kDataSeed, "val"));
    rarest_ = static_cast<int>(std::min_element(train_.frequencies.begin(), train_.frequencies.end()) -
                               train_.frequencies.begin());
  }

  const RunConfig& base() const { return base_; }
  const Dataset& train() const { return train_; }
  int rarest() const { return rarest_; }
  static constexpr std::uint64_t kSeeds[3] = {1, 2, 3};

  /// Seed-mean scores of a variant: "baseline", "boundary", "full", "full-random".
  Scores mean(const std::string& variant) {
    Scores m;
    for (std::uint64_t seed : kSeeds) {
      const Scores s = run(variant, seed);
      m.miou += s.miou / 3;
      m.f1_3 += s.f1_3 / 3;
      m.rarest_iou += s.rarest_iou / 3;
    }
    return m;
  }

 private:
  static constexpr std::uint64_t kDataSeed = 2024;

  Scores run(const std::string& variant, std::uint64_t seed) {
    const auto key = std::make_pair(variant, seed);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    RunConfig cfg = base_;
    cfg.seed = seed;
    cfg.boundary_stream = variant != "baseline";
    cfg.fusion_gate = variant == "full" || variant == "full-random";
    if (variant == "full-random") cfg.crop_mode = CropMode::random;
    const auto t0 = std::chrono::steady_clock::now();
    Trainer trainer(cfg, train_);
    trainer.run();
    const EvalResult r = evaluate(trainer.model(), val_, {3});
    const Scores s{r.iou.mean, r.boundary[0].mean_f1, r.iou.per_class[rarest_]};
    std::cerr << "  " << variant << " seed " << seed << ": mIoU " << fmt(s.miou) << " f1@3 " << fmt(s.f1_3)
              << " rarest IoU " << fmt(s.rarest_iou) << " (" << fmt(seconds_since(t0), 3) << " s)\n";
    return cache_[key] = s;
  }

  RunConfig base_;
  Dataset train_, val_;
  int rarest_ = 0;
  std::map<std::pair<std::string, std::uint64_t>, Scores> cache_;
};

Outcome ablation_trend(Benchmark& b) {
  const Scores base = b.mean("baseline"), bnd = b.mean("boundary"), full = b.mean("full");
  return {full.miou >= base.miou && bnd.miou <= full.miou,
          "seed-mean val mIoU: full " + fmt(full.miou) + ", baseline " + fmt(base.miou) + ", boundary without gate " +
              fmt(bnd.miou)};
}

Outcome boundary_trend(Benchmark& b) {
  const Scores base = b.mean("baseline"), full = b.mean("full");
  return {full.f1_3 >= base.f1_3, "seed-mean f1@3: full " + fmt(full.f1_3) + ", baseline " + fmt(base.f1_3)};
}

Outcome crop_trend(Benchmark& b) {
  const auto rows = crop_bench(b.train(), {CropMode::random, CropMode::integral}, augment_config(b.base()), 500, 11);
  const Scores integral = b.mean("full"), random = b.mean("full-random");
  return {rows[1].rarest_exposure >= rows[0].rarest_exposure && integral.rarest_iou >= random.rarest_iou,
          "rarest class " + std::to_string(rows[0].rarest_class) + " exposure integral " +
              fmt(rows[1].rarest_exposure) + " vs random " + fmt(rows[0].rarest_exposure) +
              "; seed-mean IoU of class " + std::to_string(b.rarest()) + " integral " + fmt(integral.rarest_iou) +
              " vs random " + fmt(random.rarest_iou)};
}

// ---------------------------------------------------------------- 8

int sh(const std::string& cmd) { return std::system(cmd.c_str()); }

bool same_file(const fs::path& a, const fs::path& b) { return read_file(a.string()) == read_file(b.string()); }

bool same_tree(const fs::path& a, const fs::path& b) {
  std::set<fs::path> names;
  for (const auto& e : fs::recursive_directory_iterator(a)) names.insert(fs::relative(e.path(), a));
  for (const auto& e : fs::recursive_directory_iterator(b)) names.insert(fs::relative(e.path(), b));
  for (const fs::path& n : names) {
    if (!fs::exists(a / n) || !fs::exists(b / n)) return false;
    if (fs::is_regular_file(a / n) && !same_file(a / n, b / n)) return false;
  }
  return !names.empty();
}

std::vector<std::string> lines_of(const fs::path& p) {
  std::istringstream in(read_text(p.string()));
  std::vector<std::string> out;
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

Outcome determinism(const fs::path& work) {
  fs::remove_all(work);
  fs::create_directories(work);
  const std::string cli = YSEG_CLI_PATH;
  const std::string w = work.string();
  const std::string common = " --set num_images=8 --set total_iters=50 --set seed=9";
  int bad = 0;
  bad += sh(cli + " gen-data" + common + " --out " + w + "/d1") != 0;
  bad += sh(cli + " gen-data" + common + " --out " + w + "/d2") != 0;
  bad += sh(cli + " train" + common + " --data " + w + "/d1 --out " + w + "/a.ytc > " + w + "/a.log") != 0;
  bad += sh(cli + " train" + common + " --data " + w + "/d1 --out " + w + "/b.ytc > " + w + "/b.log") != 0;
  bad += sh(cli + " train" + common + " --data " + w + "/d1 --out " + w + "/half.ytc --until 25 > " + w +
            "/half.log") != 0;
  bad += sh(cli + " train --resume " + w + "/half.ytc --data " + w + "/d1 --out " + w + "/resumed.ytc > " + w +
            "/resumed.log") != 0;
  if (bad) return {false, std::to_string(bad) + " CLI invocations failed"};

  const bool data_same = same_tree(work / "d1", work / "d2");
  const bool train_same = same_file(work / "a.ytc", work / "b.ytc") && same_file(work / "a.log", work / "b.log");

  // save -> load -> save through the library
  const LoadedCheckpoint ck = load_checkpoint((work / "a.ytc").string());
  YModel model(model_config(ck.config), 0);
  SgdOptimizer opt(model.parameters(), sgd_config(ck.config));
  restore(ck, model, &opt);
  save_checkpoint((work / "again.ytc").string(), ck.config, ck.iteration, model, &opt);
  const bool ckpt_same = same_file(work / "a.ytc", work / "again.ytc");

  // rows 25..49 of the straight run equal the resumed rows
  const auto full = lines_of(work / "a.log"), half = lines_of(work / "half.log"), rest = lines_of(work / "resumed.log");
  bool resume_same = full.size() == 51 && half.size() == 26 && rest.size() == 25 &&
                     same_file(work / "a.ytc", work / "resumed.ytc");
  for (std::size_t i = 0; resume_same && i < 25; ++i) resume_same = rest[i] == full[26 + i];

  fs::remove_all(work);
  return {data_same && train_same && ckpt_same && resume_same,
          std::string("gen-data rerun ") + (data_same ? "identical" : "DIFFERS") + ", 50-iteration train rerun " +
              (train_same ? "identical" : "DIFFERS") + ", save/load/save " + (ckpt_same ? "identical" : "DIFFERS") +
              ", resume trajectory " + (resume_same ? "identical" : "DIFFERS")};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::vector<int> only;
  long iters = 800;
  int crop = 48;
  double lr = 0.05;
  std::string work = (fs::temp_directory_path() / "yseg_acceptance").string();
  app.add_option("--only", only, "Criteria to run (default: all)")->delimiter(',');
  app.add_option("--iters", iters, "Training iterations per benchmark run");
  app.add_option("--crop", crop, "Benchmark crop size");
  app.add_option("--lr", lr, "Benchmark base learning rate");
  app.add_option("--workdir", work, "Scratch directory for the CLI checks");
  CLI11_PARSE(app, argc, argv);
  if (only.empty()) only = {1, 2, 3, 4, 5, 6, 7, 8};

  std::unique_ptr<Benchmark> bench;
  auto benchmark = [&]() -> Benchmark& {
    if (!bench) bench = std::make_unique<Benchmark>(iters, crop, lr);
    return *bench;
  };
  const std::map<int, std::pair<std::string, std::function<Outcome()>>> criteria{
      {1, {"gradient fidelity", gradient_fidelity}},
      {2, {"oracle equivalence", oracle_equivalence}},
      {3, {"structural invariants", structural_invariants}},
      {4, {"tiny overfit", tiny_overfit}},
      {5, {"ablation trend", [&] { return ablation_trend(benchmark()); }}},
      {6, {"boundary-quality trend", [&] { return boundary_trend(benchmark()); }}},
      {7, {"crop-strategy trend", [&] { return crop_trend(benchmark()); }}},
      {8, {"determinism and persistence", [&] { return determinism(work); }}},
  };

  bool all = true;
  for (int id : only) {
    const auto it = criteria.find(id);
    if (it == criteria.end()) {
      std::cerr << "error: no criterion " << id << '\n';
      return 2;
    }
    std::cerr << "criterion " << id << ": running\n";
    Outcome o;
    try {
      o = it->second.second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    all = all && o.pass;
    std::cout << "criterion " << id << " " << it->second.first << ": " << (o.pass ? "PASS" : "FAIL") << " ("
              << o.detail << ")" << std::endl;
  }
  return all ? 0 : 1;
}
