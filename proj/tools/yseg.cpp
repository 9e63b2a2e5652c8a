// yseg command-line tool.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "yseg/checkpoint.hpp"
#include "yseg/error.hpp"
#include "yseg/gradcheck.hpp"
#include "yseg/inspect.hpp"
#include "yseg/rng.hpp"
#include "yseg/train.hpp"

namespace fs = std::filesystem;
using namespace yseg;

namespace {

RunConfig make_config(const std::string& path, const std::vector<std::string>& overrides) {
  RunConfig cfg = path.empty() ? RunConfig{} : load_config(path);
  for (const std::string& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::config, "--set expects key=value, got '" + kv + "'");
    set_option(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  validate(cfg);
  return cfg;
}

std::vector<int> parse_ints(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stoi(item));
    } catch (const std::exception&) {
      throw Error(ErrorCode::invalid_argument, "expected comma-separated integers, got '" + s + "'");
    }
  }
  return out;
}

struct LoadedModel {
  LoadedCheckpoint ckpt;
  std::unique_ptr<YModel> model;
};

LoadedModel load_model(const std::string& path) {
  LoadedModel m;
  m.ckpt = load_checkpoint(path);
  m.model = std::make_unique<YModel>(model_config(m.ckpt.config), 0);
  restore(m.ckpt, *m.model, nullptr);
  return m;
}

YOutput run_image(YModel& model, const Image& image) {
  NoGradGuard no_grad;
  require(image.height % 8 == 0 && image.width % 8 == 0, ErrorCode::invalid_argument,
          "image dims must be divisible by 8");
  std::vector<Image> one{image};
  return model.forward(images_to_tensor(one, model.config().precision), Mode::eval);
}

void write_out(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    write_text(path, text);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-stream boundary-aware semantic segmentation"};
  app.require_subcommand(1);

  std::string config_path, data_dir, out, checkpoint, image_path, resume, pred_path, gt_path;
  std::vector<std::string> overrides;
  int count = 0;
  std::uint64_t until = 0, seed = 7;

  auto* gen = app.add_subcommand("gen-data", "Write a synthetic dataset");
  gen->add_option("--config", config_path, "Flat config file");
  gen->add_option("--set", overrides, "key=value override (repeatable)");
  gen->add_option("--out", out, "Output directory")->required();
  gen->add_option("--count", count, "Number of images (default: num_images)");

  auto* train = app.add_subcommand("train", "Train a model; TSV log on stdout");
  train->add_option("--config", config_path, "Flat config file");
  train->add_option("--set", overrides, "key=value override (repeatable)");
  train->add_option("--data", data_dir, "Dataset directory")->required();
  train->add_option("--out", out, "Checkpoint path")->required();
  train->add_option("--resume", resume, "Continue from this checkpoint");
  train->add_option("--until", until, "Stop after this iteration count");

  std::string thickness = "3,5,9,12";
  bool gt_as_pred = false, exclude_bg = false;
  auto* eval = app.add_subcommand("eval", "mIoU and f1-boundary report (TSV)");
  eval->add_option("--checkpoint", checkpoint, "Checkpoint path");
  eval->add_option("--data", data_dir, "Dataset directory")->required();
  eval->add_option("--thickness", thickness, "Comma-separated boundary thicknesses");
  eval->add_option("--out", out, "Report path (default: stdout)");
  eval->add_flag("--gt-as-prediction", gt_as_pred, "Score the ground truth against itself");
  eval->add_flag("--exclude-background", exclude_bg, "Leave class 0 out of the mIoU mean");

  bool dump_css = false, dump_sb = false, dump_attention = false, dump_fedges = false;
  std::string tensors_path;
  auto* predict = app.add_subcommand("predict", "Label map of one image (PGM)");
  predict->add_option("--checkpoint", checkpoint, "Checkpoint path")->required();
  predict->add_option("--image", image_path, "Input PPM")->required();
  predict->add_option("--out", out, "Output PGM")->required();
  predict->add_flag("--dump-css", dump_css, "Write css and css_prime");
  predict->add_flag("--dump-sb", dump_sb, "Write sb");
  predict->add_flag("--dump-attention", dump_attention, "Write a_map");
  predict->add_flag("--dump-fedges", dump_fedges, "Write f_edges");
  predict->add_option("--tensors", tensors_path, "YTC1 file for dumps (default: <out>.ytc)");

  int channel = -1;
  auto* inspect = app.add_subcommand("inspect-attention", "Fusion-gate attention as a PGM heat map");
  inspect->add_option("--checkpoint", checkpoint, "Checkpoint path")->required();
  inspect->add_option("--image", image_path, "Input PPM")->required();
  inspect->add_option("--out", out, "Output PGM; range goes to <out>.txt")->required();
  inspect->add_option("--class", channel, "Class plane (default: channel max)");

  auto* diff = app.add_subcommand("diff-mask", "255 where two label maps differ");
  diff->add_option("--pred", pred_path, "Predicted PGM")->required();
  diff->add_option("--gt", gt_path, "Ground-truth PGM")->required();
  diff->add_option("--out", out, "Output PGM")->required();

  std::string modes = "random,uniform,integral";
  int draws = 500;
  auto* bench = app.add_subcommand("crop-bench", "Class exposure per crop strategy (TSV)");
  bench->add_option("--config", config_path, "Flat config file (augmentation settings)");
  bench->add_option("--set", overrides, "key=value override (repeatable)");
  bench->add_option("--data", data_dir, "Dataset directory")->required();
  bench->add_option("--modes", modes, "Comma-separated crop modes");
  bench->add_option("--draws", draws, "Crops per mode");
  bench->add_option("--seed", seed, "Draw seed");
  bench->add_option("--out", out, "Report path (default: stdout)");

  auto* grad = app.add_subcommand("gradcheck", "Finite-difference check of every operator");
  grad->add_option("--seed", seed, "Suite seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::string what = e.what();
    std::replace(what.begin(), what.end(), '\n', ' ');
    std::cerr << "error: usage: " << what << '\n';
    return 2;
  }

  try {
    if (*gen) {
      const RunConfig cfg = make_config(config_path, overrides);
      const int n = count > 0 ? count : cfg.num_images;
      const Dataset ds = synthetic_dataset(shapes_config(cfg), n, child_seed(cfg.seed, "data"));
      save_dataset(out, ds);
      write_text((fs::path(out) / "config.txt").string(), serialize(cfg));
    } else if (*train) {
      std::unique_ptr<Trainer> trainer;
      Dataset ds;
      if (!resume.empty()) {
        const LoadedCheckpoint ckpt = load_checkpoint(resume);
        ds = load_dataset(data_dir, ckpt.config.num_classes);
        trainer = std::make_unique<Trainer>(ckpt, ds);
      } else {
        const RunConfig cfg = make_config(config_path, overrides);
        ds = load_dataset(data_dir, cfg.num_classes);
        trainer = std::make_unique<Trainer>(cfg, ds);
      }
      trainer->run(&std::cout, out, until);
    } else if (*eval) {
      const std::vector<int> ts = parse_ints(thickness);
      Dataset ds;
      EvalResult r;
      if (gt_as_pred) {
        ds = load_dataset(data_dir);
        r = evaluate_predictions(ds.labels(), ds.labels(), ds.num_classes, ts, !exclude_bg);
      } else {
        require(!checkpoint.empty(), ErrorCode::invalid_argument, "eval needs --checkpoint");
        LoadedModel m = load_model(checkpoint);
        ds = load_dataset(data_dir, m.ckpt.config.num_classes);
        r = evaluate(*m.model, ds, ts, !exclude_bg);
      }
      std::ostringstream report;
      write_report(report, r.iou, r.boundary);
      write_out(out, report.str());
    } else if (*predict) {
      LoadedModel m = load_model(checkpoint);
      const YOutput o = run_image(*m.model, read_ppm(image_path));
      write_pgm(out, argmax_labels(o.final).at(0));
      std::vector<YtcEntry> entries;
      auto dump = [&](const char* name, const Tensor& t) {
        if (t.defined()) entries.push_back(YtcEntry::from_tensor(name, t));
      };
      if (dump_css) {
        dump("css", o.css);
        dump("css_prime", o.css_prime);
      }
      if (dump_sb) dump("sb", o.sb);
      if (dump_attention) dump("a_map", o.a_map);
      if (dump_fedges) dump("f_edges", o.f_edges);
      if (dump_css || dump_sb || dump_attention || dump_fedges) {
        write_ytc(tensors_path.empty() ? out + ".ytc" : tensors_path, entries);
      }
    } else if (*inspect) {
      LoadedModel m = load_model(checkpoint);
      const YOutput o = run_image(*m.model, read_ppm(image_path));
      require(o.a_map.defined(), ErrorCode::config, "model has no fusion gate, so no attention map");
      const HeatMap heat = render_heatmap(o.a_map, channel);
      write_pgm(out, heat.pixels);
      write_text(out + ".txt", heatmap_sidecar(heat));
    } else if (*diff) {
      write_pgm(out, diff_mask(read_pgm(pred_path), read_pgm(gt_path)));
    } else if (*bench) {
      const RunConfig cfg = make_config(config_path, overrides);
      const Dataset ds = load_dataset(data_dir, cfg.num_classes);
      std::vector<CropMode> ms;
      std::stringstream ss(modes);
      std::string item;
      while (std::getline(ss, item, ',')) ms.push_back(parse_crop_mode(item));
      std::ostringstream report;
      write_crop_bench(report, crop_bench(ds, ms, augment_config(cfg), draws, seed));
      write_out(out, report.str());
    } else if (*grad) {
      bool ok = true;
      std::cout << "op\tmax_rel_error\tchecked\tskipped\ttolerance\tstatus\n";
      for (const GradcheckResult& r : gradcheck_suite(seed)) {
        std::cout << r.name << '\t' << r.max_rel_error << '\t' << r.checked << '\t' << r.skipped << '\t' << r.tolerance
                  << '\t' << (r.passed() ? "pass" : "FAIL") << '\n';
        ok = ok && r.passed();
      }
      if (!ok) throw Error(ErrorCode::internal, "gradcheck: at least one operator exceeded its tolerance");
    }
  } catch (const Error& e) {
    std::cerr << "error: " << to_string(e.code()) << ": " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
