#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "yseg/checkpoint.hpp"
#include "yseg/error.hpp"
#include "yseg/gradcheck.hpp"
#include "yseg/integral.hpp"
#include "yseg/train.hpp"

namespace py = pybind11;
using namespace yseg;

namespace {

using U8 = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;
using F32 = py::array_t<float, py::array::c_style | py::array::forcecast>;
using F64 = py::array_t<double, py::array::c_style | py::array::forcecast>;

LabelMap to_labels(const U8& a) {
  if (a.ndim() != 2) throw Error(ErrorCode::shape, "label map must be 2-D");
  LabelMap m(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)));
  std::copy(a.data(), a.data() + a.size(), m.labels.begin());
  return m;
}

U8 from_labels(const LabelMap& m) {
  U8 out({m.height, m.width});
  std::copy(m.labels.begin(), m.labels.end(), out.mutable_data());
  return out;
}

// H×W×3 in [0, 1] <-> planar C×H×W.
Image to_image(const F32& a) {
  if (a.ndim() != 3 || a.shape(2) != 3) throw Error(ErrorCode::shape, "image must be H x W x 3");
  const int h = static_cast<int>(a.shape(0)), w = static_cast<int>(a.shape(1));
  Image img(3, h, w);
  auto v = a.unchecked<3>();
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) img.at(c, y, x) = v(y, x, c);
  return img;
}

F32 from_image(const Image& img) {
  F32 out({img.height, img.width, img.channels});
  auto v = out.mutable_unchecked<3>();
  for (int c = 0; c < img.channels; ++c)
    for (int y = 0; y < img.height; ++y)
      for (int x = 0; x < img.width; ++x) v(y, x, c) = img.at(c, y, x);
  return out;
}

F64 from_tensor(const Tensor& t) {
  std::vector<py::ssize_t> shape(t.shape().begin(), t.shape().end());
  F64 out(shape);
  const std::vector<double> v = t.to_vector();
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

py::dict score_dict(const BoundaryScore& s) {
  py::dict d;
  d["thickness"] = s.thickness;
  d["precision"] = s.precision;
  d["recall"] = s.recall;
  d["f1"] = s.f1;
  d["mean_f1"] = s.mean_f1;
  return d;
}

/// Eval-mode model restored from a checkpoint.
class Model {
 public:
  explicit Model(const std::string& checkpoint)
      : ckpt_(load_checkpoint(checkpoint)), model_(model_config(ckpt_.config), 0) {
    restore(ckpt_, model_, nullptr);
  }

  py::dict forward(const F32& image) {
    std::vector<Image> one{to_image(image)};
    NoGradGuard guard;
    const YOutput o = model_.forward(images_to_tensor(one, ckpt_.config.precision), Mode::eval);
    py::dict d;
    d["labels"] = from_labels(argmax_labels(o.final).at(0));
    d["final"] = from_tensor(o.final);
    d["css"] = from_tensor(o.css);
    if (o.sb.defined()) d["sb"] = from_tensor(o.sb);
    if (o.a_map.defined()) d["a_map"] = from_tensor(o.a_map);
    return d;
  }

  std::string config() const { return serialize(ckpt_.config); }
  std::uint64_t iteration() const { return ckpt_.iteration; }
  std::size_t parameter_count() const { return model_.parameter_count(); }

 private:
  LoadedCheckpoint ckpt_;
  YModel model_;
};

}  // namespace

PYBIND11_MODULE(_yseg, m) {
  m.doc() = "Two-stream boundary-aware semantic segmentation core";

  static py::exception<Error> error(m, "Error", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error, (std::string(to_string(e.code())) + ": " + e.what()).c_str());
    }
  });

  m.def("default_config", [] { return serialize(RunConfig{}); }, "Every config key with its default value.");
  m.def(
      "normalize_config", [](const std::string& text) { return serialize(parse_config(text)); }, py::arg("text"),
      "Parses a flat config and writes it back with every key.");

  m.def(
      "gen_shapes",
      [](std::uint64_t seed, int size, int num_classes, int shapes_per_image, double rarity) {
        const Sample s = gen_shapes(seed, {size, num_classes, shapes_per_image, rarity});
        return py::make_tuple(from_image(s.image), from_labels(s.labels));
      },
      py::arg("seed"), py::arg("size") = 64, py::arg("num_classes") = 4, py::arg("shapes_per_image") = 4,
      py::arg("rarity") = 0.5, "One synthetic scene: (H x W x 3 float32 image, H x W uint8 labels).");

  m.def(
      "boundary_targets",
      [](const U8& labels, int thickness, int num_classes) {
        const SemanticBoundaryMap b = boundary_targets(to_labels(labels), thickness, num_classes);
        U8 out({b.num_classes, b.height, b.width});
        std::copy(b.planes.begin(), b.planes.end(), out.mutable_data());
        return out;
      },
      py::arg("labels"), py::arg("thickness"), py::arg("num_classes"));

  m.def(
      "best_crop",
      [](const F64& weights, int h, int w, std::uint64_t seed) {
        if (weights.ndim() != 2) throw Error(ErrorCode::shape, "weights must be 2-D");
        WeightMap wm{static_cast<int>(weights.shape(0)), static_cast<int>(weights.shape(1)),
                     std::vector<double>(weights.data(), weights.data() + weights.size())};
        const CropRegion r = best_crop(integral_table(wm), h, w, seed);
        return py::make_tuple(r.y, r.x, r.h, r.w);
      },
      py::arg("weights"), py::arg("h"), py::arg("w"), py::arg("seed") = 0,
      "Top-left corner and size of the heaviest h x w window.");

  m.def(
      "confusion",
      [](const U8& pred, const U8& gt, int num_classes) {
        const ConfusionMatrix c = confusion(to_labels(pred), to_labels(gt), num_classes);
        py::array_t<std::uint64_t> out({num_classes, num_classes});
        std::copy(c.counts.begin(), c.counts.end(), out.mutable_data());
        return out;
      },
      py::arg("pred"), py::arg("gt"), py::arg("num_classes"), "Rows are ground truth, columns prediction.");

  m.def(
      "miou",
      [](const U8& pred, const U8& gt, int num_classes, bool include_background) {
        const IouResult r = miou(confusion(to_labels(pred), to_labels(gt), num_classes), include_background);
        return py::make_tuple(r.mean, r.per_class);
      },
      py::arg("pred"), py::arg("gt"), py::arg("num_classes"), py::arg("include_background") = true);

  m.def(
      "f1_boundary",
      [](const U8& pred, const U8& gt, int num_classes, int thickness) {
        return score_dict(f1_boundary(to_labels(pred), to_labels(gt), num_classes, thickness));
      },
      py::arg("pred"), py::arg("gt"), py::arg("num_classes"), py::arg("thickness"));

  m.def(
      "train",
      [](const std::string& config_text, const std::string& data_dir, const std::string& checkpoint,
         std::uint64_t until) {
        const RunConfig cfg = parse_config(config_text);
        const Dataset ds = load_dataset(data_dir, cfg.num_classes);
        std::vector<double> losses;
        py::gil_scoped_release release;
        Trainer trainer(cfg, ds);
        for (const TrainLogRow& row : trainer.run(nullptr, checkpoint, until)) losses.push_back(row.total);
        return losses;
      },
      py::arg("config"), py::arg("data_dir"), py::arg("checkpoint"), py::arg("until") = 0,
      "Trains from scratch; returns the per-iteration total loss.");

  m.def(
      "gen_data",
      [](const std::string& config_text, const std::string& out) {
        const RunConfig cfg = parse_config(config_text);
        save_dataset(out, synthetic_dataset(shapes_config(cfg), cfg.num_images, child_seed(cfg.seed, "data")));
      },
      py::arg("config"), py::arg("out"));

  m.def(
      "gradcheck",
      [](std::uint64_t seed) {
        py::list out;
        for (const GradcheckResult& r : gradcheck_suite(seed))
          out.append(py::make_tuple(r.name, r.max_rel_error, r.passed()));
        return out;
      },
      py::arg("seed") = 7, "(name, max relative error, passed) per check.");

  py::class_<Model>(m, "Model")
      .def(py::init<const std::string&>(), py::arg("checkpoint"))
      .def("forward", &Model::forward, py::arg("image"),
           "Labels plus final/css/sb/a_map score maps for one H x W x 3 image.")
      .def_property_readonly("config", &Model::config)
      .def_property_readonly("iteration", &Model::iteration)
      .def_property_readonly("parameter_count", &Model::parameter_count);
}
