#include "yseg/inspect.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <sstream>

#include "yseg/config.hpp"
#include "yseg/error.hpp"
#include "yseg/rng.hpp"

namespace yseg {

HeatMap render_heatmap(const Tensor& a, int channel, int sample) {
  require(a.rank() == 4, ErrorCode::shape, "heat map: expected N×L×H×W, got " + shape_str(a.shape()));
  const int l = a.dim(1), h = a.dim(2), w = a.dim(3);
  require(sample >= 0 && sample < a.dim(0), ErrorCode::invalid_argument, "heat map: sample out of range");
  require(channel < l, ErrorCode::invalid_argument, "heat map: channel out of range");
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  std::vector<double> v(plane, -std::numeric_limits<double>::infinity());
  for (int c = 0; c < l; ++c) {
    if (channel >= 0 && c != channel) continue;
    const std::size_t base = (static_cast<std::size_t>(sample) * l + c) * plane;
    for (std::size_t i = 0; i < plane; ++i) v[i] = std::max(v[i], a.value(base + i));
  }
  HeatMap heat;
  heat.pixels = LabelMap(h, w);
  heat.min = *std::min_element(v.begin(), v.end());
  heat.max = *std::max_element(v.begin(), v.end());
  const double range = heat.max - heat.min;
  for (std::size_t i = 0; i < plane; ++i) {
    heat.pixels.labels[i] =
        range > 0 ? static_cast<std::uint8_t>(std::lround((v[i] - heat.min) / range * 255.0)) : 128;
  }
  return heat;
}

std::vector<double> decode_heatmap(const HeatMap& heat) {
  std::vector<double> out;
  out.reserve(heat.pixels.size());
  const double range = heat.max - heat.min;
  for (std::uint8_t p : heat.pixels.labels) out.push_back(heat.min + range * p / 255.0);
  return out;
}

std::string heatmap_sidecar(const HeatMap& heat) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "min\tmax\n%.17g\t%.17g\n", heat.min, heat.max);
  return buf;
}

void parse_heatmap_sidecar(const std::string& text, HeatMap& heat) {
  std::stringstream ss(text);
  std::string header;
  std::getline(ss, header);
  require(header == "min\tmax" && static_cast<bool>(ss >> heat.min >> heat.max), ErrorCode::format,
          "heat map sidecar: expected 'min<TAB>max' header and one row");
}

LabelMap diff_mask(const LabelMap& pred, const LabelMap& gt) {
  if (pred.height != gt.height || pred.width != gt.width) {
    throw_shape_mismatch("diff_mask", {pred.height, pred.width}, {gt.height, gt.width});
  }
  LabelMap out(gt.height, gt.width, 0);
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const auto g = gt.labels[i], p = pred.labels[i];
    if (g != kIgnore && p != kIgnore && g != p) out.labels[i] = 255;
  }
  return out;
}

std::vector<CropBenchRow> crop_bench(const Dataset& ds, const std::vector<CropMode>& modes,
                                     const AugmentConfig& base, int draws, std::uint64_t seed) {
  require(draws >= 1, ErrorCode::invalid_argument, "crop-bench: draws must be >= 1");
  require(!ds.samples.empty(), ErrorCode::dataset, "crop-bench: empty dataset");
  const int l = ds.num_classes;
  int rarest = -1;
  for (int c = 0; c < l; ++c) {
    if (ds.frequencies[c] > 0 && (rarest < 0 || ds.frequencies[c] < ds.frequencies[rarest])) rarest = c;
  }
  std::vector<CropBenchRow> rows;
  for (CropMode mode : modes) {
    AugmentConfig cfg = base;
    cfg.mode = mode;
    CropBenchRow row;
    row.mode = mode;
    row.rarest_class = rarest;
    row.mean_share.assign(l, 0.0);
    Rng pick(child_seed(seed, "pick"));
    const std::uint64_t aug_root = child_seed(seed, "augment");
    for (int d = 0; d < draws; ++d) {
      const Sample& s = ds.samples[pick.below(ds.samples.size())];
      const Augmented a = augment(s, cfg, child_seed(aug_root, static_cast<std::uint64_t>(d)),
                                  &ds.frequencies);
      std::vector<double> counts(l, 0.0);
      double valid = 0;
      for (std::uint8_t v : a.sample.labels.labels) {
        if (v == kIgnore) continue;
        counts[v] += 1;
        valid += 1;
      }
      if (valid == 0) continue;
      for (int c = 0; c < l; ++c) row.mean_share[c] += counts[c] / valid / draws;
    }
    row.rarest_exposure = row.mean_share[rarest];
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_crop_bench(std::ostream& out, const std::vector<CropBenchRow>& rows) {
  if (rows.empty()) return;
  out << "mode\trarest_class\trarest_exposure";
  for (std::size_t c = 0; c < rows[0].mean_share.size(); ++c) out << "\tshare_class" << c;
  out << '\n';
  const auto old = out.precision(6);
  for (const auto& r : rows) {
    out << to_string(r.mode) << '\t' << r.rarest_class << '\t' << r.rarest_exposure;
    for (double s : r.mean_share) out << '\t' << s;
    out << '\n';
  }
  out.precision(old);
}

}  // namespace yseg
