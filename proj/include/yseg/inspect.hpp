#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "yseg/augment.hpp"
#include "yseg/dataset.hpp"

namespace yseg {

/// 8-bit rendering of one attention plane with the linear range it was
/// scaled from. A constant plane renders as uniform 128.
struct HeatMap {
  LabelMap pixels;
  double min = 0;
  double max = 0;
};

/// Channel `channel` of image `sample` of an N×L×H×W map, or the per-pixel
/// channel maximum when `channel` < 0.
HeatMap render_heatmap(const Tensor& a_map, int channel = -1, int sample = 0);
/// Inverse of the rendering, exact up to (max - min) / 510.
std::vector<double> decode_heatmap(const HeatMap& heat);
std::string heatmap_sidecar(const HeatMap& heat);
/// Reads "min<TAB>max" back into `heat`.
void parse_heatmap_sidecar(const std::string& text, HeatMap& heat);

/// 255 where both labels are valid and differ, 0 elsewhere (ignore in
/// either map gives 0).
LabelMap diff_mask(const LabelMap& pred, const LabelMap& gt);

struct CropBenchRow {
  CropMode mode = CropMode::random;
  std::vector<double> mean_share;  // per class, over non-ignored crop pixels
  int rarest_class = 0;
  double rarest_exposure = 0;      // mean share of the rarest class
};

/// `draws` seeded crops per mode. Draw d uses the same source image and
/// augmentation seed under every mode, so modes differ only in placement.
std::vector<CropBenchRow> crop_bench(const Dataset& ds, const std::vector<CropMode>& modes,
                                     const AugmentConfig& base, int draws, std::uint64_t seed);
void write_crop_bench(std::ostream& out, const std::vector<CropBenchRow>& rows);

}  // namespace yseg
