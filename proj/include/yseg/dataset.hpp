#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "yseg/data.hpp"

namespace yseg {

struct Dataset {
  int num_classes = 0;
  std::vector<Sample> samples;
  ClassCounts frequencies;

  std::vector<LabelMap> labels() const;
};

/// `count` shape scenes, sample i seeded by child_seed(seed, i). Image values
/// are quantized to 8 bits so the in-memory set equals its on-disk form.
Dataset synthetic_dataset(const ShapesConfig& cfg, int count, std::uint64_t seed);

/// Writes images/NNNNN.ppm, labels/NNNNN.pgm, index.txt (image<TAB>label,
/// paths relative to `dir`) and frequencies.tsv (class<TAB>count).
void save_dataset(const std::string& dir, const Dataset& ds);

/// Reads the manifest; the class count comes from frequencies.tsv when
/// present, otherwise from `num_classes_hint`. Frequencies are recounted.
Dataset load_dataset(const std::string& dir, int num_classes_hint = 0);

ClassCounts read_frequencies(const std::string& path);

}  // namespace yseg
