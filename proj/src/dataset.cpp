#include "yseg/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "yseg/error.hpp"
#include "yseg/io.hpp"
#include "yseg/rng.hpp"

namespace fs = std::filesystem;

namespace yseg {

std::vector<LabelMap> Dataset::labels() const {
  std::vector<LabelMap> out;
  out.reserve(samples.size());
  for (const Sample& s : samples) out.push_back(s.labels);
  return out;
}

Dataset synthetic_dataset(const ShapesConfig& cfg, int count, std::uint64_t seed) {
  require(count >= 1, ErrorCode::invalid_argument, "synthetic_dataset: count must be >= 1");
  Dataset ds;
  ds.num_classes = cfg.num_classes;
  for (int i = 0; i < count; ++i) {
    Sample s = gen_shapes(child_seed(seed, static_cast<std::uint64_t>(i)), cfg);
    for (float& v : s.image.data) v = static_cast<float>(std::lround(v * 255.0f)) / 255.0f;
    ds.samples.push_back(std::move(s));
  }
  ds.frequencies = class_frequencies(ds.labels(), ds.num_classes);
  return ds;
}

void save_dataset(const std::string& dir, const Dataset& ds) {
  std::error_code ec;
  fs::create_directories(fs::path(dir) / "images", ec);
  fs::create_directories(fs::path(dir) / "labels", ec);
  require(!ec, ErrorCode::io, "cannot create " + dir + ": " + ec.message());
  std::string index;
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "%05zu", i);
    const std::string img = std::string("images/") + name + ".ppm";
    const std::string lab = std::string("labels/") + name + ".pgm";
    write_ppm((fs::path(dir) / img).string(), ds.samples[i].image);
    write_pgm((fs::path(dir) / lab).string(), ds.samples[i].labels);
    index += img + "\t" + lab + "\n";
  }
  write_text((fs::path(dir) / "index.txt").string(), index);
  std::string freq = "class\tcount\n";
  for (std::size_t c = 0; c < ds.frequencies.size(); ++c) {
    freq += std::to_string(c) + "\t" + std::to_string(ds.frequencies[c]) + "\n";
  }
  write_text((fs::path(dir) / "frequencies.tsv").string(), freq);
}

ClassCounts read_frequencies(const std::string& path) {
  std::stringstream ss(read_text(path));
  std::string line;
  ClassCounts out;
  std::getline(ss, line);
  require(line == "class\tcount", ErrorCode::format, path + ": bad header");
  while (std::getline(ss, line)) {
    if (line.empty()) continue;
    std::stringstream row(line);
    std::size_t c = 0;
    std::uint64_t n = 0;
    require(static_cast<bool>(row >> c >> n) && c == out.size(), ErrorCode::format,
            path + ": bad row '" + line + "'");
    out.push_back(n);
  }
  return out;
}

Dataset load_dataset(const std::string& dir, int num_classes_hint) {
  const fs::path root(dir);
  require(fs::exists(root / "index.txt"), ErrorCode::dataset, "no index.txt in " + dir);
  Dataset ds;
  std::stringstream ss(read_text((root / "index.txt").string()));
  std::string line;
  while (std::getline(ss, line)) {
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    require(tab != std::string::npos, ErrorCode::dataset, "index.txt: expected image<TAB>label");
    Sample s{read_ppm((root / line.substr(0, tab)).string()),
             read_pgm((root / line.substr(tab + 1)).string())};
    require(s.image.height == s.labels.height && s.image.width == s.labels.width,
            ErrorCode::dataset, "image/label size mismatch in " + line);
    ds.samples.push_back(std::move(s));
  }
  require(!ds.samples.empty(), ErrorCode::dataset, "empty dataset in " + dir);
  if (fs::exists(root / "frequencies.tsv")) {
    ds.num_classes = static_cast<int>(read_frequencies((root / "frequencies.tsv").string()).size());
  } else {
    ds.num_classes = num_classes_hint;
  }
  require(ds.num_classes >= 1, ErrorCode::dataset, "cannot determine class count for " + dir);
  ds.frequencies = class_frequencies(ds.labels(), ds.num_classes);
  return ds;
}

}  // namespace yseg
