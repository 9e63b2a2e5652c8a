#include "yseg/config.hpp"

#include <charconv>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "yseg/error.hpp"
#include "yseg/io.hpp"

namespace yseg {

std::string to_string(CropMode m) {
  switch (m) {
    case CropMode::random: return "random";
    case CropMode::uniform: return "uniform";
    case CropMode::integral: return "integral";
    case CropMode::none: return "none";
  }
  return "?";
}

std::string to_string(BetaMode m) { return m == BetaMode::per_image ? "per_image" : "per_batch"; }

std::string to_string(FusionAttention a) {
  return a == FusionAttention::sigmoid ? "sigmoid" : "softmax";
}

std::string to_string(Precision p) {
  return p == Precision::standard ? "standard" : "verification";
}

namespace {

[[noreturn]] void bad(const std::string& key, const std::string& value, const std::string& why) {
  throw Error(ErrorCode::config, key + " = '" + value + "': " + why);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_int(const std::string& key, const std::string& v) {
  T out{};
  const auto* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end) bad(key, v, "expected an integer");
  return out;
}

double parse_double(const std::string& key, const std::string& v) {
  double out = 0;
  const auto* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end) bad(key, v, "expected a number");
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  bad(key, v, "expected true or false");
}

std::vector<int> parse_list(const std::string& key, const std::string& v) {
  std::vector<int> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_int<int>(key, trim(item)));
  if (out.empty()) bad(key, v, "expected a comma-separated list");
  return out;
}

std::string fmt_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

std::string fmt_list(const auto& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

std::string fmt_bool(bool b) { return b ? "true" : "false"; }

struct Field {
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string& key, const std::string&)> set;
};

#define YSEG_INT(name, T)                                                              \
  {#name,                                                                             \
   {[](const RunConfig& c) { return std::to_string(c.name); },                        \
    [](RunConfig& c, const std::string& k, const std::string& v) { c.name = parse_int<T>(k, v); }}}
#define YSEG_DOUBLE(name)                                                              \
  {#name,                                                                             \
   {[](const RunConfig& c) { return fmt_double(c.name); },                            \
    [](RunConfig& c, const std::string& k, const std::string& v) { c.name = parse_double(k, v); }}}
#define YSEG_BOOL(name)                                                                \
  {#name,                                                                             \
   {[](const RunConfig& c) { return fmt_bool(c.name); },                              \
    [](RunConfig& c, const std::string& k, const std::string& v) { c.name = parse_bool(k, v); }}}

const std::vector<std::pair<std::string, Field>>& fields() {
  static const std::vector<std::pair<std::string, Field>> table = {
      YSEG_INT(num_classes, int),
      YSEG_INT(image_size, int),
      YSEG_INT(shapes_per_image, int),
      YSEG_DOUBLE(rarity),
      YSEG_DOUBLE(noise_sigma),
      YSEG_INT(num_images, int),
      {"stage_channels",
       {[](const RunConfig& c) { return fmt_list(c.stage_channels); },
        [](RunConfig& c, const std::string& k, const std::string& v) {
          const auto l = parse_list(k, v);
          if (l.size() != 5) bad(k, v, "expected five values");
          std::copy(l.begin(), l.end(), c.stage_channels.begin());
        }}},
      YSEG_INT(blocks_per_stage, int),
      {"aspp_rates",
       {[](const RunConfig& c) { return fmt_list(c.aspp_rates); },
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.aspp_rates = parse_list(k, v);
        }}},
      YSEG_BOOL(aspp_pooling),
      YSEG_INT(aspp_channels, int),
      YSEG_BOOL(use_decoder),
      YSEG_BOOL(boundary_stream),
      YSEG_BOOL(fusion_gate),
      {"fusion_attention",
       {[](const RunConfig& c) { return to_string(c.fusion_attention); },
        [](RunConfig& c, const std::string& k, const std::string& v) {
          if (v == "sigmoid") c.fusion_attention = FusionAttention::sigmoid;
          else if (v == "softmax") c.fusion_attention = FusionAttention::softmax;
          else bad(k, v, "expected sigmoid or softmax");
        }}},
      YSEG_DOUBLE(k),
      YSEG_INT(boundary_channels, int),
      YSEG_INT(upsample_channels, int),
      YSEG_INT(fusion_channels, int),
      YSEG_DOUBLE(lambda1),
      YSEG_DOUBLE(lambda2),
      {"beta_mode",
       {[](const RunConfig& c) { return to_string(c.beta_mode); },
        [](RunConfig& c, const std::string& k, const std::string& v) {
          if (v == "per_image") c.beta_mode = BetaMode::per_image;
          else if (v == "per_batch") c.beta_mode = BetaMode::per_batch;
          else bad(k, v, "expected per_image or per_batch");
        }}},
      YSEG_BOOL(aux_loss),
      YSEG_DOUBLE(aux_weight),
      YSEG_INT(boundary_thickness, int),
      {"eval_thicknesses",
       {[](const RunConfig& c) { return fmt_list(c.eval_thicknesses); },
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.eval_thicknesses = parse_list(k, v);
        }}},
      {"crop_mode",
       {[](const RunConfig& c) { return to_string(c.crop_mode); },
        [](RunConfig& c, const std::string& k, const std::string& v) {
          try {
            c.crop_mode = parse_crop_mode(v);
          } catch (const Error&) {
            bad(k, v, "expected random, uniform, integral or none");
          }
        }}},
      YSEG_INT(crop_size, int),
      YSEG_BOOL(flip),
      YSEG_BOOL(scale_aug),
      YSEG_DOUBLE(scale_min),
      YSEG_DOUBLE(scale_max),
      YSEG_DOUBLE(base_lr),
      YSEG_DOUBLE(power),
      YSEG_DOUBLE(momentum),
      YSEG_DOUBLE(weight_decay),
      YSEG_INT(total_iters, long),
      YSEG_INT(batch_size, int),
      YSEG_INT(checkpoint_every, long),
      YSEG_INT(seed, std::uint64_t),
      {"precision",
       {[](const RunConfig& c) { return to_string(c.precision); },
        [](RunConfig& c, const std::string& k, const std::string& v) {
          if (v == "standard") c.precision = Precision::standard;
          else if (v == "verification") c.precision = Precision::verification;
          else bad(k, v, "expected standard or verification");
        }}},
  };
  return table;
}

#undef YSEG_INT
#undef YSEG_DOUBLE
#undef YSEG_BOOL

const Field* find_field(const std::string& key) {
  for (const auto& [name, f] : fields()) {
    if (name == key) return &f;
  }
  return nullptr;
}

}  // namespace

CropMode parse_crop_mode(const std::string& s) {
  if (s == "random") return CropMode::random;
  if (s == "uniform") return CropMode::uniform;
  if (s == "integral") return CropMode::integral;
  if (s == "none") return CropMode::none;
  throw Error(ErrorCode::invalid_argument, "unknown crop mode '" + s + "'");
}

void set_option(RunConfig& cfg, const std::string& key, const std::string& value) {
  const Field* f = find_field(key);
  if (!f) throw Error(ErrorCode::config, "unknown key '" + key + "'");
  f->set(cfg, key, value);
}

std::string serialize(const RunConfig& cfg) {
  std::string out;
  for (const auto& [name, f] : fields()) out += name + " = " + f.get(cfg) + "\n";
  return out;
}

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::set<std::string> seen;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::config, "line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!seen.insert(key).second) {
      throw Error(ErrorCode::config, "line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    }
    set_option(cfg, key, value);
  }
  validate(cfg);
  return cfg;
}

RunConfig load_config(const std::string& path) { return parse_config(read_text(path)); }

void validate(const RunConfig& c) {
  auto need = [](bool ok, const std::string& what) {
    if (!ok) throw Error(ErrorCode::config, what);
  };
  need(c.num_classes >= 3 && c.num_classes < kIgnore, "num_classes must be in [3, 254]");
  need(c.image_size >= 8 && c.image_size % 8 == 0, "image_size must be a positive multiple of 8");
  need(c.shapes_per_image >= 0, "shapes_per_image must be >= 0");
  need(c.rarity > 0, "rarity must be > 0");
  need(c.noise_sigma >= 0, "noise_sigma must be >= 0");
  need(c.num_images >= 1, "num_images must be >= 1");
  for (int ch : c.stage_channels) need(ch >= 1, "stage_channels must be positive");
  need(c.blocks_per_stage >= 1, "blocks_per_stage must be >= 1");
  for (int r : c.aspp_rates) need(r >= 1, "aspp_rates must be >= 1");
  need(c.aspp_channels >= 1, "aspp_channels must be >= 1");
  need(c.k >= 0, "k must be >= 0");
  need(c.boundary_channels >= 1 && c.upsample_channels >= 1 && c.fusion_channels >= 1,
       "channel counts must be positive");
  need(c.lambda1 >= 0 && c.lambda2 >= 0 && c.lambda1 + c.lambda2 > 0,
       "lambda1, lambda2 must be >= 0 with a positive sum");
  need(c.aux_weight >= 0, "aux_weight must be >= 0");
  need(c.boundary_thickness >= 1, "boundary_thickness must be >= 1");
  for (int t : c.eval_thicknesses) need(t >= 1, "eval_thicknesses must be >= 1");
  need(c.crop_size >= 8 && c.crop_size % 8 == 0, "crop_size must be a positive multiple of 8");
  need(c.scale_min > 0 && c.scale_min <= c.scale_max, "need 0 < scale_min <= scale_max");
  need(c.base_lr > 0, "base_lr must be > 0");
  need(c.power >= 0, "power must be >= 0");
  need(c.momentum >= 0 && c.momentum < 1, "momentum must be in [0, 1)");
  need(c.weight_decay >= 0, "weight_decay must be >= 0");
  need(c.total_iters >= 1, "total_iters must be >= 1");
  need(c.batch_size >= 1, "batch_size must be >= 1");
  need(c.checkpoint_every >= 0, "checkpoint_every must be >= 0");
}

ModelConfig model_config(const RunConfig& c) {
  ModelConfig m;
  m.num_classes = c.num_classes;
  m.backbone.stage_channels = c.stage_channels;
  m.backbone.blocks_per_stage = c.blocks_per_stage;
  m.aspp.rates = c.aspp_rates;
  m.aspp.image_pooling = c.aspp_pooling;
  m.aspp.channels = c.aspp_channels;
  m.use_decoder = c.use_decoder;
  m.boundary_stream = c.boundary_stream;
  m.fusion_gate = c.fusion_gate;
  m.boundary_channels = c.boundary_channels;
  m.k = c.k;
  m.upsample_channels = c.upsample_channels;
  m.fusion_channels = c.fusion_channels;
  m.attention = c.fusion_attention;
  m.precision = c.precision;
  return m;
}

LossWeights loss_weights(const RunConfig& c) {
  return {.lambda1 = c.lambda1,
          .lambda2 = c.lambda2,
          .beta_mode = c.beta_mode,
          .aux_loss = c.aux_loss,
          .aux_weight = c.aux_weight};
}

AugmentConfig augment_config(const RunConfig& c) {
  return {.mode = c.crop_mode,
          .crop_h = c.crop_size,
          .crop_w = c.crop_size,
          .flip = c.flip,
          .scale = c.scale_aug,
          .scale_min = c.scale_min,
          .scale_max = c.scale_max};
}

ShapesConfig shapes_config(const RunConfig& c) {
  return {.size = c.image_size,
          .num_classes = c.num_classes,
          .shapes_per_image = c.shapes_per_image,
          .rarity = c.rarity,
          .noise_sigma = c.noise_sigma};
}

SgdConfig sgd_config(const RunConfig& c) { return {c.momentum, c.weight_decay}; }

}  // namespace yseg
