#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "yseg/augment.hpp"
#include "yseg/data.hpp"
#include "yseg/losses.hpp"
#include "yseg/model.hpp"
#include "yseg/optim.hpp"

namespace yseg {

/// Every tunable of a run. Serialized as flat `key = value` lines.
struct RunConfig {
  // data
  int num_classes = 4;
  int image_size = 64;
  int shapes_per_image = 4;
  double rarity = 0.5;
  double noise_sigma = 0.05;
  int num_images = 16;
  // model
  std::array<int, 5> stage_channels{8, 16, 32, 32, 32};
  int blocks_per_stage = 1;
  std::vector<int> aspp_rates{1, 2, 4};
  bool aspp_pooling = true;
  int aspp_channels = 32;
  bool use_decoder = false;
  bool boundary_stream = true;
  bool fusion_gate = true;
  FusionAttention fusion_attention = FusionAttention::sigmoid;
  double k = 1.0;
  int boundary_channels = 16;
  int upsample_channels = 16;
  int fusion_channels = 8;
  // loss
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  BetaMode beta_mode = BetaMode::per_image;
  bool aux_loss = false;
  double aux_weight = 0.4;
  int boundary_thickness = 2;
  std::vector<int> eval_thicknesses{3, 5, 9, 12};
  // augmentation
  CropMode crop_mode = CropMode::integral;
  int crop_size = 64;
  bool flip = true;
  bool scale_aug = true;
  double scale_min = 0.5;
  double scale_max = 2.0;
  // optimisation
  double base_lr = 0.01;
  double power = 0.9;
  double momentum = 0.9;
  double weight_decay = 5e-4;
  long total_iters = 1000;
  int batch_size = 4;
  long checkpoint_every = 0;  // 0: only at the end
  // misc
  std::uint64_t seed = 1;
  Precision precision = Precision::standard;

  bool operator==(const RunConfig&) const = default;
};

/// Throws ErrorCode::config on any inconsistency.
void validate(const RunConfig& cfg);

/// Every key in a fixed order; parse(serialize(c)) == c.
std::string serialize(const RunConfig& cfg);
/// Starts from defaults; `#` starts a comment; unknown or repeated keys are
/// errors.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
/// Applies one `key=value` override.
void set_option(RunConfig& cfg, const std::string& key, const std::string& value);

ModelConfig model_config(const RunConfig& cfg);
LossWeights loss_weights(const RunConfig& cfg);
AugmentConfig augment_config(const RunConfig& cfg);
ShapesConfig shapes_config(const RunConfig& cfg);
SgdConfig sgd_config(const RunConfig& cfg);

std::string to_string(CropMode m);
std::string to_string(BetaMode m);
std::string to_string(FusionAttention a);
std::string to_string(Precision p);
CropMode parse_crop_mode(const std::string& s);

}  // namespace yseg
