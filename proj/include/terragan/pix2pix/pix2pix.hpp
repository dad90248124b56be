#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "terragan/core/layers.hpp"
#include "terragan/gan/gan.hpp"

namespace terragan::pix2pix {

enum class Direction { rgb_to_dem, dem_to_rgb };

/// Accepts "rgb-to-dem"/"rgb_to_dem" and "dem-to-rgb"/"dem_to_rgb".
Direction parse_direction(std::string_view name);
std::string_view to_string(Direction direction);
std::int64_t input_channels(Direction direction);
std::int64_t output_channels(Direction direction);

struct UNetConfig {
  std::int64_t input_channels = 3;
  std::int64_t output_channels = 1;
  std::int64_t depth = 3;
  std::int64_t base_channels = 16;
  std::int64_t resolution = 32;

  /// Encoder width at level i: base * 2^min(i, 3).
  std::int64_t level_channels(std::int64_t level) const;
  std::int64_t bottleneck_size() const { return resolution >> depth; }
  /// Channels entering decoder deconvolution `level` (deepest first = depth - 1).
  std::int64_t decoder_input_channels(std::int64_t level) const;
  void validate() const;
};

struct PatchConfig {
  std::int64_t depth = 3;
  std::int64_t base_channels = 16;

  /// Side of the square score grid for a given input resolution.
  std::int64_t grid_extent(std::int64_t resolution) const;
  void validate(std::int64_t resolution) const;
};

/// Encoder: stride-2 k4 convs with leaky_relu(0.2). Decoder: stride-2 k4
/// transposed convs with leaky_relu(0.2); each decoder output is concatenated
/// with the mirrored encoder activation before the next deconvolution. tanh head.
template <typename Real>
class UNet final : public Network<Real> {
 public:
  UNet(UNetConfig config, Rng& rng);

  Var<Real> forward(Tape<Real>& tape, Var<Real> c) override;
  /// With `zero_bottleneck` the deepest encoder activation is replaced by zeros,
  /// leaving only the skip paths.
  Var<Real> run(Tape<Real>& tape, Var<Real> c, bool zero_bottleneck);
  std::vector<NamedParameter<Real>> named_parameters() override;
  const UNetConfig& config() const { return config_; }

 private:
  UNetConfig config_;
  std::vector<std::unique_ptr<Conv2dLayer<Real>>> encoder_;
  std::vector<std::unique_ptr<ConvTranspose2dLayer<Real>>> decoder_;  // index = level
};

/// Stack of stride-2 k4 convs over concat(c, candidate); the last conv emits one
/// channel, followed by a per-cell sigmoid.
template <typename Real>
class PatchDiscriminator final : public Network<Real> {
 public:
  PatchDiscriminator(std::int64_t condition_channels, std::int64_t candidate_channels, PatchConfig config, Rng& rng);

  /// Input is the channel concatenation [B, Cc + Cy, R, R].
  Var<Real> forward(Tape<Real>& tape, Var<Real> joint) override;
  Var<Real> score(Tape<Real>& tape, Var<Real> c, Var<Real> candidate);
  std::vector<NamedParameter<Real>> named_parameters() override;
  const PatchConfig& config() const { return config_; }

 private:
  std::int64_t condition_channels_;
  std::int64_t candidate_channels_;
  PatchConfig config_;
  std::vector<std::unique_ptr<Conv2dLayer<Real>>> layers_;
};

/// Per-image mean over the P x P score grid: [B, 1, P, P] -> [B].
Tensor patch_decision(const Tensor& scores);

struct TranslationOptions {
  Direction direction = Direction::rgb_to_dem;
  std::int64_t resolution = 32;
  std::int64_t unet_depth = 3;
  std::int64_t unet_base_channels = 16;
  PatchConfig patch;
  double l1_weight = 100.0;
  OptimizerRule generator_optimizer = Adam{};
  OptimizerRule discriminator_optimizer = Adam{};

  void validate() const;
};

class TranslationModel {
 public:
  TranslationModel(const TranslationOptions& options, Rng& rng);

  UNet<float>& generator() { return *generator_; }
  PatchDiscriminator<float>& discriminator() { return *discriminator_; }
  const TranslationOptions& options() const { return options_; }
  TranslationOptions& options() { return options_; }
  Direction direction() const { return options_.direction; }
  double l1_weight() const { return options_.l1_weight; }

  nlohmann::json header() const;
  std::vector<NamedParameter<float>> named_parameters();
  void save(const std::string& path);
  static TranslationModel load(const std::string& path);

 private:
  TranslationOptions options_;
  std::unique_ptr<UNet<float>> generator_;
  std::unique_ptr<PatchDiscriminator<float>> discriminator_;
};

template <typename Real>
struct CganTerms {
  Var<Real> d_loss;
  Var<Real> g_adversarial;
  Var<Real> l1;
  /// g_adversarial + l1_weight * l1.
  Var<Real> g_loss;
};

/// Conditional losses from patch scores; expectations run over patches, then batch.
template <typename Real>
CganTerms<Real> cgan_terms(Var<Real> d_real, Var<Real> d_fake, Var<Real> fake, Var<Real> target, double l1_weight,
                           gan::GeneratorLoss variant);

struct CganLosses {
  double d_loss = 0.0;
  double g_adversarial = 0.0;
  double l1 = 0.0;
  double g_loss = 0.0;
};

/// Evaluates all terms for (c, y_real) without updating the model.
CganLosses cgan_losses(TranslationModel& model, const Tensor& c, const Tensor& y_real,
                       gan::GeneratorLoss variant = gan::GeneratorLoss::non_saturating);

/// Paired samples drawn in reshuffled epochs.
class PairDataset {
 public:
  PairDataset(Tensor conditions, Tensor targets);

  std::size_t size() const { return static_cast<std::size_t>(conditions_.dim(0)); }
  /// Fills the batch pair with the next samples.
  void next_batch(std::int64_t batch_size, Rng& rng, Tensor& conditions, Tensor& targets);
  const Tensor& conditions() const { return conditions_; }
  const Tensor& targets() const { return targets_; }

 private:
  Tensor conditions_;
  Tensor targets_;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
};

struct TranslationStepReport {
  std::int64_t iteration = 0;
  double d_loss = 0.0;
  double g_loss = 0.0;
  double g_adversarial = 0.0;
  double l1 = 0.0;
  double mean_d_real = 0.0;
  double mean_d_fake = 0.0;
};

using TranslationHistory = std::vector<TranslationStepReport>;

TranslationStepReport translation_step(TranslationModel& model, const Tensor& c, const Tensor& y,
                                       const gan::TrainConfig& config);

struct TranslationCallbacks {
  std::function<void(const TranslationStepReport&)> after_step;
  std::int64_t checkpoint_every = 0;
  std::function<void(std::int64_t iteration)> checkpoint;
};

TranslationHistory train_translation(TranslationModel& model, PairDataset& data, const gan::TrainConfig& config,
                                     Rng& rng, const TranslationCallbacks& callbacks = {});

/// iteration,d_loss,g_loss,g_adversarial,l1,mean_d_real,mean_d_fake
std::string history_csv(const TranslationHistory& history);

/// One deterministic generator pass; the input's channels must match the direction.
Tensor translate(TranslationModel& model, const Tensor& input);

}  // namespace terragan::pix2pix
