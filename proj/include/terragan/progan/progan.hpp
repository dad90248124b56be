#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "terragan/core/layers.hpp"
#include "terragan/gan/gan.hpp"

namespace terragan::progan {

/// Resolution ladder 4, 8, ..., target and the per-stage iteration budget.
struct StageSchedule {
  std::vector<std::int64_t> resolutions;
  std::int64_t iterations_per_stage = 0;
  double fade_fraction = 0.5;

  std::size_t stage_count() const { return resolutions.size(); }
  /// Iterations spent ramping alpha at the start of every stage after the first.
  std::int64_t fade_iterations() const;
};

/// Target must be a power of two in [4, 256]; fade_fraction in (0, 1).
StageSchedule make_schedule(std::int64_t target_resolution, std::int64_t iterations_per_stage,
                            double fade_fraction = 0.5);

/// min(iteration / fade_iterations, 1).
double alpha_schedule(std::int64_t iteration, std::int64_t fade_iterations);

struct FadeState {
  double alpha = 1.0;
  std::size_t stage_index = 0;
};

/// Feature widths per stage: base at 4x4, halved each doubling, never below floor.
struct ChannelPlan {
  std::int64_t base = 32;
  std::int64_t floor = 8;

  std::int64_t at(std::size_t stage) const;
};

struct ProganShape {
  std::int64_t latent_dim = 64;
  std::int64_t image_channels = 3;
  ChannelPlan channels;
};

/// Generator grown one block per stage. Every earlier block stays trainable;
/// each stage keeps its own 1x1 image head so a fading stage can blend the
/// upsampled previous head with the new one.
template <typename Real>
class StagedGenerator final : public Network<Real> {
 public:
  StagedGenerator(ProganShape shape, Rng& rng);

  void grow(Rng& rng);
  std::size_t stage() const { return blocks_.size() - 1; }
  std::int64_t resolution() const { return std::int64_t{4} << stage(); }

  void set_alpha(double alpha);
  double alpha() const { return alpha_; }

  /// Uses the stored alpha.
  Var<Real> forward(Tape<Real>& tape, Var<Real> z) override;
  /// (1 - alpha) * up2(previous head) + alpha * new head; at stage 0 the single head.
  Var<Real> faded_forward(Tape<Real>& tape, Var<Real> z, double alpha);
  std::vector<NamedParameter<Real>> named_parameters() override;
  /// Excludes image heads of superseded stages (and the previous head once alpha is 1).
  std::vector<Parameter<Real>*> active_parameters() override;

 private:
  struct Block {
    std::unique_ptr<ConvTranspose2dLayer<Real>> project;  // stage 0 only
    std::unique_ptr<Conv2dLayer<Real>> conv_a;            // absent at stage 0
    std::unique_ptr<Conv2dLayer<Real>> conv_b;
    std::unique_ptr<Conv2dLayer<Real>> to_image;
  };

  ProganShape shape_;
  std::vector<Block> blocks_;
  double alpha_ = 1.0;
};

/// Mirror of the generator: the newest block is prepended at the input side,
/// each stage has its own 1x1 input adapter, and mid-fade inputs blend the new
/// path with the downscaled input fed through the previous adapter.
template <typename Real>
class StagedDiscriminator final : public Network<Real> {
 public:
  StagedDiscriminator(ProganShape shape, Rng& rng);

  void grow(Rng& rng);
  std::size_t stage() const { return blocks_.size() - 1; }
  std::int64_t resolution() const { return std::int64_t{4} << stage(); }

  void set_alpha(double alpha);
  double alpha() const { return alpha_; }

  /// [B, C, res, res] -> [B, 1] scores in (0, 1).
  Var<Real> forward(Tape<Real>& tape, Var<Real> image) override;
  Var<Real> faded_forward(Tape<Real>& tape, Var<Real> image, double alpha);
  std::vector<NamedParameter<Real>> named_parameters() override;
  std::vector<Parameter<Real>*> active_parameters() override;

 private:
  struct Block {
    std::unique_ptr<Conv2dLayer<Real>> from_image;
    std::unique_ptr<Conv2dLayer<Real>> conv_a;
    std::unique_ptr<Conv2dLayer<Real>> conv_b;  // stage 0: 4x4 valid conv to one score
  };

  Var<Real> run_block(Tape<Real>& tape, std::size_t k, Var<Real> h);

  ProganShape shape_;
  std::vector<Block> blocks_;
  double alpha_ = 1.0;
};

/// A GanModel whose networks are the staged pair.
class ProganModel {
 public:
  ProganModel(ProganShape shape, std::size_t final_stage, Rng& rng);

  gan::GanModel& gan() { return gan_; }
  StagedGenerator<float>& generator() { return *generator_; }
  StagedDiscriminator<float>& discriminator() { return *discriminator_; }
  const ProganShape& shape() const { return shape_; }

  std::size_t stage() const { return fade_.stage_index; }
  std::size_t final_stage() const { return final_stage_; }
  std::int64_t resolution() const { return generator_->resolution(); }
  const FadeState& fade() const { return fade_; }

  /// Appends a generator block and prepends a discriminator block; alpha resets to 0.
  void grow(Rng& rng);
  void set_alpha(double alpha);

  /// Metadata recorded in checkpoint headers.
  nlohmann::json header() const;
  std::vector<NamedParameter<float>> named_parameters();

  void save(const std::string& path);
  /// Rebuilds the staged model described by a checkpoint and restores its weights.
  static ProganModel load(const std::string& path);

 private:
  ProganShape shape_;
  std::size_t final_stage_;
  gan::GanModel gan_;
  StagedGenerator<float>* generator_;
  StagedDiscriminator<float>* discriminator_;
  FadeState fade_;
};

/// Repeated 2x2 block averaging of [B, C, S, S] tiles down to `resolution`.
Tensor real_batch_at_resolution(const Tensor& tiles, std::int64_t resolution);

struct ProgressiveOptions {
  gan::TrainConfig train;
  OptimizerRule generator_optimizer = Adam{};
  OptimizerRule discriminator_optimizer = Adam{};
  /// Writes stage<k>.tfck after each stage when non-empty.
  std::string checkpoint_dir;
  /// Called every `sample_every` iterations of a stage and at its end, with the
  /// number of completed iterations.
  std::int64_t sample_every = 0;
  std::function<void(std::size_t stage, std::int64_t iteration, ProganModel& model)> sample;
};

struct ProgressiveResult {
  ProganModel model;
  std::vector<gan::LossHistory> stage_histories;
};

/// Trains stage by stage; stages after the first fade in over
/// schedule.fade_iterations() before continuing at alpha = 1.
ProgressiveResult train_progressive(const StageSchedule& schedule, const Tensor& tiles, const ProganShape& shape,
                                    const ProgressiveOptions& options, Rng& rng);

}  // namespace terragan::progan
