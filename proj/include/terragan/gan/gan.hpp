#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "terragan/core/autograd.hpp"
#include "terragan/core/layers.hpp"
#include "terragan/core/optim.hpp"
#include "terragan/core/rng.hpp"

namespace terragan::gan {

/// Scores are clamped to [eps, 1 - eps] before every log.
inline constexpr double kScoreEps = 1e-7;

struct NoiseSpec {
  enum class Distribution { normal, uniform };
  std::int64_t dim = 64;
  Distribution distribution = Distribution::normal;
};

/// [batch, dim] i.i.d. draws from N(0,1) or U(-1,1).
Tensor sample_noise(const NoiseSpec& spec, std::int64_t batch, Rng& rng);

enum class GeneratorLoss { minimax, non_saturating };

GeneratorLoss parse_generator_loss(std::string_view name);
std::string_view to_string(GeneratorLoss variant);

// V(D, G) = E[log D(x)] + E[log(1 - D(G(z)))], each expectation a batch mean.
template <typename Real>
Var<Real> gan_value(Var<Real> d_real, Var<Real> d_fake);
template <typename Real>
Var<Real> discriminator_loss(Var<Real> d_real, Var<Real> d_fake);
/// minimax: E[log(1 - D(G(z)))]; non_saturating: -E[log D(G(z))].
template <typename Real>
Var<Real> generator_loss(Var<Real> d_fake, GeneratorLoss variant);

// Value-level forms evaluated through the same graph.
double gan_value(const Tensor& d_real, const Tensor& d_fake);
double discriminator_loss(const Tensor& d_real, const Tensor& d_fake);
double generator_loss(const Tensor& d_fake, GeneratorLoss variant);

struct GanModel {
  std::unique_ptr<Network<float>> generator;
  std::unique_ptr<Network<float>> discriminator;
  NoiseSpec noise;
  OptimizerRule generator_optimizer = Adam{};
  OptimizerRule discriminator_optimizer = Adam{};
};

struct TrainConfig {
  std::int64_t batch_size = 8;
  std::int64_t iterations = 1000;
  std::int64_t d_steps_per_g_step = 1;
  GeneratorLoss generator_loss = GeneratorLoss::non_saturating;
  std::uint64_t seed = 0;

  void validate() const;
};

struct StepReport {
  std::int64_t iteration = 0;
  double d_loss = 0.0;
  double g_loss = 0.0;
  double mean_d_real = 0.0;
  double mean_d_fake = 0.0;
};

using LossHistory = std::vector<StepReport>;

/// Source of real training batches in a deterministic order.
class BatchSource {
 public:
  virtual ~BatchSource() = default;
  virtual std::size_t size() const = 0;
  virtual Tensor next_batch(std::int64_t batch_size, Rng& rng) = 0;
};

/// In-memory samples drawn in reshuffled epochs.
class TensorDataset final : public BatchSource {
 public:
  /// `samples` is [N, C, H, W].
  explicit TensorDataset(Tensor samples);

  std::size_t size() const override;
  Tensor next_batch(std::int64_t batch_size, Rng& rng) override;
  const Tensor& samples() const { return samples_; }

 private:
  Tensor samples_;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
};

/// Discriminator update(s) on real and detached fake batches, then one
/// generator update through the discriminator.
StepReport adversarial_step(GanModel& model, const Tensor& real_batch, const TrainConfig& config, Rng& rng);

struct TrainCallbacks {
  std::function<void(std::int64_t iteration)> before_step;
  std::function<void(const StepReport&)> after_step;
  std::int64_t checkpoint_every = 0;
  std::function<void(std::int64_t iteration)> checkpoint;
  std::int64_t sample_every = 0;
  std::function<void(std::int64_t iteration)> sample;
};

LossHistory train_gan(GanModel& model, BatchSource& data, const TrainConfig& config, Rng& rng,
                      const TrainCallbacks& callbacks = {});

/// iteration,d_loss,g_loss,mean_d_real,mean_d_fake
void write_history_csv(const std::string& path, const LossHistory& history);
std::string history_csv(const LossHistory& history);

}  // namespace terragan::gan
