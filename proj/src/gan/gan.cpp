#include "terragan/gan/gan.hpp"

#include <cstdio>
#include <fstream>
#include <numeric>

#include "terragan/core/errors.hpp"

namespace terragan::gan {

Tensor sample_noise(const NoiseSpec& spec, std::int64_t batch, Rng& rng) {
  if (batch < 1) throw ContractError("noise batch must be >= 1");
  if (spec.dim < 1) throw ConfigError("noise dim must be >= 1");
  if (spec.distribution == NoiseSpec::Distribution::uniform) {
    return rand_uniform<float>({batch, spec.dim}, -1.0, 1.0, rng);
  }
  return randn<float>({batch, spec.dim}, 0.0, 1.0, rng);
}

GeneratorLoss parse_generator_loss(std::string_view name) {
  if (name == "minimax") return GeneratorLoss::minimax;
  if (name == "non_saturating") return GeneratorLoss::non_saturating;
  throw ConfigError("unknown generator loss variant '" + std::string(name) + "'");
}

std::string_view to_string(GeneratorLoss variant) {
  return variant == GeneratorLoss::minimax ? "minimax" : "non_saturating";
}

template <typename Real>
Var<Real> gan_value(Var<Real> d_real, Var<Real> d_fake) {
  auto real_term = reduce_mean(log_clamped(d_real, kScoreEps));
  auto fake_term = reduce_mean(log_clamped(affine(d_fake, -1.0, 1.0), kScoreEps));
  return add(real_term, fake_term);
}

template <typename Real>
Var<Real> discriminator_loss(Var<Real> d_real, Var<Real> d_fake) {
  return affine(gan_value(d_real, d_fake), -1.0, 0.0);
}

template <typename Real>
Var<Real> generator_loss(Var<Real> d_fake, GeneratorLoss variant) {
  if (variant == GeneratorLoss::minimax) {
    return reduce_mean(log_clamped(affine(d_fake, -1.0, 1.0), kScoreEps));
  }
  return affine(reduce_mean(log_clamped(d_fake, kScoreEps)), -1.0, 0.0);
}

template Var<float> gan_value<float>(Var<float>, Var<float>);
template Var<double> gan_value<double>(Var<double>, Var<double>);
template Var<float> discriminator_loss<float>(Var<float>, Var<float>);
template Var<double> discriminator_loss<double>(Var<double>, Var<double>);
template Var<float> generator_loss<float>(Var<float>, GeneratorLoss);
template Var<double> generator_loss<double>(Var<double>, GeneratorLoss);

double gan_value(const Tensor& d_real, const Tensor& d_fake) {
  Tape<float> tape(false);
  return gan_value(tape.constant(d_real), tape.constant(d_fake)).value()[0];
}

double discriminator_loss(const Tensor& d_real, const Tensor& d_fake) {
  Tape<float> tape(false);
  return discriminator_loss(tape.constant(d_real), tape.constant(d_fake)).value()[0];
}

double generator_loss(const Tensor& d_fake, GeneratorLoss variant) {
  Tape<float> tape(false);
  return generator_loss(tape.constant(d_fake), variant).value()[0];
}

void TrainConfig::validate() const {
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (iterations < 0) throw ConfigError("iterations must be >= 0");
  if (d_steps_per_g_step < 1) throw ConfigError("d_steps_per_g_step must be >= 1");
}

TensorDataset::TensorDataset(Tensor samples) : samples_(std::move(samples)) {
  if (samples_.rank() != 4) throw ShapeError("dataset samples must be [N,C,H,W]");
  order_.resize(static_cast<std::size_t>(samples_.dim(0)));
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  cursor_ = order_.size();
}

std::size_t TensorDataset::size() const { return order_.size(); }

Tensor TensorDataset::next_batch(std::int64_t batch_size, Rng& rng) {
  const auto stride = samples_.numel() / order_.size();
  Shape shape = samples_.shape();
  shape[0] = batch_size;
  Tensor batch(shape);
  for (std::int64_t i = 0; i < batch_size; ++i) {
    if (cursor_ == order_.size()) {
      for (std::size_t k = order_.size(); k > 1; --k) std::swap(order_[k - 1], order_[rng.below(k)]);
      cursor_ = 0;
    }
    const auto src = samples_.data() + order_[cursor_++] * stride;
    std::copy(src, src + stride, batch.data() + static_cast<std::size_t>(i) * stride);
  }
  return batch;
}

StepReport adversarial_step(GanModel& model, const Tensor& real_batch, const TrainConfig& config, Rng& rng) {
  config.validate();
  auto& generator = *model.generator;
  auto& discriminator = *model.discriminator;
  auto d_params = discriminator.active_parameters();
  auto g_params = generator.active_parameters();
  const auto batch = real_batch.dim(0);

  StepReport report;
  for (std::int64_t s = 0; s < config.d_steps_per_g_step; ++s) {
    const Tensor fake = generator.infer(sample_noise(model.noise, batch, rng));
    if (fake.shape() != real_batch.shape()) {
      throw ContractError("real batch " + shape_string(real_batch.shape()) + " does not match generator output " +
                          shape_string(fake.shape()));
    }
    Tape<float> tape;
    auto d_real = discriminator.forward(tape, tape.constant(real_batch));
    auto d_fake = discriminator.forward(tape, tape.constant(fake));
    auto loss = discriminator_loss(d_real, d_fake);
    tape.backward(loss);
    optimizer_step<float>(d_params, model.discriminator_optimizer);
    report.d_loss = loss.value()[0];
    report.mean_d_real = reduce_mean(d_real.value());
    report.mean_d_fake = reduce_mean(d_fake.value());
  }

  Tape<float> tape;
  auto fake = generator.forward(tape, tape.constant(sample_noise(model.noise, batch, rng)));
  auto loss = generator_loss(discriminator.forward(tape, fake), config.generator_loss);
  tape.backward(loss);
  optimizer_step<float>(g_params, model.generator_optimizer);
  zero_grads<float>(d_params);
  report.g_loss = loss.value()[0];
  return report;
}

LossHistory train_gan(GanModel& model, BatchSource& data, const TrainConfig& config, Rng& rng,
                      const TrainCallbacks& callbacks) {
  config.validate();
  if (data.size() == 0) throw ConfigError("training dataset is empty");
  LossHistory history;
  history.reserve(static_cast<std::size_t>(config.iterations));
  for (std::int64_t it = 0; it < config.iterations; ++it) {
    if (callbacks.before_step) callbacks.before_step(it);
    const Tensor real = data.next_batch(config.batch_size, rng);
    auto report = adversarial_step(model, real, config, rng);
    report.iteration = it;
    history.push_back(report);
    if (callbacks.after_step) callbacks.after_step(report);
    if (callbacks.checkpoint && callbacks.checkpoint_every > 0 && (it + 1) % callbacks.checkpoint_every == 0) {
      callbacks.checkpoint(it);
    }
    if (callbacks.sample && callbacks.sample_every > 0 && (it + 1) % callbacks.sample_every == 0) {
      callbacks.sample(it);
    }
  }
  return history;
}

std::string history_csv(const LossHistory& history) {
  std::string out = "iteration,d_loss,g_loss,mean_d_real,mean_d_fake\n";
  char line[160];
  for (const auto& r : history) {
    std::snprintf(line, sizeof line, "%lld,%.9g,%.9g,%.9g,%.9g\n", static_cast<long long>(r.iteration), r.d_loss,
                  r.g_loss, r.mean_d_real, r.mean_d_fake);
    out += line;
  }
  return out;
}

void write_history_csv(const std::string& path, const LossHistory& history) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << history_csv(history);
}

}  // namespace terragan::gan
