#include "terragan/pix2pix/pix2pix.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>

#include "terragan/core/errors.hpp"
#include "terragan/core/functional.hpp"
#include "terragan/gan/checkpoint.hpp"

namespace terragan::pix2pix {

namespace {

constexpr double kLeakySlope = 0.2;
constexpr ConvGeometry kHalving{2, 1};  // with k4: exact halving / doubling

template <typename Real>
Var<Real> leaky(Var<Real> x) {
  return activation(x, Activation::leaky_relu(kLeakySlope));
}

bool is_power_of_two(std::int64_t v) { return v > 0 && (v & (v - 1)) == 0; }

std::int64_t widened(std::int64_t base, std::int64_t level) { return base << std::min<std::int64_t>(level, 3); }

}  // namespace

Direction parse_direction(std::string_view name) {
  if (name == "rgb-to-dem" || name == "rgb_to_dem") return Direction::rgb_to_dem;
  if (name == "dem-to-rgb" || name == "dem_to_rgb") return Direction::dem_to_rgb;
  throw ConfigError("unknown direction '" + std::string(name) + "' (expected rgb-to-dem or dem-to-rgb)");
}

std::string_view to_string(Direction direction) {
  return direction == Direction::rgb_to_dem ? "rgb-to-dem" : "dem-to-rgb";
}

std::int64_t input_channels(Direction direction) { return direction == Direction::rgb_to_dem ? 3 : 1; }
std::int64_t output_channels(Direction direction) { return direction == Direction::rgb_to_dem ? 1 : 3; }

// ------------------------------------------------------------------- configs

std::int64_t UNetConfig::level_channels(std::int64_t level) const { return widened(base_channels, level); }

std::int64_t UNetConfig::decoder_input_channels(std::int64_t level) const {
  return level == depth - 1 ? level_channels(level) : 2 * level_channels(level);
}

void UNetConfig::validate() const {
  if (input_channels < 1 || output_channels < 1) throw ConfigError("U-Net channel counts must be >= 1");
  if (depth < 1) throw ConfigError("U-Net depth must be >= 1");
  if (base_channels < 1) throw ConfigError("U-Net base_channels must be >= 1");
  if (!is_power_of_two(resolution) || (resolution >> depth) < 1) {
    throw ConfigError("U-Net resolution must be a power of two >= 2^depth, got " + std::to_string(resolution));
  }
}

std::int64_t PatchConfig::grid_extent(std::int64_t resolution) const { return resolution >> depth; }

void PatchConfig::validate(std::int64_t resolution) const {
  if (depth < 1) throw ConfigError("patch depth must be >= 1");
  if (base_channels < 1) throw ConfigError("patch base_channels must be >= 1");
  if (!is_power_of_two(resolution) || grid_extent(resolution) < 1) {
    throw ConfigError("patch stack of depth " + std::to_string(depth) + " leaves no score grid at resolution " +
                      std::to_string(resolution));
  }
}

// ---------------------------------------------------------------------- U-Net

template <typename Real>
UNet<Real>::UNet(UNetConfig config, Rng& rng) : config_(config) {
  config_.validate();
  const auto d = config_.depth;
  for (std::int64_t i = 0; i < d; ++i) {
    const auto in = i == 0 ? config_.input_channels : config_.level_channels(i - 1);
    encoder_.push_back(std::make_unique<Conv2dLayer<Real>>(in, config_.level_channels(i), 4, kHalving, rng));
  }
  for (std::int64_t i = 0; i < d; ++i) {
    const auto out = i == 0 ? config_.output_channels : config_.level_channels(i - 1);
    decoder_.push_back(
        std::make_unique<ConvTranspose2dLayer<Real>>(config_.decoder_input_channels(i), out, 4, kHalving, rng));
  }
}

template <typename Real>
Var<Real> UNet<Real>::forward(Tape<Real>& tape, Var<Real> c) {
  return run(tape, c, false);
}

template <typename Real>
Var<Real> UNet<Real>::run(Tape<Real>& tape, Var<Real> c, bool zero_bottleneck) {
  const auto& s = c.shape();
  if (s.size() != 4 || s[1] != config_.input_channels || s[2] != config_.resolution ||
      s[3] != config_.resolution) {
    throw ShapeError("U-Net expects [B," + std::to_string(config_.input_channels) + "," +
                     std::to_string(config_.resolution) + "," + std::to_string(config_.resolution) + "], got " +
                     shape_string(s));
  }
  const auto d = config_.depth;
  std::vector<Var<Real>> skips;
  auto h = c;
  for (std::int64_t i = 0; i < d; ++i) {
    h = leaky((*encoder_[i])(tape, h));
    skips.push_back(h);
  }
  if (zero_bottleneck) h = tape.constant(zeros<Real>(h.shape()));
  for (std::int64_t i = d - 1; i >= 1; --i) {
    h = leaky((*decoder_[i])(tape, h));
    h = concat_channels(h, skips[i - 1]);
  }
  return activation((*decoder_[0])(tape, h), Activation::tanh());
}

template <typename Real>
std::vector<NamedParameter<Real>> UNet<Real>::named_parameters() {
  std::vector<NamedParameter<Real>> out;
  for (std::size_t i = 0; i < encoder_.size(); ++i) encoder_[i]->collect(out, "g.enc" + std::to_string(i));
  for (std::size_t i = 0; i < decoder_.size(); ++i) decoder_[i]->collect(out, "g.dec" + std::to_string(i));
  return out;
}

// ------------------------------------------------------------------- PatchGAN

template <typename Real>
PatchDiscriminator<Real>::PatchDiscriminator(std::int64_t condition_channels, std::int64_t candidate_channels,
                                             PatchConfig config, Rng& rng)
    : condition_channels_(condition_channels), candidate_channels_(candidate_channels), config_(config) {
  if (config_.depth < 1 || config_.base_channels < 1) throw ConfigError("invalid patch configuration");
  std::int64_t in = condition_channels_ + candidate_channels_;
  for (std::int64_t i = 0; i < config_.depth; ++i) {
    const auto out = i == config_.depth - 1 ? 1 : widened(config_.base_channels, i);
    layers_.push_back(std::make_unique<Conv2dLayer<Real>>(in, out, 4, kHalving, rng));
    in = out;
  }
}

template <typename Real>
Var<Real> PatchDiscriminator<Real>::forward(Tape<Real>& tape, Var<Real> joint) {
  const auto& s = joint.shape();
  if (s.size() != 4 || s[1] != condition_channels_ + candidate_channels_) {
    throw ShapeError("patch discriminator expects " + std::to_string(condition_channels_ + candidate_channels_) +
                     " channels, got " + shape_string(s));
  }
  if (s[2] != s[3]) throw ShapeError("patch discriminator expects square inputs, got " + shape_string(s));
  config_.validate(s[2]);
  auto h = joint;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    h = (*layers_[i])(tape, h);
    if (i + 1 < layers_.size()) h = leaky(h);
  }
  return activation(h, Activation::sigmoid());
}

template <typename Real>
Var<Real> PatchDiscriminator<Real>::score(Tape<Real>& tape, Var<Real> c, Var<Real> candidate) {
  if (c.shape().size() != 4 || c.shape()[1] != condition_channels_) {
    throw ShapeError("condition must be [B," + std::to_string(condition_channels_) + ",R,R], got " +
                     shape_string(c.shape()));
  }
  if (candidate.shape().size() != 4 || candidate.shape()[1] != candidate_channels_) {
    throw ShapeError("candidate must be [B," + std::to_string(candidate_channels_) + ",R,R], got " +
                     shape_string(candidate.shape()));
  }
  return forward(tape, concat_channels(c, candidate));
}

template <typename Real>
std::vector<NamedParameter<Real>> PatchDiscriminator<Real>::named_parameters() {
  std::vector<NamedParameter<Real>> out;
  for (std::size_t i = 0; i < layers_.size(); ++i) layers_[i]->collect(out, "d.conv" + std::to_string(i));
  return out;
}

template class UNet<float>;
template class UNet<double>;
template class PatchDiscriminator<float>;
template class PatchDiscriminator<double>;

Tensor patch_decision(const Tensor& scores) {
  if (scores.rank() != 4 || scores.dim(1) != 1 || scores.numel() == 0) {
    throw ShapeError("patch scores must be a non-empty [B,1,P,P], got " + shape_string(scores.shape()));
  }
  const auto b = scores.dim(0);
  const auto cells = static_cast<std::size_t>(scores.dim(2) * scores.dim(3));
  Tensor out({b});
  for (std::int64_t i = 0; i < b; ++i) {
    const auto* p = scores.data() + static_cast<std::size_t>(i) * cells;
    out[static_cast<std::size_t>(i)] = static_cast<float>(std::accumulate(p, p + cells, 0.0) / static_cast<double>(cells));
  }
  return out;
}

// ---------------------------------------------------------------------- model

void TranslationOptions::validate() const {
  UNetConfig{input_channels(direction), output_channels(direction), unet_depth, unet_base_channels, resolution}
      .validate();
  patch.validate(resolution);
  if (!(l1_weight >= 0.0)) throw ConfigError("l1_weight must be >= 0");
}

TranslationModel::TranslationModel(const TranslationOptions& options, Rng& rng) : options_(options) {
  options_.validate();
  const auto in = input_channels(options_.direction);
  const auto out = output_channels(options_.direction);
  generator_ = std::make_unique<UNet<float>>(
      UNetConfig{in, out, options_.unet_depth, options_.unet_base_channels, options_.resolution}, rng);
  discriminator_ = std::make_unique<PatchDiscriminator<float>>(in, out, options_.patch, rng);
}

nlohmann::json TranslationModel::header() const {
  return {{"kind", "pix2pix"},
          {"direction", std::string(to_string(options_.direction))},
          {"l1_weight", options_.l1_weight},
          {"resolution", options_.resolution},
          {"unet_depth", options_.unet_depth},
          {"unet_base_channels", options_.unet_base_channels},
          {"patch_depth", options_.patch.depth},
          {"patch_base_channels", options_.patch.base_channels}};
}

std::vector<NamedParameter<float>> TranslationModel::named_parameters() {
  auto out = generator_->named_parameters();
  auto d = discriminator_->named_parameters();
  out.insert(out.end(), d.begin(), d.end());
  return out;
}

void TranslationModel::save(const std::string& path) { gan::save_checkpoint(path, header(), named_parameters()); }

TranslationModel TranslationModel::load(const std::string& path) {
  const auto ck = gan::load_checkpoint(path);
  const auto& h = ck.header;
  try {
    if (h.at("kind") != "pix2pix") throw CorruptionError(path + " is not a pix2pix checkpoint");
    TranslationOptions options;
    options.direction = parse_direction(h.at("direction").get<std::string>());
    options.l1_weight = h.at("l1_weight").get<double>();
    options.resolution = h.at("resolution").get<std::int64_t>();
    options.unet_depth = h.at("unet_depth").get<std::int64_t>();
    options.unet_base_channels = h.at("unet_base_channels").get<std::int64_t>();
    options.patch.depth = h.at("patch_depth").get<std::int64_t>();
    options.patch.base_channels = h.at("patch_base_channels").get<std::int64_t>();
    Rng scratch(0);
    TranslationModel model(options, scratch);
    gan::restore_parameters(ck, model.named_parameters());
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw CorruptionError(path + ": incomplete pix2pix header: " + e.what());
  }
}

// --------------------------------------------------------------------- losses

template <typename Real>
CganTerms<Real> cgan_terms(Var<Real> d_real, Var<Real> d_fake, Var<Real> fake, Var<Real> target, double l1_weight,
                           gan::GeneratorLoss variant) {
  if (fake.shape() != target.shape()) {
    throw ShapeError("generated " + shape_string(fake.shape()) + " vs target " + shape_string(target.shape()));
  }
  CganTerms<Real> t{gan::discriminator_loss(d_real, d_fake), gan::generator_loss(d_fake, variant),
                    reduce_mean(abs(sub(fake, target))), {}};
  t.g_loss = add(t.g_adversarial, affine(t.l1, l1_weight, 0.0));
  return t;
}

template CganTerms<float> cgan_terms(Var<float>, Var<float>, Var<float>, Var<float>, double, gan::GeneratorLoss);
template CganTerms<double> cgan_terms(Var<double>, Var<double>, Var<double>, Var<double>, double,
                                      gan::GeneratorLoss);

CganLosses cgan_losses(TranslationModel& model, const Tensor& c, const Tensor& y_real, gan::GeneratorLoss variant) {
  Tape<float> tape(false);
  auto cv = tape.constant(c);
  auto fake = model.generator().forward(tape, cv);
  auto target = tape.constant(y_real);
  auto t = cgan_terms(model.discriminator().score(tape, cv, target), model.discriminator().score(tape, cv, fake),
                      fake, target, model.l1_weight(), variant);
  return {t.d_loss.value()[0], t.g_adversarial.value()[0], t.l1.value()[0], t.g_loss.value()[0]};
}

// ------------------------------------------------------------------- training

PairDataset::PairDataset(Tensor conditions, Tensor targets)
    : conditions_(std::move(conditions)), targets_(std::move(targets)) {
  if (conditions_.rank() != 4 || targets_.rank() != 4) throw ShapeError("pairs must be [N,C,H,W]");
  if (conditions_.dim(0) != targets_.dim(0) || conditions_.dim(2) != targets_.dim(2) ||
      conditions_.dim(3) != targets_.dim(3)) {
    throw ShapeError("conditions " + shape_string(conditions_.shape()) + " and targets " +
                     shape_string(targets_.shape()) + " are not aligned");
  }
  order_.resize(size());
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  cursor_ = order_.size();
}

void PairDataset::next_batch(std::int64_t batch_size, Rng& rng, Tensor& conditions, Tensor& targets) {
  auto cs = conditions_.shape();
  auto ts = targets_.shape();
  cs[0] = ts[0] = batch_size;
  conditions = Tensor(cs);
  targets = Tensor(ts);
  const auto c_stride = conditions_.numel() / order_.size();
  const auto t_stride = targets_.numel() / order_.size();
  for (std::int64_t i = 0; i < batch_size; ++i) {
    if (cursor_ == order_.size()) {
      for (std::size_t k = order_.size(); k > 1; --k) std::swap(order_[k - 1], order_[rng.below(k)]);
      cursor_ = 0;
    }
    const auto idx = order_[cursor_++];
    const auto slot = static_cast<std::size_t>(i);
    std::copy_n(conditions_.data() + idx * c_stride, c_stride, conditions.data() + slot * c_stride);
    std::copy_n(targets_.data() + idx * t_stride, t_stride, targets.data() + slot * t_stride);
  }
}

TranslationStepReport translation_step(TranslationModel& model, const Tensor& c, const Tensor& y,
                                       const gan::TrainConfig& config) {
  config.validate();
  auto& generator = model.generator();
  auto& discriminator = model.discriminator();
  auto d_params = discriminator.parameters();
  auto g_params = generator.parameters();
  TranslationStepReport report;

  const Tensor fake_detached = generator.infer(c);
  if (fake_detached.shape() != y.shape()) {
    throw ContractError("target batch " + shape_string(y.shape()) + " does not match generator output " +
                        shape_string(fake_detached.shape()));
  }
  for (std::int64_t s = 0; s < config.d_steps_per_g_step; ++s) {
    Tape<float> tape;
    auto cv = tape.constant(c);
    auto d_real = discriminator.score(tape, cv, tape.constant(y));
    auto d_fake = discriminator.score(tape, cv, tape.constant(fake_detached));
    auto loss = gan::discriminator_loss(d_real, d_fake);
    tape.backward(loss);
    optimizer_step<float>(d_params, model.options().discriminator_optimizer);
    report.d_loss = loss.value()[0];
    report.mean_d_real = reduce_mean(d_real.value());
    report.mean_d_fake = reduce_mean(d_fake.value());
  }

  Tape<float> tape;
  auto cv = tape.constant(c);
  auto target = tape.constant(y);
  auto fake = generator.forward(tape, cv);
  auto d_fake = discriminator.score(tape, cv, fake);
  const auto variant = config.generator_loss;
  auto g_adv = gan::generator_loss(d_fake, variant);
  auto l1 = reduce_mean(abs(sub(fake, target)));
  auto g_loss = add(g_adv, affine(l1, model.l1_weight(), 0.0));
  tape.backward(g_loss);
  optimizer_step<float>(g_params, model.options().generator_optimizer);
  zero_grads<float>(d_params);
  report.g_loss = g_loss.value()[0];
  report.g_adversarial = g_adv.value()[0];
  report.l1 = l1.value()[0];
  return report;
}

TranslationHistory train_translation(TranslationModel& model, PairDataset& data, const gan::TrainConfig& config,
                                     Rng& rng, const TranslationCallbacks& callbacks) {
  config.validate();
  if (data.size() == 0) throw ConfigError("training dataset is empty");
  if (data.conditions().dim(1) != input_channels(model.direction()) ||
      data.targets().dim(1) != output_channels(model.direction())) {
    throw ContractError("dataset channels do not match direction " + std::string(to_string(model.direction())));
  }
  TranslationHistory history;
  history.reserve(static_cast<std::size_t>(config.iterations));
  Tensor c;
  Tensor y;
  for (std::int64_t it = 0; it < config.iterations; ++it) {
    data.next_batch(config.batch_size, rng, c, y);
    auto report = translation_step(model, c, y, config);
    report.iteration = it;
    history.push_back(report);
    if (callbacks.after_step) callbacks.after_step(report);
    if (callbacks.checkpoint && callbacks.checkpoint_every > 0 && (it + 1) % callbacks.checkpoint_every == 0) {
      callbacks.checkpoint(it);
    }
  }
  return history;
}

std::string history_csv(const TranslationHistory& history) {
  std::string out = "iteration,d_loss,g_loss,g_adversarial,l1,mean_d_real,mean_d_fake\n";
  char line[200];
  for (const auto& r : history) {
    std::snprintf(line, sizeof line, "%lld,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n", static_cast<long long>(r.iteration),
                  r.d_loss, r.g_loss, r.g_adversarial, r.l1, r.mean_d_real, r.mean_d_fake);
    out += line;
  }
  return out;
}

Tensor translate(TranslationModel& model, const Tensor& input) {
  const auto want = input_channels(model.direction());
  if (input.rank() != 4 || input.dim(1) != want) {
    throw ContractError("direction " + std::string(to_string(model.direction())) + " expects " +
                        std::to_string(want) + "-channel input, got " + shape_string(input.shape()));
  }
  return model.generator().infer(input);
}

}  // namespace terragan::pix2pix
