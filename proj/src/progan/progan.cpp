#include "terragan/progan/progan.hpp"

#include <filesystem>

#include "terragan/core/errors.hpp"
#include "terragan/gan/checkpoint.hpp"

namespace terragan::progan {

namespace {

constexpr double kLeakySlope = 0.2;

bool is_power_of_two(std::int64_t v) { return v > 0 && (v & (v - 1)) == 0; }

template <typename Real>
Var<Real> leaky(Var<Real> x) {
  return activation(x, Activation::leaky_relu(kLeakySlope));
}

}  // namespace

std::int64_t StageSchedule::fade_iterations() const {
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(fade_fraction * static_cast<double>(iterations_per_stage)));
}

StageSchedule make_schedule(std::int64_t target_resolution, std::int64_t iterations_per_stage, double fade_fraction) {
  if (!is_power_of_two(target_resolution) || target_resolution < 4 || target_resolution > 256) {
    throw ConfigError("target resolution must be a power of two in [4, 256], got " +
                      std::to_string(target_resolution));
  }
  if (!(fade_fraction > 0.0 && fade_fraction < 1.0)) throw ConfigError("fade_fraction must lie in (0, 1)");
  if (iterations_per_stage < 0) throw ConfigError("iterations_per_stage must be >= 0");
  StageSchedule s;
  for (std::int64_t r = 4; r <= target_resolution; r *= 2) s.resolutions.push_back(r);
  s.iterations_per_stage = iterations_per_stage;
  s.fade_fraction = fade_fraction;
  return s;
}

double alpha_schedule(std::int64_t iteration, std::int64_t fade_iterations) {
  if (fade_iterations < 1) throw ContractError("fade_iterations must be >= 1");
  if (iteration <= 0) return 0.0;
  if (iteration >= fade_iterations) return 1.0;
  return static_cast<double>(iteration) / static_cast<double>(fade_iterations);
}

std::int64_t ChannelPlan::at(std::size_t stage) const {
  return std::max(floor, base >> stage);
}

// ---------------------------------------------------------------- generator

template <typename Real>
StagedGenerator<Real>::StagedGenerator(ProganShape shape, Rng& rng) : shape_(shape) {
  if (shape_.latent_dim < 1 || shape_.image_channels < 1) throw ConfigError("invalid ProGAN shape");
  const auto c0 = shape_.channels.at(0);
  Block b;
  b.project = std::make_unique<ConvTranspose2dLayer<Real>>(shape_.latent_dim, c0, 4, ConvGeometry{1, 0}, rng);
  b.conv_b = std::make_unique<Conv2dLayer<Real>>(c0, c0, 3, ConvGeometry{1, 1}, rng);
  b.to_image = std::make_unique<Conv2dLayer<Real>>(c0, shape_.image_channels, 1, ConvGeometry{1, 0}, rng);
  blocks_.push_back(std::move(b));
}

template <typename Real>
void StagedGenerator<Real>::grow(Rng& rng) {
  const auto k = blocks_.size();
  const auto in = shape_.channels.at(k - 1);
  const auto out = shape_.channels.at(k);
  Block b;
  b.conv_a = std::make_unique<Conv2dLayer<Real>>(in, out, 3, ConvGeometry{1, 1}, rng);
  b.conv_b = std::make_unique<Conv2dLayer<Real>>(out, out, 3, ConvGeometry{1, 1}, rng);
  b.to_image = std::make_unique<Conv2dLayer<Real>>(out, shape_.image_channels, 1, ConvGeometry{1, 0}, rng);
  blocks_.push_back(std::move(b));
  alpha_ = 0.0;
}

template <typename Real>
void StagedGenerator<Real>::set_alpha(double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ContractError("alpha must lie in [0, 1]");
  alpha_ = alpha;
}

template <typename Real>
Var<Real> StagedGenerator<Real>::forward(Tape<Real>& tape, Var<Real> z) {
  return faded_forward(tape, z, alpha_);
}

template <typename Real>
Var<Real> StagedGenerator<Real>::faded_forward(Tape<Real>& tape, Var<Real> z, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ContractError("alpha must lie in [0, 1]");
  if (z.shape().size() != 2 || z.shape()[1] != shape_.latent_dim) {
    throw ShapeError("generator expects noise [B," + std::to_string(shape_.latent_dim) + "], got " +
                     shape_string(z.shape()));
  }
  const auto last = stage();
  auto h = reshape(z, {z.shape()[0], shape_.latent_dim, 1, 1});
  h = leaky((*blocks_[0].project)(tape, h));
  h = leaky((*blocks_[0].conv_b)(tape, h));
  Var<Real> previous = h;
  for (std::size_t k = 1; k <= last; ++k) {
    previous = h;
    h = resample(h, ResampleMode::up2_nearest);
    h = leaky((*blocks_[k].conv_a)(tape, h));
    h = leaky((*blocks_[k].conv_b)(tape, h));
  }
  auto image = activation((*blocks_[last].to_image)(tape, h), Activation::tanh());
  if (last == 0 || alpha >= 1.0) return image;
  auto old_image = activation((*blocks_[last - 1].to_image)(tape, previous), Activation::tanh());
  return lerp(resample(old_image, ResampleMode::up2_nearest), image, alpha);
}

template <typename Real>
std::vector<NamedParameter<Real>> StagedGenerator<Real>::named_parameters() {
  std::vector<NamedParameter<Real>> out;
  for (std::size_t k = 0; k < blocks_.size(); ++k) {
    const auto prefix = "g.block" + std::to_string(k);
    auto& b = blocks_[k];
    if (b.project) b.project->collect(out, prefix + ".project");
    if (b.conv_a) b.conv_a->collect(out, prefix + ".conv_a");
    b.conv_b->collect(out, prefix + ".conv_b");
    b.to_image->collect(out, prefix + ".to_image");
  }
  return out;
}

template <typename Real>
std::vector<Parameter<Real>*> StagedGenerator<Real>::active_parameters() {
  const auto last = stage();
  std::vector<NamedParameter<Real>> named;
  for (std::size_t k = 0; k <= last; ++k) {
    auto& b = blocks_[k];
    if (b.project) b.project->collect(named, "");
    if (b.conv_a) b.conv_a->collect(named, "");
    b.conv_b->collect(named, "");
    if (k == last || (k + 1 == last && alpha_ < 1.0)) b.to_image->collect(named, "");
  }
  std::vector<Parameter<Real>*> out;
  for (auto& np : named) out.push_back(np.parameter);
  return out;
}

// ------------------------------------------------------------ discriminator

template <typename Real>
StagedDiscriminator<Real>::StagedDiscriminator(ProganShape shape, Rng& rng) : shape_(shape) {
  if (shape_.image_channels < 1) throw ConfigError("invalid ProGAN shape");
  const auto c0 = shape_.channels.at(0);
  Block b;
  b.from_image = std::make_unique<Conv2dLayer<Real>>(shape_.image_channels, c0, 1, ConvGeometry{1, 0}, rng);
  b.conv_a = std::make_unique<Conv2dLayer<Real>>(c0, c0, 3, ConvGeometry{1, 1}, rng);
  b.conv_b = std::make_unique<Conv2dLayer<Real>>(c0, 1, 4, ConvGeometry{1, 0}, rng);
  blocks_.push_back(std::move(b));
}

template <typename Real>
void StagedDiscriminator<Real>::grow(Rng& rng) {
  const auto k = blocks_.size();
  const auto width = shape_.channels.at(k);
  const auto next = shape_.channels.at(k - 1);
  Block b;
  b.from_image = std::make_unique<Conv2dLayer<Real>>(shape_.image_channels, width, 1, ConvGeometry{1, 0}, rng);
  b.conv_a = std::make_unique<Conv2dLayer<Real>>(width, width, 3, ConvGeometry{1, 1}, rng);
  b.conv_b = std::make_unique<Conv2dLayer<Real>>(width, next, 3, ConvGeometry{1, 1}, rng);
  blocks_.push_back(std::move(b));
  alpha_ = 0.0;
}

template <typename Real>
void StagedDiscriminator<Real>::set_alpha(double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ContractError("alpha must lie in [0, 1]");
  alpha_ = alpha;
}

template <typename Real>
Var<Real> StagedDiscriminator<Real>::run_block(Tape<Real>& tape, std::size_t k, Var<Real> h) {
  auto& b = blocks_[k];
  h = leaky((*b.conv_a)(tape, h));
  if (k == 0) {
    auto score = (*b.conv_b)(tape, h);
    return activation(reshape(score, {score.shape()[0], 1}), Activation::sigmoid());
  }
  h = leaky((*b.conv_b)(tape, h));
  return resample(h, ResampleMode::down2_average);
}

template <typename Real>
Var<Real> StagedDiscriminator<Real>::forward(Tape<Real>& tape, Var<Real> image) {
  return faded_forward(tape, image, alpha_);
}

template <typename Real>
Var<Real> StagedDiscriminator<Real>::faded_forward(Tape<Real>& tape, Var<Real> image, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ContractError("alpha must lie in [0, 1]");
  const auto res = resolution();
  const auto& s = image.shape();
  if (s.size() != 4 || s[1] != shape_.image_channels || s[2] != res || s[3] != res) {
    throw ShapeError("discriminator at " + std::to_string(res) + "x" + std::to_string(res) + " got " +
                     shape_string(s));
  }
  const auto top = stage();
  auto h = leaky((*blocks_[top].from_image)(tape, image));
  h = run_block(tape, top, h);
  if (top == 0) return h;
  if (alpha < 1.0) {
    auto coarse = resample(image, ResampleMode::down2_average);
    auto h_old = leaky((*blocks_[top - 1].from_image)(tape, coarse));
    h = lerp(h_old, h, alpha);
  }
  for (std::size_t k = top; k-- > 0;) h = run_block(tape, k, h);
  return h;
}

template <typename Real>
std::vector<NamedParameter<Real>> StagedDiscriminator<Real>::named_parameters() {
  std::vector<NamedParameter<Real>> out;
  for (std::size_t k = 0; k < blocks_.size(); ++k) {
    const auto prefix = "d.block" + std::to_string(k);
    blocks_[k].from_image->collect(out, prefix + ".from_image");
    blocks_[k].conv_a->collect(out, prefix + ".conv_a");
    blocks_[k].conv_b->collect(out, prefix + ".conv_b");
  }
  return out;
}

template <typename Real>
std::vector<Parameter<Real>*> StagedDiscriminator<Real>::active_parameters() {
  const auto top = stage();
  std::vector<NamedParameter<Real>> named;
  for (std::size_t k = 0; k <= top; ++k) {
    auto& b = blocks_[k];
    if (k == top || (k + 1 == top && alpha_ < 1.0)) b.from_image->collect(named, "");
    b.conv_a->collect(named, "");
    b.conv_b->collect(named, "");
  }
  std::vector<Parameter<Real>*> out;
  for (auto& np : named) out.push_back(np.parameter);
  return out;
}

template class StagedGenerator<float>;
template class StagedGenerator<double>;
template class StagedDiscriminator<float>;
template class StagedDiscriminator<double>;

// -------------------------------------------------------------------- model

ProganModel::ProganModel(ProganShape shape, std::size_t final_stage, Rng& rng)
    : shape_(shape), final_stage_(final_stage) {
  auto g = std::make_unique<StagedGenerator<float>>(shape_, rng);
  auto d = std::make_unique<StagedDiscriminator<float>>(shape_, rng);
  generator_ = g.get();
  discriminator_ = d.get();
  gan_.generator = std::move(g);
  gan_.discriminator = std::move(d);
  gan_.noise = {shape_.latent_dim, gan::NoiseSpec::Distribution::normal};
}

void ProganModel::grow(Rng& rng) {
  if (fade_.stage_index >= final_stage_) {
    throw StateError("cannot grow past the final stage " + std::to_string(final_stage_));
  }
  generator_->grow(rng);
  discriminator_->grow(rng);
  fade_.stage_index += 1;
  set_alpha(0.0);
}

void ProganModel::set_alpha(double alpha) {
  generator_->set_alpha(alpha);
  discriminator_->set_alpha(alpha);
  fade_.alpha = alpha;
}

nlohmann::json ProganModel::header() const {
  return {{"kind", "progan"},
          {"stage_index", fade_.stage_index},
          {"final_stage", final_stage_},
          {"alpha", fade_.alpha},
          {"resolution", std::int64_t{4} << fade_.stage_index},
          {"latent_dim", shape_.latent_dim},
          {"image_channels", shape_.image_channels},
          {"channel_base", shape_.channels.base},
          {"channel_floor", shape_.channels.floor}};
}

std::vector<NamedParameter<float>> ProganModel::named_parameters() {
  auto out = generator_->named_parameters();
  auto d = discriminator_->named_parameters();
  out.insert(out.end(), d.begin(), d.end());
  return out;
}

void ProganModel::save(const std::string& path) { gan::save_checkpoint(path, header(), named_parameters()); }

ProganModel ProganModel::load(const std::string& path) {
  const auto ck = gan::load_checkpoint(path);
  const auto& h = ck.header;
  try {
    if (h.at("kind") != "progan") throw CorruptionError(path + " is not a ProGAN checkpoint");
    ProganShape shape;
    shape.latent_dim = h.at("latent_dim").get<std::int64_t>();
    shape.image_channels = h.at("image_channels").get<std::int64_t>();
    shape.channels.base = h.at("channel_base").get<std::int64_t>();
    shape.channels.floor = h.at("channel_floor").get<std::int64_t>();
    const auto stage = h.at("stage_index").get<std::size_t>();
    Rng scratch(0);
    ProganModel model(shape, h.at("final_stage").get<std::size_t>(), scratch);
    for (std::size_t s = 0; s < stage; ++s) model.grow(scratch);
    model.set_alpha(h.at("alpha").get<double>());
    gan::restore_parameters(ck, model.named_parameters());
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw CorruptionError(path + ": incomplete ProGAN header: " + e.what());
  }
}

// ----------------------------------------------------------------- training

Tensor real_batch_at_resolution(const Tensor& tiles, std::int64_t resolution) {
  if (tiles.rank() != 4 || tiles.dim(2) != tiles.dim(3)) {
    throw ShapeError("tiles must be square [B,C,S,S], got " + shape_string(tiles.shape()));
  }
  if (!is_power_of_two(resolution) || !is_power_of_two(tiles.dim(2))) {
    throw ContractError("tile size and resolution must be powers of two");
  }
  if (resolution > tiles.dim(2)) {
    throw ContractError("resolution " + std::to_string(resolution) + " exceeds stored tile size " +
                        std::to_string(tiles.dim(2)));
  }
  Tensor out = tiles;
  while (out.dim(2) > resolution) out = resample(out, ResampleMode::down2_average);
  return out;
}

ProgressiveResult train_progressive(const StageSchedule& schedule, const Tensor& tiles, const ProganShape& shape,
                                    const ProgressiveOptions& options, Rng& rng) {
  if (schedule.resolutions.empty()) throw ConfigError("empty stage schedule");
  if (tiles.rank() != 4 || tiles.dim(0) == 0) throw ConfigError("training tiles must be a non-empty [N,C,S,S]");
  if (tiles.dim(2) < schedule.resolutions.back()) {
    throw ContractError("tiles smaller than the final schedule resolution");
  }
  if (tiles.dim(1) != shape.image_channels) throw ShapeError("tile channels do not match the ProGAN shape");
  options.train.validate();

  Rng init = rng.fork(0x9A11);
  ProgressiveResult result{ProganModel(shape, schedule.stage_count() - 1, init), {}};
  auto& model = result.model;
  model.gan().generator_optimizer = options.generator_optimizer;
  model.gan().discriminator_optimizer = options.discriminator_optimizer;

  const auto fade_iterations = schedule.fade_iterations();
  for (std::size_t stage = 0; stage < schedule.stage_count(); ++stage) {
    if (stage > 0) model.grow(init);
    gan::TensorDataset data(real_batch_at_resolution(tiles, schedule.resolutions[stage]));
    gan::TrainCallbacks callbacks;
    if (stage > 0) {
      callbacks.before_step = [&](std::int64_t it) { model.set_alpha(alpha_schedule(it, fade_iterations)); };
    }
    if (options.sample) {
      callbacks.sample_every = options.sample_every;
      callbacks.sample = [&, stage](std::int64_t it) { options.sample(stage, it + 1, model); };
    }
    auto config = options.train;
    config.iterations = schedule.iterations_per_stage;
    result.stage_histories.push_back(gan::train_gan(model.gan(), data, config, rng, callbacks));
    model.set_alpha(1.0);
    if (options.sample && (options.sample_every <= 0 || config.iterations % options.sample_every != 0)) {
      options.sample(stage, config.iterations, model);
    }
    if (!options.checkpoint_dir.empty()) {
      std::filesystem::create_directories(options.checkpoint_dir);
      model.save((std::filesystem::path(options.checkpoint_dir) / ("stage" + std::to_string(stage) + ".tfck")).string());
    }
  }
  return result;
}

}  // namespace terragan::progan
