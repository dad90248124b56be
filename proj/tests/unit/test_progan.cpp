#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <map>

#include "terragan/core/errors.hpp"
#include "terragan/core/functional.hpp"
#include "terragan/core/grad_check.hpp"
#include "terragan/progan/progan.hpp"

using namespace terragan;
using namespace terragan::progan;

namespace {

ProganShape small_shape() {
  ProganShape s;
  s.latent_dim = 8;
  s.image_channels = 3;
  s.channels = {16, 4};
  return s;
}

template <typename Real>
BasicTensor<Real> run_generator(StagedGenerator<Real>& g, const BasicTensor<Real>& z, double alpha) {
  Tape<Real> tape(false);
  return g.faded_forward(tape, tape.constant(z), alpha).value();
}

template <typename Real>
BasicTensor<Real> run_discriminator(StagedDiscriminator<Real>& d, const BasicTensor<Real>& x, double alpha) {
  Tape<Real> tape(false);
  return d.faded_forward(tape, tape.constant(x), alpha).value();
}

std::vector<std::pair<std::string, Tensor>> values_of(const std::vector<NamedParameter<float>>& params) {
  std::vector<std::pair<std::string, Tensor>> out;
  for (const auto& p : params) out.emplace_back(p.name, p.parameter->value);
  return out;
}

}  // namespace

TEST_CASE("schedule enumerates doubling resolutions") {
  CHECK(make_schedule(256, 10).resolutions == std::vector<std::int64_t>{4, 8, 16, 32, 64, 128, 256});
  CHECK(make_schedule(4, 10).resolutions == std::vector<std::int64_t>{4});
  CHECK(make_schedule(16, 10).resolutions == std::vector<std::int64_t>{4, 8, 16});
  CHECK_THROWS_AS(make_schedule(24, 10), ConfigError);
  CHECK_THROWS_AS(make_schedule(512, 10), ConfigError);
  CHECK_THROWS_AS(make_schedule(2, 10), ConfigError);
  CHECK_THROWS_AS(make_schedule(16, 10, 1.0), ConfigError);
  CHECK(make_schedule(16, 100, 0.5).fade_iterations() == 50);
}

TEST_CASE("alpha ramps linearly and saturates") {
  CHECK(alpha_schedule(0, 40) == 0.0);
  CHECK(alpha_schedule(20, 40) == 0.5);
  CHECK(alpha_schedule(40, 40) == 1.0);
  CHECK(alpha_schedule(400, 40) == 1.0);
  CHECK_THROWS_AS(alpha_schedule(3, 0), ContractError);
}

TEST_CASE("channel plan halves down to the floor") {
  ChannelPlan plan{32, 8};
  CHECK(plan.at(0) == 32);
  CHECK(plan.at(1) == 16);
  CHECK(plan.at(2) == 8);
  CHECK(plan.at(5) == 8);
}

TEST_CASE("growth preserves parameters and function at alpha 0") {
  Rng rng(3);
  ProganModel model(small_shape(), 2, rng);
  Rng zr(11);
  const auto z = randn<float>({2, 8}, 0.0, 1.0, zr);

  const auto before_params = values_of(model.named_parameters());
  const auto before_count = model.gan().generator->parameter_count() + model.gan().discriminator->parameter_count();
  const auto before_image = run_generator(model.generator(), z, 1.0);
  CHECK(before_image.shape() == Shape{2, 3, 4, 4});

  model.grow(rng);
  CHECK(model.stage() == 1);
  CHECK(model.fade().alpha == 0.0);
  CHECK(model.resolution() == 8);

  const auto after_count = model.gan().generator->parameter_count() + model.gan().discriminator->parameter_count();
  CHECK(after_count > before_count);
  std::map<std::string, Tensor> after;
  for (const auto& np : model.named_parameters()) after.emplace(np.name, np.parameter->value);
  for (const auto& [name, value] : before_params) {
    REQUIRE(after.count(name) == 1);
    CHECK(after.at(name) == value);
  }

  const auto grown = run_generator(model.generator(), z, 0.0);
  CHECK(grown.shape() == Shape{2, 3, 8, 8});
  CHECK(grown == resample(before_image, ResampleMode::up2_nearest));

  model.grow(rng);
  CHECK(model.resolution() == 16);
  CHECK_THROWS_AS(model.grow(rng), StateError);
}

TEST_CASE("discriminator mirrors the generator ladder") {
  Rng rng(5);
  ProganModel model(small_shape(), 3, rng);
  Rng data(6);
  for (int stage = 0; stage <= 3; ++stage) {
    Rng zr(stage + 1);
    const auto z = randn<float>({3, 8}, 0.0, 1.0, zr);
    const auto image = run_generator(model.generator(), z, model.fade().alpha);
    const auto res = model.resolution();
    CHECK(image.shape() == Shape{3, 3, res, res});
    for (float v : image.values()) CHECK((v > -1.0f && v < 1.0f));
    const auto score = run_discriminator(model.discriminator(), image, model.fade().alpha);
    CHECK(score.shape() == Shape{3, 1});
    for (float v : score.values()) CHECK((v > 0.0f && v < 1.0f));
    CHECK_THROWS_AS(run_discriminator(model.discriminator(), zeros<float>({1, 3, res * 2, res * 2}), 1.0), ShapeError);
    if (stage < 3) model.grow(rng);
  }
}

TEST_CASE("discriminator at alpha 0 scores the downscaled input with the previous ladder") {
  Rng rng(8);
  ProganModel model(small_shape(), 1, rng);
  Rng data(9);
  const auto x = rand_uniform<float>({2, 3, 8, 8}, -1, 1, data);
  const auto coarse = resample(x, ResampleMode::down2_average);
  const auto before = run_discriminator(model.discriminator(), coarse, 1.0);
  model.grow(rng);
  CHECK(run_discriminator(model.discriminator(), x, 0.0) == before);
}

TEST_CASE("faded output blends the two heads") {
  Rng rng(12);
  StagedGenerator<double> g(small_shape(), rng);
  g.grow(rng);
  Rng zr(4);
  const auto z = randn<double>({2, 8}, 0.0, 1.0, zr);
  const auto old_head = run_generator(g, z, 0.0);
  const auto new_head = run_generator(g, z, 1.0);
  const auto quarter = run_generator(g, z, 0.25);
  for (std::size_t i = 0; i < quarter.numel(); ++i) {
    CHECK(quarter[i] == doctest::Approx(0.75 * old_head[i] + 0.25 * new_head[i]).epsilon(1e-12));
  }
  CHECK_THROWS_AS(run_generator(g, z, 1.5), ContractError);
  CHECK_THROWS_AS(run_generator(g, z, -0.1), ContractError);
  CHECK_THROWS_AS(g.set_alpha(2.0), ContractError);

  // 0.25 example: previous pixel 0, new pixel 1.
  Tape<double> tape(false);
  const auto blended = lerp(tape.constant(zeros<double>({1})), tape.constant(full<double>({1}, 1.0)), 0.25).value();
  CHECK(blended[0] == 0.25);
}

TEST_CASE("fade is Lipschitz in alpha with the head gap as constant") {
  Rng rng(13);
  StagedGenerator<double> g(small_shape(), rng);
  g.grow(rng);
  Rng zr(14);
  const auto z = randn<double>({2, 8}, 0.0, 1.0, zr);
  const double gap = max_abs_diff(run_generator(g, z, 0.0), run_generator(g, z, 1.0));
  const double delta = 1e-3;
  for (double a : {0.0, 0.3, 0.6, 0.998}) {
    const double step = max_abs_diff(run_generator(g, z, a), run_generator(g, z, a + delta));
    CHECK(step <= gap * delta * (1.0 + 1e-9) + 1e-15);
  }
}

TEST_CASE("staged networks backpropagate through the fade") {
  Rng rng(15);
  StagedGenerator<double> g(small_shape(), rng);
  StagedDiscriminator<double> d(small_shape(), rng);
  g.grow(rng);
  d.grow(rng);
  // Default init shrinks the signal below finite-difference resolution.
  for (auto* p : g.parameters())
    for (auto& v : p->value.values()) v *= 15.0;
  for (auto* p : d.parameters())
    for (auto& v : p->value.values()) v *= 15.0;
  Rng zr(16);
  std::vector<GradCheckInput<double>> inputs{{"z", randn<double>({2, 8}, 0.0, 1.0, zr)}};
  GraphBuilder<double> build = [&](Tape<double>&, std::span<const Var<double>> v) {
    auto image = g.faded_forward(*v[0].tape, v[0], 0.4);
    return reduce_mean(d.faded_forward(*v[0].tape, image, 0.4));
  };
  const auto report = grad_check<double>(build, inputs, {1e-6, 1e-5});
  INFO("worst " << report.worst());
  CHECK(report.passed());
  CHECK(report.entries[0].checked > 0);
}

TEST_CASE("real batches are block-averaged to the stage resolution") {
  Rng rng(17);
  const auto tiles = rand_uniform<float>({2, 3, 16, 16}, -1, 1, rng);
  CHECK(real_batch_at_resolution(tiles, 16) == tiles);
  const auto constant = full<float>({1, 3, 16, 16}, 0.375f);
  for (std::int64_t r : {16, 8, 4}) {
    const auto scaled = real_batch_at_resolution(constant, r);
    CHECK(scaled.shape() == Shape{1, 3, r, r});
    for (float v : scaled.values()) CHECK(v == 0.375f);
  }
  Tensor board({1, 1, 8, 8});
  for (std::int64_t i = 0; i < 8; ++i)
    for (std::int64_t j = 0; j < 8; ++j) board.at(0, 0, i, j) = ((i + j) % 2 == 0) ? 1.0f : -1.0f;
  CHECK(real_batch_at_resolution(board, 4) == zeros<float>({1, 1, 4, 4}));
  const auto scaled = real_batch_at_resolution(tiles, 4);
  for (float v : scaled.values()) CHECK((v >= -1.0f && v <= 1.0f));
  CHECK_THROWS_AS(real_batch_at_resolution(tiles, 32), ContractError);
  CHECK_THROWS_AS(real_batch_at_resolution(tiles, 12), ContractError);
}

TEST_CASE("single-stage ladder is plain GAN training") {
  Rng data(21);
  const auto tiles = rand_uniform<float>({4, 3, 4, 4}, -0.8, 0.8, data);
  ProgressiveOptions options;
  options.train.batch_size = 2;
  options.train.iterations = 99;  // overridden by the schedule
  Rng rng_a(30);
  const auto result = train_progressive(make_schedule(4, 6), tiles, small_shape(), options, rng_a);
  REQUIRE(result.stage_histories.size() == 1);

  // Same seeds through gan::train_gan directly.
  Rng rng_b(30);
  Rng init = rng_b.fork(0x9A11);
  ProganModel model(small_shape(), 0, init);
  gan::TensorDataset dataset(tiles);
  auto config = options.train;
  config.iterations = 6;
  const auto plain = gan::train_gan(model.gan(), dataset, config, rng_b);
  REQUIRE(plain.size() == result.stage_histories[0].size());
  for (std::size_t i = 0; i < plain.size(); ++i) {
    CHECK(plain[i].d_loss == result.stage_histories[0][i].d_loss);
    CHECK(plain[i].g_loss == result.stage_histories[0][i].g_loss);
  }
}

TEST_CASE("progressive training yields one history per stage and checkpoints") {
  Rng data(22);
  const auto tiles = rand_uniform<float>({4, 3, 16, 16}, -0.8, 0.8, data);
  ProgressiveOptions options;
  options.train.batch_size = 2;
  const auto dir = std::filesystem::temp_directory_path() / "terragan_progan_test";
  std::filesystem::remove_all(dir);
  options.checkpoint_dir = dir.string();
  Rng rng(31);
  auto result = train_progressive(make_schedule(16, 4), tiles, small_shape(), options, rng);
  CHECK(result.stage_histories.size() == 3);
  for (const auto& h : result.stage_histories) CHECK(h.size() == 4);
  CHECK(result.model.resolution() == 16);
  CHECK(result.model.fade().alpha == 1.0);
  for (int s = 0; s < 3; ++s) CHECK(std::filesystem::exists(dir / ("stage" + std::to_string(s) + ".tfck")));

  auto loaded = ProganModel::load((dir / "stage2.tfck").string());
  CHECK(loaded.stage() == 2);
  CHECK(loaded.final_stage() == 2);
  Rng zr(1);
  const auto z = randn<float>({2, 8}, 0.0, 1.0, zr);
  CHECK(run_generator(loaded.generator(), z, 1.0) == run_generator(result.model.generator(), z, 1.0));
  const auto stage1 = ProganModel::load((dir / "stage1.tfck").string());
  CHECK(stage1.resolution() == 8);
  std::filesystem::remove_all(dir);

  CHECK_THROWS_AS(train_progressive(make_schedule(32, 4), tiles, small_shape(), options, rng), ContractError);
}
