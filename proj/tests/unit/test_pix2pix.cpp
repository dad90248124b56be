#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "support/receptive_field.hpp"
#include "terragan/core/errors.hpp"
#include "terragan/core/functional.hpp"
#include "terragan/core/grad_check.hpp"
#include "terragan/pix2pix/pix2pix.hpp"

using namespace terragan;
using namespace terragan::pix2pix;

namespace {

template <typename Real>
void amplify(Network<Real>& net, double factor) {
  for (auto* p : net.parameters())
    for (auto& v : p->value.values()) v *= factor;
}

template <typename Real>
BasicTensor<Real> run_patch(PatchDiscriminator<Real>& d, const BasicTensor<Real>& c, const BasicTensor<Real>& y) {
  Tape<Real> tape(false);
  return d.score(tape, tape.constant(c), tape.constant(y)).value();
}

TranslationOptions small_options(Direction direction) {
  TranslationOptions o;
  o.direction = direction;
  o.resolution = 16;
  o.unet_depth = 2;
  o.unet_base_channels = 4;
  o.patch = {2, 4};
  return o;
}

}  // namespace

TEST_CASE("direction names and channel counts") {
  CHECK(parse_direction("rgb-to-dem") == Direction::rgb_to_dem);
  CHECK(parse_direction("dem_to_rgb") == Direction::dem_to_rgb);
  CHECK_THROWS_AS(parse_direction("sideways"), ConfigError);
  CHECK(input_channels(Direction::rgb_to_dem) == 3);
  CHECK(output_channels(Direction::rgb_to_dem) == 1);
  CHECK(input_channels(Direction::dem_to_rgb) == 1);
  CHECK(output_channels(Direction::dem_to_rgb) == 3);
  CHECK(to_string(Direction::dem_to_rgb) == "dem-to-rgb");
}

TEST_CASE("U-Net preserves spatial size across depths and resolutions") {
  Rng rng(1);
  for (std::int64_t depth = 1; depth <= 4; ++depth) {
    for (std::int64_t res : {8, 16, 32, 64}) {
      if ((res >> depth) < 1) continue;
      UNet<float> net({3, 1, depth, 4, res}, rng);
      const auto out = net.infer(rand_uniform<float>({2, 3, res, res}, -1, 1, rng));
      CHECK(out.shape() == Shape{2, 1, res, res});
      for (float v : out.values()) CHECK((v > -1.0f && v < 1.0f));
    }
  }
  UNet<float> net({3, 1, 3, 16, 32}, rng);
  CHECK(net.infer(zeros<float>({1, 3, 32, 32})).shape() == Shape{1, 1, 32, 32});
  CHECK_THROWS_AS(net.infer(zeros<float>({1, 3, 16, 16})), ShapeError);
  CHECK_THROWS_AS(net.infer(zeros<float>({1, 1, 32, 32})), ShapeError);
  CHECK_THROWS_AS(UNet<float>({3, 1, 6, 4, 32}, rng), ConfigError);
}

TEST_CASE("decoder input width is deconv output plus skip") {
  const UNetConfig cfg{3, 1, 3, 16, 32};
  CHECK(cfg.level_channels(0) == 16);
  CHECK(cfg.level_channels(2) == 64);
  CHECK(cfg.decoder_input_channels(2) == 64);       // bottleneck, no skip yet
  CHECK(cfg.decoder_input_channels(1) == 32 + 32);  // dec2 emits level-1 width, plus enc1 skip
  CHECK(cfg.decoder_input_channels(0) == 16 + 16);
  CHECK(cfg.bottleneck_size() == 4);
}

TEST_CASE("skip connections carry information past a zeroed bottleneck") {
  Rng rng(2);
  UNet<float> net({3, 1, 3, 8, 32}, rng);
  amplify(net, 10.0);
  const auto a = rand_uniform<float>({1, 3, 32, 32}, -1, 1, rng);
  const auto b = rand_uniform<float>({1, 3, 32, 32}, -1, 1, rng);
  auto ablated = [&](const Tensor& x) {
    Tape<float> tape(false);
    return net.run(tape, tape.constant(x), true).value();
  };
  CHECK(max_abs_diff(ablated(a), ablated(b)) > 1e-3);
  CHECK(ablated(a) == ablated(a));
}

TEST_CASE("patch discriminator emits a square score grid in (0,1)") {
  Rng rng(3);
  PatchDiscriminator<float> d(3, 1, {3, 16}, rng);
  const auto scores = run_patch(d, rand_uniform<float>({2, 3, 32, 32}, -1, 1, rng), zeros<float>({2, 1, 32, 32}));
  CHECK(scores.shape() == Shape{2, 1, 4, 4});
  for (float v : scores.values()) CHECK((v > 0.0f && v < 1.0f));
  CHECK(PatchConfig{3, 16}.grid_extent(32) == 4);
  CHECK_THROWS_AS(run_patch(d, zeros<float>({2, 3, 32, 32}), zeros<float>({2, 3, 32, 32})), ShapeError);
  CHECK_THROWS_AS(run_patch(d, zeros<float>({1, 3, 4, 4}), zeros<float>({1, 1, 4, 4})), ConfigError);
}

TEST_CASE("patch scores change only inside the perturbed pixel's receptive field") {
  Rng rng(4);
  PatchDiscriminator<float> d(3, 1, {3, 8}, rng);
  amplify(d, 8.0);
  const auto c = rand_uniform<float>({1, 3, 32, 32}, -1, 1, rng);
  const auto y = rand_uniform<float>({1, 1, 32, 32}, -1, 1, rng);
  const auto base = run_patch(d, c, y);
  for (auto [pi, pj] : {std::pair<std::int64_t, std::int64_t>{0, 0}, {13, 22}, {31, 5}}) {
    auto bumped = c;
    bumped.at(0, 1, pi, pj) += 0.75f;
    const auto scores = run_patch(d, bumped, y);
    int changed_inside = 0;
    for (std::int64_t u = 0; u < 4; ++u) {
      for (std::int64_t v = 0; v < 4; ++v) {
        const auto [r0, r1] = oracle::receptive_interval(u, 3, 4, 2, 1);
        const auto [c0, c1] = oracle::receptive_interval(v, 3, 4, 2, 1);
        const bool covered = pi >= r0 && pi <= r1 && pj >= c0 && pj <= c1;
        if (!covered) {
          CHECK(scores.at(0, 0, u, v) == base.at(0, 0, u, v));
        } else if (scores.at(0, 0, u, v) != base.at(0, 0, u, v)) {
          ++changed_inside;
        }
      }
    }
    CHECK(changed_inside > 0);
  }
}

TEST_CASE("patch decision is the grid mean") {
  Tensor grid({1, 1, 2, 2}, std::vector<float>{0.8f, 0.6f, 0.4f, 0.2f});
  CHECK(patch_decision(grid)[0] == doctest::Approx(0.5).epsilon(1e-7));
  CHECK(patch_decision(full<float>({3, 1, 4, 4}, 0.3f))[2] == doctest::Approx(0.3).epsilon(1e-7));
  Tensor permuted({1, 1, 2, 2}, std::vector<float>{0.2f, 0.8f, 0.6f, 0.4f});
  CHECK(patch_decision(permuted)[0] == patch_decision(grid)[0]);
  Rng rng(5);
  const auto scores = rand_uniform<float>({2, 1, 4, 4}, 0, 1, rng);
  const auto decisions = patch_decision(scores);
  for (std::int64_t b = 0; b < 2; ++b) {
    double sum = 0;
    for (std::int64_t i = 0; i < 16; ++i) sum += scores[static_cast<std::size_t>(b * 16 + i)];
    CHECK(std::fabs(decisions[static_cast<std::size_t>(b)] - sum / 16.0) < 1e-7);
  }
  CHECK_THROWS_AS(patch_decision(zeros<float>({2, 4})), ShapeError);
}

TEST_CASE("conditional loss terms") {
  Tape<double> tape(false);
  const auto half = tape.constant(full<double>({2, 1, 4, 4}, 0.5));
  Rng rng(6);
  const auto y = tape.constant(rand_uniform<double>({2, 1, 16, 16}, -1, 1, rng));
  const auto fake = tape.constant(rand_uniform<double>({2, 1, 16, 16}, -1, 1, rng));

  const auto t = cgan_terms(half, half, fake, y, 100.0, gan::GeneratorLoss::non_saturating);
  CHECK(t.d_loss.value()[0] == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-12));

  const auto pure = cgan_terms(half, half, fake, y, 0.0, gan::GeneratorLoss::minimax);
  CHECK(pure.g_loss.value()[0] == pure.g_adversarial.value()[0]);
  CHECK(pure.g_adversarial.value()[0] == doctest::Approx(std::log(0.5)).epsilon(1e-12));

  const auto exact = cgan_terms(half, half, y, y, 100.0, gan::GeneratorLoss::non_saturating);
  CHECK(exact.l1.value()[0] == 0.0);
  CHECK(exact.g_loss.value()[0] == exact.g_adversarial.value()[0]);

  double l1 = 0;
  for (std::size_t i = 0; i < y.value().numel(); ++i) l1 += std::fabs(fake.value()[i] - y.value()[i]);
  l1 /= static_cast<double>(y.value().numel());
  CHECK(t.l1.value()[0] == doctest::Approx(l1).epsilon(1e-12));
  CHECK(t.g_loss.value()[0] == doctest::Approx(std::log(2.0) + 100.0 * l1).epsilon(1e-12));
  CHECK_THROWS_AS(cgan_terms(half, half, fake, half, 1.0, gan::GeneratorLoss::minimax), ShapeError);
}

TEST_CASE("gradients flow through skips and the concatenated condition") {
  Rng rng(7);
  UNet<double> g({2, 1, 2, 3, 8}, rng);
  PatchDiscriminator<double> d(2, 1, {2, 3}, rng);
  amplify(g, 12.0);
  amplify(d, 12.0);
  const auto target = rand_uniform<double>({2, 1, 8, 8}, -1, 1, rng);
  std::vector<GradCheckInput<double>> inputs{{"condition", rand_uniform<double>({2, 2, 8, 8}, -1, 1, rng)}};
  GraphBuilder<double> build = [&](Tape<double>& tape, std::span<const Var<double>> v) {
    auto fake = g.forward(tape, v[0]);
    auto d_fake = d.score(tape, v[0], fake);
    auto d_real = d.score(tape, v[0], tape.constant(target));
    auto t = cgan_terms(d_real, d_fake, fake, tape.constant(target), 0.5, gan::GeneratorLoss::non_saturating);
    return add(t.g_loss, t.d_loss);
  };
  const auto report = grad_check<double>(build, inputs, {1e-6, 1e-5});
  INFO("worst " << report.worst());
  CHECK(report.passed());
  CHECK(report.entries[0].checked > 0);

  // Skip-only path: with the bottleneck zeroed the input still receives gradient.
  GraphBuilder<double> skip_only = [&](Tape<double>& tape, std::span<const Var<double>> v) {
    return reduce_mean(mul(g.run(tape, v[0], true), tape.constant(target)));
  };
  const auto skip_report = grad_check<double>(skip_only, inputs, {1e-6, 1e-5});
  CHECK(skip_report.passed());
}

TEST_CASE("translate honors direction and is deterministic") {
  Rng rng(8);
  TranslationModel forward(small_options(Direction::rgb_to_dem), rng);
  TranslationModel inverse(small_options(Direction::dem_to_rgb), rng);
  const auto rgb = rand_uniform<float>({1, 3, 16, 16}, -1, 1, rng);
  const auto dem = rand_uniform<float>({1, 1, 16, 16}, -1, 1, rng);
  const auto height = translate(forward, rgb);
  CHECK(height.shape() == Shape{1, 1, 16, 16});
  for (float v : height.values()) CHECK((v > -1.0f && v < 1.0f));
  CHECK(translate(inverse, dem).shape() == Shape{1, 3, 16, 16});
  CHECK(translate(forward, rgb) == height);
  CHECK_THROWS_AS(translate(forward, dem), ContractError);
  CHECK_THROWS_AS(translate(inverse, rgb), ContractError);
}

TEST_CASE("training contracts") {
  Rng rng(9);
  auto options = small_options(Direction::rgb_to_dem);
  options.generator_optimizer = Sgd{0.0};
  options.discriminator_optimizer = Sgd{0.0};
  TranslationModel model(options, rng);
  std::vector<Tensor> before;
  for (const auto& np : model.named_parameters()) before.push_back(np.parameter->value);
  PairDataset data(rand_uniform<float>({4, 3, 16, 16}, -1, 1, rng), rand_uniform<float>({4, 1, 16, 16}, -1, 1, rng));
  gan::TrainConfig config;
  config.batch_size = 2;
  config.iterations = 3;
  const auto history = train_translation(model, data, config, rng);
  CHECK(history.size() == 3);
  std::size_t i = 0;
  for (const auto& np : model.named_parameters()) CHECK(np.parameter->value == before[i++]);
  for (const auto& r : history) {
    CHECK((r.mean_d_real > 0.0 && r.mean_d_real < 1.0));
    CHECK(r.g_loss == doctest::Approx(r.g_adversarial + 100.0 * r.l1).epsilon(1e-6));
  }
  CHECK(history_csv(history).rfind("iteration,d_loss,g_loss,g_adversarial,l1,mean_d_real,mean_d_fake\n", 0) == 0);

  PairDataset wrong(rand_uniform<float>({4, 1, 16, 16}, -1, 1, rng), rand_uniform<float>({4, 3, 16, 16}, -1, 1, rng));
  CHECK_THROWS_AS(train_translation(model, wrong, config, rng), ContractError);
  CHECK_THROWS_AS(PairDataset(zeros<float>({4, 3, 16, 16}), zeros<float>({3, 1, 16, 16})), ShapeError);
}

TEST_CASE("training is deterministic and reduces reconstruction error") {
  auto run = [](std::int64_t iterations) {
    Rng rng(10);
    TranslationModel model(small_options(Direction::dem_to_rgb), rng);
    auto dem = rand_uniform<float>({4, 1, 16, 16}, -1, 1, rng);
    Tensor rgb({4, 3, 16, 16});
    for (std::int64_t n = 0; n < 4; ++n)
      for (std::int64_t ch = 0; ch < 3; ++ch)
        for (std::int64_t i = 0; i < 16; ++i)
          for (std::int64_t j = 0; j < 16; ++j) rgb.at(n, ch, i, j) = 0.5f * dem.at(n, 0, i, j);
    PairDataset data(dem, rgb);
    gan::TrainConfig config;
    config.batch_size = 4;
    config.iterations = iterations;
    return train_translation(model, data, config, rng);
  };
  const auto a = run(40);
  const auto b = run(40);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].g_loss == b[i].g_loss);
  CHECK(a.back().l1 < a.front().l1);
}

TEST_CASE("checkpoint keeps direction and weight") {
  Rng rng(11);
  auto options = small_options(Direction::dem_to_rgb);
  options.l1_weight = 12.5;
  TranslationModel model(options, rng);
  const auto path = (std::filesystem::temp_directory_path() / "terragan_pix2pix_test.tfck").string();
  model.save(path);
  auto loaded = TranslationModel::load(path);
  CHECK(loaded.direction() == Direction::dem_to_rgb);
  CHECK(loaded.l1_weight() == 12.5);
  const auto dem = rand_uniform<float>({1, 1, 16, 16}, -1, 1, rng);
  CHECK(translate(loaded, dem) == translate(model, dem));
  std::filesystem::remove(path);
}
