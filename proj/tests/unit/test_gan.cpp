#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "support/toy_models.hpp"
#include "terragan/core/errors.hpp"
#include "terragan/gan/checkpoint.hpp"
#include "terragan/gan/gan.hpp"

using namespace terragan;
using namespace terragan::gan;

namespace {

GanModel toy_model(std::uint64_t seed, double lr = 2e-4) {
  Rng rng(seed);
  GanModel m;
  m.noise = {8, NoiseSpec::Distribution::normal};
  m.generator = std::make_unique<toy::TinyGenerator>(8, rng);
  m.discriminator = std::make_unique<toy::TinyDiscriminator>(rng);
  m.generator_optimizer = Adam{lr, 0.5, 0.999, 1e-8};
  m.discriminator_optimizer = Adam{lr, 0.5, 0.999, 1e-8};
  return m;
}

std::vector<Tensor> snapshot(Network<float>& net) {
  std::vector<Tensor> out;
  for (auto* p : net.parameters()) out.push_back(p->value);
  return out;
}

Tensor toy_images(std::int64_t n, std::uint64_t seed) {
  Rng rng(seed);
  return rand_uniform<float>({n, 1, 4, 4}, -0.9, 0.9, rng);
}

}  // namespace

TEST_CASE("sample_noise shape, support and determinism") {
  Rng rng(1);
  const auto z = sample_noise({16, NoiseSpec::Distribution::normal}, 8, rng);
  CHECK(z.shape() == Shape{8, 16});
  Rng u(2);
  const auto zu = sample_noise({4, NoiseSpec::Distribution::uniform}, 64, u);
  for (float v : zu.values()) {
    CHECK(v >= -1.0f);
    CHECK(v <= 1.0f);
  }
  Rng a(3), b(3);
  CHECK(sample_noise({5, NoiseSpec::Distribution::normal}, 8, a) ==
        sample_noise({5, NoiseSpec::Distribution::normal}, 8, b));
  CHECK_THROWS_AS(sample_noise({5, NoiseSpec::Distribution::normal}, 0, a), ContractError);
}

TEST_CASE("gan value at the indifference point and limits") {
  const auto half = full<float>({8, 1}, 0.5f);
  CHECK(gan_value(half, half) == doctest::Approx(-2 * std::numbers::ln2).epsilon(1e-7));
  CHECK(discriminator_loss(half, half) == doctest::Approx(2 * std::numbers::ln2).epsilon(1e-7));
  const float eps = 1e-7f;
  CHECK(std::abs(gan_value(full<float>({4, 1}, 1.0f - eps), full<float>({4, 1}, eps))) < 1e-6);
  CHECK(discriminator_loss(full<float>({4, 1}, 1.0f), full<float>({4, 1}, 0.0f)) < 1e-6);
}

TEST_CASE("gan value matches direct scalar evaluation") {
  Rng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const auto r = rand_uniform<float>({7, 1}, 0.01, 0.99, rng);
    const auto f = rand_uniform<float>({7, 1}, 0.01, 0.99, rng);
    double lr = 0.0, lf = 0.0;
    for (std::size_t i = 0; i < 7; ++i) {
      lr += std::log(static_cast<double>(r[i]));
      lf += std::log(1.0 - static_cast<double>(f[i]));
    }
    CHECK(gan_value(r, f) == doctest::Approx(lr / 7 + lf / 7).epsilon(1e-5));
    CHECK(discriminator_loss(r, f) + gan_value(r, f) == 0.0);
  }
}

TEST_CASE("gan value is permutation invariant") {
  Rng rng(6);
  auto r = rand_uniform<float>({9, 1}, 0.05, 0.95, rng);
  auto f = rand_uniform<float>({9, 1}, 0.05, 0.95, rng);
  const double before = gan_value(r, f);
  std::reverse(r.values().begin(), r.values().end());
  std::rotate(f.values().begin(), f.values().begin() + 4, f.values().end());
  CHECK(gan_value(r, f) == doctest::Approx(before).epsilon(1e-6));
}

TEST_CASE("discriminator loss gradient pushes real up and fake down") {
  Tape<double> tape;
  auto r = tape.variable(Tensor64({3, 1}, {0.3, 0.5, 0.7}));
  auto f = tape.variable(Tensor64({3, 1}, {0.2, 0.6, 0.4}));
  tape.backward(discriminator_loss(r, f));
  for (double g : tape.grad(r).values()) CHECK(g < 0.0);
  for (double g : tape.grad(f).values()) CHECK(g > 0.0);
}

TEST_CASE("generator loss variants") {
  const auto half = full<float>({4, 1}, 0.5f);
  CHECK(generator_loss(half, GeneratorLoss::minimax) == doctest::Approx(-std::numbers::ln2).epsilon(1e-7));
  CHECK(generator_loss(half, GeneratorLoss::non_saturating) == doctest::Approx(std::numbers::ln2).epsilon(1e-7));
  for (auto variant : {GeneratorLoss::minimax, GeneratorLoss::non_saturating}) {
    Tape<double> tape;
    auto f = tape.variable(Tensor64({3, 1}, {0.1, 0.5, 0.9}));
    tape.backward(generator_loss(f, variant));
    for (double g : tape.grad(f).values()) CHECK(g < 0.0);
    // Both decrease monotonically toward d_fake -> 1.
    double prev = generator_loss(full<float>({1, 1}, 0.01f), variant);
    for (float p = 0.05f; p < 1.0f; p += 0.05f) {
      const double cur = generator_loss(full<float>({1, 1}, p), variant);
      CHECK(cur < prev);
      prev = cur;
    }
  }
  CHECK(parse_generator_loss("minimax") == GeneratorLoss::minimax);
  CHECK_THROWS_AS(parse_generator_loss("wasserstein"), ConfigError);
}

TEST_CASE("one small discriminator step decreases its loss") {
  auto model = toy_model(11);
  Rng rng(12);
  const auto real = toy_images(4, 13);
  const auto fake = model.generator->infer(sample_noise(model.noise, 4, rng));
  auto loss_now = [&] {
    return discriminator_loss(model.discriminator->infer(real), model.discriminator->infer(fake));
  };
  const double before = loss_now();
  Tape<float> tape;
  auto loss = discriminator_loss(model.discriminator->forward(tape, tape.constant(real)),
                                 model.discriminator->forward(tape, tape.constant(fake)));
  tape.backward(loss);
  auto params = model.discriminator->parameters();
  optimizer_step<float>(params, Sgd{1e-4});
  CHECK(loss_now() < before);
}

TEST_CASE("adversarial step with zero learning rates only evaluates") {
  auto model = toy_model(21, 0.0);
  const auto g_before = snapshot(*model.generator);
  const auto d_before = snapshot(*model.discriminator);
  Rng rng(22);
  TrainConfig config;
  config.batch_size = 4;
  const auto report = adversarial_step(model, toy_images(4, 23), config, rng);
  CHECK(snapshot(*model.generator) == g_before);
  CHECK(snapshot(*model.discriminator) == d_before);
  CHECK(report.mean_d_real > 0.0);
  CHECK(report.mean_d_real < 1.0);
  CHECK(report.mean_d_fake > 0.0);
  CHECK(report.mean_d_fake < 1.0);
  CHECK(report.d_loss == doctest::Approx(-gan_value(full<float>({1, 1}, static_cast<float>(report.mean_d_real)),
                                                   full<float>({1, 1}, static_cast<float>(report.mean_d_fake))))
                             .epsilon(0.05));
  CHECK_THROWS_AS(adversarial_step(model, zeros<float>({4, 1, 8, 8}), config, rng), ContractError);
}

TEST_CASE("discriminator alone converges against a frozen generator") {
  auto model = toy_model(31);
  model.generator_optimizer = Sgd{0.0};
  model.discriminator_optimizer = Adam{1e-2, 0.5, 0.999, 1e-8};
  TensorDataset data(toy_images(1, 32));
  TrainConfig config;
  config.batch_size = 1;
  config.iterations = 50;
  Rng rng(33);
  const auto history = train_gan(model, data, config, rng);
  REQUIRE(history.size() == 50);
  double first = 0.0, last = 0.0;
  for (int i = 0; i < 5; ++i) {
    first += history[i].d_loss;
    last += history[45 + i].d_loss;
  }
  CHECK(last < first);
}

TEST_CASE("train_gan contracts") {
  TrainConfig config;
  config.batch_size = 2;
  config.iterations = 0;
  auto model = toy_model(41);
  const auto before = snapshot(*model.generator);
  TensorDataset data(toy_images(3, 42));
  Rng rng(43);
  CHECK(train_gan(model, data, config, rng).empty());
  CHECK(snapshot(*model.generator) == before);

  config.iterations = 7;
  int checkpoints = 0, samples = 0, befores = 0;
  TrainCallbacks cb;
  cb.before_step = [&](std::int64_t) { ++befores; };
  cb.checkpoint_every = 3;
  cb.checkpoint = [&](std::int64_t) { ++checkpoints; };
  cb.sample_every = 2;
  cb.sample = [&](std::int64_t) { ++samples; };
  const auto history = train_gan(model, data, config, rng, cb);
  CHECK(history.size() == 7);
  CHECK(history.back().iteration == 6);
  CHECK(befores == 7);
  CHECK(checkpoints == 2);
  CHECK(samples == 3);

  config.batch_size = 0;
  CHECK_THROWS_AS(train_gan(model, data, config, rng), ConfigError);
}

TEST_CASE("training is bit-deterministic") {
  auto run = [] {
    auto model = toy_model(51);
    TensorDataset data(toy_images(5, 52));
    TrainConfig config;
    config.batch_size = 3;
    config.iterations = 20;
    Rng rng(53);
    return history_csv(train_gan(model, data, config, rng));
  };
  CHECK(run() == run());
}

TEST_CASE("checkpoint round trip") {
  auto model = toy_model(61);
  const auto path = (std::filesystem::temp_directory_path() / "terragan_test_ck.tfck").string();
  const nlohmann::json header{{"kind", "toy"}, {"stage", 2}, {"alpha", 0.5}};
  auto params = model.generator->named_parameters();
  save_checkpoint(path, header, params);

  auto other = toy_model(62);
  const auto ck = load_checkpoint(path);
  CHECK(ck.header == header);
  CHECK(ck.config_digest == config_digest(header));
  auto other_params = other.generator->named_parameters();
  restore_parameters(ck, other_params);
  CHECK(snapshot(*other.generator) == snapshot(*model.generator));

  auto d_params = other.discriminator->named_parameters();
  CHECK_THROWS_AS(restore_parameters(ck, d_params), CorruptionError);

  std::string bytes;
  {
    std::ifstream in(path, std::ios::binary);
    bytes.assign(std::istreambuf_iterator<char>(in), {});
  }
  {
    std::ofstream out(path, std::ios::binary);
    out << bytes.substr(0, bytes.size() / 2);
  }
  CHECK_THROWS_AS(load_checkpoint(path), CorruptionError);
  std::filesystem::remove(path);
}

TEST_CASE("loss history csv") {
  LossHistory h{{0, 1.5, 0.5, 0.6, 0.4}, {1, 1.25, 0.75, 0.55, 0.45}};
  const auto csv = history_csv(h);
  CHECK(csv.rfind("iteration,d_loss,g_loss,mean_d_real,mean_d_fake\n", 0) == 0);
  CHECK(csv.find("1,1.25,0.75,0.55,0.45\n") != std::string::npos);
}
