// Acceptance suite: one PASS/FAIL line per criterion. Pass criterion numbers
// as arguments to run a subset.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <numbers>
#include <set>
#include <sstream>
#include <string>

#include "support/oracles.hpp"
#include "support/receptive_field.hpp"
#include "terragan/cli/cli.hpp"
#include "terragan/core/autograd.hpp"
#include "terragan/core/functional.hpp"
#include "terragan/core/verify.hpp"
#include "terragan/gan/gan.hpp"
#include "terragan/geodata/dataset.hpp"
#include "terragan/geodata/fixture.hpp"
#include "terragan/geodata/imagery.hpp"
#include "terragan/geodata/raster.hpp"
#include "terragan/pix2pix/pix2pix.hpp"
#include "terragan/progan/progan.hpp"
#include "terragan/terrain/terrain.hpp"

using namespace terragan;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("terragan_acceptance_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

template <typename Net>
Tensor run_net(Net& net, const Tensor& x, double alpha) {
  Tape<float> tape(false);
  return net.faded_forward(tape, tape.constant(x), alpha).value();
}

template <typename Net>
Tensor64 run_net(Net& net, const Tensor64& x, double alpha) {
  Tape<double> tape(false);
  return net.faded_forward(tape, tape.constant(x), alpha).value();
}

// ---------------------------------------------------------------------------

Verdict gradient_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto report = run_gradient_suite(50, 20240601);
  const double secs = seconds_since(t0);
  double worst32 = 0, worst64 = 0;
  std::string failing;
  for (const auto& r : report.results) {
    (r.precision == "float32" ? worst32 : worst64) = std::max(r.precision == "float32" ? worst32 : worst64, r.worst);
    if (!r.ok()) failing += " " + r.op + "/" + r.precision;
  }
  return {report.passed() && secs < 60.0,
          fmt("%zu op/precision pairs x 50 instances, worst 32-bit %.2e (<1e-3), 64-bit %.2e (<1e-6), %.1fs (<60s)%s",
              report.results.size(), worst32, worst64, secs, failing.empty() ? "" : (" failing:" + failing).c_str())};
}

Verdict convolution_oracle() {
  Rng rng(2);
  double worst_fwd = 0, worst_tr = 0;
  std::size_t cases = 0;
  const Tensor64 no_bias;
  for (std::int64_t b = 1; b <= 2; ++b)
    for (std::int64_t cin = 1; cin <= 4; ++cin)
      for (std::int64_t cout = 1; cout <= 4; ++cout)
        for (std::int64_t h = 1; h <= 9; ++h)
          for (std::int64_t w = 1; w <= 9; ++w)
            for (std::int64_t k : {1, 2, 3, 4})
              for (std::int64_t s : {1, 2})
                for (std::int64_t p : {0, 1}) {
                  const ConvGeometry g{s, p};
                  const auto bias = rand_uniform<double>({cout}, -1, 1, rng);
                  if (h + 2 * p >= k && w + 2 * p >= k) {
                    const auto x = rand_uniform<double>({b, cin, h, w}, -1, 1, rng);
                    const auto kern = rand_uniform<double>({cout, cin, k, k}, -1, 1, rng);
                    worst_fwd = std::max(worst_fwd, oracle::max_abs_gap(conv2d(x, kern, bias, g),
                                                                        oracle::conv2d_loops(x, kern, bias, int(s), int(p))));
                    ++cases;
                  }
                  if ((h - 1) * s - 2 * p + k >= 1 && (w - 1) * s - 2 * p + k >= 1) {
                    const auto y = rand_uniform<double>({b, cin, h, w}, -1, 1, rng);
                    const auto kern = rand_uniform<double>({cin, cout, k, k}, -1, 1, rng);
                    worst_tr = std::max(worst_tr, oracle::max_abs_gap(conv2d_transpose(y, kern, bias, g),
                                                                      oracle::conv2d_transpose_scatter(y, kern, bias, int(s), int(p))));
                    ++cases;
                  }
                }
  // <conv(x), y> == <x, conv_transpose(y)> in production precision.
  double worst_adj = 0;
  for (int trial = 0; trial < 100;) {
    const std::int64_t s = 1 + static_cast<std::int64_t>(rng.below(2));
    const std::int64_t p = static_cast<std::int64_t>(rng.below(2));
    const std::int64_t k = 1 + static_cast<std::int64_t>(rng.below(4));
    const std::int64_t b = 1 + static_cast<std::int64_t>(rng.below(2));
    const std::int64_t cin = 1 + static_cast<std::int64_t>(rng.below(4));
    const std::int64_t cout = 1 + static_cast<std::int64_t>(rng.below(4));
    const std::int64_t ho = 1 + static_cast<std::int64_t>(rng.below(5));
    // Extent for which conv2d maps h -> ho exactly, so the pair is adjoint.
    const std::int64_t h = (ho - 1) * s - 2 * p + k;
    if (h < 1) continue;
    ++trial;
    const ConvGeometry g{s, p};
    const auto x = rand_uniform<float>({b, cin, h, h}, -1, 1, rng);
    const auto kern = rand_uniform<float>({cout, cin, k, k}, -1, 1, rng);
    const Tensor none;
    const auto fx = conv2d(x, kern, none, g);
    const auto y = rand_uniform<float>(fx.shape(), -1, 1, rng);
    const auto ty = conv2d_transpose(y, kern, none, g);
    if (ty.shape() != x.shape()) return {false, "conv2d_transpose does not invert the conv2d extent"};
    const double lhs = dot(fx, y);
    const double rhs = dot(x, ty);
    worst_adj = std::max(worst_adj, std::abs(lhs - rhs) / std::max({std::abs(lhs), std::abs(rhs), 1e-30}));
  }
  return {worst_fwd <= 1e-6 && worst_tr <= 1e-6 && worst_adj <= 1e-4,
          fmt("%zu shape cases: conv2d max err %.1e, transpose %.1e (<=1e-6 abs); adjoint rel err %.1e over 100 (<=1e-4)",
              cases, worst_fwd, worst_tr, worst_adj)};
}

Verdict gan_fixed_point() {
  const Tensor half({16, 1}, 0.5f);
  const double v = gan::gan_value(half, half);
  const double expected = -2.0 * std::numbers::ln2;
  return {std::abs(v - expected) <= 1e-6, fmt("V(D=0.5) = %.9f, -2 ln 2 = %.9f", v, expected)};
}

Verdict growth_preservation() {
  Rng rng(41);
  progan::ProganShape shape;
  shape.latent_dim = 16;
  shape.channels = {16, 4};
  progan::StagedGenerator<float> g(shape, rng);
  Rng zr(42);
  int exact = 0, total = 0;
  for (int stage = 0; stage < 3; ++stage) {
    std::vector<Tensor> zs, before;
    for (int i = 0; i < 20; ++i) {
      zs.push_back(randn<float>({1, shape.latent_dim}, 0.0, 1.0, zr));
      before.push_back(run_net(g, zs.back(), 1.0));
    }
    g.grow(rng);
    for (int i = 0; i < 20; ++i) {
      ++total;
      if (run_net(g, zs[static_cast<std::size_t>(i)], 0.0) == resample(before[static_cast<std::size_t>(i)], ResampleMode::up2_nearest)) ++exact;
    }
  }
  return {exact == total, fmt("%d/%d latents bit-exact across growth 4->8->16->32", exact, total)};
}

Verdict fade_continuity() {
  Rng rng(51);
  progan::ProganShape shape;
  shape.latent_dim = 16;
  shape.channels = {16, 4};
  progan::StagedGenerator<double> g(shape, rng);
  g.grow(rng);
  g.grow(rng);
  Rng zr(52);
  const auto z = randn<double>({4, shape.latent_dim}, 0.0, 1.0, zr);
  const double gap = max_abs_diff(run_net(g, z, 1.0), run_net(g, z, 0.0));
  const double delta = 1e-3;
  double worst_ratio = 0;
  bool ok = gap > 0;
  for (int i = 0; i < 10; ++i) {
    const double a = rng.uniform(0.0, 1.0 - delta);
    const double step = max_abs_diff(run_net(g, z, a + delta), run_net(g, z, a));
    worst_ratio = std::max(worst_ratio, step / (delta * gap));
    // Equality holds in exact arithmetic; allow only 64-bit rounding.
    ok = ok && step <= delta * gap * (1.0 + 1e-9);
  }
  return {ok, fmt("10 alphas: max step / (1e-3 * head gap) = %.12f (head gap %.3e, <= 1 up to 64-bit rounding)",
                  worst_ratio, gap)};
}

Tensor blob_images(std::int64_t n, Rng& rng) {
  Tensor tiles({n, 3, 16, 16});
  for (std::int64_t k = 0; k < n; ++k) {
    const double a = rng.uniform(0, 6.28), cx = rng.uniform(3, 13), cy = rng.uniform(3, 13);
    for (std::int64_t c = 0; c < 3; ++c)
      for (std::int64_t i = 0; i < 16; ++i)
        for (std::int64_t j = 0; j < 16; ++j) {
          const double ramp = ((i - 7.5) * std::cos(a) + (j - 7.5) * std::sin(a)) / 11.0;
          const double blob = std::exp(-((i - cy) * (i - cy) + (j - cx) * (j - cx)) / 12.0);
          tiles.at(k, c, i, j) = static_cast<float>(std::tanh(0.6 * ramp + (c - 1) * 0.3 + blob * 0.8 - 0.2));
        }
  }
  return tiles;
}

Verdict progan_memorization() {
  Rng rng(1);
  const auto tiles = blob_images(16, rng);
  progan::ProganShape shape;
  shape.latent_dim = 32;
  progan::ProgressiveOptions options;
  options.train.batch_size = 8;
  const auto schedule = progan::make_schedule(16, 3000);
  const auto t0 = std::chrono::steady_clock::now();
  auto result = progan::train_progressive(schedule, tiles, shape, options, rng);
  const double secs = seconds_since(t0);
  auto& model = result.model.gan();
  const auto fakes = model.generator->infer(gan::sample_noise(model.noise, 64, rng));
  auto mean = [](const Tensor& t) {
    double s = 0;
    for (float v : t.values()) s += v;
    return s / static_cast<double>(t.numel());
  };
  const double d_real = mean(model.discriminator->infer(tiles));
  const double d_fake = mean(model.discriminator->infer(fakes));
  float lo = 1, hi = -1;
  for (float v : fakes.values()) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const bool ok = d_real >= 0.3 && d_real <= 0.7 && d_fake >= 0.3 && d_fake <= 0.7 && lo > -1.0f && hi < 1.0f &&
                  secs < 600.0 && result.model.resolution() == 16;
  return {ok, fmt("schedule [4,8,16] x 3000 it, batch 8: D(real) %.3f, D(fake) %.3f (both in [0.3,0.7]); "
                  "64 fakes in [%.3f, %.3f]; %.0fs (<600s)",
                  d_real, d_fake, lo, hi, secs)};
}

/// Smooth random RGB fields and their luminance.
void luminance_pairs(std::int64_t n, Rng& rng, Tensor& rgb, Tensor& gray) {
  rgb = Tensor({n, 3, 32, 32});
  gray = Tensor({n, 1, 32, 32});
  const double weights[3] = {0.299, 0.587, 0.114};
  for (std::int64_t k = 0; k < n; ++k) {
    double coef[3][4];
    for (auto& c : coef)
      for (auto& v : c) v = rng.uniform(-1, 1);
    const double cx = rng.uniform(4, 28), cy = rng.uniform(4, 28), spread = rng.uniform(20, 80);
    for (std::int64_t i = 0; i < 32; ++i)
      for (std::int64_t j = 0; j < 32; ++j) {
        const double blob = std::exp(-((i - cy) * (i - cy) + (j - cx) * (j - cx)) / spread);
        double lum = 0;
        for (std::int64_t c = 0; c < 3; ++c) {
          const double v = std::tanh(coef[c][0] + coef[c][1] * (i / 31.0 - 0.5) * 2 + coef[c][2] * (j / 31.0 - 0.5) * 2 +
                                     coef[c][3] * 1.5 * blob);
          rgb.at(k, c, i, j) = static_cast<float>(v);
          lum += weights[c] * v;
        }
        gray.at(k, 0, i, j) = static_cast<float>(lum);
      }
  }
}

Tensor replicate3(const Tensor& gray) {
  Tensor out({gray.dim(0), 3, gray.dim(2), gray.dim(3)});
  for (std::int64_t k = 0; k < gray.dim(0); ++k)
    for (std::int64_t c = 0; c < 3; ++c)
      for (std::int64_t i = 0; i < gray.dim(2); ++i)
        for (std::int64_t j = 0; j < gray.dim(3); ++j) out.at(k, c, i, j) = gray.at(k, 0, i, j);
  return out;
}

Verdict pix2pix_luminance() {
  Rng rng(5);
  Tensor rgb, gray, rgb_test, gray_test;
  luminance_pairs(64, rng, rgb, gray);
  luminance_pairs(16, rng, rgb_test, gray_test);
  const std::int64_t iterations = 400;
  std::string detail;
  bool ok = true;
  for (auto direction : {pix2pix::Direction::rgb_to_dem, pix2pix::Direction::dem_to_rgb}) {
    const bool forward = direction == pix2pix::Direction::rgb_to_dem;
    pix2pix::TranslationOptions options;
    options.direction = direction;
    Rng init(9);
    pix2pix::TranslationModel model(options, init);
    pix2pix::PairDataset data(forward ? rgb : gray, forward ? gray : replicate3(gray));
    gan::TrainConfig config;
    config.iterations = iterations;
    config.batch_size = 8;
    Rng train_rng = rng.fork(forward ? 1 : 2);
    const auto t0 = std::chrono::steady_clock::now();
    pix2pix::train_translation(model, data, config, train_rng);
    const double secs = seconds_since(t0);
    const auto prediction = pix2pix::translate(model, forward ? rgb_test : gray_test);
    const auto target = forward ? gray_test : replicate3(gray_test);
    double l1 = 0;
    for (std::size_t i = 0; i < prediction.numel(); ++i) l1 += std::abs(prediction[i] - target[i]);
    l1 /= static_cast<double>(prediction.numel());
    ok = ok && l1 < 0.1 && secs < 600.0;
    detail += fmt("%s held-out L1 %.4f in %.0fs; ", std::string(pix2pix::to_string(direction)).c_str(), l1, secs);
  }
  return {ok, detail + fmt("%lld iterations, lambda 100, 64 train / 16 held-out (L1 < 0.1)",
                           static_cast<long long>(iterations))};
}

Verdict patch_locality() {
  Rng rng(81);
  pix2pix::PatchConfig config{3, 8};
  pix2pix::PatchDiscriminator<float> d(3, 1, config, rng);
  for (auto* p : d.parameters())
    for (auto& v : p->value.values()) v *= 8.0f;
  const auto c = rand_uniform<float>({1, 3, 32, 32}, -1, 1, rng);
  const auto y = rand_uniform<float>({1, 1, 32, 32}, -1, 1, rng);
  auto score = [&](const Tensor& cc, const Tensor& yy) {
    Tape<float> tape(false);
    return d.score(tape, tape.constant(cc), tape.constant(yy)).value();
  };
  const auto base = score(c, y);
  const auto grid = config.grid_extent(32);
  std::int64_t leaks = 0, inside_changed = 0, probes = 0;
  for (std::int64_t pi = 0; pi < 32; ++pi) {
    for (std::int64_t pj = 0; pj < 32; ++pj) {
      const bool on_condition = (pi + pj) % 2 == 0;
      auto cc = c;
      auto yy = y;
      (on_condition ? cc.at(0, (pi * 32 + pj) % 3, pi, pj) : yy.at(0, 0, pi, pj)) += 0.75f;
      const auto s = score(cc, yy);
      ++probes;
      for (std::int64_t u = 0; u < grid; ++u) {
        for (std::int64_t v = 0; v < grid; ++v) {
          const auto [r0, r1] = oracle::receptive_interval(u, 3, 4, 2, 1);
          const auto [c0, c1] = oracle::receptive_interval(v, 3, 4, 2, 1);
          const bool covered = pi >= r0 && pi <= r1 && pj >= c0 && pj <= c1;
          const bool moved = s.at(0, 0, u, v) != base.at(0, 0, u, v);
          if (!covered && moved) ++leaks;
          if (covered && moved) ++inside_changed;
        }
      }
    }
  }
  return {leaks == 0 && inside_changed > 0,
          fmt("%lld single-pixel perturbations over a %lldx%lld patch grid: %lld changes outside the receptive field, "
              "%lld inside",
              static_cast<long long>(probes), static_cast<long long>(grid), static_cast<long long>(grid),
              static_cast<long long>(leaks), static_cast<long long>(inside_changed))};
}

Verdict normalization_round_trip() {
  const geodata::DatasetStats stats{-431.25, 8848.86, 1};
  const double range = stats.global_max - stats.global_min;
  Rng rng(91);
  std::vector<float> meters;
  for (int i = 0; i < 10000; ++i) meters.push_back(static_cast<float>(rng.uniform(stats.global_min, stats.global_max)));
  const auto normalized = geodata::normalize_dem(meters, {10000}, stats);
  const auto back = geodata::denormalize_dem(normalized, stats);
  double worst = 0;
  for (std::size_t i = 0; i < meters.size(); ++i) worst = std::max(worst, std::abs(double(back[i]) - double(meters[i])));
  const std::vector<float> ends{static_cast<float>(stats.global_min), static_cast<float>(stats.global_max)};
  const auto e = geodata::normalize_dem(ends, {2}, stats);
  const bool endpoints = e[0] == -1.0f && e[1] == 1.0f;
  return {worst <= 1e-6 * range && endpoints,
          fmt("max |denorm(norm(v)) - v| = %.3e m (bound %.3e); endpoints -> (%g, %g)", worst, 1e-6 * range,
              double(e[0]), double(e[1]))};
}

Verdict dataset_determinism() {
  const auto dir = scratch("dataset");
  const auto roi = geodata::write_fixture_roi((dir / "roi").string());
  const std::vector<geodata::GeoRaster> rasters{geodata::load_raster(roi.raster_path)};
  geodata::MockFsClient client(roi.fixture_dir);
  const auto a = geodata::build_dataset(rasters, client, (dir / "a.tfds").string());
  const auto b = geodata::build_dataset(rasters, client, (dir / "b.tfds").string());
  const auto pairs = geodata::load_dataset((dir / "a.tfds").string());
  const bool bytes_equal = slurp(dir / "a.tfds") == slurp(dir / "b.tfds");
  return {a.pair_count == 4 && pairs.size() == 4 && a.stats.tile_count == 4 && a.digest == b.digest && bytes_equal,
          fmt("512x512 fixture ROI -> %lld pairs (reloaded %zu), digest %s, rerun digest %s, files %s",
              static_cast<long long>(a.pair_count), pairs.size(), a.digest.substr(0, 16).c_str(),
              a.digest == b.digest ? "equal" : "DIFFERENT", bytes_equal ? "byte-identical" : "DIFFER")};
}

Verdict perlin_properties() {
  int nonzero = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const terrain::PerlinNoise noise(seed);
    for (int i = -8; i <= 8; ++i)
      for (int j = -8; j <= 8; ++j)
        if (noise.value(i, j) != 0.0) ++nonzero;
    // Lattice points of a sampled field: j * frequency / N integral.
    terrain::PerlinParams p;
    p.seed = seed;
    const auto f = terrain::perlin_heightfield(32, p);
    for (std::int64_t i = 0; i < 32; i += 8)
      for (std::int64_t j = 0; j < 32; j += 8)
        if (f.values[static_cast<std::size_t>(i * 32 + j)] != 0.0f) ++nonzero;
  }
  terrain::PerlinParams dense;
  dense.seed = 7;
  dense.base_frequency = 16;
  const auto field = terrain::perlin_heightfield(2048, dense);
  double peak = 0;
  for (float v : field.values.values()) peak = std::max(peak, double(std::abs(v)));
  terrain::PerlinParams multi;
  multi.seed = 99;
  multi.octaves = 5;
  const bool deterministic = terrain::perlin_heightfield(64, multi).values == terrain::perlin_heightfield(64, multi).values &&
                             terrain::perlin_heightfield(64, dense).values == terrain::perlin_heightfield(64, dense).values;
  return {nonzero == 0 && peak <= 0.7072 && deterministic,
          fmt("100 seeds: %d nonzero lattice values; max |v| over 2048^2 = %.5f (<= 0.7072); %s", nonzero, peak,
              deterministic ? "deterministic" : "NOT deterministic")};
}

Verdict mesh_contract() {
  const auto dir = scratch("mesh");
  Rng rng(12);
  int bad = 0;
  for (std::int64_t n = 2; n <= 64; ++n) {
    const auto dem = rand_uniform<float>({n, n}, -1, 1, rng);
    const auto rgb = rand_uniform<float>({3, n, n}, -1, 1, rng);
    const auto mesh = terrain::build_mesh(dem, rgb);
    const auto v = static_cast<std::size_t>(n * n);
    const auto t = static_cast<std::size_t>(2 * (n - 1) * (n - 1));
    const auto path = (dir / "m.ply").string();
    terrain::export_mesh(mesh, path, terrain::MeshFormat::ply_ascii);
    const auto back = terrain::read_ply(path);
    if (mesh.vertices.size() != v || mesh.triangles.size() != t || back.vertices.size() != v ||
        back.triangles.size() != t) {
      ++bad;
    }
  }
  return {bad == 0, fmt("N = 2..64: %d size mismatches in N^2 vertices / 2(N-1)^2 triangles / PLY re-parse", bad)};
}

Verdict latent_interpolation() {
  Rng rng(13);
  const auto z0 = randn<float>({64}, 0.0, 1.0, rng);
  const auto z1 = randn<float>({64}, 0.0, 1.0, rng);
  const auto sweep = terrain::interpolate_latents(z0, z1, 9);
  const bool ends = sweep.front() == z0 && sweep.back() == z1;
  const auto three = terrain::interpolate_latents(z0, z1, 3);
  int off = 0;
  for (std::size_t i = 0; i < 64; ++i) {
    const auto mean = static_cast<float>((double(z0[i]) + double(z1[i])) / 2.0);
    if (three[1][i] != mean) ++off;
  }
  const auto small = terrain::interpolate_latents(Tensor({2}, {0.0f, 0.0f}), Tensor({2}, {2.0f, 4.0f}), 3);
  const bool example = small[1][0] == 1.0f && small[1][1] == 2.0f;
  return {ends && off == 0 && example,
          fmt("endpoints %s; steps=3 midpoint differs from the mean in %d/64 coords; (0,0)->(2,4) mid (%g, %g)",
              ends ? "bit-exact" : "DIFFER", off, double(small[1][0]), double(small[1][1]))};
}

Verdict end_to_end() {
  const auto dir = scratch("generate");
  std::ostringstream log, err;
  const int a = cli::run({"generate", "--seed", "7", "--out", (dir / "a").string()}, log, err);
  const int b = cli::run({"generate", "--seed", "7", "--out", (dir / "b").string()}, log, err);
  if (a != 0 || b != 0) return {false, "generate exited " + std::to_string(a) + "/" + std::to_string(b) + ": " + err.str()};
  std::string detail;
  bool ok = true;
  for (const char* f : {"rgb.ppm", "dem.tfra", "mesh.ply", "pair.tfds"}) {
    const auto x = slurp(dir / "a" / f);
    const bool same = !x.empty() && x == slurp(dir / "b" / f);
    ok = ok && same;
    detail += fmt("%s %s (%zu B); ", f, same ? "identical" : "DIFFERENT", x.size());
  }
  return {ok, "generate --seed 7 twice: " + detail};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
      {"gradient oracle", gradient_oracle},
      {"convolution oracle", convolution_oracle},
      {"minimax value at D = 0.5", gan_fixed_point},
      {"growth preservation", growth_preservation},
      {"fade continuity", fade_continuity},
      {"ProGAN toy memorization", progan_memorization},
      {"pix2pix luminance task", pix2pix_luminance},
      {"PatchGAN locality", patch_locality},
      {"normalization round trip", normalization_round_trip},
      {"dataset determinism", dataset_determinism},
      {"Perlin properties", perlin_properties},
      {"mesh contract", mesh_contract},
      {"latent interpolation", latent_interpolation},
      {"end-to-end determinism", end_to_end},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  int failed = 0, ran = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    ++ran;
    if (!v.pass) ++failed;
    std::printf("%s  %2d  %-26s %s\n", v.pass ? "PASS" : "FAIL", id, criteria[i].first, v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%d criteria passed\n", ran - failed, ran);
  return failed == 0 ? 0 : 1;
}
