#include <algorithm>
#include <bit>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>

#include "context.hpp"
#include "terragan/core/errors.hpp"
#include "terragan/core/verify.hpp"
#include "terragan/geodata/dataset.hpp"
#include "terragan/geodata/fixture.hpp"
#include "terragan/geodata/image_io.hpp"
#include "terragan/geodata/imagery.hpp"
#include "terragan/geodata/raster.hpp"
#include "terragan/pix2pix/pix2pix.hpp"
#include "terragan/progan/progan.hpp"
#include "terragan/terrain/terrain.hpp"

namespace terragan::cli::detail {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string numbered(const std::string& stem, std::int64_t n, const std::string& ext) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04lld", static_cast<long long>(n));
  return stem + buf + ext;
}

/// Sample `index` of a batch without the batch axis.
Tensor sample_at(const Tensor& x, std::int64_t index) {
  auto item = batch_item(x, index);
  Shape shape(x.shape().begin() + 1, x.shape().end());
  return std::move(item).reshaped(std::move(shape));
}

std::vector<geodata::GeoRaster> load_rasters(RunContext& ctx) {
  const auto paths = ctx.get<std::vector<std::string>>("rasters");
  if (paths.empty()) throw ConfigError("no rasters given (set \"rasters\" or pass --rasters)");
  const auto format = ctx.get<std::string>("raster_format");
  std::vector<geodata::GeoRaster> rasters;
  for (const auto& p : paths) {
    ctx.add_input(p);
    rasters.push_back(format == "auto" ? geodata::load_raster(p) : geodata::load_raster(p, geodata::parse_raster_format(format)));
  }
  return rasters;
}

Adam adam_from(const RunContext& ctx) {
  return Adam{ctx.get<double>("lr"), ctx.get<double>("beta1"), ctx.get<double>("beta2")};
}

std::int64_t checked_log2(std::int64_t resolution, const char* key) {
  if (resolution < 4 || resolution > 256 || !std::has_single_bit(static_cast<std::uint64_t>(resolution))) {
    throw ConfigError(std::string(key) + " must be a power of two in [4, 256], got " + std::to_string(resolution));
  }
  return std::bit_width(static_cast<std::uint64_t>(resolution)) - 1;
}

const std::string& require_path(const RunContext& ctx, const std::string& key) {
  const auto& v = ctx.config().at(key).get_ref<const std::string&>();
  if (v.empty()) throw ConfigError("\"" + key + "\" is required");
  return v;
}

/// Reads a TFDS file pair by pair and average-pools both bands to `resolution`.
struct PairTensors {
  Tensor rgb;  // [N,3,R,R]
  Tensor dem;  // [N,1,R,R]
  geodata::DatasetManifest manifest;
};

PairTensors read_pairs(RunContext& ctx, const std::string& path, std::int64_t resolution) {
  ctx.add_input(path);
  geodata::DatasetReader reader(path);
  std::vector<Tensor> rgb;
  std::vector<Tensor> dem;
  geodata::TilePair pair;
  auto pooled = [&](const Tensor& t) {
    Shape s{1};
    s.insert(s.end(), t.shape().begin(), t.shape().end());
    return sample_at(progan::real_batch_at_resolution(t.reshaped(s), resolution), 0);
  };
  while (reader.next(pair)) {
    rgb.push_back(pooled(pair.rgb));
    dem.push_back(pooled(pair.dem));
  }
  if (rgb.empty()) throw EmptyDataError("dataset " + path + " holds no pairs");
  ctx.log() << "loaded " << rgb.size() << " pairs from " << path << " at " << resolution << "x" << resolution << "\n";
  return {stack<float>(rgb), stack<float>(dem), reader.manifest()};
}

Tensor gray_to_rgb(const Tensor& image) {
  if (image.dim(0) == 3) return image;
  std::vector<Tensor> planes(3, image);
  const auto stacked = stack<float>(planes);  // [3,1,H,W]
  return stacked.reshaped({3, image.dim(1), image.dim(2)});
}

/// Side-by-side strip of [C,H,W] images with equal heights.
Tensor hstrip(const std::vector<Tensor>& images) {
  const auto c = images.front().dim(0);
  const auto h = images.front().dim(1);
  std::int64_t w = 0;
  for (const auto& im : images) w += im.dim(2);
  Tensor out({c, h, w});
  std::int64_t x0 = 0;
  for (const auto& im : images) {
    const auto iw = im.dim(2);
    for (std::int64_t ch = 0; ch < c; ++ch) {
      for (std::int64_t y = 0; y < h; ++y) {
        for (std::int64_t x = 0; x < iw; ++x) {
          out[static_cast<std::size_t>((ch * h + y) * w + x0 + x)] = im[static_cast<std::size_t>((ch * h + y) * iw + x)];
        }
      }
    }
    x0 += iw;
  }
  return out;
}

void write_image(RunContext& ctx, const std::string& name, const Tensor& image) {
  const auto path = ctx.out_path(name);
  geodata::write_image(path, image);
  ctx.add_output(path);
}

template <typename History, typename Field>
double tail_mean(const History& history, Field field, std::size_t window = 100) {
  if (history.empty()) return 0.0;
  const auto n = std::min(window, history.size());
  double sum = 0.0;
  for (auto it = history.end() - static_cast<std::ptrdiff_t>(n); it != history.end(); ++it) sum += (*it).*field;
  return sum / static_cast<double>(n);
}

void write_text(RunContext& ctx, const std::string& name, const std::string& text) {
  const auto path = ctx.out_path(name);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << text;
  ctx.add_output(path);
}

geodata::DatasetStats dem_range(const RunContext& ctx) {
  geodata::DatasetStats stats{ctx.get<double>("dem_min"), ctx.get<double>("dem_max"), 1};
  if (!(stats.global_min < stats.global_max)) throw ConfigError("dem_min must be below dem_max");
  return stats;
}

/// Denormalized single-tile raster for a [1,N,N] DEM in [-1,1].
geodata::GeoRaster dem_raster(const Tensor& dem, const geodata::DatasetStats& stats, const geodata::GeoTransform& geo) {
  geodata::GeoRaster r;
  r.height = dem.dim(1);
  r.width = dem.dim(2);
  r.geo = geo;
  const auto meters = geodata::denormalize_dem(dem, stats);
  r.values.assign(meters.values().begin(), meters.values().end());
  return r;
}

void write_raster(RunContext& ctx, const std::string& name, const geodata::GeoRaster& raster) {
  const auto path = ctx.out_path(name);
  geodata::save_raw_raster(raster, path);
  ctx.add_output(path);
  if (fs::exists(geodata::sidecar_path(path))) ctx.add_output(geodata::sidecar_path(path));
}

void write_mesh(RunContext& ctx, const std::string& stem, const terrain::TriMesh& mesh, terrain::MeshFormat format) {
  const auto path = ctx.out_path(stem + (format == terrain::MeshFormat::obj ? ".obj" : ".ply"));
  terrain::export_mesh(mesh, path, format);
  ctx.add_output(path);
  ctx.summary()["mesh"] = {{"path", path}, {"vertices", mesh.vertices.size()}, {"triangles", mesh.triangles.size()}};
}

/// ProGAN generator from a checkpoint, or a freshly seeded one grown to `resolution`.
progan::ProganModel progan_model(RunContext& ctx, Rng init) {
  const auto& path = ctx.get<std::string>("progan_checkpoint");
  if (!path.empty()) {
    ctx.add_input(path);
    auto model = progan::ProganModel::load(path);
    ctx.summary()["progan"] = {{"source", path}, {"resolution", model.resolution()}, {"alpha", model.fade().alpha}};
    return model;
  }
  const auto resolution = ctx.get<std::int64_t>("resolution");
  const auto final_stage = static_cast<std::size_t>(checked_log2(resolution, "resolution") - 2);
  progan::ProganShape shape;
  shape.latent_dim = ctx.get<std::int64_t>("latent_dim");
  shape.image_channels = 3;
  shape.channels = {ctx.get<std::int64_t>("channel_base"), ctx.get<std::int64_t>("channel_floor")};
  if (shape.latent_dim < 1) throw ConfigError("latent_dim must be positive");
  progan::ProganModel model(shape, final_stage, init);
  for (std::size_t s = 0; s < final_stage; ++s) model.grow(init);
  model.set_alpha(1.0);
  ctx.summary()["progan"] = {{"source", "seeded"}, {"resolution", model.resolution()}};
  return model;
}

Tensor generate_image(progan::ProganModel& model, const Tensor& z) {
  return model.generator().infer(z);
}

// ---------------------------------------------------------------------------

int cmd_make_fixture_roi(RunContext& ctx) {
  geodata::FixtureRoiOptions options;
  options.size = ctx.get<std::int64_t>("size");
  options.tile_size = ctx.get<std::int64_t>("tile_size");
  options.origin_lon = ctx.get<double>("origin_lon");
  options.origin_lat = ctx.get<double>("origin_lat");
  options.cellsize = ctx.get<double>("cellsize");
  const auto roi = ctx.timed("write", [&] { return geodata::write_fixture_roi(ctx.get<std::string>("out"), options); });
  ctx.add_output(roi.raster_path);
  std::vector<std::string> fixtures;
  for (const auto& entry : fs::directory_iterator(roi.fixture_dir)) fixtures.push_back(entry.path().string());
  std::sort(fixtures.begin(), fixtures.end());
  for (const auto& f : fixtures) ctx.add_output(f);
  ctx.summary() = {{"raster", roi.raster_path}, {"fixture_dir", roi.fixture_dir}, {"fixtures", fixtures.size()}};
  ctx.log() << "fixture ROI raster " << roi.raster_path << ", " << fixtures.size() << " imagery fixtures in "
            << roi.fixture_dir << "\n";
  return 0;
}

int cmd_stats(RunContext& ctx) {
  const auto rasters = ctx.timed("load", [&] { return load_rasters(ctx); });
  const auto stats = geodata::compute_stats(rasters, ctx.get<std::int64_t>("tile_size"));
  ctx.summary() = {{"global_min", stats.global_min}, {"global_max", stats.global_max}, {"tile_count", stats.tile_count}};
  write_text(ctx, "stats.json", ctx.summary().dump(2) + "\n");
  ctx.log() << "min " << stats.global_min << " max " << stats.global_max << " tiles " << stats.tile_count << "\n";
  return 0;
}

int cmd_build_dataset(RunContext& ctx) {
  const auto rasters = ctx.timed("load", [&] { return load_rasters(ctx); });
  const auto client_name = ctx.get<std::string>("client");
  std::unique_ptr<geodata::ImageryClient> client;
  if (client_name == "mock_fs") {
    client = std::make_unique<geodata::MockFsClient>(require_path(ctx, "fixture_dir"));
  } else if (client_name == "http") {
    client = std::make_unique<geodata::HttpImageryClient>(require_path(ctx, "http_endpoint"));
  } else {
    throw ConfigError("client must be mock_fs or http, got '" + client_name + "'");
  }
  geodata::BuildOptions options;
  options.tile_size = ctx.get<std::int64_t>("tile_size");
  options.max_attempts = static_cast<int>(ctx.get<std::int64_t>("max_attempts"));
  options.log = [&](const std::string& line) { ctx.log() << line << "\n"; };
  const auto path = ctx.out_path("dataset.tfds");
  const auto manifest = ctx.timed("build", [&] { return geodata::build_dataset(rasters, *client, path, options); });
  ctx.add_output(path);
  ctx.add_output(geodata::manifest_path(path));
  ctx.summary() = manifest.to_json();
  ctx.log() << manifest.pair_count << " pairs, " << manifest.skipped.size() << " skipped, digest " << manifest.digest
            << "\n";
  return 0;
}

int cmd_train_progan(RunContext& ctx) {
  const auto resolution = ctx.get<std::int64_t>("resolution");
  checked_log2(resolution, "resolution");
  const auto channels = ctx.get<std::string>("channels");
  if (channels != "rgb" && channels != "dem") throw ConfigError("channels must be rgb or dem");
  const auto data = ctx.timed("load", [&] { return read_pairs(ctx, require_path(ctx, "dataset"), resolution); });
  const Tensor& tiles = channels == "rgb" ? data.rgb : data.dem;

  const auto schedule = progan::make_schedule(resolution, ctx.get<std::int64_t>("iterations_per_stage"),
                                              ctx.get<double>("fade_fraction"));
  progan::ProganShape shape;
  shape.latent_dim = ctx.get<std::int64_t>("latent_dim");
  shape.image_channels = tiles.dim(1);
  shape.channels = {ctx.get<std::int64_t>("channel_base"), ctx.get<std::int64_t>("channel_floor")};

  progan::ProgressiveOptions options;
  options.train.batch_size = ctx.get<std::int64_t>("batch_size");
  options.train.d_steps_per_g_step = ctx.get<std::int64_t>("d_steps_per_g_step");
  options.train.generator_loss = gan::parse_generator_loss(ctx.get<std::string>("generator_loss"));
  options.train.seed = ctx.seed();
  options.generator_optimizer = adam_from(ctx);
  options.discriminator_optimizer = adam_from(ctx);
  options.checkpoint_dir = fs::path(ctx.out_path("checkpoints/x")).parent_path().string();
  options.sample_every = ctx.get<std::int64_t>("sample_every");

  const Rng root(ctx.seed());
  const auto sample_count = ctx.get<std::int64_t>("sample_count");
  if (sample_count < 1) throw ConfigError("sample_count must be positive");
  Rng sample_rng = root.fork(4);
  const auto sample_z = gan::sample_noise(gan::NoiseSpec{shape.latent_dim, gan::NoiseSpec::Distribution::normal},
                                          sample_count, sample_rng);
  options.sample = [&](std::size_t stage, std::int64_t iteration, progan::ProganModel& model) {
    const auto images = generate_image(model, sample_z);
    std::vector<Tensor> items;
    for (std::int64_t i = 0; i < images.dim(0); ++i) items.push_back(sample_at(images, i));
    write_image(ctx, "samples/stage" + std::to_string(stage) + "_" + numbered("iter", iteration, ".ppm"),
                gray_to_rgb(hstrip(items)));
  };

  Rng rng = root.fork(2);
  ctx.log() << "training " << schedule.stage_count() << " stages to " << resolution << "x" << resolution << ", "
            << schedule.iterations_per_stage << " iterations each\n";
  auto result = ctx.timed("train", [&] { return progan::train_progressive(schedule, tiles, shape, options, rng); });

  const auto final_path = ctx.out_path("progan.tfck");
  result.model.save(final_path);
  ctx.add_output(final_path);
  json stages = json::array();
  for (std::size_t s = 0; s < result.stage_histories.size(); ++s) {
    const auto& h = result.stage_histories[s];
    write_text(ctx, "losses_stage" + std::to_string(s) + ".csv", gan::history_csv(h));
    const auto ck = options.checkpoint_dir + "/stage" + std::to_string(s) + ".tfck";
    if (fs::exists(ck)) ctx.add_output(ck);
    stages.push_back({{"stage", s},
                      {"resolution", schedule.resolutions[s]},
                      {"d_loss", tail_mean(h, &gan::StepReport::d_loss)},
                      {"g_loss", tail_mean(h, &gan::StepReport::g_loss)},
                      {"mean_d_real", tail_mean(h, &gan::StepReport::mean_d_real)},
                      {"mean_d_fake", tail_mean(h, &gan::StepReport::mean_d_fake)}});
    ctx.log() << "stage " << s << " (" << schedule.resolutions[s] << "px): d_real " << stages.back()["mean_d_real"]
              << " d_fake " << stages.back()["mean_d_fake"] << "\n";
  }
  ctx.summary() = {{"pairs", tiles.dim(0)}, {"stages", stages}, {"checkpoint", final_path}};
  return 0;
}

int cmd_train_pix2pix(RunContext& ctx) {
  pix2pix::TranslationOptions options;
  options.direction = pix2pix::parse_direction(ctx.get<std::string>("direction"));
  options.resolution = ctx.get<std::int64_t>("resolution");
  options.unet_depth = ctx.get<std::int64_t>("unet_depth");
  options.unet_base_channels = ctx.get<std::int64_t>("unet_base_channels");
  options.patch.depth = ctx.get<std::int64_t>("patch_depth");
  options.patch.base_channels = ctx.get<std::int64_t>("patch_base_channels");
  options.l1_weight = ctx.get<double>("l1_weight");
  options.generator_optimizer = adam_from(ctx);
  options.discriminator_optimizer = adam_from(ctx);
  options.validate();
  checked_log2(options.resolution, "resolution");

  gan::TrainConfig train;
  train.batch_size = ctx.get<std::int64_t>("batch_size");
  train.iterations = ctx.get<std::int64_t>("iterations");
  train.generator_loss = gan::parse_generator_loss(ctx.get<std::string>("generator_loss"));
  train.seed = ctx.seed();
  train.validate();

  const auto data = ctx.timed("load", [&] { return read_pairs(ctx, require_path(ctx, "dataset"), options.resolution); });
  const bool to_dem = options.direction == pix2pix::Direction::rgb_to_dem;
  const Tensor& conditions = to_dem ? data.rgb : data.dem;
  const Tensor& targets = to_dem ? data.dem : data.rgb;
  const auto count = conditions.dim(0);
  const auto holdout = ctx.get<std::int64_t>("holdout");
  if (holdout < 0 || holdout >= count) {
    throw ConfigError("holdout must be in [0, " + std::to_string(count - 1) + "], got " + std::to_string(holdout));
  }
  auto split = [&](const Tensor& t, std::int64_t begin, std::int64_t end) {
    std::vector<Tensor> items;
    for (std::int64_t i = begin; i < end; ++i) items.push_back(sample_at(t, i));
    return stack<float>(items);
  };
  const auto train_count = count - holdout;
  pix2pix::PairDataset dataset(split(conditions, 0, train_count), split(targets, 0, train_count));

  const Rng root(ctx.seed());
  Rng init = root.fork(3);
  pix2pix::TranslationModel model(options, init);
  Rng rng = root.fork(4);
  pix2pix::TranslationCallbacks callbacks;
  callbacks.checkpoint_every = ctx.get<std::int64_t>("checkpoint_every");
  callbacks.checkpoint = [&](std::int64_t it) {
    const auto path = ctx.out_path("checkpoints/" + numbered("iter", it + 1, ".tfck"));
    model.save(path);
    ctx.add_output(path);
  };
  ctx.log() << "training " << pix2pix::to_string(options.direction) << " on " << train_count << " pairs for "
            << train.iterations << " iterations\n";
  const auto history = ctx.timed("train", [&] { return pix2pix::train_translation(model, dataset, train, rng, callbacks); });

  const auto final_path = ctx.out_path("pix2pix.tfck");
  model.save(final_path);
  ctx.add_output(final_path);
  write_text(ctx, "losses.csv", pix2pix::history_csv(history));

  json summary = {{"direction", pix2pix::to_string(options.direction)},
                  {"train_pairs", train_count},
                  {"holdout_pairs", holdout},
                  {"d_loss", tail_mean(history, &pix2pix::TranslationStepReport::d_loss)},
                  {"g_loss", tail_mean(history, &pix2pix::TranslationStepReport::g_loss)},
                  {"l1", tail_mean(history, &pix2pix::TranslationStepReport::l1)},
                  {"checkpoint", final_path}};
  const auto c0 = sample_at(conditions, count - 1);
  const auto y0 = sample_at(targets, count - 1);
  if (holdout > 0) {
    const auto hc = split(conditions, train_count, count);
    const auto hy = split(targets, train_count, count);
    const auto pred = pix2pix::translate(model, hc);
    double sum = 0.0;
    for (std::size_t i = 0; i < pred.numel(); ++i) sum += std::abs(pred[i] - hy[i]);
    summary["holdout_l1"] = sum / static_cast<double>(pred.numel());
    ctx.log() << "held-out mean L1 " << summary["holdout_l1"] << "\n";
  }
  Shape one{1};
  one.insert(one.end(), c0.shape().begin(), c0.shape().end());
  const auto p0 = sample_at(pix2pix::translate(model, c0.reshaped(one)), 0);
  write_image(ctx, "sample.ppm", hstrip({gray_to_rgb(c0), gray_to_rgb(p0), gray_to_rgb(y0)}));
  ctx.summary() = summary;
  return 0;
}

int cmd_generate(RunContext& ctx) {
  const Rng root(ctx.seed());
  auto gen = progan_model(ctx, root.fork(2));
  if (gen.shape().image_channels != 3) throw ContractError("generate needs an RGB ProGAN checkpoint");
  const auto resolution = gen.resolution();

  std::optional<pix2pix::TranslationModel> translator;
  const auto& p2p_path = ctx.get<std::string>("pix2pix_checkpoint");
  if (!p2p_path.empty()) {
    ctx.add_input(p2p_path);
    translator.emplace(pix2pix::TranslationModel::load(p2p_path));
    if (translator->direction() != pix2pix::Direction::rgb_to_dem) {
      throw ContractError("generate needs an rgb-to-dem translation checkpoint");
    }
    if (translator->options().resolution != resolution) {
      throw ContractError("translation model resolution " + std::to_string(translator->options().resolution) +
                          " does not match generator resolution " + std::to_string(resolution));
    }
  } else {
    pix2pix::TranslationOptions options;
    options.direction = pix2pix::Direction::rgb_to_dem;
    options.resolution = resolution;
    const auto levels = checked_log2(resolution, "resolution");
    options.unet_depth = std::min<std::int64_t>(3, levels);
    options.patch.depth = std::min<std::int64_t>(3, levels);
    Rng init = root.fork(3);
    translator.emplace(options, init);
  }
  ctx.summary()["pix2pix"] = {{"source", p2p_path.empty() ? std::string("seeded") : p2p_path}};

  Rng zr = root.fork(1);
  const auto z = gan::sample_noise(gen.gan().noise, 1, zr);
  const auto rgb = ctx.timed("sample", [&] { return sample_at(generate_image(gen, z), 0); });
  const auto dem = ctx.timed("translate", [&] {
    return sample_at(pix2pix::translate(*translator, rgb.reshaped({1, 3, resolution, resolution})), 0);
  });

  const auto stats = dem_range(ctx);
  const geodata::GeoTransform geo{ctx.get<double>("origin_lon"), ctx.get<double>("origin_lat"), ctx.get<double>("cellsize"),
                                  -ctx.get<double>("cellsize")};
  const auto raster = dem_raster(dem, stats, geo);
  write_image(ctx, "rgb.ppm", rgb);
  write_image(ctx, "dem.pgm", dem);
  write_raster(ctx, "dem.tfra", raster);

  geodata::TilePair pair{dem, rgb, geodata::footprint_polygon(raster, 0, 0, resolution), 0, 0, 0};
  geodata::DatasetManifest manifest;
  manifest.stats = stats;
  manifest.tile_size = resolution;
  manifest.client = "generated";
  const auto pair_path = ctx.out_path("pair.tfds");
  manifest = geodata::save_dataset(pair_path, std::span(&pair, 1), manifest);
  ctx.add_output(pair_path);
  ctx.add_output(geodata::manifest_path(pair_path));

  const auto mesh = terrain::build_mesh(dem, rgb, ctx.get<double>("vertical_scale"));
  write_mesh(ctx, "mesh", mesh, terrain::MeshFormat::ply_ascii);
  ctx.summary()["resolution"] = resolution;
  ctx.summary()["pair_digest"] = manifest.digest;
  ctx.log() << "generated " << resolution << "x" << resolution << " pair, mesh " << mesh.vertices.size()
            << " vertices\n";
  return 0;
}

int cmd_perlin(RunContext& ctx) {
  terrain::PerlinParams params;
  params.seed = ctx.seed();
  params.base_frequency = ctx.get<double>("base_frequency");
  params.octaves = ctx.get<std::int64_t>("octaves");
  params.persistence = ctx.get<double>("persistence");
  params.lacunarity = ctx.get<double>("lacunarity");
  const auto size = ctx.get<std::int64_t>("size");
  const auto format = terrain::parse_mesh_format(ctx.get<std::string>("mesh_format"));
  const auto field = ctx.timed("noise", [&] { return terrain::perlin_heightfield(size, params); });

  Tensor dem = field.values.reshaped({1, size, size});
  Tensor rgb;
  if (ctx.get<bool>("colorize")) {
    const auto& path = require_path(ctx, "inverse_checkpoint");
    ctx.add_input(path);
    auto model = pix2pix::TranslationModel::load(path);
    std::tie(dem, rgb) = ctx.timed("colorize", [&] { return terrain::colorize_perlin(field, model); });
    write_image(ctx, "rgb.ppm", rgb);
  } else {
    rgb = gray_to_rgb(dem);
  }
  const auto stats = dem_range(ctx);
  write_image(ctx, "dem.pgm", dem);
  write_raster(ctx, "dem.tfra", dem_raster(dem, stats, geodata::GeoTransform{0.0, 0.0, 1.0 / size, -1.0 / size}));
  write_mesh(ctx, "mesh", terrain::build_mesh(dem, rgb, ctx.get<double>("vertical_scale")), format);
  double lo = 1.0, hi = -1.0;
  for (float v : dem.values()) {
    lo = std::min<double>(lo, v);
    hi = std::max<double>(hi, v);
  }
  ctx.summary()["size"] = size;
  ctx.summary()["min"] = lo;
  ctx.summary()["max"] = hi;
  ctx.summary()["colorized"] = ctx.get<bool>("colorize");
  ctx.log() << "perlin " << size << "x" << size << " range [" << lo << ", " << hi << "]\n";
  return 0;
}

int cmd_interpolate(RunContext& ctx) {
  const Rng root(ctx.seed());
  auto gen = progan_model(ctx, root.fork(2));
  const auto steps = ctx.get<std::int64_t>("steps");
  if (steps < 2) throw ConfigError("steps must be at least 2");
  Rng zr = root.fork(1);
  const auto dim = gen.gan().noise.dim;
  const auto z0 = gan::sample_noise(gen.gan().noise, 1, zr).reshaped({dim});
  const auto z1 = gan::sample_noise(gen.gan().noise, 1, zr).reshaped({dim});
  const auto codes = terrain::interpolate_latents(z0, z1, steps);
  std::vector<Tensor> frames;
  ctx.timed("render", [&] {
    for (const auto& z : codes) frames.push_back(sample_at(generate_image(gen, z.reshaped({1, dim})), 0));
    return 0;
  });
  for (std::size_t k = 0; k < frames.size(); ++k) {
    write_image(ctx, "frames/" + numbered("frame", static_cast<std::int64_t>(k), ".ppm"), frames[k]);
  }
  write_image(ctx, "strip.ppm", hstrip(frames));
  ctx.summary()["steps"] = steps;
  ctx.summary()["resolution"] = gen.resolution();
  ctx.log() << "wrote " << steps << " frames\n";
  return 0;
}

int cmd_export_mesh(RunContext& ctx) {
  const auto& path = require_path(ctx, "dataset");
  const auto index = ctx.get<std::int64_t>("pair_index");
  const auto format = terrain::parse_mesh_format(ctx.get<std::string>("format"));
  ctx.add_input(path);
  geodata::DatasetReader reader(path);
  geodata::TilePair pair;
  std::int64_t seen = 0;
  bool found = false;
  while (reader.next(pair)) {
    if (seen++ == index) {
      found = true;
      break;
    }
  }
  if (index < 0 || !found) {
    throw ConfigError("pair_index " + std::to_string(index) + " out of range for " + path);
  }
  const auto mesh = ctx.timed("mesh", [&] { return terrain::build_mesh(pair.dem, pair.rgb, ctx.get<double>("vertical_scale")); });
  write_mesh(ctx, "mesh", mesh, format);
  ctx.log() << "mesh " << mesh.vertices.size() << " vertices, " << mesh.triangles.size() << " triangles\n";
  return 0;
}

int cmd_grad_check(RunContext& ctx) {
  const auto instances = ctx.get<std::int64_t>("instances");
  if (instances < 1) throw ConfigError("instances must be positive");
  const auto report =
      ctx.timed("suite", [&] { return run_gradient_suite(static_cast<int>(instances), ctx.seed()); });
  json results = json::array();
  for (const auto& r : report.results) {
    results.push_back({{"op", r.op},
                       {"precision", r.precision},
                       {"instances", r.instances},
                       {"passed", r.passed},
                       {"worst_relative_error", r.worst},
                       {"tolerance", r.tolerance},
                       {"checked_elements", r.checked},
                       {"skipped_nonsmooth", r.skipped_nonsmooth}});
    char line[160];
    std::snprintf(line, sizeof line, "%-4s %-18s %-8s %3d/%-3d worst %.3e (tol %.0e)\n", r.ok() ? "ok" : "FAIL",
                  r.op.c_str(), r.precision.c_str(), r.passed, r.instances, r.worst, r.tolerance);
    ctx.log() << line;
  }
  ctx.summary()["results"] = results;
  ctx.summary()["passed"] = report.passed();
  return report.passed() ? 0 : 3;
}

}  // namespace

CommandFn find_command(const std::string& name) {
  static const std::vector<std::pair<std::string, CommandFn>> table = {
      {"build-dataset", cmd_build_dataset}, {"stats", cmd_stats},
      {"train-progan", cmd_train_progan},   {"train-pix2pix", cmd_train_pix2pix},
      {"generate", cmd_generate},           {"perlin", cmd_perlin},
      {"interpolate", cmd_interpolate},     {"export-mesh", cmd_export_mesh},
      {"grad-check", cmd_grad_check},       {"make-fixture-roi", cmd_make_fixture_roi}};
  for (const auto& [n, fn] : table) {
    if (n == name) return fn;
  }
  return nullptr;
}

}  // namespace terragan::cli::detail
