#include "terragan/geodata/dataset.hpp"

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "terragan/core/binary_io.hpp"
#include "terragan/core/digest.hpp"
#include "terragan/core/errors.hpp"

namespace terragan::geodata {

// --------------------------------------------------------------- normalizing

DemScaler::DemScaler(const DatasetStats& stats) : stats_(stats) {
  if (!(stats_.global_min < stats_.global_max)) {
    throw ConfigError("degenerate elevation range [" + std::to_string(stats_.global_min) + ", " +
                      std::to_string(stats_.global_max) + "]");
  }
}

float DemScaler::normalize(double meters) {
  double v = 2.0 * (meters - stats_.global_min) / (stats_.global_max - stats_.global_min) - 1.0;
  if (v < -1.0 || v > 1.0) {
    ++clamped_;
    v = std::clamp(v, -1.0, 1.0);
  }
  return static_cast<float>(v);
}

Tensor DemScaler::normalize(std::span<const float> meters, const Shape& shape) {
  if (shape_numel(shape) != meters.size()) throw ShapeError("value count does not match " + shape_string(shape));
  Tensor out(shape);
  for (std::size_t i = 0; i < meters.size(); ++i) out[i] = normalize(meters[i]);
  return out;
}

double DemScaler::denormalize(double value) const {
  return stats_.global_min + (value + 1.0) * 0.5 * (stats_.global_max - stats_.global_min);
}

Tensor DemScaler::denormalize(const Tensor& values) const {
  Tensor out(values.shape());
  for (std::size_t i = 0; i < values.numel(); ++i) out[i] = static_cast<float>(denormalize(values[i]));
  return out;
}

Tensor normalize_dem(std::span<const float> meters, const Shape& shape, const DatasetStats& stats,
                     std::int64_t* clamped) {
  DemScaler scaler(stats);
  auto out = scaler.normalize(meters, shape);
  if (clamped) *clamped += scaler.clamped();
  return out;
}

Tensor denormalize_dem(const Tensor& values, const DatasetStats& stats) { return DemScaler(stats).denormalize(values); }

Tensor rgb_to_tensor(const RgbTile& tile) {
  const auto n = tile.size;
  if (n < 1 || tile.bytes.size() != static_cast<std::size_t>(n * n * 3)) throw ContractError("malformed RGB tile");
  Tensor out({3, n, n});
  const auto plane = static_cast<std::size_t>(n * n);
  for (std::size_t p = 0; p < plane; ++p) {
    for (std::size_t c = 0; c < 3; ++c) out[c * plane + p] = static_cast<float>(tile.bytes[p * 3 + c] / 127.5 - 1.0);
  }
  return out;
}

// ------------------------------------------------------------------ manifest

nlohmann::json DatasetManifest::to_json() const {
  nlohmann::json skipped_json = nlohmann::json::array();
  for (const auto& s : skipped) {
    skipped_json.push_back({{"raster", s.raster_index}, {"row", s.row}, {"col", s.col}, {"reason", s.reason}});
  }
  return {{"format", "TFDS"},
          {"version", kDatasetFormatVersion},
          {"stats", {{"global_min", stats.global_min}, {"global_max", stats.global_max}, {"tile_count", stats.tile_count}}},
          {"tile_size", tile_size},
          {"pair_count", pair_count},
          {"dropped_nodata", dropped_nodata},
          {"skipped", skipped_json},
          {"warnings", warnings},
          {"client", client},
          {"digest", digest},
          {"pairs_bytes", pairs_bytes}};
}

DatasetManifest DatasetManifest::from_json(const nlohmann::json& j) {
  try {
    DatasetManifest m;
    const auto& s = j.at("stats");
    m.stats = {s.at("global_min").get<double>(), s.at("global_max").get<double>(), s.at("tile_count").get<std::int64_t>()};
    m.tile_size = j.at("tile_size").get<std::int64_t>();
    m.pair_count = j.at("pair_count").get<std::int64_t>();
    m.dropped_nodata = j.at("dropped_nodata").get<std::int64_t>();
    for (const auto& k : j.at("skipped")) {
      m.skipped.push_back({k.at("raster").get<std::int64_t>(), k.at("row").get<std::int64_t>(),
                           k.at("col").get<std::int64_t>(), k.at("reason").get<std::string>()});
    }
    m.warnings = j.at("warnings").get<std::vector<std::string>>();
    m.client = j.at("client").get<std::string>();
    m.digest = j.at("digest").get<std::string>();
    m.pairs_bytes = j.at("pairs_bytes").get<std::uint64_t>();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw CorruptionError(std::string("malformed dataset manifest: ") + e.what());
  }
}

std::string manifest_path(const std::string& dataset_path) { return dataset_path + ".manifest.json"; }

// -------------------------------------------------------------------- writer

DatasetWriter::DatasetWriter(std::string path) : path_(std::move(path)), part_path_(path_ + ".part") {
  part_.open(part_path_, std::ios::binary | std::ios::trunc);
  if (!part_) throw IoError("cannot write " + part_path_);
}

DatasetWriter::~DatasetWriter() {
  if (!finished_) {
    part_.close();
    std::error_code ec;
    std::filesystem::remove(part_path_, ec);
  }
}

void DatasetWriter::append(const TilePair& pair) {
  if (finished_) throw StateError("dataset writer already finished");
  if (pair.dem.rank() != 3 || pair.dem.dim(0) != 1 || pair.rgb.rank() != 3 || pair.rgb.dim(0) != 3 ||
      pair.dem.dim(1) != pair.rgb.dim(1) || pair.dem.dim(2) != pair.rgb.dim(2)) {
    throw ShapeError("tile pair must hold dem [1,T,T] and rgb [3,T,T], got " + shape_string(pair.dem.shape()) +
                     " and " + shape_string(pair.rgb.shape()));
  }
  BinaryWriter w(part_);
  w.u32(static_cast<std::uint32_t>(pair.raster_index));
  w.u32(static_cast<std::uint32_t>(pair.row));
  w.u32(static_cast<std::uint32_t>(pair.col));
  w.string(geojson_text(pair.footprint));
  write_tensor(w, pair.dem);
  write_tensor(w, pair.rgb);
  if (!part_) throw IoError("write failed for " + part_path_);
  ++count_;
}

DatasetManifest DatasetWriter::finish(DatasetManifest manifest) {
  if (finished_) throw StateError("dataset writer already finished");
  part_.close();
  Sha256 hash;
  std::uint64_t bytes = 0;
  {
    std::ifstream in(part_path_, std::ios::binary);
    std::vector<char> buf(1 << 16);
    while (in) {
      in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
      const auto got = static_cast<std::size_t>(in.gcount());
      hash.update(buf.data(), got);
      bytes += got;
    }
  }
  manifest.pair_count = count_;
  manifest.digest = hash.hex_digest();
  manifest.pairs_bytes = bytes;
  {
    std::ofstream out(path_, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path_);
    BinaryWriter w(out);
    w.magic("TFDS");
    w.u16(kDatasetFormatVersion);
    w.string(manifest.to_json().dump());
    std::ifstream in(part_path_, std::ios::binary);
    out << in.rdbuf();
    if (!out) throw IoError("write failed for " + path_);
  }
  std::filesystem::remove(part_path_);
  std::ofstream side(manifest_path(path_), std::ios::binary | std::ios::trunc);
  if (!side) throw IoError("cannot write " + manifest_path(path_));
  side << manifest.to_json().dump(2) << '\n';
  finished_ = true;
  return manifest;
}

// -------------------------------------------------------------------- reader

DatasetReader::DatasetReader(std::string path) : path_(std::move(path)) {
  in_.open(path_, std::ios::binary);
  if (!in_) throw IoError("cannot open dataset " + path_);
  BinaryReader r(in_, path_);
  r.expect_magic("TFDS");
  const auto version = r.u16();
  if (version != kDatasetFormatVersion) {
    throw CorruptionError(path_ + ": unsupported dataset version " + std::to_string(version));
  }
  try {
    manifest_ = DatasetManifest::from_json(nlohmann::json::parse(r.string()));
  } catch (const nlohmann::json::exception& e) {
    throw CorruptionError(path_ + ": unreadable manifest: " + e.what());
  }
  const auto start = in_.tellg();
  Sha256 hash;
  std::uint64_t bytes = 0;
  std::vector<char> buf(1 << 16);
  while (in_) {
    in_.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    const auto got = static_cast<std::size_t>(in_.gcount());
    hash.update(buf.data(), got);
    bytes += got;
  }
  if (bytes != manifest_.pairs_bytes || hash.hex_digest() != manifest_.digest) {
    throw CorruptionError(path_ + ": pair section digest/length does not match the manifest (" +
                          std::to_string(bytes) + " of " + std::to_string(manifest_.pairs_bytes) + " bytes)");
  }
  in_.clear();
  in_.seekg(start);
}

bool DatasetReader::next(TilePair& pair) {
  if (read_ >= manifest_.pair_count) return false;
  BinaryReader r(in_, path_);
  pair.raster_index = r.u32();
  pair.row = r.u32();
  pair.col = r.u32();
  try {
    pair.footprint = polygon_from_geojson(nlohmann::json::parse(r.string()));
  } catch (const std::exception& e) {
    throw CorruptionError(path_ + ": bad footprint: " + e.what());
  }
  pair.dem = read_tensor(r);
  pair.rgb = read_tensor(r);
  const auto t = manifest_.tile_size;
  if (pair.dem.shape() != Shape{1, t, t} || pair.rgb.shape() != Shape{3, t, t}) {
    throw CorruptionError(path_ + ": pair shapes do not match tile size " + std::to_string(t));
  }
  for (const Tensor* x : {&pair.dem, &pair.rgb}) {
    for (float v : x->values()) {
      if (!(v >= -1.0f && v <= 1.0f)) throw CorruptionError(path_ + ": pair value outside [-1, 1]");
    }
  }
  ++read_;
  return true;
}

DatasetManifest save_dataset(const std::string& path, std::span<const TilePair> pairs, DatasetManifest manifest) {
  DatasetWriter writer(path);
  for (const auto& p : pairs) writer.append(p);
  return writer.finish(std::move(manifest));
}

std::vector<TilePair> load_dataset(const std::string& path) {
  DatasetReader reader(path);
  std::vector<TilePair> out;
  TilePair p;
  while (reader.next(p)) out.push_back(p);
  return out;
}

// --------------------------------------------------------------------- build

DatasetManifest build_dataset(std::span<const GeoRaster> rasters, ImageryClient& client, const std::string& path,
                              const BuildOptions& options) {
  auto log = options.log ? options.log : [](const std::string& line) { std::cerr << line << '\n'; };
  const auto t = options.tile_size;
  DatasetManifest manifest;
  manifest.stats = compute_stats(rasters, t);
  manifest.tile_size = t;
  manifest.client = client.name();
  DemScaler scaler(manifest.stats);

  DatasetWriter writer(path);
  for (std::size_t ri = 0; ri < rasters.size(); ++ri) {
    const auto raster_index = static_cast<std::int64_t>(ri);
    auto tiling = tile_raster(rasters[ri], t);
    if (tiling.warning) {
      manifest.warnings.push_back("raster " + std::to_string(ri) + ": " + *tiling.warning);
      log("warning: " + manifest.warnings.back());
    }
    manifest.dropped_nodata += tiling.dropped_nodata;
    for (auto& tile : tiling.tiles) {
      TilePair pair;
      pair.raster_index = raster_index;
      pair.row = tile.row;
      pair.col = tile.col;
      pair.footprint = footprint_polygon(rasters[ri], tile.row, tile.col, t);
      try {
        pair.rgb = rgb_to_tensor(acquire_rgb(client, pair.footprint, t, options.max_attempts));
      } catch (const Error& e) {
        manifest.skipped.push_back({raster_index, tile.row, tile.col, e.what()});
        log("skipped tile raster=" + std::to_string(ri) + " row=" + std::to_string(tile.row) +
            " col=" + std::to_string(tile.col) + ": " + e.what());
        continue;
      }
      pair.dem = scaler.normalize(tile.raster.values, {1, t, t});
      writer.append(pair);
    }
  }
  return writer.finish(std::move(manifest));
}

}  // namespace terragan::geodata
