#pragma once

#include <cstdint>
#include <fstream>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "terragan/core/tensor.hpp"
#include "terragan/geodata/imagery.hpp"
#include "terragan/geodata/raster.hpp"

namespace terragan::geodata {

/// v -> 2 (v - min) / (max - min) - 1 with the dataset-wide extremes; values
/// landing outside [-1, 1] are clamped and counted.
class DemScaler {
 public:
  explicit DemScaler(const DatasetStats& stats);

  float normalize(double meters);
  Tensor normalize(std::span<const float> meters, const Shape& shape);
  double denormalize(double value) const;
  Tensor denormalize(const Tensor& values) const;

  std::int64_t clamped() const { return clamped_; }
  const DatasetStats& stats() const { return stats_; }

 private:
  DatasetStats stats_;
  std::int64_t clamped_ = 0;
};

Tensor normalize_dem(std::span<const float> meters, const Shape& shape, const DatasetStats& stats,
                     std::int64_t* clamped = nullptr);
Tensor denormalize_dem(const Tensor& values, const DatasetStats& stats);

/// [3, size, size] with bytes mapped from [0, 255] to [-1, 1].
Tensor rgb_to_tensor(const RgbTile& tile);

struct TilePair {
  Tensor dem;  // [1, T, T]
  Tensor rgb;  // [3, T, T]
  GeoPolygon footprint;
  std::int64_t raster_index = 0;
  std::int64_t row = 0;
  std::int64_t col = 0;

  bool operator==(const TilePair&) const = default;
};

struct SkippedTile {
  std::int64_t raster_index = 0;
  std::int64_t row = 0;
  std::int64_t col = 0;
  std::string reason;
};

struct DatasetManifest {
  DatasetStats stats;
  std::int64_t tile_size = 256;
  std::int64_t pair_count = 0;
  std::int64_t dropped_nodata = 0;
  std::vector<SkippedTile> skipped;
  std::vector<std::string> warnings;
  std::string client;
  /// SHA-256 of the serialized pair section.
  std::string digest;
  std::uint64_t pairs_bytes = 0;

  nlohmann::json to_json() const;
  static DatasetManifest from_json(const nlohmann::json& j);
};

inline constexpr std::uint16_t kDatasetFormatVersion = 1;

/// Streams pairs to `path`:
///   "TFDS" | u16 version | string manifest_json | pair*
///   pair = u32 raster | u32 row | u32 col | string footprint GeoJSON | TFTN dem | TFTN rgb
/// The manifest is also written to `path + ".manifest.json"`.
class DatasetWriter {
 public:
  explicit DatasetWriter(std::string path);
  ~DatasetWriter();
  DatasetWriter(const DatasetWriter&) = delete;
  DatasetWriter& operator=(const DatasetWriter&) = delete;

  void append(const TilePair& pair);
  /// Fills digest, pairs_bytes and pair_count, then writes the final file.
  DatasetManifest finish(DatasetManifest manifest);

 private:
  std::string path_;
  std::string part_path_;
  std::ofstream part_;
  std::int64_t count_ = 0;
  bool finished_ = false;
};

/// Verifies the pair-section digest on open, then iterates pairs one at a time.
class DatasetReader {
 public:
  explicit DatasetReader(std::string path);

  const DatasetManifest& manifest() const { return manifest_; }
  /// False once every pair has been read.
  bool next(TilePair& pair);

 private:
  std::string path_;
  std::ifstream in_;
  DatasetManifest manifest_;
  std::int64_t read_ = 0;
};

std::string manifest_path(const std::string& dataset_path);
DatasetManifest save_dataset(const std::string& path, std::span<const TilePair> pairs, DatasetManifest manifest);
std::vector<TilePair> load_dataset(const std::string& path);

struct BuildOptions {
  std::int64_t tile_size = 256;
  int max_attempts = 3;
  /// Receives one line per skipped tile or warning; defaults to standard error.
  std::function<void(const std::string&)> log;
};

/// Tiles every raster, fetches the matching imagery and writes the paired
/// dataset in (raster, row, col) order. Failing tiles are skipped and logged.
DatasetManifest build_dataset(std::span<const GeoRaster> rasters, ImageryClient& client, const std::string& path,
                              const BuildOptions& options = {});

}  // namespace terragan::geodata
