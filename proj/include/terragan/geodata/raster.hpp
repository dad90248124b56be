#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

namespace terragan::geodata {

/// Pixel (row, col) maps to lon = origin_lon + col * pixel_size_lon,
/// lat = origin_lat + row * pixel_size_lat, measured from the north-west corner.
struct GeoTransform {
  double origin_lon = 0.0;
  double origin_lat = 0.0;
  double pixel_size_lon = 1.0;
  double pixel_size_lat = -1.0;

  bool operator==(const GeoTransform&) const = default;
};

/// Elevation grid in meters, row-major from north to south.
struct GeoRaster {
  std::int64_t width = 0;
  std::int64_t height = 0;
  GeoTransform geo;
  std::vector<float> values;
  std::optional<double> nodata;

  float at(std::int64_t row, std::int64_t col) const {
    return values[static_cast<std::size_t>(row * width + col)];
  }
  bool is_nodata(std::int64_t row, std::int64_t col) const;
  /// Throws ContractError on a size/geotransform violation.
  void validate() const;
};

enum class RasterFormat { ascii_grid, raw_with_sidecar };

/// "ascii_grid" / "raw_with_sidecar".
RasterFormat parse_raster_format(std::string_view name);
/// .asc/.txt -> ascii_grid, .tfra -> raw_with_sidecar.
RasterFormat format_from_extension(const std::string& path);

/// ESRI ASCII grid. xllcorner/yllcorner (or *center) locate the lower-left
/// corner as usual; the north-west origin is derived from nrows * cellsize.
GeoRaster parse_ascii_grid(std::string_view text, const std::string& context = "ascii grid");
std::string format_ascii_grid(const GeoRaster& raster);

GeoRaster load_raster(const std::string& path, RasterFormat format);
GeoRaster load_raster(const std::string& path);
void save_ascii_grid(const GeoRaster& raster, const std::string& path);
/// "TFRA" | u32 width | u32 height | f64 x4 geotransform | f32 values, plus
/// `path + ".json"` describing the header (and the nodata sentinel).
void save_raw_raster(const GeoRaster& raster, const std::string& path);
std::string sidecar_path(const std::string& raster_path);
nlohmann::json raster_header_json(const GeoRaster& raster);

struct DatasetStats {
  double global_min = 0.0;
  double global_max = 0.0;
  std::int64_t tile_count = 0;

  bool operator==(const DatasetStats&) const = default;
};

/// Min and max over every non-nodata cell; tile_count counts the tiles
/// tile_raster would keep at `tile_size`.
DatasetStats compute_stats(std::span<const GeoRaster> rasters, std::int64_t tile_size = 256);

struct RasterTile {
  std::int64_t row = 0;
  std::int64_t col = 0;
  GeoRaster raster;
};

struct TilingResult {
  std::vector<RasterTile> tiles;
  std::int64_t dropped_nodata = 0;
  /// Set when the raster cannot hold a single tile.
  std::optional<std::string> warning;
};

/// Non-overlapping tile grid anchored at the north-west corner; remainders and
/// tiles containing nodata are dropped.
TilingResult tile_raster(const GeoRaster& raster, std::int64_t tile_size = 256);

/// Closed ring of (lon, lat) vertices.
struct GeoPolygon {
  std::vector<std::pair<double, double>> ring;

  bool operator==(const GeoPolygon&) const = default;
  void validate() const;
};

/// Counter-clockwise rectangle SW, SE, NE, NW, SW of tile (row, col).
GeoPolygon footprint_polygon(const GeoRaster& raster, std::int64_t row, std::int64_t col,
                             std::int64_t tile_size = 256);

/// GeoJSON Polygon geometry object.
nlohmann::json to_geojson(const GeoPolygon& polygon);
GeoPolygon polygon_from_geojson(const nlohmann::json& geometry);
/// Compact, key-sorted serialization used for digests.
std::string geojson_text(const GeoPolygon& polygon);
/// First 16 hex digits of SHA-256 over geojson_text.
std::string polygon_digest(const GeoPolygon& polygon);

}  // namespace terragan::geodata
