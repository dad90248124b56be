#include "terragan/geodata/fixture.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "terragan/core/errors.hpp"
#include "terragan/geodata/raster.hpp"

namespace terragan::geodata {

namespace {

// Smooth synthetic relief in meters: two ridge systems and a summit.
double relief(double x, double y) {
  constexpr double tau = 2.0 * std::numbers::pi;
  const double ridges = 420.0 * std::sin(tau * x / 310.0) * std::cos(tau * y / 430.0);
  const double summit = 650.0 * std::exp(-((x - 340.0) * (x - 340.0) + (y - 160.0) * (y - 160.0)) / (2.0 * 70.0 * 70.0));
  const double valley = -260.0 * std::exp(-((x - 120.0) * (x - 120.0) + (y - 390.0) * (y - 390.0)) / (2.0 * 90.0 * 90.0));
  return 900.0 + ridges + summit + valley + 0.6 * x - 0.3 * y;
}

struct Stop {
  double t;
  double r, g, b;
};

// Lowland green -> brown slopes -> gray rock -> snow.
void ramp(double t, unsigned char rgb[3]) {
  static constexpr Stop stops[] = {
      {0.0, 46, 104, 52}, {0.35, 110, 140, 70}, {0.6, 139, 110, 72}, {0.82, 128, 120, 112}, {1.0, 242, 242, 245}};
  t = std::clamp(t, 0.0, 1.0);
  std::size_t k = 0;
  while (k + 2 < std::size(stops) && t > stops[k + 1].t) ++k;
  const auto& a = stops[k];
  const auto& b = stops[k + 1];
  const double u = (t - a.t) / (b.t - a.t);
  rgb[0] = static_cast<unsigned char>(std::lround(a.r + u * (b.r - a.r)));
  rgb[1] = static_cast<unsigned char>(std::lround(a.g + u * (b.g - a.g)));
  rgb[2] = static_cast<unsigned char>(std::lround(a.b + u * (b.b - a.b)));
}

}  // namespace

FixtureRoi write_fixture_roi(const std::string& dir, const FixtureRoiOptions& options) {
  if (options.size < options.tile_size || options.tile_size < 1) {
    throw ConfigError("fixture ROI must hold at least one tile");
  }
  namespace fs = std::filesystem;
  FixtureRoi roi{(fs::path(dir) / "roi.asc").string(), (fs::path(dir) / "imagery").string()};
  fs::create_directories(roi.fixture_dir);

  GeoRaster raster;
  raster.width = raster.height = options.size;
  raster.geo = {options.origin_lon, options.origin_lat, options.cellsize, -options.cellsize};
  raster.nodata = -9999.0;
  raster.values.reserve(static_cast<std::size_t>(options.size * options.size));
  for (std::int64_t i = 0; i < options.size; ++i) {
    for (std::int64_t j = 0; j < options.size; ++j) {
      const double e = relief(static_cast<double>(j), static_cast<double>(i));
      raster.values.push_back(static_cast<float>(std::round(e * 100.0) / 100.0));
    }
  }
  save_ascii_grid(raster, roi.raster_path);

  // Footprints come from the file as it will be read back.
  const auto loaded = load_raster(roi.raster_path, RasterFormat::ascii_grid);
  const auto [lo, hi] = std::minmax_element(loaded.values.begin(), loaded.values.end());
  const double span = static_cast<double>(*hi) - static_cast<double>(*lo);
  const auto t = options.tile_size;
  for (const auto& tile : tile_raster(loaded, t).tiles) {
    std::vector<unsigned char> bytes(static_cast<std::size_t>(t * t * 3));
    for (std::int64_t i = 0; i < t; ++i) {
      for (std::int64_t j = 0; j < t; ++j) {
        const double level = (static_cast<double>(tile.raster.at(i, j)) - *lo) / span;
        unsigned char* px = &bytes[static_cast<std::size_t>((i * t + j) * 3)];
        ramp(level, px);
      }
    }
    const auto path = fs::path(roi.fixture_dir) / (polygon_digest(footprint_polygon(loaded, tile.row, tile.col, t)) + ".rgb");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  }
  return roi;
}

}  // namespace terragan::geodata
