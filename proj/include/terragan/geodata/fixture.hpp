#pragma once

#include <cstdint>
#include <string>

namespace terragan::geodata {

struct FixtureRoiOptions {
  std::int64_t size = 512;
  std::int64_t tile_size = 256;
  double origin_lon = 20.0;
  double origin_lat = 40.0;  // north edge
  double cellsize = 0.001;
};

struct FixtureRoi {
  std::string raster_path;
  std::string fixture_dir;
};

/// Writes a synthetic DEM as `<dir>/roi.asc` and, for every tile, a mock
/// imagery fixture `<dir>/imagery/<digest>.rgb` colored by elevation.
/// Output is a pure function of the options.
FixtureRoi write_fixture_roi(const std::string& dir, const FixtureRoiOptions& options = {});

}  // namespace terragan::geodata
