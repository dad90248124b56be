#include "terragan/geodata/imagery.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>

#include "terragan/core/errors.hpp"

namespace terragan::geodata {

MockFsClient::MockFsClient(std::string fixture_dir) : dir_(std::move(fixture_dir)) {}

std::string MockFsClient::fixture_path(const GeoPolygon& polygon) const {
  return (std::filesystem::path(dir_) / (polygon_digest(polygon) + ".rgb")).string();
}

RgbTile MockFsClient::fetch(const GeoPolygon& polygon, std::int64_t /*size*/) {
  const auto path = fixture_path(polygon);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingFixtureError("missing imagery fixture " + polygon_digest(polygon) + " (" + path + ")");
  RgbTile tile;
  tile.bytes.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  const auto pixels = tile.bytes.size() / 3;
  const auto side = static_cast<std::int64_t>(std::llround(std::sqrt(static_cast<double>(pixels))));
  if (tile.bytes.size() % 3 != 0 || static_cast<std::size_t>(side * side) != pixels) {
    throw CorruptionError(path + ": " + std::to_string(tile.bytes.size()) + " bytes is not a square RGB tile");
  }
  tile.size = side;
  return tile;
}

HttpImageryClient::HttpImageryClient(std::string endpoint) : endpoint_(std::move(endpoint)) {}

RgbTile HttpImageryClient::fetch(const GeoPolygon& polygon, std::int64_t /*size*/) {
  throw FetchError("http imagery client has no live backend (endpoint '" + endpoint_ + "', polygon " +
                   polygon_digest(polygon) + ")");
}

RgbTile acquire_rgb(ImageryClient& client, const GeoPolygon& polygon, std::int64_t size, int max_attempts) {
  if (size < 1) throw ContractError("requested tile size must be >= 1");
  if (max_attempts < 1) throw ContractError("max_attempts must be >= 1");
  polygon.validate();
  std::string last_error;
  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    try {
      auto tile = client.fetch(polygon, size);
      if (tile.size != size || tile.bytes.size() != static_cast<std::size_t>(size * size * 3)) {
        throw ContractError("imagery for polygon " + polygon_digest(polygon) + " is " + std::to_string(tile.size) +
                            "x" + std::to_string(tile.size) + ", requested " + std::to_string(size) + "x" +
                            std::to_string(size));
      }
      return tile;
    } catch (const FetchError& e) {
      last_error = e.what();
    }
  }
  throw FetchError("imagery fetch for polygon " + polygon_digest(polygon) + " failed after " +
                   std::to_string(max_attempts) + " attempts: " + last_error);
}

}  // namespace terragan::geodata
