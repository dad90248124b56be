#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "terragan/geodata/raster.hpp"

namespace terragan::geodata {

/// size x size true-color pixels, row-major (r, g, b) byte triplets.
struct RgbTile {
  std::int64_t size = 0;
  std::vector<std::uint8_t> bytes;
};

class ImageryClient {
 public:
  virtual ~ImageryClient() = default;
  /// Throws FetchError for transient failures.
  virtual RgbTile fetch(const GeoPolygon& polygon, std::int64_t size) = 0;
  virtual std::string name() const = 0;
};

/// Reads `<dir>/<polygon digest>.rgb`; a missing file raises MissingFixtureError.
class MockFsClient final : public ImageryClient {
 public:
  explicit MockFsClient(std::string fixture_dir);
  RgbTile fetch(const GeoPolygon& polygon, std::int64_t size) override;
  std::string name() const override { return "mock_fs"; }
  std::string fixture_path(const GeoPolygon& polygon) const;

 private:
  std::string dir_;
};

/// Remote imagery endpoint. Not wired to a live service: every fetch fails
/// with a FetchError. Expected exchange:
///   POST <endpoint>/fetch
///   {"geometry": <GeoJSON Polygon>, "size": N, "bands": ["red", "green", "blue"]}
///   -> 200, body of N*N*3 bytes (row-major RGB triplets, north row first)
class HttpImageryClient final : public ImageryClient {
 public:
  explicit HttpImageryClient(std::string endpoint);
  RgbTile fetch(const GeoPolygon& polygon, std::int64_t size) override;
  std::string name() const override { return "http"; }
  const std::string& endpoint() const { return endpoint_; }

 private:
  std::string endpoint_;
};

/// Fetches with up to `max_attempts` tries on FetchError; missing fixtures are
/// not retried. A tile of the wrong extent raises ContractError.
RgbTile acquire_rgb(ImageryClient& client, const GeoPolygon& polygon, std::int64_t size = 256,
                    int max_attempts = 3);

}  // namespace terragan::geodata
