#include "terragan/geodata/raster.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "terragan/core/binary_io.hpp"
#include "terragan/core/digest.hpp"
#include "terragan/core/errors.hpp"

namespace terragan::geodata {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool parse_double(std::string_view token, double& out) {
  const auto* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, out);
  return ec == std::errc() && ptr == end;
}

template <typename T>
std::string shortest(T v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Splits a line into whitespace-separated tokens.
std::vector<std::string_view> tokens_of(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const auto start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

}  // namespace

bool GeoRaster::is_nodata(std::int64_t row, std::int64_t col) const {
  const float v = at(row, col);
  if (std::isnan(v)) return true;
  return nodata && v == static_cast<float>(*nodata);
}

void GeoRaster::validate() const {
  if (width < 1 || height < 1) throw ContractError("raster extents must be >= 1");
  if (static_cast<std::int64_t>(values.size()) != width * height) {
    throw ContractError("raster holds " + std::to_string(values.size()) + " values for " + std::to_string(width) +
                        "x" + std::to_string(height));
  }
  if (geo.pixel_size_lon == 0.0 || geo.pixel_size_lat == 0.0) throw ContractError("pixel sizes must be nonzero");
}

RasterFormat parse_raster_format(std::string_view name) {
  if (name == "ascii_grid") return RasterFormat::ascii_grid;
  if (name == "raw_with_sidecar") return RasterFormat::raw_with_sidecar;
  throw ConfigError("unknown raster format '" + std::string(name) + "'");
}

RasterFormat format_from_extension(const std::string& path) {
  const auto ext = lower(std::filesystem::path(path).extension().string());
  if (ext == ".asc" || ext == ".txt") return RasterFormat::ascii_grid;
  if (ext == ".tfra") return RasterFormat::raw_with_sidecar;
  throw ConfigError("cannot infer raster format from '" + path + "'");
}

// ---------------------------------------------------------------- ASCII grid

GeoRaster parse_ascii_grid(std::string_view text, const std::string& context) {
  std::optional<double> ncols, nrows, cellsize, xll, yll, nodata;
  bool x_center = false;
  bool y_center = false;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& msg) { throw ParseError(context + ":" + std::to_string(line_no) + ": " + msg); };

  // Header: "key value" lines until the first numeric token.
  while (pos < text.size()) {
    const auto eol = std::min(text.find('\n', pos), text.size());
    const auto line = text.substr(pos, eol - pos);
    const auto toks = tokens_of(line);
    if (toks.empty()) {
      ++line_no;
      pos = eol + 1;
      continue;
    }
    double probe = 0;
    if (parse_double(toks[0], probe)) break;
    ++line_no;
    if (toks.size() != 2) fail("expected 'key value' header line");
    double value = 0;
    if (!parse_double(toks[1], value)) fail("non-numeric header value '" + std::string(toks[1]) + "'");
    const auto key = lower(toks[0]);
    if (key == "ncols") ncols = value;
    else if (key == "nrows") nrows = value;
    else if (key == "cellsize") cellsize = value;
    else if (key == "xllcorner") xll = value;
    else if (key == "xllcenter") { xll = value; x_center = true; }
    else if (key == "yllcorner") yll = value;
    else if (key == "yllcenter") { yll = value; y_center = true; }
    else if (key == "nodata_value") nodata = value;
    else fail("unknown header key '" + std::string(toks[0]) + "'");
    pos = eol + 1;
  }
  if (!ncols || !nrows || !cellsize || !xll || !yll) {
    fail("header must define ncols, nrows, xllcorner, yllcorner and cellsize");
  }
  if (*ncols < 1 || *nrows < 1 || std::floor(*ncols) != *ncols || std::floor(*nrows) != *nrows) {
    fail("ncols and nrows must be positive integers");
  }
  if (!(*cellsize > 0)) fail("cellsize must be positive");

  GeoRaster r;
  r.width = static_cast<std::int64_t>(*ncols);
  r.height = static_cast<std::int64_t>(*nrows);
  const double cs = *cellsize;
  const double west = x_center ? *xll - cs / 2 : *xll;
  const double south = y_center ? *yll - cs / 2 : *yll;
  r.geo = {west, south + static_cast<double>(r.height) * cs, cs, -cs};
  r.nodata = nodata;

  const auto expected = static_cast<std::size_t>(r.width * r.height);
  r.values.reserve(expected);
  while (pos < text.size()) {
    const auto eol = std::min(text.find('\n', pos), text.size());
    ++line_no;
    for (auto tok : tokens_of(text.substr(pos, eol - pos))) {
      double v = 0;
      if (!parse_double(tok, v)) fail("non-numeric value '" + std::string(tok) + "'");
      if (r.values.size() == expected) fail("more than " + std::to_string(expected) + " values");
      r.values.push_back(static_cast<float>(v));
    }
    pos = eol + 1;
  }
  if (r.values.size() != expected) {
    fail("expected " + std::to_string(expected) + " values (" + std::to_string(r.width) + "x" +
         std::to_string(r.height) + "), found " + std::to_string(r.values.size()));
  }
  return r;
}

std::string format_ascii_grid(const GeoRaster& raster) {
  raster.validate();
  const auto& g = raster.geo;
  if (g.pixel_size_lon <= 0 || g.pixel_size_lat != -g.pixel_size_lon) {
    throw ContractError("ASCII grids need square cells with north-up orientation");
  }
  std::string out;
  out += "ncols " + std::to_string(raster.width) + "\n";
  out += "nrows " + std::to_string(raster.height) + "\n";
  out += "xllcorner " + shortest(g.origin_lon) + "\n";
  out += "yllcorner " + shortest(g.origin_lat + static_cast<double>(raster.height) * g.pixel_size_lat) + "\n";
  out += "cellsize " + shortest(g.pixel_size_lon) + "\n";
  if (raster.nodata) out += "NODATA_value " + shortest(*raster.nodata) + "\n";
  for (std::int64_t i = 0; i < raster.height; ++i) {
    for (std::int64_t j = 0; j < raster.width; ++j) {
      if (j) out += ' ';
      out += shortest(raster.at(i, j));
    }
    out += '\n';
  }
  return out;
}

void save_ascii_grid(const GeoRaster& raster, const std::string& path) {
  const auto text = format_ascii_grid(raster);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << text;
}

// ------------------------------------------------------------------ raw TFRA

std::string sidecar_path(const std::string& raster_path) { return raster_path + ".json"; }

nlohmann::json raster_header_json(const GeoRaster& raster) {
  const auto& g = raster.geo;
  return {{"format", "TFRA"},
          {"width", raster.width},
          {"height", raster.height},
          {"geotransform", {g.origin_lon, g.origin_lat, g.pixel_size_lon, g.pixel_size_lat}},
          {"nodata", raster.nodata ? nlohmann::json(*raster.nodata) : nlohmann::json(nullptr)}};
}

void save_raw_raster(const GeoRaster& raster, const std::string& path) {
  raster.validate();
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    BinaryWriter w(out);
    w.magic("TFRA");
    w.u32(static_cast<std::uint32_t>(raster.width));
    w.u32(static_cast<std::uint32_t>(raster.height));
    w.f64(raster.geo.origin_lon);
    w.f64(raster.geo.origin_lat);
    w.f64(raster.geo.pixel_size_lon);
    w.f64(raster.geo.pixel_size_lat);
    for (float v : raster.values) w.f32(v);
  }
  std::ofstream side(sidecar_path(path), std::ios::binary);
  if (!side) throw IoError("cannot write " + sidecar_path(path));
  side << raster_header_json(raster).dump(2) << '\n';
}

namespace {

GeoRaster load_raw(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  BinaryReader r(in, path);
  r.expect_magic("TFRA");
  GeoRaster out;
  out.width = r.u32();
  out.height = r.u32();
  out.geo.origin_lon = r.f64();
  out.geo.origin_lat = r.f64();
  out.geo.pixel_size_lon = r.f64();
  out.geo.pixel_size_lat = r.f64();
  if (out.width < 1 || out.height < 1) throw CorruptionError(path + ": empty raster extent");
  out.values.resize(static_cast<std::size_t>(out.width * out.height));
  for (auto& v : out.values) v = r.f32();
  if (in.peek() != std::char_traits<char>::eof()) throw CorruptionError(path + ": trailing bytes after raster");

  const auto side = sidecar_path(path);
  if (std::filesystem::exists(side)) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(read_file(side));
      if (j.at("width").get<std::int64_t>() != out.width || j.at("height").get<std::int64_t>() != out.height) {
        throw CorruptionError(side + ": extents disagree with " + path);
      }
      if (j.contains("nodata") && !j.at("nodata").is_null()) out.nodata = j.at("nodata").get<double>();
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(side + ": " + e.what());
    }
  }
  try {
    out.validate();
  } catch (const ContractError& e) {
    throw CorruptionError(path + ": " + e.what());
  }
  return out;
}

}  // namespace

GeoRaster load_raster(const std::string& path, RasterFormat format) {
  if (format == RasterFormat::raw_with_sidecar) return load_raw(path);
  auto raster = parse_ascii_grid(read_file(path), path);
  return raster;
}

GeoRaster load_raster(const std::string& path) { return load_raster(path, format_from_extension(path)); }

// ------------------------------------------------------------ stats & tiling

DatasetStats compute_stats(std::span<const GeoRaster> rasters, std::int64_t tile_size) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  std::int64_t tiles = 0;
  for (const auto& r : rasters) {
    for (std::int64_t i = 0; i < r.height; ++i) {
      for (std::int64_t j = 0; j < r.width; ++j) {
        if (r.is_nodata(i, j)) continue;
        lo = std::min(lo, static_cast<double>(r.at(i, j)));
        hi = std::max(hi, static_cast<double>(r.at(i, j)));
      }
    }
    tiles += static_cast<std::int64_t>(tile_raster(r, tile_size).tiles.size());
  }
  if (!std::isfinite(lo)) throw EmptyDataError("no valid elevation cells in the supplied rasters");
  return {lo, hi, tiles};
}

TilingResult tile_raster(const GeoRaster& raster, std::int64_t tile_size) {
  if (tile_size < 1) throw ContractError("tile_size must be >= 1");
  raster.validate();
  TilingResult result;
  const auto rows = raster.height / tile_size;
  const auto cols = raster.width / tile_size;
  if (rows == 0 || cols == 0) {
    result.warning = "raster " + std::to_string(raster.width) + "x" + std::to_string(raster.height) +
                     " is smaller than one " + std::to_string(tile_size) + "x" + std::to_string(tile_size) + " tile";
    return result;
  }
  for (std::int64_t tr = 0; tr < rows; ++tr) {
    for (std::int64_t tc = 0; tc < cols; ++tc) {
      GeoRaster sub;
      sub.width = sub.height = tile_size;
      sub.nodata = raster.nodata;
      const auto& g = raster.geo;
      sub.geo = {g.origin_lon + static_cast<double>(tc * tile_size) * g.pixel_size_lon,
                 g.origin_lat + static_cast<double>(tr * tile_size) * g.pixel_size_lat, g.pixel_size_lon,
                 g.pixel_size_lat};
      sub.values.reserve(static_cast<std::size_t>(tile_size * tile_size));
      bool has_nodata = false;
      for (std::int64_t i = 0; i < tile_size; ++i) {
        for (std::int64_t j = 0; j < tile_size; ++j) {
          const auto ri = tr * tile_size + i;
          const auto rj = tc * tile_size + j;
          has_nodata = has_nodata || raster.is_nodata(ri, rj);
          sub.values.push_back(raster.at(ri, rj));
        }
      }
      if (has_nodata) {
        ++result.dropped_nodata;
        continue;
      }
      result.tiles.push_back({tr, tc, std::move(sub)});
    }
  }
  return result;
}

// ------------------------------------------------------------------ polygons

void GeoPolygon::validate() const {
  if (ring.size() < 4) throw ContractError("polygon ring needs at least 4 vertices");
  if (ring.front() != ring.back()) throw ContractError("polygon ring is not closed");
}

GeoPolygon footprint_polygon(const GeoRaster& raster, std::int64_t row, std::int64_t col, std::int64_t tile_size) {
  if (tile_size < 1 || row < 0 || col < 0 || (row + 1) * tile_size > raster.height ||
      (col + 1) * tile_size > raster.width) {
    throw ContractError("tile (" + std::to_string(row) + "," + std::to_string(col) + ") of size " +
                        std::to_string(tile_size) + " lies outside the raster");
  }
  const auto& g = raster.geo;
  auto lon_at = [&](std::int64_t c) { return g.origin_lon + static_cast<double>(c * tile_size) * g.pixel_size_lon; };
  auto lat_at = [&](std::int64_t r) { return g.origin_lat + static_cast<double>(r * tile_size) * g.pixel_size_lat; };
  const double west = std::min(lon_at(col), lon_at(col + 1));
  const double east = std::max(lon_at(col), lon_at(col + 1));
  const double south = std::min(lat_at(row), lat_at(row + 1));
  const double north = std::max(lat_at(row), lat_at(row + 1));
  return {{{west, south}, {east, south}, {east, north}, {west, north}, {west, south}}};
}

nlohmann::json to_geojson(const GeoPolygon& polygon) {
  polygon.validate();
  nlohmann::json ring = nlohmann::json::array();
  for (const auto& [lon, lat] : polygon.ring) ring.push_back({lon, lat});
  return {{"type", "Polygon"}, {"coordinates", nlohmann::json::array({ring})}};
}

GeoPolygon polygon_from_geojson(const nlohmann::json& geometry) {
  try {
    if (geometry.at("type") != "Polygon") throw ParseError("GeoJSON geometry is not a Polygon");
    const auto& rings = geometry.at("coordinates");
    if (!rings.is_array() || rings.size() != 1) throw ParseError("expected exactly one polygon ring");
    GeoPolygon p;
    for (const auto& v : rings[0]) {
      if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
        throw ParseError("polygon vertex must be [lon, lat]");
      }
      p.ring.emplace_back(v[0].get<double>(), v[1].get<double>());
    }
    p.validate();
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed GeoJSON polygon: ") + e.what());
  } catch (const ContractError& e) {
    throw ParseError(std::string("malformed GeoJSON polygon: ") + e.what());
  }
}

std::string geojson_text(const GeoPolygon& polygon) { return to_geojson(polygon).dump(); }

std::string polygon_digest(const GeoPolygon& polygon) { return sha256_hex(geojson_text(polygon)).substr(0, 16); }

}  // namespace terragan::geodata
