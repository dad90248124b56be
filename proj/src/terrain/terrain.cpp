#include "terragan/terrain/terrain.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "terragan/core/errors.hpp"
#include "terragan/core/rng.hpp"

namespace terragan::terrain {

// --------------------------------------------------------------------- noise

void PerlinParams::validate() const {
  if (!(base_frequency > 0)) throw ConfigError("base_frequency must be > 0");
  if (octaves < 1) throw ConfigError("octaves must be >= 1");
  if (!(persistence > 0 && persistence <= 1)) throw ConfigError("persistence must lie in (0, 1]");
  if (!(lacunarity >= 1)) throw ConfigError("lacunarity must be >= 1");
}

double PerlinParams::amplitude_sum() const {
  double sum = 0;
  double a = 1;
  for (std::int64_t k = 0; k < octaves; ++k, a *= persistence) sum += a;
  return sum;
}

PerlinNoise::PerlinNoise(std::uint64_t seed) {
  std::array<std::uint8_t, 256> p{};
  std::iota(p.begin(), p.end(), std::uint8_t{0});
  Rng rng(seed);
  for (std::size_t k = p.size(); k > 1; --k) std::swap(p[k - 1], p[rng.below(k)]);
  for (std::size_t i = 0; i < 512; ++i) perm_[i] = p[i & 255];
}

namespace {

constexpr double kDiag = 0.70710678118654752440;
constexpr double kGradients[8][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {kDiag, kDiag}, {-kDiag, kDiag}, {kDiag, -kDiag}, {-kDiag, -kDiag}};

double fade(double t) { return t * t * t * (t * (t * 6 - 15) + 10); }

}  // namespace

double PerlinNoise::value(double x, double y) const {
  const double fx = std::floor(x);
  const double fy = std::floor(y);
  const int xi = static_cast<int>(static_cast<std::int64_t>(fx) & 255);
  const int yi = static_cast<int>(static_cast<std::int64_t>(fy) & 255);
  const double dx = x - fx;
  const double dy = y - fy;
  auto corner = [&](int cx, int cy, double ox, double oy) {
    const auto& g = kGradients[perm_[perm_[xi + cx] + yi + cy] & 7];
    return g[0] * ox + g[1] * oy;
  };
  const double n00 = corner(0, 0, dx, dy);
  const double n10 = corner(1, 0, dx - 1, dy);
  const double n01 = corner(0, 1, dx, dy - 1);
  const double n11 = corner(1, 1, dx - 1, dy - 1);
  const double u = fade(dx);
  const double v = fade(dy);
  const double bottom = n00 + u * (n10 - n00);
  const double top = n01 + u * (n11 - n01);
  return bottom + v * (top - bottom);
}

HeightField perlin_heightfield(std::int64_t size, const PerlinParams& params) {
  if (size < 2) throw ContractError("heightfield size must be >= 2");
  params.validate();
  Rng seeds(params.seed);
  std::vector<PerlinNoise> layers;
  for (std::int64_t k = 0; k < params.octaves; ++k) {
    layers.emplace_back(k == 0 ? params.seed : seeds.fork(static_cast<std::uint64_t>(k)).next_u64());
  }
  const double norm = params.amplitude_sum();
  const auto n = static_cast<double>(size);
  HeightField field{Tensor({size, size})};
  for (std::int64_t i = 0; i < size; ++i) {
    for (std::int64_t j = 0; j < size; ++j) {
      double sum = 0;
      double amplitude = 1;
      double frequency = params.base_frequency;
      for (const auto& layer : layers) {
        sum += amplitude * layer.value(static_cast<double>(j) * frequency / n, static_cast<double>(i) * frequency / n);
        amplitude *= params.persistence;
        frequency *= params.lacunarity;
      }
      field.values[static_cast<std::size_t>(i * size + j)] = static_cast<float>(std::clamp(sum / norm, -1.0, 1.0));
    }
  }
  return field;
}

// ---------------------------------------------------------------- latents

std::vector<Tensor> interpolate_latents(const Tensor& z0, const Tensor& z1, std::int64_t steps) {
  if (steps < 2) throw ContractError("interpolation needs steps >= 2");
  if (z0.shape() != z1.shape()) {
    throw ContractError("latent shapes differ: " + shape_string(z0.shape()) + " vs " + shape_string(z1.shape()));
  }
  std::vector<Tensor> out;
  out.reserve(static_cast<std::size_t>(steps));
  out.push_back(z0);
  for (std::int64_t k = 1; k + 1 < steps; ++k) {
    const double t = static_cast<double>(k) / static_cast<double>(steps - 1);
    Tensor z(z0.shape());
    for (std::size_t i = 0; i < z.numel(); ++i) {
      z[i] = static_cast<float>((1.0 - t) * static_cast<double>(z0[i]) + t * static_cast<double>(z1[i]));
    }
    out.push_back(std::move(z));
  }
  out.push_back(z1);
  return out;
}

// ---------------------------------------------------------------------- mesh

TriMesh build_mesh(const Tensor& dem, const Tensor& rgb, double vertical_scale) {
  Tensor heights = dem;
  if (heights.rank() == 3 && heights.dim(0) == 1) heights = heights.reshaped({dem.dim(1), dem.dim(2)});
  if (heights.rank() != 2 || heights.dim(0) != heights.dim(1) || heights.dim(0) < 2) {
    throw ContractError("dem must be a square [N,N] or [1,N,N] grid with N >= 2, got " + shape_string(dem.shape()));
  }
  const auto n = heights.dim(0);
  if (rgb.shape() != Shape{3, n, n}) {
    throw ContractError("rgb " + shape_string(rgb.shape()) + " does not match dem of size " + std::to_string(n));
  }
  if (!(vertical_scale > 0)) throw ContractError("vertical_scale must be > 0");

  TriMesh mesh;
  mesh.vertices.reserve(static_cast<std::size_t>(n * n));
  const auto plane = static_cast<std::size_t>(n * n);
  const double step = 1.0 / static_cast<double>(n - 1);
  auto unit = [](float v) { return std::clamp((v + 1.0f) * 0.5f, 0.0f, 1.0f); };
  for (std::int64_t i = 0; i < n; ++i) {
    for (std::int64_t j = 0; j < n; ++j) {
      const auto p = static_cast<std::size_t>(i * n + j);
      mesh.vertices.push_back({static_cast<float>(static_cast<double>(j) * step),
                               static_cast<float>(static_cast<double>(i) * step),
                               static_cast<float>(vertical_scale * heights[p]), unit(rgb[p]), unit(rgb[plane + p]),
                               unit(rgb[2 * plane + p])});
    }
  }
  mesh.triangles.reserve(static_cast<std::size_t>(2 * (n - 1) * (n - 1)));
  for (std::int64_t i = 0; i + 1 < n; ++i) {
    for (std::int64_t j = 0; j + 1 < n; ++j) {
      const auto v00 = static_cast<std::uint32_t>(i * n + j);
      const auto v01 = v00 + 1;
      const auto v10 = static_cast<std::uint32_t>((i + 1) * n + j);
      const auto v11 = v10 + 1;
      mesh.triangles.push_back({v00, v01, v11});
      mesh.triangles.push_back({v00, v11, v10});
    }
  }
  return mesh;
}

PointCloud to_point_cloud(const TriMesh& mesh) {
  PointCloud cloud;
  for (const auto& v : mesh.vertices) {
    cloud.points.push_back({v.x, v.y, v.z});
    cloud.colors.push_back({v.r, v.g, v.b});
  }
  return cloud;
}

MeshFormat parse_mesh_format(std::string_view name) {
  if (name == "ply" || name == "ply_ascii") return MeshFormat::ply_ascii;
  if (name == "obj") return MeshFormat::obj;
  throw ConfigError("unknown mesh format '" + std::string(name) + "' (expected ply or obj)");
}

std::uint8_t color_byte(float unit) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(static_cast<double>(unit), 0.0, 1.0) * 255.0));
}

namespace {

std::string num(float v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

std::string encode_mesh(const TriMesh& mesh, MeshFormat format) {
  if (mesh.vertices.empty() || mesh.triangles.empty()) throw ContractError("refusing to export an empty mesh");
  for (const auto& t : mesh.triangles) {
    for (auto idx : t) {
      if (idx >= mesh.vertices.size()) throw ContractError("triangle index out of range");
    }
  }
  std::string out;
  if (format == MeshFormat::ply_ascii) {
    out += "ply\nformat ascii 1.0\ncomment terragan heightfield mesh\n";
    out += "element vertex " + std::to_string(mesh.vertices.size()) + "\n";
    out += "property float x\nproperty float y\nproperty float z\n";
    out += "property uchar red\nproperty uchar green\nproperty uchar blue\n";
    out += "element face " + std::to_string(mesh.triangles.size()) + "\n";
    out += "property list uchar int vertex_indices\nend_header\n";
    for (const auto& v : mesh.vertices) {
      out += num(v.x) + ' ' + num(v.y) + ' ' + num(v.z) + ' ' + std::to_string(color_byte(v.r)) + ' ' +
             std::to_string(color_byte(v.g)) + ' ' + std::to_string(color_byte(v.b)) + '\n';
    }
    for (const auto& t : mesh.triangles) {
      out += "3 " + std::to_string(t[0]) + ' ' + std::to_string(t[1]) + ' ' + std::to_string(t[2]) + '\n';
    }
  } else {
    out += "# terragan heightfield mesh\n";
    out += "# vertex colors follow positions: v x y z r g b, with r g b in [0, 1]\n";
    for (const auto& v : mesh.vertices) {
      out += "v " + num(v.x) + ' ' + num(v.y) + ' ' + num(v.z) + ' ' + num(v.r) + ' ' + num(v.g) + ' ' + num(v.b) + '\n';
    }
    for (const auto& t : mesh.triangles) {
      out += "f " + std::to_string(t[0] + 1) + ' ' + std::to_string(t[1] + 1) + ' ' + std::to_string(t[2] + 1) + '\n';
    }
  }
  return out;
}

void export_mesh(const TriMesh& mesh, const std::string& path, MeshFormat format) {
  const auto text = encode_mesh(mesh, format);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write mesh " + path);
  out << text;
  if (!out) throw IoError("write failed for mesh " + path);
}

TriMesh read_ply(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& msg) { throw ParseError(path + ":" + std::to_string(line_no) + ": " + msg); };
  auto next_line = [&]() {
    if (!std::getline(in, line)) fail("unexpected end of file");
    ++line_no;
  };
  next_line();
  if (line != "ply") fail("missing 'ply' magic");
  next_line();
  if (line != "format ascii 1.0") fail("only ASCII PLY is supported");
  std::int64_t vertices = -1;
  std::int64_t faces = -1;
  std::vector<std::string> vertex_props;
  std::string current;
  while (true) {
    next_line();
    if (line == "end_header") break;
    std::istringstream ss(line);
    std::string word;
    ss >> word;
    if (word == "comment") continue;
    if (word == "element") {
      std::int64_t count = 0;
      ss >> current >> count;
      if (!ss) fail("malformed element line");
      if (current == "vertex") vertices = count;
      else if (current == "face") faces = count;
      else fail("unexpected element '" + current + "'");
    } else if (word == "property") {
      if (current == "vertex") {
        std::string type, name;
        ss >> type >> name;
        vertex_props.push_back(name);
      }
    } else {
      fail("unexpected header line");
    }
  }
  const std::vector<std::string> expected{"x", "y", "z", "red", "green", "blue"};
  if (vertices < 0 || faces < 0 || vertex_props != expected) fail("unsupported vertex/face layout");
  TriMesh mesh;
  mesh.vertices.reserve(static_cast<std::size_t>(vertices));
  for (std::int64_t i = 0; i < vertices; ++i) {
    next_line();
    std::istringstream ss(line);
    MeshVertex v;
    int r = 0, g = 0, b = 0;
    ss >> v.x >> v.y >> v.z >> r >> g >> b;
    if (!ss) fail("malformed vertex");
    v.r = static_cast<float>(r) / 255.0f;
    v.g = static_cast<float>(g) / 255.0f;
    v.b = static_cast<float>(b) / 255.0f;
    mesh.vertices.push_back(v);
  }
  for (std::int64_t i = 0; i < faces; ++i) {
    next_line();
    std::istringstream ss(line);
    int count = 0;
    std::array<std::uint32_t, 3> t{};
    ss >> count >> t[0] >> t[1] >> t[2];
    if (!ss || count != 3) fail("only triangular faces are supported");
    for (auto idx : t) {
      if (idx >= mesh.vertices.size()) fail("face index out of range");
    }
    mesh.triangles.push_back(t);
  }
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") != std::string::npos) fail("trailing data after the last face");
  }
  return mesh;
}

// ------------------------------------------------------------------ colorize

std::pair<Tensor, Tensor> colorize_perlin(const HeightField& dem, pix2pix::TranslationModel& inverse_model) {
  if (inverse_model.direction() != pix2pix::Direction::dem_to_rgb) {
    throw ContractError("colorization needs a dem-to-rgb model");
  }
  const auto n = dem.size();
  if (dem.values.shape() != Shape{n, n} || n != inverse_model.options().resolution) {
    throw ContractError("heightfield " + shape_string(dem.values.shape()) + " does not match model resolution " +
                        std::to_string(inverse_model.options().resolution));
  }
  auto rgb = pix2pix::translate(inverse_model, dem.values.reshaped({1, 1, n, n}));
  return {dem.values.reshaped({1, n, n}), rgb.reshaped({3, n, n})};
}

}  // namespace terragan::terrain
