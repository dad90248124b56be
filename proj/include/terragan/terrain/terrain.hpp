#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "terragan/core/tensor.hpp"
#include "terragan/pix2pix/pix2pix.hpp"

namespace terragan::terrain {

struct PerlinParams {
  std::uint64_t seed = 0;
  /// Lattice cells across the tile edge for the first octave.
  double base_frequency = 4.0;
  std::int64_t octaves = 1;
  double persistence = 0.5;
  double lacunarity = 2.0;

  void validate() const;
  /// Sum of persistence^k over the octaves; the octave sum is divided by it.
  double amplitude_sum() const;
};

/// Classic 2-D gradient noise over an integer lattice: 256-entry permutation
/// from the seed, eight unit gradients, quintic fade.
class PerlinNoise {
 public:
  explicit PerlinNoise(std::uint64_t seed);
  double value(double x, double y) const;

 private:
  std::array<std::uint8_t, 512> perm_{};
};

/// Square elevation grid in [-1, 1], stored as [N, N].
struct HeightField {
  Tensor values;

  std::int64_t size() const { return values.dim(0); }
};

/// Octave k samples at frequency base * lacunarity^k with amplitude persistence^k,
/// sample (i, j) sitting at lattice coordinate (j, i) * frequency / N.
HeightField perlin_heightfield(std::int64_t size, const PerlinParams& params);

/// z_k = (1 - t) z0 + t z1 with t = k / (steps - 1); endpoints are copies.
std::vector<Tensor> interpolate_latents(const Tensor& z0, const Tensor& z1, std::int64_t steps);

inline constexpr double kDefaultVerticalScale = 0.25;

struct MeshVertex {
  float x = 0, y = 0, z = 0;
  float r = 0, g = 0, b = 0;  // [0, 1]
};

struct TriMesh {
  std::vector<MeshVertex> vertices;
  std::vector<std::array<std::uint32_t, 3>> triangles;
};

struct PointCloud {
  std::vector<std::array<float, 3>> points;
  std::vector<std::array<float, 3>> colors;
};

/// Vertex (i, j) at (j / (N-1), i / (N-1), scale * dem[i, j]); each grid cell
/// becomes two triangles wound counter-clockwise seen from +z. `dem` is [N, N]
/// or [1, N, N]; `rgb` is [3, N, N] in [-1, 1].
TriMesh build_mesh(const Tensor& dem, const Tensor& rgb, double vertical_scale = kDefaultVerticalScale);
PointCloud to_point_cloud(const TriMesh& mesh);

enum class MeshFormat { ply_ascii, obj };

MeshFormat parse_mesh_format(std::string_view name);
std::string encode_mesh(const TriMesh& mesh, MeshFormat format);
void export_mesh(const TriMesh& mesh, const std::string& path, MeshFormat format);
/// Reads the ASCII PLY layout written by export_mesh.
TriMesh read_ply(const std::string& path);

/// [0, 1] -> [0, 255].
std::uint8_t color_byte(float unit);

/// Runs the inverse (height -> color) translator on the field.
/// Returns ([1, N, N] dem, [3, N, N] rgb).
std::pair<Tensor, Tensor> colorize_perlin(const HeightField& dem, pix2pix::TranslationModel& inverse_model);

}  // namespace terragan::terrain
