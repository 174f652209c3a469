#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "dtomo/matrix.hpp"

namespace dtomo {

enum class RayDirection { horizontal, vertical, diag_down, diag_up, none };

// direction flags for lattice ray construction
enum DirectionFlags : unsigned {
  dir_horizontal = 1u,
  dir_vertical = 2u,
  dir_diag_down = 4u,  // top-left to bottom-right, lines x - y = const
  dir_diag_up = 8u,    // bottom-left to top-right, lines x + y = const
};

std::string to_string(RayDirection d);
RayDirection ray_direction_from_string(const std::string& s);

// one row of the projection matrix: unit coefficients on `nodes`, right-hand side `target`
struct Ray {
  std::vector<int> nodes;
  long long target = 0;
  RayDirection direction = RayDirection::none;

  bool operator==(const Ray&) const = default;
};

struct Labeling {
  std::vector<int> values;  // node id -> label, row-major grid order

  bool operator==(const Labeling&) const = default;
};

enum class PairwiseKind { potts, abs_diff, table };

std::string to_string(PairwiseKind k);

// grid-structured labeling problem with ray-sum measurement constraints
struct TomographyInstance {
  int width = 0;
  int height = 0;
  int k = 0;  // labels are {0, ..., k-1}

  PairwiseKind pairwise_kind = PairwiseKind::abs_diff;
  double pairwise_weight = 1.0;

  matrix<double> unary;                        // num_nodes x k
  std::vector<matrix<double>> pairwise_tables;  // per canonical edge, k x k
  std::vector<Ray> rays;

  std::map<std::string, std::string> metadata;

  TomographyInstance() = default;
  TomographyInstance(int width, int height, int k, PairwiseKind kind, double weight);

  int num_nodes() const { return width * height; }
  int node_id(int x, int y) const { return y * width + x; }
  int node_x(int u) const { return u % width; }
  int node_y(int u) const { return u / width; }

  // canonical 4-neighbor edge enumeration: all horizontal edges row-major, then all vertical
  int num_edges() const { return height * (width - 1) + width * (height - 1); }
  std::pair<int, int> edge_endpoints(int e) const;
  int horizontal_edge_id(int x, int y) const;  // ((x,y),(x+1,y))
  int vertical_edge_id(int x, int y) const;    // ((x,y),(x,y+1))

  const matrix<double>& edge_cost(int e) const { return pairwise_tables[e]; }

  bool has_integral_costs() const;
  void validate() const;  // throws std::runtime_error naming the offending field

  bool operator==(const TomographyInstance&) const = default;
};

// materialize a k x k cost table for the given analytic kind
matrix<double> make_pairwise_table(PairwiseKind kind, double weight, int k);

// one ray per lattice line per requested direction; targets left at 0
std::vector<Ray> build_lattice_rays(int width, int height, unsigned directions);

// per-ray label sums, in ray order
std::vector<long long> project(const TomographyInstance& instance, const Labeling& labeling);

// per-ray |sum - target|
std::vector<long long> check_feasibility(const TomographyInstance& instance, const Labeling& labeling);

double evaluate_energy(const TomographyInstance& instance, const Labeling& labeling);

struct GeneratedInstance {
  TomographyInstance instance;
  Labeling ground_truth;
};

// blob-like multi-valued image from box-blurred noise, rank-thresholded into k equal-mass bins;
// ray targets filled from the ground truth, zero unaries, AbsDiff(1) pairwise
GeneratedInstance generate_random_instance(std::uint64_t seed, int width, int height, int k,
                                           unsigned directions, int smoothing = 1);

void save_instance(const TomographyInstance& instance, const std::string& path);
TomographyInstance load_instance(const std::string& path);

// plain (P2) PGM with maxval k-1
void save_pgm(const Labeling& labeling, int width, int height, int k, const std::string& path);

struct PgmImage {
  int width = 0;
  int height = 0;
  int maxval = 0;
  std::vector<int> values;
};
PgmImage load_pgm(const std::string& path);

}  // namespace dtomo
