#include "dtomo/instance.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace dtomo {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error(msg); }

}  // namespace

std::string to_string(RayDirection d) {
  switch (d) {
    case RayDirection::horizontal: return "horizontal";
    case RayDirection::vertical: return "vertical";
    case RayDirection::diag_down: return "diag_down";
    case RayDirection::diag_up: return "diag_up";
    case RayDirection::none: return "none";
  }
  return "none";
}

RayDirection ray_direction_from_string(const std::string& s) {
  if (s == "horizontal") return RayDirection::horizontal;
  if (s == "vertical") return RayDirection::vertical;
  if (s == "diag_down") return RayDirection::diag_down;
  if (s == "diag_up") return RayDirection::diag_up;
  if (s == "none") return RayDirection::none;
  fail("unknown ray direction '" + s + "'");
}

std::string to_string(PairwiseKind k) {
  switch (k) {
    case PairwiseKind::potts: return "potts";
    case PairwiseKind::abs_diff: return "absdiff";
    case PairwiseKind::table: return "table";
  }
  return "table";
}

matrix<double> make_pairwise_table(PairwiseKind kind, double weight, int k) {
  matrix<double> t(k, k, 0.0);
  for (int a = 0; a < k; ++a) {
    for (int b = 0; b < k; ++b) {
      switch (kind) {
        case PairwiseKind::potts: t(a, b) = (a == b) ? 0.0 : weight; break;
        case PairwiseKind::abs_diff: t(a, b) = weight * std::abs(a - b); break;
        case PairwiseKind::table: t(a, b) = 0.0; break;
      }
    }
  }
  return t;
}

TomographyInstance::TomographyInstance(int width_, int height_, int k_, PairwiseKind kind,
                                       double weight)
    : width(width_), height(height_), k(k_), pairwise_kind(kind), pairwise_weight(weight) {
  if (width < 1 || height < 1) fail("width/height must be >= 1");
  if (k < 2) fail("k must be >= 2");
  unary = matrix<double>(num_nodes(), k, 0.0);
  const auto table = make_pairwise_table(kind, weight, k);
  pairwise_tables.assign(num_edges(), table);
}

int TomographyInstance::horizontal_edge_id(int x, int y) const {
  assert(x + 1 < width && y < height);
  return y * (width - 1) + x;
}

int TomographyInstance::vertical_edge_id(int x, int y) const {
  assert(x < width && y + 1 < height);
  return height * (width - 1) + y * width + x;
}

std::pair<int, int> TomographyInstance::edge_endpoints(int e) const {
  const int num_h = height * (width - 1);
  if (e < num_h) {
    const int y = e / (width - 1);
    const int x = e % (width - 1);
    return {node_id(x, y), node_id(x + 1, y)};
  }
  e -= num_h;
  const int y = e / width;
  const int x = e % width;
  return {node_id(x, y), node_id(x, y + 1)};
}

bool TomographyInstance::has_integral_costs() const {
  auto integral = [](double v) {
    return std::isfinite(v) && v == std::floor(v) && std::abs(v) < 9.0e15;
  };
  for (const double v : unary.data())
    if (!integral(v)) return false;
  for (const auto& t : pairwise_tables)
    for (const double v : t.data())
      if (!integral(v)) return false;
  return true;
}

void TomographyInstance::validate() const {
  if (width < 1) fail("field 'width': must be >= 1");
  if (height < 1) fail("field 'height': must be >= 1");
  if (k < 2) fail("field 'k': must be >= 2");
  if (unary.dim1() != static_cast<std::size_t>(num_nodes()) ||
      unary.dim2() != static_cast<std::size_t>(k))
    fail("field 'unary': expected " + std::to_string(num_nodes()) + " x " + std::to_string(k));
  if (pairwise_tables.size() != static_cast<std::size_t>(num_edges()))
    fail("field 'pairwise_tables': expected one table per grid edge");
  for (const double v : unary.data())
    if (!std::isfinite(v)) fail("field 'unary': entries must be finite");
  for (const auto& t : pairwise_tables) {
    if (t.dim1() != static_cast<std::size_t>(k) || t.dim2() != static_cast<std::size_t>(k))
      fail("field 'pairwise_tables': table must be k x k");
    for (const double v : t.data())
      if (!std::isfinite(v)) fail("field 'pairwise_tables': entries must be finite");
  }
  for (std::size_t r = 0; r < rays.size(); ++r) {
    const auto& ray = rays[r];
    if (ray.nodes.empty()) fail("field 'rays[" + std::to_string(r) + "].nodes': empty");
    std::vector<int> sorted = ray.nodes;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      fail("field 'rays[" + std::to_string(r) + "].nodes': duplicate node");
    for (const int u : ray.nodes)
      if (u < 0 || u >= num_nodes())
        fail("field 'rays[" + std::to_string(r) + "].nodes': node " + std::to_string(u) +
             " outside grid");
    if (ray.target < 0) fail("field 'rays[" + std::to_string(r) + "].target': negative");
  }
}

std::vector<Ray> build_lattice_rays(int width, int height, unsigned directions) {
  assert(width >= 1 && height >= 1 && directions != 0);
  std::vector<Ray> rays;
  auto id = [&](int x, int y) { return y * width + x; };

  if (directions & dir_horizontal) {
    for (int y = 0; y < height; ++y) {
      Ray r;
      r.direction = RayDirection::horizontal;
      for (int x = 0; x < width; ++x) r.nodes.push_back(id(x, y));
      rays.push_back(std::move(r));
    }
  }
  if (directions & dir_vertical) {
    for (int x = 0; x < width; ++x) {
      Ray r;
      r.direction = RayDirection::vertical;
      for (int y = 0; y < height; ++y) r.nodes.push_back(id(x, y));
      rays.push_back(std::move(r));
    }
  }
  if (directions & dir_diag_down) {
    // lines x - y = c, traversed in (+1,+1) steps
    for (int c = -(height - 1); c <= width - 1; ++c) {
      Ray r;
      r.direction = RayDirection::diag_down;
      int x = std::max(c, 0);
      int y = std::max(-c, 0);
      for (; x < width && y < height; ++x, ++y) r.nodes.push_back(id(x, y));
      rays.push_back(std::move(r));
    }
  }
  if (directions & dir_diag_up) {
    // lines x + y = c, traversed in (+1,-1) steps
    for (int c = 0; c <= width + height - 2; ++c) {
      Ray r;
      r.direction = RayDirection::diag_up;
      int x = std::max(0, c - (height - 1));
      int y = c - x;
      for (; x < width && y >= 0; ++x, --y) r.nodes.push_back(id(x, y));
      rays.push_back(std::move(r));
    }
  }
  return rays;
}

std::vector<long long> project(const TomographyInstance& instance, const Labeling& labeling) {
  assert(labeling.values.size() == static_cast<std::size_t>(instance.num_nodes()));
  std::vector<long long> sums;
  sums.reserve(instance.rays.size());
  for (const auto& ray : instance.rays) {
    long long s = 0;
    for (const int u : ray.nodes) s += labeling.values[u];
    sums.push_back(s);
  }
  return sums;
}

std::vector<long long> check_feasibility(const TomographyInstance& instance,
                                         const Labeling& labeling) {
  auto sums = project(instance, labeling);
  for (std::size_t i = 0; i < sums.size(); ++i)
    sums[i] = std::llabs(sums[i] - instance.rays[i].target);
  return sums;
}

double evaluate_energy(const TomographyInstance& instance, const Labeling& labeling) {
  assert(labeling.values.size() == static_cast<std::size_t>(instance.num_nodes()));
  double energy = 0.0;
  for (int u = 0; u < instance.num_nodes(); ++u) energy += instance.unary(u, labeling.values[u]);
  for (int e = 0; e < instance.num_edges(); ++e) {
    const auto [u, v] = instance.edge_endpoints(e);
    energy += instance.pairwise_tables[e](labeling.values[u], labeling.values[v]);
  }
  return energy;
}

namespace {

// uniform doubles in [0,1) from the raw generator stream; avoids
// std::uniform_real_distribution so the byte-identical-output guarantee
// does not depend on the standard library implementation
double next_uniform(std::mt19937_64& rng) { return (rng() >> 11) * 0x1.0p-53; }

}  // namespace

GeneratedInstance generate_random_instance(std::uint64_t seed, int width, int height, int k,
                                           unsigned directions, int smoothing) {
  assert(k >= 2);
  assert(smoothing >= 0);
  const int n = width * height;

  std::mt19937_64 rng(seed);
  std::vector<double> noise(n);
  for (double& v : noise) v = next_uniform(rng);

  // box blur with clamped window
  std::vector<double> blurred(n, 0.0);
  const int r = smoothing;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      double sum = 0.0;
      int count = 0;
      for (int dy = -r; dy <= r; ++dy) {
        for (int dx = -r; dx <= r; ++dx) {
          const int xx = x + dx, yy = y + dy;
          if (xx < 0 || xx >= width || yy < 0 || yy >= height) continue;
          sum += noise[yy * width + xx];
          ++count;
        }
      }
      blurred[y * width + x] = sum / count;
    }
  }

  // rank-threshold into k equal-mass bins, ties broken by pixel index
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (blurred[a] != blurred[b]) return blurred[a] < blurred[b];
    return a < b;
  });
  Labeling ground_truth;
  ground_truth.values.assign(n, 0);
  for (int rank = 0; rank < n; ++rank)
    ground_truth.values[order[rank]] = static_cast<int>((static_cast<long long>(rank) * k) / n);

  TomographyInstance instance(width, height, k, PairwiseKind::abs_diff, 1.0);
  instance.rays = build_lattice_rays(width, height, directions);
  const auto sums = project(instance, ground_truth);
  for (std::size_t i = 0; i < sums.size(); ++i) instance.rays[i].target = sums[i];

  instance.metadata["generator"] = "box-blur-threshold";
  instance.metadata["seed"] = std::to_string(seed);
  instance.metadata["smoothing"] = std::to_string(smoothing);

  return {std::move(instance), std::move(ground_truth)};
}

namespace {

using nlohmann::json;

json instance_to_json(const TomographyInstance& instance) {
  json j;
  j["format"] = "dtomo-instance";
  j["version"] = 1;
  j["width"] = instance.width;
  j["height"] = instance.height;
  j["k"] = instance.k;
  j["pairwise"] = {{"kind", to_string(instance.pairwise_kind)},
                   {"weight", instance.pairwise_weight}};
  const bool zero_unary =
      std::all_of(instance.unary.data().begin(), instance.unary.data().end(),
                  [](double v) { return v == 0.0; });
  if (!zero_unary) {
    json u = json::array();
    for (int v = 0; v < instance.num_nodes(); ++v)
      u.push_back(std::vector<double>(instance.unary.row(v), instance.unary.row(v) + instance.k));
    j["unary"] = std::move(u);
  }
  if (instance.pairwise_kind == PairwiseKind::table) {
    json tables = json::array();
    for (const auto& t : instance.pairwise_tables) tables.push_back(t.data());
    j["pairwise_tables"] = std::move(tables);
  }
  json rays = json::array();
  for (const auto& ray : instance.rays) {
    rays.push_back({{"nodes", ray.nodes},
                    {"target", ray.target},
                    {"direction", to_string(ray.direction)}});
  }
  j["rays"] = std::move(rays);
  if (!instance.metadata.empty()) j["metadata"] = instance.metadata;
  return j;
}

template <typename T>
T get_field(const json& j, const std::string& key) {
  if (!j.contains(key)) fail("missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    fail("field '" + key + "': wrong type");
  }
}

TomographyInstance instance_from_json(const json& j) {
  const int width = get_field<int>(j, "width");
  const int height = get_field<int>(j, "height");
  const int k = get_field<int>(j, "k");
  if (width < 1) fail("field 'width': must be >= 1");
  if (height < 1) fail("field 'height': must be >= 1");
  if (k < 2) fail("field 'k': must be >= 2");

  const json pw = get_field<json>(j, "pairwise");
  const std::string kind_str = get_field<std::string>(pw, "kind");
  PairwiseKind kind;
  if (kind_str == "potts") kind = PairwiseKind::potts;
  else if (kind_str == "absdiff") kind = PairwiseKind::abs_diff;
  else if (kind_str == "table") kind = PairwiseKind::table;
  else fail("field 'pairwise.kind': unknown kind '" + kind_str + "'");
  const double weight = pw.contains("weight") ? get_field<double>(pw, "weight") : 1.0;

  TomographyInstance instance(width, height, k, kind, weight);

  if (j.contains("unary")) {
    const auto u = get_field<std::vector<std::vector<double>>>(j, "unary");
    if (u.size() != static_cast<std::size_t>(instance.num_nodes()))
      fail("field 'unary': expected " + std::to_string(instance.num_nodes()) + " rows");
    for (int v = 0; v < instance.num_nodes(); ++v) {
      if (u[v].size() != static_cast<std::size_t>(k))
        fail("field 'unary': row " + std::to_string(v) + " must have k entries");
      for (int x = 0; x < k; ++x) instance.unary(v, x) = u[v][x];
    }
  }
  if (kind == PairwiseKind::table) {
    const auto tables = get_field<std::vector<std::vector<double>>>(j, "pairwise_tables");
    if (tables.size() != static_cast<std::size_t>(instance.num_edges()))
      fail("field 'pairwise_tables': expected one table per grid edge");
    for (int e = 0; e < instance.num_edges(); ++e) {
      if (tables[e].size() != static_cast<std::size_t>(k) * k)
        fail("field 'pairwise_tables': table " + std::to_string(e) + " must have k*k entries");
      instance.pairwise_tables[e].data() = tables[e];
    }
  }
  if (j.contains("rays")) {
    for (const auto& rj : j.at("rays")) {
      Ray ray;
      ray.nodes = get_field<std::vector<int>>(rj, "nodes");
      ray.target = get_field<long long>(rj, "target");
      ray.direction = ray_direction_from_string(get_field<std::string>(rj, "direction"));
      instance.rays.push_back(std::move(ray));
    }
  }
  if (j.contains("metadata"))
    instance.metadata = get_field<std::map<std::string, std::string>>(j, "metadata");

  instance.validate();
  return instance;
}

}  // namespace

void save_instance(const TomographyInstance& instance, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail("cannot open '" + path + "' for writing");
  out << instance_to_json(instance).dump(2) << "\n";
  if (!out) fail("write to '" + path + "' failed");
}

TomographyInstance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    fail("parse error in '" + path + "': " + e.what());
  }
  return instance_from_json(j);
}

void save_pgm(const Labeling& labeling, int width, int height, int k, const std::string& path) {
  assert(labeling.values.size() == static_cast<std::size_t>(width) * height);
  std::ofstream out(path);
  if (!out) fail("cannot open '" + path + "' for writing");
  out << "P2\n" << width << " " << height << "\n" << (k - 1) << "\n";
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      out << labeling.values[y * width + x];
      out << (x + 1 == width ? '\n' : ' ');
    }
  }
  if (!out) fail("write to '" + path + "' failed");
}

PgmImage load_pgm(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open '" + path + "'");
  std::string magic;
  in >> magic;
  if (magic != "P2") fail("'" + path + "': expected plain PGM (P2)");
  auto next_token = [&]() -> long long {
    std::string tok;
    while (in >> tok) {
      if (tok[0] == '#') {
        std::string rest;
        std::getline(in, rest);
        continue;
      }
      try {
        return std::stoll(tok);
      } catch (...) {
        fail("'" + path + "': malformed integer '" + tok + "'");
      }
    }
    fail("'" + path + "': unexpected end of file");
  };
  PgmImage img;
  img.width = static_cast<int>(next_token());
  img.height = static_cast<int>(next_token());
  img.maxval = static_cast<int>(next_token());
  if (img.width < 1 || img.height < 1) fail("'" + path + "': bad dimensions");
  img.values.resize(static_cast<std::size_t>(img.width) * img.height);
  for (auto& v : img.values) {
    v = static_cast<int>(next_token());
    if (v < 0 || v > img.maxval) fail("'" + path + "': pixel out of range");
  }
  return img;
}

}  // namespace dtomo
