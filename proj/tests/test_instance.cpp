#include <cstdio>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "dtomo/instance.hpp"
#include "test_util.hpp"

using namespace dtomo;

namespace {

std::string tmp_path(const std::string& name) { return "dtomo_test_" + name; }

bool throws_mentioning(const std::function<void()>& fn, const std::string& needle) {
  try {
    fn();
  } catch (const std::runtime_error& e) {
    return std::string(e.what()).find(needle) != std::string::npos;
  }
  return false;
}

}  // namespace

TEST_SUITE("instance") {

TEST_CASE("pairwise tables for analytic kinds") {
  const matrix<double> potts = make_pairwise_table(PairwiseKind::potts, 2.0, 3);
  const matrix<double> absd = make_pairwise_table(PairwiseKind::abs_diff, 1.5, 3);
  for (int x = 0; x < 3; ++x)
    for (int y = 0; y < 3; ++y) {
      CHECK(potts(x, y) == (x == y ? 0.0 : 2.0));
      CHECK(absd(x, y) == 1.5 * std::abs(x - y));
    }
}

TEST_CASE("canonical edge enumeration on a 3x2 grid") {
  TomographyInstance inst(3, 2, 2, PairwiseKind::potts, 1.0);
  CHECK(inst.num_edges() == 7);
  // horizontal edges first, row-major
  CHECK(inst.edge_endpoints(0) == std::pair<int, int>{0, 1});
  CHECK(inst.edge_endpoints(1) == std::pair<int, int>{1, 2});
  CHECK(inst.edge_endpoints(2) == std::pair<int, int>{3, 4});
  CHECK(inst.edge_endpoints(3) == std::pair<int, int>{4, 5});
  // then vertical edges
  CHECK(inst.edge_endpoints(4) == std::pair<int, int>{0, 3});
  CHECK(inst.edge_endpoints(6) == std::pair<int, int>{2, 5});
  for (int e = 0; e < inst.num_edges(); ++e) {
    const auto [u, v] = inst.edge_endpoints(e);
    if (inst.node_y(u) == inst.node_y(v))
      CHECK(inst.horizontal_edge_id(inst.node_x(u), inst.node_y(u)) == e);
    else
      CHECK(inst.vertical_edge_id(inst.node_x(u), inst.node_y(u)) == e);
  }
}

TEST_CASE("lattice rays: 4x4 h+v gives eight rays") {
  const auto rays = build_lattice_rays(4, 4, dir_horizontal | dir_vertical);
  REQUIRE(rays.size() == 8);
  for (int y = 0; y < 4; ++y) {
    CHECK(rays[y].direction == RayDirection::horizontal);
    REQUIRE(rays[y].nodes.size() == 4);
    for (int x = 0; x < 4; ++x) CHECK(rays[y].nodes[x] == y * 4 + x);
  }
  for (int x = 0; x < 4; ++x) {
    CHECK(rays[4 + x].direction == RayDirection::vertical);
    REQUIRE(rays[4 + x].nodes.size() == 4);
    for (int y = 0; y < 4; ++y) CHECK(rays[4 + x].nodes[y] == y * 4 + x);
  }
}

TEST_CASE("lattice rays: 3x3 diagonals have lengths 1,2,3,2,1") {
  TomographyInstance inst(3, 3, 2, PairwiseKind::potts, 1.0);
  for (const unsigned dir : {dir_diag_down, dir_diag_up}) {
    const auto rays = build_lattice_rays(3, 3, dir);
    REQUIRE(rays.size() == 5);
    std::vector<int> lengths;
    for (const auto& ray : rays) lengths.push_back(static_cast<int>(ray.nodes.size()));
    CHECK(lengths == std::vector<int>{1, 2, 3, 2, 1});
    for (const auto& ray : rays) {
      // all nodes on one lattice line, walked in ascending x
      const int c0 = dir == dir_diag_down ? inst.node_x(ray.nodes[0]) - inst.node_y(ray.nodes[0])
                                          : inst.node_x(ray.nodes[0]) + inst.node_y(ray.nodes[0]);
      for (size_t i = 0; i < ray.nodes.size(); ++i) {
        const int u = ray.nodes[i];
        const int c = dir == dir_diag_down ? inst.node_x(u) - inst.node_y(u)
                                           : inst.node_x(u) + inst.node_y(u);
        CHECK(c == c0);
        if (i > 0) CHECK(inst.node_x(u) == inst.node_x(ray.nodes[i - 1]) + 1);
      }
    }
  }
}

TEST_CASE("energy, projections, feasibility on a hand-checked 2x2") {
  TomographyInstance inst(2, 2, 3, PairwiseKind::abs_diff, 1.0);
  for (int u = 0; u < 4; ++u)
    for (int x = 0; x < 3; ++x) inst.unary(u, x) = u + x;
  inst.rays = build_lattice_rays(2, 2, dir_horizontal | dir_vertical);
  for (auto& ray : inst.rays) ray.target = 2;

  const Labeling lab{{0, 2, 1, 1}};
  // unary: 0 + (1+2) + (2+1) + (3+1) = 10; edges (0,1),(2,3),(0,2),(1,3): 2+0+1+1 = 4
  CHECK(evaluate_energy(inst, lab) == 14.0);
  CHECK(project(inst, lab) == std::vector<long long>{2, 2, 1, 3});
  CHECK(check_feasibility(inst, lab) == std::vector<long long>{0, 0, 1, 1});

  const Labeling good{{0, 2, 2, 0}};
  CHECK(check_feasibility(inst, good) == std::vector<long long>(4, 0));
}

TEST_CASE("generator is deterministic and its ground truth is feasible") {
  const GeneratedInstance a = generate_random_instance(42, 6, 5, 3, dir_horizontal | dir_vertical);
  const GeneratedInstance b = generate_random_instance(42, 6, 5, 3, dir_horizontal | dir_vertical);
  CHECK(a.instance == b.instance);
  CHECK(a.ground_truth == b.ground_truth);

  const GeneratedInstance c = generate_random_instance(43, 6, 5, 3, dir_horizontal | dir_vertical);
  CHECK(a.instance != c.instance);

  REQUIRE(a.ground_truth.values.size() == 30);
  for (const int x : a.ground_truth.values) {
    CHECK(x >= 0);
    CHECK(x < 3);
  }
  const auto residuals = check_feasibility(a.instance, a.ground_truth);
  for (const long long r : residuals) CHECK(r == 0);
  CHECK(a.instance.metadata.at("seed") == "42");
  CHECK(a.instance.has_integral_costs());

  // every label occurs: the rank threshold splits mass into k bins
  std::vector<int> counts(3, 0);
  for (const int x : a.ground_truth.values) ++counts[x];
  for (const int c2 : counts) CHECK(c2 > 0);
}

TEST_CASE("generator covers diagonal directions") {
  const GeneratedInstance g = generate_random_instance(
      7, 4, 4, 3, dir_horizontal | dir_vertical | dir_diag_down | dir_diag_up);
  CHECK(g.instance.rays.size() == 4 + 4 + 7 + 7);
  for (const long long r : check_feasibility(g.instance, g.ground_truth)) CHECK(r == 0);
}

TEST_CASE("json round trip preserves the instance exactly") {
  std::mt19937_64 rng(11);
  TomographyInstance inst = dtomo_test::random_small_instance(rng, 3, 2, 3, dir_horizontal | dir_vertical);
  inst.metadata["note"] = "round trip";
  const std::string path = tmp_path("roundtrip.json");
  save_instance(inst, path);
  const TomographyInstance back = load_instance(path);
  CHECK(inst == back);
  std::remove(path.c_str());
}

TEST_CASE("json round trip with zero unaries and table pairwise") {
  TomographyInstance inst(2, 2, 2, PairwiseKind::table, 1.0);
  int v = 0;
  for (auto& table : inst.pairwise_tables)
    for (int x = 0; x < 2; ++x)
      for (int y = 0; y < 2; ++y) table(x, y) = (v++ % 5) * 0.5;
  inst.rays = build_lattice_rays(2, 2, dir_horizontal);
  const std::string path = tmp_path("table.json");
  save_instance(inst, path);
  CHECK(load_instance(path) == inst);
  std::remove(path.c_str());
}

TEST_CASE("validation names the offending field") {
  TomographyInstance base(2, 2, 2, PairwiseKind::potts, 1.0);
  base.rays = build_lattice_rays(2, 2, dir_horizontal | dir_vertical);
  base.validate();

  CHECK(throws_mentioning(
      [&] {
        TomographyInstance bad = base;
        bad.k = 1;
        bad.validate();
      },
      "'k'"));
  CHECK(throws_mentioning(
      [&] {
        TomographyInstance bad = base;
        bad.unary(0, 0) = dtomo_test::inf;
        bad.validate();
      },
      "'unary'"));
  CHECK(throws_mentioning(
      [&] {
        TomographyInstance bad = base;
        bad.rays[1].nodes.push_back(99);
        bad.validate();
      },
      "rays[1]"));
  CHECK(throws_mentioning(
      [&] {
        TomographyInstance bad = base;
        bad.rays[0].target = -1;
        bad.validate();
      },
      "target"));
  CHECK(throws_mentioning(
      [&] {
        TomographyInstance bad = base;
        bad.pairwise_tables.pop_back();
        bad.validate();
      },
      "pairwise_tables"));
}

TEST_CASE("loading malformed json reports the missing field") {
  const std::string path = tmp_path("broken.json");
  {
    std::FILE* f = std::fopen(path.c_str(), "w");
    REQUIRE(f != nullptr);
    std::fputs("{\"format\": \"dtomo-instance\", \"version\": 1, \"width\": 2}", f);
    std::fclose(f);
  }
  CHECK(throws_mentioning([&] { (void)load_instance(path); }, "missing field 'height'"));
  std::remove(path.c_str());
}

TEST_CASE("pgm round trip") {
  const Labeling lab{{0, 2, 1, 1, 0, 2}};
  const std::string path = tmp_path("img.pgm");
  save_pgm(lab, 3, 2, 3, path);
  const PgmImage img = load_pgm(path);
  CHECK(img.width == 3);
  CHECK(img.height == 2);
  CHECK(img.maxval == 2);
  CHECK(img.values == lab.values);
  std::remove(path.c_str());
}

TEST_CASE("integral cost detection") {
  TomographyInstance inst(2, 1, 2, PairwiseKind::potts, 1.0);
  inst.rays = build_lattice_rays(2, 1, dir_horizontal);
  CHECK(inst.has_integral_costs());
  inst.unary(0, 1) = 0.5;
  CHECK(!inst.has_integral_costs());
}

}  // TEST_SUITE
