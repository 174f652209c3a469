#include "dtomo/decomposition.hpp"

#include <cassert>

namespace dtomo {

namespace {

// canonical edge id when (u, v) are 4-neighbors, -1 otherwise
int grid_edge_id(const TomographyInstance& inst, int u, int v) {
  const int ux = inst.node_x(u), uy = inst.node_y(u);
  const int vx = inst.node_x(v), vy = inst.node_y(v);
  if (uy == vy && std::abs(ux - vx) == 1) return inst.horizontal_edge_id(std::min(ux, vx), uy);
  if (ux == vx && std::abs(uy - vy) == 1) return inst.vertical_edge_id(ux, std::min(uy, vy));
  return -1;
}

ChainSubproblem make_subproblem(const TomographyInstance& inst, std::vector<int> nodes,
                                std::vector<int>& edge_owner, int sub_id) {
  const int k = inst.k;
  ChainSubproblem sub;
  sub.node_ids = std::move(nodes);
  const int n = static_cast<int>(sub.node_ids.size());
  sub.unary = matrix<double>(n, k, 0.0);
  sub.pairwise.reserve(n - 1);
  for (int i = 0; i + 1 < n; ++i) {
    const int e = grid_edge_id(inst, sub.node_ids[i], sub.node_ids[i + 1]);
    if (e >= 0 && edge_owner[e] < 0) {
      edge_owner[e] = sub_id;
      sub.pairwise.push_back(inst.edge_cost(e));
    } else {
      sub.pairwise.push_back(matrix<double>(k, k, 0.0));
    }
  }
  return sub;
}

}  // namespace

int Decomposition::num_shared_nodes() const {
  int count = 0;
  for (const auto& m : node_membership)
    if (m.size() >= 2) ++count;
  return count;
}

Decomposition decompose(const TomographyInstance& inst) {
  Decomposition dec;
  dec.edge_owner.assign(inst.num_edges(), -1);
  dec.node_membership.resize(inst.num_nodes());

  for (const auto& ray : inst.rays) {
    const int sub_id = static_cast<int>(dec.subproblems.size());
    auto sub = make_subproblem(inst, ray.nodes, dec.edge_owner, sub_id);
    sub.target = ray.target;
    dec.subproblems.push_back(std::move(sub));
  }
  dec.num_targeted = static_cast<int>(dec.subproblems.size());

  // energy-only chains pick up grid edges no ray traverses
  for (int y = 0; y < inst.height; ++y) {
    bool uncovered = false;
    for (int x = 0; x + 1 < inst.width; ++x)
      uncovered |= dec.edge_owner[inst.horizontal_edge_id(x, y)] < 0;
    if (!uncovered) continue;
    std::vector<int> nodes(inst.width);
    for (int x = 0; x < inst.width; ++x) nodes[x] = inst.node_id(x, y);
    const int sub_id = static_cast<int>(dec.subproblems.size());
    dec.subproblems.push_back(make_subproblem(inst, std::move(nodes), dec.edge_owner, sub_id));
  }
  for (int x = 0; x < inst.width; ++x) {
    bool uncovered = false;
    for (int y = 0; y + 1 < inst.height; ++y)
      uncovered |= dec.edge_owner[inst.vertical_edge_id(x, y)] < 0;
    if (!uncovered) continue;
    std::vector<int> nodes(inst.height);
    for (int y = 0; y < inst.height; ++y) nodes[y] = inst.node_id(x, y);
    const int sub_id = static_cast<int>(dec.subproblems.size());
    dec.subproblems.push_back(make_subproblem(inst, std::move(nodes), dec.edge_owner, sub_id));
  }

  for (int s = 0; s < static_cast<int>(dec.subproblems.size()); ++s) {
    const auto& sub = dec.subproblems[s];
    for (int pos = 0; pos < sub.num_nodes(); ++pos)
      dec.node_membership[sub.node_ids[pos]].push_back({s, pos});
  }

  // nodes no ray or cover chain touches become singleton subproblems
  for (int u = 0; u < inst.num_nodes(); ++u) {
    if (!dec.node_membership[u].empty()) continue;
    const int sub_id = static_cast<int>(dec.subproblems.size());
    dec.subproblems.push_back(make_subproblem(inst, {u}, dec.edge_owner, sub_id));
    dec.node_membership[u].push_back({sub_id, 0});
  }

  for (int e = 0; e < inst.num_edges(); ++e) assert(dec.edge_owner[e] >= 0);

  // each unary goes to the lowest-indexed subproblem containing its node
  for (int u = 0; u < inst.num_nodes(); ++u) {
    const auto& owner = dec.node_membership[u].front();
    auto& sub = dec.subproblems[owner.subproblem];
    for (int x = 0; x < inst.k; ++x) sub.unary(owner.position, x) = inst.unary(u, x);
  }

  return dec;
}

double decomposition_energy(const Decomposition& dec, const Labeling& labeling) {
  double total = 0.0;
  for (const auto& sub : dec.subproblems) {
    for (int i = 0; i < sub.num_nodes(); ++i) {
      total += sub.unary(i, labeling.values[sub.node_ids[i]]);
      if (i + 1 < sub.num_nodes()) {
        total += sub.pairwise[i](labeling.values[sub.node_ids[i]],
                                 labeling.values[sub.node_ids[i + 1]]);
      }
    }
  }
  return total;
}

}  // namespace dtomo
