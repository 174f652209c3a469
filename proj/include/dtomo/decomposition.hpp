#pragma once

#include <vector>

#include "dtomo/chain.hpp"
#include "dtomo/instance.hpp"

namespace dtomo {

struct NodeMembership {
  int subproblem;  // index into Decomposition::subproblems
  int position;    // chain position of the node inside that subproblem
};

// chain decomposition of the lattice energy: one targeted chain per ray, plus
// energy-only row/column chains covering grid edges no ray owns; every unary
// and every grid edge is assigned to exactly one subproblem
struct Decomposition {
  std::vector<ChainSubproblem> subproblems;
  int num_targeted = 0;  // ray chains form a prefix of subproblems
  std::vector<std::vector<NodeMembership>> node_membership;  // per node, ascending subproblem
  std::vector<int> edge_owner;  // canonical edge id -> owning subproblem, -1 if none

  int num_shared_nodes() const;
};

Decomposition decompose(const TomographyInstance& inst);

// sum of subproblem energies at a common labeling; equals the instance energy
// when the duals are zero
double decomposition_energy(const Decomposition& dec, const Labeling& labeling);

}  // namespace dtomo
