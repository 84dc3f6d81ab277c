#pragma once

#include <string>
#include <vector>

namespace chemo {

// Quadrature rule on the velocity interval [-1, 1]. The node set is
// symmetric (v and -v both present) and the weights sum to 2, the measure
// of the interval. The same rule doubles as the discrete velocity grid of
// the kinetic solver, so moments stay consistent between modules.
struct Quadrature {
  std::vector<double> nodes;
  std::vector<double> weights;

  int size() const { return static_cast<int>(nodes.size()); }

  // Index of the node at -v for node j (nodes are sorted ascending).
  int mirror(int j) const { return size() - 1 - j; }

  static Quadrature gauss_legendre(int n);
};

std::vector<std::string> validate(const Quadrature& q);

}  // namespace chemo
