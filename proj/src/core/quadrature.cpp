#include "core/quadrature.hpp"

#include <cmath>
#include <string>

#include "core/errors.hpp"

namespace chemo {

// Newton iteration on the Legendre polynomial, cosine initial guesses.
Quadrature Quadrature::gauss_legendre(int n) {
  if (n < 2) throw InvalidArgument("quadrature needs at least 2 nodes");
  Quadrature q;
  q.nodes.resize(n);
  q.weights.resize(n);

  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      // Recurrence for P_n(x) and P_{n-1}(x).
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    q.nodes[i] = -x;  // ascending order: most negative first
    q.weights[i] = w;
    q.nodes[n - 1 - i] = x;
    q.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) q.nodes[n / 2] = 0.0;  // exact middle node
  return q;
}

std::vector<std::string> validate(const Quadrature& q) {
  std::vector<std::string> out;
  if (q.nodes.size() != q.weights.size())
    out.push_back("quadrature nodes/weights size mismatch");
  double wsum = 0.0;
  for (double w : q.weights) {
    if (!(w > 0.0)) out.push_back("quadrature weights must be positive");
    wsum += w;
  }
  if (std::abs(wsum - 2.0) > 1e-12 * q.nodes.size())
    out.push_back("quadrature weights must sum to 2");
  const int n = static_cast<int>(q.nodes.size());
  for (int j = 0; j < n; ++j) {
    if (std::abs(q.nodes[j] + q.nodes[n - 1 - j]) > 1e-14) {
      out.push_back("quadrature node set must be symmetric");
      break;
    }
  }
  return out;
}

}  // namespace chemo
