#pragma once

#include <cassert>
#include <vector>

namespace chemo {

// Workspace for the Thomas solves so time loops do not allocate.
struct TridiagWorkspace {
  std::vector<double> cp;  // modified upper diagonal
  std::vector<double> dp;  // modified rhs
};

// Solves (a I - r Lap_h) x = rhs with homogeneous Neumann (reflecting)
// boundaries, where Lap_h is the standard three-point Laplacian divided
// by dx^2 already folded into r = dt D / dx^2. Row i:
//   (a + 2r) x_i - r x_{i-1} - r x_{i+1} = rhs_i       (interior)
//   (a +  r) x_0 - r x_1              = rhs_0          (and mirrored at n-1)
// The operator has zero column sums up to the a I part, so sum(x) = sum(rhs)/a
// is preserved exactly in exact arithmetic; Thomas on this diagonally
// dominant system is backward stable.
inline void solve_neumann_system(double a, double r,
                                 const std::vector<double>& rhs,
                                 std::vector<double>& x,
                                 TridiagWorkspace& ws) {
  const int n = static_cast<int>(rhs.size());
  assert(n >= 2);
  x.resize(n);
  if (r == 0.0) {
    for (int i = 0; i < n; ++i) x[i] = rhs[i] / a;
    return;
  }
  ws.cp.resize(n);
  ws.dp.resize(n);

  const double lower = -r;
  const double upper = -r;

  double diag0 = a + r;
  ws.cp[0] = upper / diag0;
  ws.dp[0] = rhs[0] / diag0;
  for (int i = 1; i < n; ++i) {
    const double diag = (i == n - 1) ? a + r : a + 2.0 * r;
    const double m = diag - lower * ws.cp[i - 1];
    ws.cp[i] = upper / m;
    ws.dp[i] = (rhs[i] - lower * ws.dp[i - 1]) / m;
  }
  x[n - 1] = ws.dp[n - 1];
  for (int i = n - 2; i >= 0; --i) x[i] = ws.dp[i] - ws.cp[i] * x[i + 1];
}

}  // namespace chemo
