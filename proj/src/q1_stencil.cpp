#include "q1_stencil.hpp"

#include <cmath>
#include <string>

#include "poroscale/errors.hpp"
#include "poroscale/parallel.hpp"

namespace poroscale::q1 {

namespace {

void basis_grads(double xi, double eta, double hx, double hy, Vec2 grad[4]) {
  const double gx = 2.0 / hx, gy = 2.0 / hy;
  grad[0] = {-0.25 * (1.0 - eta) * gx, -0.25 * (1.0 - xi) * gy};
  grad[1] = {0.25 * (1.0 - eta) * gx, -0.25 * (1.0 + xi) * gy};
  grad[2] = {0.25 * (1.0 + eta) * gx, 0.25 * (1.0 + xi) * gy};
  grad[3] = {-0.25 * (1.0 + eta) * gx, 0.25 * (1.0 - xi) * gy};
}

}  // namespace

std::vector<Stencil> stiffness(const MacroGrid& g, const std::vector<Mat2>& tensor) {
  std::vector<Stencil> A(static_cast<std::size_t>(g.nodes()), Stencil{});
  const double hx = g.hx(), hy = g.hy();
  const double gp = 1.0 / std::sqrt(3.0);
  const double jac = 0.25 * hx * hy;

  for (int cj = 0; cj < g.ny; ++cj)
    for (int ci = 0; ci < g.nx; ++ci) {
      const Mat2& T = tensor[static_cast<std::size_t>(g.cell_index(ci, cj))];
      double Ke[4][4] = {};
      for (int qa = 0; qa < 2; ++qa)
        for (int qb = 0; qb < 2; ++qb) {
          Vec2 grad[4];
          basis_grads(qa ? gp : -gp, qb ? gp : -gp, hx, hy, grad);
          for (int a = 0; a < 4; ++a) {
            const Vec2 tg = T * grad[a];
            for (int b = 0; b < 4; ++b) Ke[a][b] += jac * dot(tg, grad[b]);
          }
        }

      const int ni[4] = {ci, ci + 1, ci + 1, ci};
      const int nj[4] = {cj, cj, cj + 1, cj + 1};
      for (int a = 0; a < 4; ++a) {
        Stencil& row = A[static_cast<std::size_t>(g.node_index(ni[a], nj[a]))];
        for (int b = 0; b < 4; ++b) {
          const int di = ni[b] - ni[a], dj = nj[b] - nj[a];
          row[static_cast<std::size_t>((dj + 1) * 3 + (di + 1))] += Ke[a][b];
        }
      }
    }
  return A;
}

void apply(const MacroGrid& g, const std::vector<Stencil>& A, const std::vector<double>& x,
           std::vector<double>& y) {
  const int mx = g.nodes_x(), my = g.nodes_y();
  par_for(static_cast<std::ptrdiff_t>(g.nodes()), [&](std::ptrdiff_t k) {
    const int i = static_cast<int>(k) % mx, j = static_cast<int>(k) / mx;
    const Stencil& row = A[static_cast<std::size_t>(k)];
    double acc = 0.0;
    for (int dj = -1; dj <= 1; ++dj)
      for (int di = -1; di <= 1; ++di) {
        const double c = row[static_cast<std::size_t>((dj + 1) * 3 + (di + 1))];
        if (c == 0.0) continue;
        const int ii = i + di, jj = j + dj;
        if (ii < 0 || jj < 0 || ii >= mx || jj >= my) continue;
        acc += c * x[static_cast<std::size_t>(jj * mx + ii)];
      }
    y[static_cast<std::size_t>(k)] = acc;
  });
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  return par_sum(static_cast<std::ptrdiff_t>(a.size()),
                 [&](std::ptrdiff_t i) { return a[static_cast<std::size_t>(i)] * b[static_cast<std::size_t>(i)]; });
}

void tag_dirichlet(const MacroGrid& g, const std::array<double, 4>& per_edge, std::vector<char>& mask,
                   std::vector<double>& value) {
  mask.assign(static_cast<std::size_t>(g.nodes()), 0);
  value.assign(static_cast<std::size_t>(g.nodes()), 0.0);
  const auto tag_edge = [&](int edge, int count, auto node_at) {
    if (g.boundary[static_cast<std::size_t>(edge)] != EdgeKind::dirichlet) return;
    for (int s = 0; s <= count; ++s) {
      const std::size_t k = static_cast<std::size_t>(node_at(s));
      mask[k] = 1;
      value[k] = per_edge[static_cast<std::size_t>(edge)];
    }
  };
  tag_edge(0, g.ny, [&](int s) { return g.node_index(0, s); });
  tag_edge(1, g.ny, [&](int s) { return g.node_index(g.nx, s); });
  tag_edge(2, g.nx, [&](int s) { return g.node_index(s, 0); });
  tag_edge(3, g.nx, [&](int s) { return g.node_index(s, g.ny); });
}

void eliminate_dirichlet(const MacroGrid& g, std::vector<Stencil>& A, std::vector<double>& b,
                         const std::vector<char>& mask, const std::vector<double>& value) {
  const int mx = g.nodes_x(), my = g.nodes_y();
  for (int node = 0; node < g.nodes(); ++node) {
    if (!mask[static_cast<std::size_t>(node)]) continue;
    const double val = value[static_cast<std::size_t>(node)];
    b[static_cast<std::size_t>(node)] = val;
    A[static_cast<std::size_t>(node)] = Stencil{};
    A[static_cast<std::size_t>(node)][4] = 1.0;
    const int i = node % mx, j = node / mx;
    for (int dj = -1; dj <= 1; ++dj)
      for (int di = -1; di <= 1; ++di) {
        if (di == 0 && dj == 0) continue;
        const int ii = i + di, jj = j + dj;
        if (ii < 0 || jj < 0 || ii >= mx || jj >= my) continue;
        const std::size_t nb = static_cast<std::size_t>(jj * mx + ii);
        if (mask[nb]) continue;
        double& coef = A[nb][static_cast<std::size_t>((-dj + 1) * 3 + (-di + 1))];
        if (coef != 0.0) {
          b[nb] -= coef * val;
          coef = 0.0;
        }
      }
  }
}

CgResult jacobi_cg(const MacroGrid& g, const std::vector<Stencil>& A, const std::vector<double>& b,
                   std::vector<double>& x, double tol, int max_iter, const char* what) {
  const std::size_t n = static_cast<std::size_t>(g.nodes());
  std::vector<double> r(n), z(n), q(n), Aq(n);

  std::vector<double> inv_diag(n);
  for (std::size_t k = 0; k < n; ++k) inv_diag[k] = 1.0 / A[k][4];

  apply(g, A, x, Aq);
  for (std::size_t k = 0; k < n; ++k) r[k] = b[k] - Aq[k];
  const double bnorm = std::sqrt(dot(b, b));
  const double stop = tol * (bnorm > 0.0 ? bnorm : 1.0);
  const int cap = max_iter > 0 ? max_iter : 60 * (g.nx + g.ny) + 2000;

  double rnorm = std::sqrt(dot(r, r));
  double rz = 0.0;
  int it = 0;
  while (rnorm > stop) {
    if (it >= cap)
      throw SolverError(what, "no convergence in " + std::to_string(cap) + " iterations, residual " +
                                  std::to_string(rnorm / (bnorm > 0.0 ? bnorm : 1.0)));
    for (std::size_t k = 0; k < n; ++k) z[k] = inv_diag[k] * r[k];
    const double rz_new = dot(r, z);
    if (it == 0)
      q = z;
    else {
      const double beta = rz_new / rz;
      for (std::size_t k = 0; k < n; ++k) q[k] = z[k] + beta * q[k];
    }
    rz = rz_new;
    apply(g, A, q, Aq);
    const double qAq = dot(q, Aq);
    if (!(qAq > 0.0)) throw SolverError(what, "lost definiteness, qAq = " + std::to_string(qAq));
    const double alpha = rz / qAq;
    for (std::size_t k = 0; k < n; ++k) {
      x[k] += alpha * q[k];
      r[k] -= alpha * Aq[k];
    }
    rnorm = std::sqrt(dot(r, r));
    ++it;
  }
  return {it, rnorm / (bnorm > 0.0 ? bnorm : 1.0)};
}

}  // namespace poroscale::q1
