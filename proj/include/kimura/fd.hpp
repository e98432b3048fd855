#ifndef KIMURA_FD_HPP
#define KIMURA_FD_HPP

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "kimura/geometry.hpp"

namespace kimura {

// Tensor grid over the global bounding box, graded so that spacing shrinks
// like sqrt(distance) toward both ends of each axis (the Kimura faces sit on
// the axes for the built-in instances).
inline std::vector<double> graded_nodes(int n, double a, double b) {
   if (n < 2) throw std::invalid_argument("graded_nodes: need n >= 2");
   std::vector<double> xs(n + 1);
   for (int i = 0; i <= n; ++i) {
      double s = std::sin(M_PI * i / (2.0 * n));
      xs[i] = a + (b - a) * s * s;
   }
   return xs;
}

inline std::vector<double> uniform_nodes(int n, double a, double b) {
   std::vector<double> xs(n + 1);
   for (int i = 0; i <= n; ++i) xs[i] = a + (b - a) * i / n;
   return xs;
}

struct FDGrid {
   std::vector<double> xs, ys;
   double dt = 1e-3;
   // margin kept from every infinity-type face (the collar cut); degenerate
   // Kimura faces carry their own closure and get no cut
   double collar = 1e-3;
   // Copy: fold cut/outer neighbors into the diagonal (no-flux closure);
   // Dirichlet: treat values beyond the active set as zero
   enum class Closure { Copy, Dirichlet } closure = Closure::Copy;
   // optional override of the active-node predicate
   std::function<bool(Vec2)> active;
};

inline FDGrid make_fd_grid(const OperatorSpec& spec, int n, double dt,
                           double collar = 1e-3) {
   FDGrid g;
   g.xs = graded_nodes(n, spec.bbox.x0, spec.bbox.x1);
   g.ys = graded_nodes(n, spec.bbox.y0, spec.bbox.y1);
   g.dt = dt;
   g.collar = collar;
   return g;
}

// Space-time field on the active nodes of an FDGrid.
struct FDField {
   std::vector<double> xs, ys;
   std::vector<int> index;  // (i,j) -> active unknown or -1
   std::vector<double> times;
   std::vector<Eigen::VectorXd> u;

   int nx() const { return static_cast<int>(xs.size()); }
   int idx(int i, int j) const { return index[static_cast<std::size_t>(j) * xs.size() + i]; }

   double at(std::size_t k, int i, int j) const {
      int a = idx(i, j);
      return a < 0 ? 0.0 : u[k][a];
   }

   // bilinear in space, linear in time; inactive corners excluded from the
   // interpolation weights
   double value(double t, Vec2 p) const {
      auto locate = [](const std::vector<double>& v, double s) {
         int i = static_cast<int>(std::upper_bound(v.begin(), v.end(), s) - v.begin()) - 1;
         return std::clamp(i, 0, static_cast<int>(v.size()) - 2);
      };
      int i = locate(xs, p.x), j = locate(ys, p.y);
      double tx = (p.x - xs[i]) / (xs[i + 1] - xs[i]);
      double ty = (p.y - ys[j]) / (ys[j + 1] - ys[j]);
      std::size_t k = 0;
      while (k + 1 < times.size() && times[k + 1] <= t) ++k;
      double tt = times.size() > k + 1
                     ? (t - times[k]) / (times[k + 1] - times[k])
                     : 0.0;
      tt = std::clamp(tt, 0.0, 1.0);
      auto plane = [&](std::size_t kk) {
         double wsum = 0.0, vsum = 0.0;
         const double w[4] = {(1 - tx) * (1 - ty), tx * (1 - ty), (1 - tx) * ty, tx * ty};
         const int di[4] = {0, 1, 0, 1}, dj[4] = {0, 0, 1, 1};
         for (int c = 0; c < 4; ++c) {
            int a = idx(i + di[c], j + dj[c]);
            if (a < 0) continue;
            wsum += w[c];
            vsum += w[c] * u[kk][a];
         }
         return wsum > 0.0 ? vsum / wsum : 0.0;
      };
      double v0 = plane(k);
      if (tt == 0.0 || k + 1 >= times.size()) return v0;
      return (1 - tt) * v0 + tt * plane(k + 1);
   }
};

namespace detail {

inline bool fd_active(const OperatorSpec& spec, Vec2 p, double collar) {
   for (const Face& f : spec.faces) {
      double s = (p.x - f.p0.x) * f.inward.x + (p.y - f.p0.y) * f.inward.y;
      double need = f.cls == BoundaryClass::InfinityEdge ? collar : -1e-12;
      if (s < need) return false;
   }
   return true;
}

}  // namespace detail

// Implicit-Euler solve of (d/dt - L) u = g, u(0) = f, on the active nodes.
// Spatial operator: nonuniform central second differences, upwind drift, and
// a sign-adapted cross stencil for the mixed term; degenerate faces need no
// boundary condition (the vanishing coefficients close the rows).  Row signs
// are checked so that the step matrix is an M-matrix and the discrete
// maximum principle holds.
inline FDField fd_solve(const OperatorSpec& spec, const FDGrid& grid,
                        const std::function<double(Vec2)>& f,
                        const std::function<double(double, Vec2)>& g, double T) {
   const int nx = static_cast<int>(grid.xs.size());
   const int ny = static_cast<int>(grid.ys.size());
   FDField out;
   out.xs = grid.xs;
   out.ys = grid.ys;
   out.index.assign(static_cast<std::size_t>(nx) * ny, -1);
   std::vector<std::pair<int, int>> nodes;
   for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
         Vec2 p{grid.xs[i], grid.ys[j]};
         bool act = grid.active ? grid.active(p) : detail::fd_active(spec, p, grid.collar);
         if (act) {
            out.index[static_cast<std::size_t>(j) * nx + i] =
               static_cast<int>(nodes.size());
            nodes.push_back({i, j});
         }
      }
   }
   const int n = static_cast<int>(nodes.size());
   if (n == 0) throw std::runtime_error("fd_solve: no active nodes");

   // assemble L; each row is built as a local 3x3 stencil so the mixed-term
   // weights can be limited against the already-placed diffusion/drift
   // weights, keeping every off-diagonal entry nonnegative (M-matrix)
   std::vector<Eigen::Triplet<double>> trips;
   for (int r = 0; r < n; ++r) {
      auto [i, j] = nodes[r];
      Vec2 p{grid.xs[i], grid.ys[j]};
      double A = spec.A(p), B = spec.B(p), C = spec.C(p), D = spec.D(p), E = spec.E(p);
      double hxm = i > 0 ? grid.xs[i] - grid.xs[i - 1] : 0.0;
      double hxp = i + 1 < nx ? grid.xs[i + 1] - grid.xs[i] : 0.0;
      double hym = j > 0 ? grid.ys[j] - grid.ys[j - 1] : 0.0;
      double hyp = j + 1 < ny ? grid.ys[j + 1] - grid.ys[j] : 0.0;

      double w[3][3] = {};  // w[di+1][dj+1]
      // A d^2/dx^2 (skip when a one-sided neighbor is missing: the
      // coefficient vanishes on the faces where that happens)
      if (A != 0.0 && hxm > 0.0 && hxp > 0.0) {
         w[0][1] += 2.0 * A / (hxm * (hxm + hxp));
         w[1][1] -= 2.0 * A / (hxm * hxp);
         w[2][1] += 2.0 * A / (hxp * (hxm + hxp));
      }
      if (C != 0.0 && hym > 0.0 && hyp > 0.0) {
         w[1][0] += 2.0 * C / (hym * (hym + hyp));
         w[1][1] -= 2.0 * C / (hym * hyp);
         w[1][2] += 2.0 * C / (hyp * (hym + hyp));
      }
      // upwind drift
      if (D > 0.0 && hxp > 0.0) {
         w[2][1] += D / hxp;
         w[1][1] -= D / hxp;
      } else if (D < 0.0 && hxm > 0.0) {
         w[0][1] += -D / hxm;
         w[1][1] += D / hxm;
      }
      if (E > 0.0 && hyp > 0.0) {
         w[1][2] += E / hyp;
         w[1][1] -= E / hyp;
      } else if (E < 0.0 && hym > 0.0) {
         w[1][0] += -E / hym;
         w[1][1] += E / hym;
      }
      // mixed term: average of the two cross differences whose corner
      // entries share the sign of B (second order on smooth grids); each
      // weight is limited so the axis entries it debits stay nonnegative,
      // which sacrifices consistency only where |B| sits at the
      // ellipticity bound
      auto cross = [&](int sx, int sy, double want) {
         double lim = std::min(w[1 + sx][1], w[1][1 + sy]);
         double ww = std::min(want, lim);
         if (ww <= 0.0) return;
         w[1 + sx][1 + sy] += ww;
         w[1 + sx][1] -= ww;
         w[1][1 + sy] -= ww;
         w[1][1] += ww;
      };
      if (B > 0.0) {
         if (hxp > 0.0 && hyp > 0.0) cross(1, 1, 0.5 * B / (hxp * hyp));
         if (hxm > 0.0 && hym > 0.0) cross(-1, -1, 0.5 * B / (hxm * hym));
      } else if (B < 0.0) {
         if (hxp > 0.0 && hym > 0.0) cross(1, -1, -0.5 * B / (hxp * hym));
         if (hxm > 0.0 && hyp > 0.0) cross(-1, 1, -0.5 * B / (hxm * hyp));
      }

      double diag = w[1][1];
      for (int di = -1; di <= 1; ++di) {
         for (int dj = -1; dj <= 1; ++dj) {
            if (di == 0 && dj == 0) continue;
            double ww = w[di + 1][dj + 1];
            if (ww == 0.0) continue;
            int a = (i + di >= 0 && i + di < nx && j + dj >= 0 && j + dj < ny)
                       ? out.idx(i + di, j + dj)
                       : -1;
            if (a < 0) {
               if (grid.closure == FDGrid::Closure::Copy) diag += ww;
            } else {
               trips.push_back({r, a, ww});
            }
         }
      }
      trips.push_back({r, r, diag});
   }

   Eigen::SparseMatrix<double> L(n, n);
   L.setFromTriplets(trips.begin(), trips.end());

   // M-matrix check for I - dt L: off-diagonal entries of L must be >= 0
   for (int k = 0; k < L.outerSize(); ++k)
      for (Eigen::SparseMatrix<double>::InnerIterator it(L, k); it; ++it)
         if (it.row() != it.col() && it.value() < -1e-10)
            throw std::runtime_error("fd_solve: monotonicity violated at assembly");

   Eigen::SparseMatrix<double> I(n, n);
   I.setIdentity();
   Eigen::SparseMatrix<double> M = I - grid.dt * L;
   Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
   lu.compute(M);
   if (lu.info() != Eigen::Success)
      throw std::runtime_error("fd_solve: sparse factorization failed");

   Eigen::VectorXd u(n);
   for (int r = 0; r < n; ++r) {
      auto [i, j] = nodes[r];
      u[r] = f({grid.xs[i], grid.ys[j]});
   }
   out.times.push_back(0.0);
   out.u.push_back(u);
   // T is rounded to a whole number of steps of size dt
   int steps = std::max(1, static_cast<int>(std::llround(T / grid.dt)));
   for (int s = 1; s <= steps; ++s) {
      double t = s * grid.dt;
      Eigen::VectorXd rhs = u;
      for (int r = 0; r < n; ++r) {
         auto [i, j] = nodes[r];
         rhs[r] += grid.dt * g(t, {grid.xs[i], grid.ys[j]});
      }
      u = lu.solve(rhs);
      if (lu.info() != Eigen::Success)
         throw std::runtime_error("fd_solve: sparse solve failed");
      out.times.push_back(t);
      out.u.push_back(u);
   }
   return out;
}

}  // namespace kimura

#endif  // KIMURA_FD_HPP
