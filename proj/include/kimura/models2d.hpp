#ifndef KIMURA_MODELS2D_HPP
#define KIMURA_MODELS2D_HPP

#include <cmath>
#include <stdexcept>
#include <vector>

#include "kimura/kernels1d.hpp"

namespace kimura {

// Local normal forms at a boundary point.  Chart convention everywhere:
// the FIRST local coordinate is the Kimura-degenerate one (elliptic for
// InfinityEdge), the SECOND is the quadratic one where present.
enum class BoundaryClass {
   Interior,
   RegularEdge,    // a X dXX + b X dXY + c dYY + d dX + e dY
   InfinityEdge,   // a dXX + b Y dXY + c Y^2 dYY + d dX + e Y dY
   RegularCorner,  // a X dXX + b XY dXY + c Y dYY + d dX + e dY
   MixedCorner,    // a X dXX + b XY dXY + c Y^2 dYY + d dX + e Y dY
   InfinityCorner  // a X^2 dXX + b XY dXY + c Y^2 dYY + d X dX + e Y dY
};

inline const char* class_name(BoundaryClass c) {
   switch (c) {
      case BoundaryClass::Interior: return "interior";
      case BoundaryClass::RegularEdge: return "regular_edge";
      case BoundaryClass::InfinityEdge: return "infinity_edge";
      case BoundaryClass::RegularCorner: return "regular_corner";
      case BoundaryClass::MixedCorner: return "mixed_corner";
      case BoundaryClass::InfinityCorner: return "infinity_corner";
   }
   return "?";
}

// Normal-form letters frozen at a center point.
struct Frozen {
   double a = 1.0, b = 0.0, c = 1.0, d = 0.0, e = 0.0;
};

// One of the five constant-coefficient model operators with its product
// fundamental solution (the mixed letter b is dropped by the models; the
// built-in instances are b-free in their normal-form charts).
struct ModelKernel2D {
   BoundaryClass cls = BoundaryClass::RegularCorner;
   Frozen frozen;
   double t = 1.0;

   ModelKernel2D() = default;
   ModelKernel2D(BoundaryClass cls_, Frozen fr, double t_) : cls(cls_), frozen(fr), t(t_) {
      if (!(t > 0.0)) throw std::invalid_argument("ModelKernel2D: t must be positive");
      if (!(frozen.a > 0.0) || !(frozen.c > 0.0))
         throw std::invalid_argument("ModelKernel2D: a and c must be strictly positive");
      if (cls == BoundaryClass::Interior)
         throw std::domain_error("ModelKernel2D: interior points have no model kernel");
   }

   // Kimura drift weight of a factor (d/a resp. e/c); negative if factor
   // is not of Kimura type.
   double weight_x() const {
      switch (cls) {
         case BoundaryClass::RegularEdge:
         case BoundaryClass::RegularCorner:
         case BoundaryClass::MixedCorner: return frozen.d / frozen.a;
         default: return -1.0;
      }
   }
   double weight_y() const {
      return cls == BoundaryClass::RegularCorner ? frozen.e / frozen.c : -1.0;
   }
};

// Continuous part plus atom components.  atom_x pairs the X-atom e^{-X/at}
// with the continuous Y-factor density, and so on.
struct MKValue {
   double cont = 0.0;
   double atom_x = 0.0;   // weight * second-factor density; X' pinned to 0
   double atom_y = 0.0;
   double atom_xy = 0.0;  // pure point mass weight at (0,0)
   bool has_atom_x = false, has_atom_y = false;
};

// Kernel value and backward-point partial derivatives (plain d/dX, d/dY).
struct MK2Bundle {
   double v = 0.0;
   double dX = 0.0, dXX = 0.0;
   double dY = 0.0, dYY = 0.0;
   double dXY = 0.0;
};

namespace detail {

// 1-D factor bundles in plain backward-coordinate derivatives.
inline Ell1DBundle factor_x(const ModelKernel2D& mk, double X, double Xp) {
   const Frozen& f = mk.frozen;
   switch (mk.cls) {
      case BoundaryClass::RegularEdge:
      case BoundaryClass::RegularCorner:
      case BoundaryClass::MixedCorner: {
         Kim1DBundle b = kimura_bundle(f.d / f.a, f.a * mk.t, X, Xp);
         return {b.p, b.dx, b.dxx};
      }
      case BoundaryClass::InfinityEdge: return gaussian_bundle(f.a, mk.t, X, Xp);
      case BoundaryClass::InfinityCorner: {
         Ell1DBundle b = loggaussian_bundle(f.a, mk.t, X, Xp);
         // convert D = X d/dX bundles to plain derivatives
         return {b.p, b.dy / X, (b.dyy - b.dy) / (X * X)};
      }
      default: break;
   }
   throw std::domain_error("factor_x: unsupported class");
}

inline Ell1DBundle factor_y(const ModelKernel2D& mk, double Y, double Yp) {
   const Frozen& f = mk.frozen;
   switch (mk.cls) {
      case BoundaryClass::RegularCorner: {
         Kim1DBundle b = kimura_bundle(f.e / f.c, f.c * mk.t, Y, Yp);
         return {b.p, b.dx, b.dxx};
      }
      case BoundaryClass::RegularEdge: return gaussian_bundle(f.c, mk.t, Y, Yp);
      case BoundaryClass::MixedCorner:
      case BoundaryClass::InfinityEdge:
      case BoundaryClass::InfinityCorner: {
         Ell1DBundle b = loggaussian_bundle(f.c, mk.t, Y, Yp);
         return {b.p, b.dy / Y, (b.dyy - b.dy) / (Y * Y)};
      }
      default: break;
   }
   throw std::domain_error("factor_y: unsupported class");
}

}  // namespace detail

inline MKValue model_kernel(const ModelKernel2D& mk, Vec2 p, Vec2 q) {
   MKValue out;
   double wx = mk.weight_x(), wy = mk.weight_y();
   out.has_atom_x = (wx == 0.0);
   out.has_atom_y = (wy == 0.0);
   double px = detail::factor_x(mk, p.x, q.x).p;
   double py = detail::factor_y(mk, p.y, q.y).p;
   out.cont = px * py;
   if (out.has_atom_x) {
      double ax = std::exp(-p.x / (mk.frozen.a * mk.t));
      out.atom_x = ax * py;
      if (out.has_atom_y) {
         double ay = std::exp(-p.y / (mk.frozen.c * mk.t));
         out.atom_y = ay * px;
         out.atom_xy = ax * ay;
      }
   } else if (out.has_atom_y) {
      out.atom_y = std::exp(-p.y / (mk.frozen.c * mk.t)) * px;
   }
   return out;
}

inline MK2Bundle model_kernel_bundle(const ModelKernel2D& mk, Vec2 p, Vec2 q) {
   Ell1DBundle bx = detail::factor_x(mk, p.x, q.x);
   Ell1DBundle by = detail::factor_y(mk, p.y, q.y);
   MK2Bundle out;
   out.v = bx.p * by.p;
   out.dX = bx.dy * by.p;
   out.dXX = bx.dyy * by.p;
   out.dY = bx.p * by.dy;
   out.dYY = bx.p * by.dyy;
   out.dXY = bx.dy * by.dy;
   return out;
}

// Frozen model operator applied to a callable, by central differences in
// coordinates adapted to the factor type (sqrt for Kimura, log for quadratic).
template <typename F>
inline double apply_model_operator(BoundaryClass cls, const Frozen& fr, const F& f, Vec2 p,
                                   double h0 = 1e-4) {
   auto kim_part = [&](auto&& g, double X, double coefA, double coefD) {
      // coefA * X g'' + coefD * g'
      if (X <= 0.0) {
         double h = h0;
         return coefD * (4.0 * g(h) - 3.0 * g(0.0) - g(2.0 * h)) / (2.0 * h);
      }
      double u = std::sqrt(X), h = std::min(h0, 0.5 * u);
      double gu = (g((u + h) * (u + h)) - g((u - h) * (u - h))) / (2.0 * h);
      double guu = (g((u + h) * (u + h)) - 2.0 * g(X) + g((u - h) * (u - h))) / (h * h);
      // X d^2/dX^2 = (1/4) d^2/du^2 - (1/(4u)) d/du ; d/dX = (1/(2u)) d/du
      return coefA * (0.25 * guu - 0.25 / u * gu) + coefD * 0.5 / u * gu;
   };
   auto ell_part = [&](auto&& g, double Y, double coef) {
      double h = h0;
      return coef * (g(Y + h) - 2.0 * g(Y) + g(Y - h)) / (h * h);
   };
   auto quad_part = [&](auto&& g, double Y, double coef) {
      // coef * (Y^2 g'' + Y g') = coef * (d/dv)^2 g(e^v)
      double h = h0;
      return coef *
             (g(Y * std::exp(h)) - 2.0 * g(Y) + g(Y * std::exp(-h))) / (h * h);
   };
   auto fx = [&](double X) { return f(Vec2{X, p.y}); };
   auto fy = [&](double Y) { return f(Vec2{p.x, Y}); };
   switch (cls) {
      case BoundaryClass::RegularCorner:
         return kim_part(fx, p.x, fr.a, fr.d) + kim_part(fy, p.y, fr.c, fr.e);
      case BoundaryClass::RegularEdge:
         return kim_part(fx, p.x, fr.a, fr.d) + ell_part(fy, p.y, fr.c);
      case BoundaryClass::MixedCorner:
         return kim_part(fx, p.x, fr.a, fr.d) + quad_part(fy, p.y, fr.c);
      case BoundaryClass::InfinityEdge:
         return ell_part(fx, p.x, fr.a) + quad_part(fy, p.y, fr.c);
      case BoundaryClass::InfinityCorner:
         return quad_part(fx, p.x, fr.a) + quad_part(fy, p.y, fr.c);
      default: break;
   }
   throw std::domain_error("apply_model_operator: unsupported class");
}

// --- Cauchy solve by nested adaptive quadrature ---------------------------

namespace detail {

template <typename G>
inline double factor_x_integrate(const ModelKernel2D& mk, double X, const G& g,
                                 double tol) {
   const Frozen& f = mk.frozen;
   switch (mk.cls) {
      case BoundaryClass::RegularEdge:
      case BoundaryClass::RegularCorner:
      case BoundaryClass::MixedCorner:
         return kimura_integrate(f.d / f.a, f.a * mk.t, X, g, tol, tol);
      case BoundaryClass::InfinityEdge: return gaussian_integrate(f.a, mk.t, X, g, tol, tol);
      case BoundaryClass::InfinityCorner:
         return loggaussian_integrate(f.a, mk.t, X, g, tol, tol);
      default: break;
   }
   throw std::domain_error("factor_x_integrate: unsupported class");
}

template <typename G>
inline double factor_y_integrate(const ModelKernel2D& mk, double Y, const G& g,
                                 double tol) {
   const Frozen& f = mk.frozen;
   switch (mk.cls) {
      case BoundaryClass::RegularCorner:
         return kimura_integrate(f.e / f.c, f.c * mk.t, Y, g, tol, tol);
      case BoundaryClass::RegularEdge: return gaussian_integrate(f.c, mk.t, Y, g, tol, tol);
      case BoundaryClass::MixedCorner:
      case BoundaryClass::InfinityEdge:
      case BoundaryClass::InfinityCorner:
         return loggaussian_integrate(f.c, mk.t, Y, g, tol, tol);
      default: break;
   }
   throw std::domain_error("factor_y_integrate: unsupported class");
}

}  // namespace detail

// v(t, p) = integral of K_t(p, q) f(q) dq over the model space, atoms
// included (they appear automatically through kimura_integrate).
template <typename F>
inline double model_solve_cauchy(const ModelKernel2D& mk, const F& f, Vec2 p,
                                 double tol = 1e-8) {
   auto outer = [&](double Xp) {
      auto inner = [&](double Yp) { return f(Vec2{Xp, Yp}); };
      return detail::factor_y_integrate(mk, p.y, inner, tol);
   };
   return detail::factor_x_integrate(mk, p.x, outer, tol);
}

// --- fixed-node quadrature machinery (shared with the parametrix) ---------

struct FactorNode {
   double q = 0.0;   // forward coordinate
   double w = 0.0;   // quadrature weight incl. substitution Jacobian
   double p = 0.0;   // factor density at (backward, q)
   double d1 = 0.0;  // d/d(backward)
   double d2 = 0.0;
};

struct SpaceQuad {
   std::vector<FactorNode> nx, ny;
   // atom in a Kimura factor: weight plus backward derivatives of e^{-X/tau}
   double atom_x_w = 0.0, atom_x_d1 = 0.0, atom_x_d2 = 0.0;
   double atom_y_w = 0.0, atom_y_d1 = 0.0, atom_y_d2 = 0.0;
   bool has_atom_x = false, has_atom_y = false;
};

namespace detail {

struct NodeBuildCtx {
   std::vector<double> xs, ws;
};

// GL panels over [lo, hi] split at every interior breakpoint, n nodes per
// panel.  Breaks mark places where the integrand changes character (the
// diagonal, edges of a localized source) so each smooth stretch gets its own
// panel.
inline void gl_panels(double lo, double hi, std::initializer_list<double> brks, int n,
                      std::vector<double>& xs, std::vector<double>& ws) {
   std::vector<double> bs{lo, hi};
   for (double b : brks)
      if (b > lo && b < hi) bs.push_back(b);
   std::sort(bs.begin(), bs.end());
   std::vector<double> x1, w1;
   for (std::size_t i = 0; i + 1 < bs.size(); ++i) {
      if (bs[i + 1] <= bs[i]) continue;
      gl_nodes(n, bs[i], bs[i + 1], x1, w1);
      xs.insert(xs.end(), x1.begin(), x1.end());
      ws.insert(ws.end(), w1.begin(), w1.end());
   }
}

inline void kimura_nodes(double dd, double tau, double X, int n,
                         std::vector<FactorNode>& out, bool& has_atom, double& aw,
                         double& ad1, double& ad2, double wlo = -1e300,
                         double whi = 1e300) {
   out.clear();
   has_atom = (dd == 0.0);
   if (has_atom) {
      aw = std::exp(-X / tau);
      ad1 = -aw / tau;
      ad2 = aw / (tau * tau);
   }
   double sx = std::sqrt(X);
   double w = (8.0 + 3.0 * dd) * std::sqrt(tau) + 4.0 * tau;
   double hi = sx + w;
   double u_lo = 0.0;
   if (dd > 0.0 && dd < 0.5 && sx - w < std::sqrt(tau)) {
      // endpoint substitution Xp = v^qq against the Xp^{dd-1} singularity
      double qq = std::min(1.5 / dd, 100.0);
      double xp0 = std::min(tau, hi * hi);
      std::vector<double> vs, vw;
      double v1 = std::pow(xp0, 1.0 / qq);
      double vb = whi > 0.0 && whi < xp0 ? std::pow(whi, 1.0 / qq) : v1;
      gl_panels(0.0, v1, {vb}, n, vs, vw);
      for (std::size_t i = 0; i < vs.size(); ++i) {
         double xp = std::pow(vs[i], qq);
         if (xp <= 0.0) continue;
         Kim1DBundle b = kimura_bundle(dd, tau, X, xp);
         out.push_back({xp, vw[i] * qq * std::pow(vs[i], qq - 1.0), b.p, b.dx, b.dxx});
      }
      u_lo = std::sqrt(xp0);
   }
   // breaks at the diagonal and at the edges of the source window (in the
   // sqrt substitute) so a source much narrower than the kernel still gets a
   // full panel of nodes
   double swlo = wlo > 0.0 ? std::sqrt(wlo) : 0.0;
   double swhi = whi > 0.0 && whi < 1e300 ? std::sqrt(whi) : 1e300;
   std::vector<double> us, uw;
   gl_panels(std::max(u_lo, sx - w), hi, {sx, swlo, swhi}, n, us, uw);
   for (std::size_t i = 0; i < us.size(); ++i) {
      double u = us[i];
      double xp = u * u;
      if (xp <= 0.0) continue;
      Kim1DBundle b = kimura_bundle(dd, tau, X, xp);
      out.push_back({xp, uw[i] * 2.0 * u, b.p, b.dx, b.dxx});
   }
}

inline void gauss_nodes(double c, double t, double Y, int n, std::vector<FactorNode>& out,
                        double wlo = -1e300, double whi = 1e300) {
   out.clear();
   double w = 7.0 * std::sqrt(c * t);
   std::vector<double> ys, ws;
   gl_panels(Y - w, Y + w, {Y, wlo, whi}, n, ys, ws);
   for (std::size_t i = 0; i < ys.size(); ++i) {
      Ell1DBundle b = gaussian_bundle(c, t, Y, ys[i]);
      out.push_back({ys[i], ws[i], b.p, b.dy, b.dyy});
   }
}

inline void loggauss_nodes(double bcoef, double t, double Y, int n,
                           std::vector<FactorNode>& out, double wlo = -1e300,
                           double whi = 1e300) {
   out.clear();
   double ly = std::log(Y);
   double w = 7.0 * std::sqrt(bcoef * t);
   double lwlo = wlo > 0.0 ? std::log(wlo) : -1e300;
   double lwhi = whi > 0.0 && whi < 1e300 ? std::log(whi) : 1e300;
   std::vector<double> vs, ws;
   gl_panels(ly - w, ly + w, {ly, lwlo, lwhi}, n, vs, ws);
   for (std::size_t i = 0; i < vs.size(); ++i) {
      double yp = std::exp(vs[i]);
      Ell1DBundle b = loggaussian_bundle(bcoef, t, Y, yp);
      // ln-variable measure: dYp = yp dv; convert D-derivatives to plain
      out.push_back({yp, ws[i] * yp, b.p, b.dy / Y, (b.dyy - b.dy) / (Y * Y)});
   }
}

}  // namespace detail

// Support box of a localized source in model coordinates; panel breaks are
// inserted at its edges so sources much narrower than the kernel stay
// resolved.  Defaults mean "no localization known".
struct QuadWindow {
   double x0 = -1e300, x1 = 1e300, y0 = -1e300, y1 = 1e300;
};

// Forward-integration nodes for K_t(p, .) with per-factor density bundles.
inline SpaceQuad model_space_quad(const ModelKernel2D& mk, Vec2 p, int n = 12,
                                  QuadWindow win = {}) {
   SpaceQuad sq;
   const Frozen& f = mk.frozen;
   switch (mk.cls) {
      case BoundaryClass::RegularEdge:
      case BoundaryClass::RegularCorner:
      case BoundaryClass::MixedCorner:
         detail::kimura_nodes(f.d / f.a, f.a * mk.t, p.x, n, sq.nx, sq.has_atom_x,
                              sq.atom_x_w, sq.atom_x_d1, sq.atom_x_d2, win.x0, win.x1);
         break;
      case BoundaryClass::InfinityEdge:
         detail::gauss_nodes(f.a, mk.t, p.x, n, sq.nx, win.x0, win.x1);
         break;
      case BoundaryClass::InfinityCorner:
         detail::loggauss_nodes(f.a, mk.t, p.x, n, sq.nx, win.x0, win.x1);
         break;
      default: throw std::domain_error("model_space_quad: unsupported class");
   }
   switch (mk.cls) {
      case BoundaryClass::RegularCorner:
         detail::kimura_nodes(f.e / f.c, f.c * mk.t, p.y, n, sq.ny, sq.has_atom_y,
                              sq.atom_y_w, sq.atom_y_d1, sq.atom_y_d2, win.y0, win.y1);
         break;
      case BoundaryClass::RegularEdge:
         detail::gauss_nodes(f.c, mk.t, p.y, n, sq.ny, win.y0, win.y1);
         break;
      default:
         detail::loggauss_nodes(f.c, mk.t, p.y, n, sq.ny, win.y0, win.y1);
         break;
   }
   return sq;
}

// Which backward derivative of the kernel to integrate against g.
enum class KDeriv { val, dX, dXX, dY, dYY, dXY };

// Integral of D K_t(p, q) (g(q) - gsub) dq, atoms included.  With gsub =
// g(p) and D != val the derivative subtraction identity (mass is constant
// in p) makes the quadrature benign near the diagonal.
template <typename G>
inline double convolve(const SpaceQuad& sq, KDeriv D, const G& g, double gsub) {
   auto pick = [&](const FactorNode& a, const FactorNode& b) {
      switch (D) {
         case KDeriv::val: return a.p * b.p;
         case KDeriv::dX: return a.d1 * b.p;
         case KDeriv::dXX: return a.d2 * b.p;
         case KDeriv::dY: return a.p * b.d1;
         case KDeriv::dYY: return a.p * b.d2;
         case KDeriv::dXY: return a.d1 * b.d1;
      }
      return 0.0;
   };
   double acc = 0.0;
   for (const FactorNode& a : sq.nx)
      for (const FactorNode& b : sq.ny)
         acc += a.w * b.w * pick(a, b) * (g(Vec2{a.q, b.q}) - gsub);
   if (sq.has_atom_x) {
      // X' pinned at 0; atom weight differentiates in the backward X
      for (const FactorNode& b : sq.ny) {
         double kx;
         switch (D) {
            case KDeriv::val: kx = sq.atom_x_w * b.p; break;
            case KDeriv::dX: kx = sq.atom_x_d1 * b.p; break;
            case KDeriv::dXX: kx = sq.atom_x_d2 * b.p; break;
            case KDeriv::dY: kx = sq.atom_x_w * b.d1; break;
            case KDeriv::dYY: kx = sq.atom_x_w * b.d2; break;
            case KDeriv::dXY: kx = sq.atom_x_d1 * b.d1; break;
         }
         acc += b.w * kx * (g(Vec2{0.0, b.q}) - gsub);
      }
   }
   if (sq.has_atom_y) {
      for (const FactorNode& a : sq.nx) {
         double ky;
         switch (D) {
            case KDeriv::val: ky = a.p * sq.atom_y_w; break;
            case KDeriv::dX: ky = a.d1 * sq.atom_y_w; break;
            case KDeriv::dXX: ky = a.d2 * sq.atom_y_w; break;
            case KDeriv::dY: ky = a.p * sq.atom_y_d1; break;
            case KDeriv::dYY: ky = a.p * sq.atom_y_d2; break;
            case KDeriv::dXY: ky = a.d1 * sq.atom_y_d1; break;
         }
         acc += a.w * ky * (g(Vec2{a.q, 0.0}) - gsub);
      }
   }
   if (sq.has_atom_x && sq.has_atom_y) {
      double k = 0.0;
      switch (D) {
         case KDeriv::val: k = sq.atom_x_w * sq.atom_y_w; break;
         case KDeriv::dX: k = sq.atom_x_d1 * sq.atom_y_w; break;
         case KDeriv::dXX: k = sq.atom_x_d2 * sq.atom_y_w; break;
         case KDeriv::dY: k = sq.atom_x_w * sq.atom_y_d1; break;
         case KDeriv::dYY: k = sq.atom_x_w * sq.atom_y_d2; break;
         case KDeriv::dXY: k = sq.atom_x_d1 * sq.atom_y_d1; break;
      }
      acc += k * (g(Vec2{0.0, 0.0}) - gsub);
   }
   return acc;
}

struct InhomParams {
   int n_space = 10;     // GL nodes per panel and factor
   int n_time = 6;       // GL nodes per time half
};

// D-derivative of the Duhamel integral u(t, p) = int_0^t int K_{t-s}(p, q)
// g(s, q) dq ds.  The time integral is split at t/2 and the singular half
// substituted s = t - sigma^2; near the diagonal the value of g at p is
// subtracted — it re-enters through the unit mass of the kernel for D = val
// and drops out entirely for derivatives (mass is constant in p).
template <typename G>
inline double model_solve_inhom_deriv(BoundaryClass cls, const Frozen& fr, double t,
                                      Vec2 p, KDeriv D, const G& g,
                                      InhomParams prm = {}) {
   double acc = 0.0;
   std::vector<double> ss, ws;
   auto piece = [&](double s, double ktime) {
      ModelKernel2D mk(cls, fr, ktime);
      SpaceQuad sq = model_space_quad(mk, p, prm.n_space);
      double gp = g(s, p);
      double v = convolve(sq, D, [&](Vec2 q) { return g(s, q); }, gp);
      if (D == KDeriv::val) v += gp;
      return v;
   };
   // far half: s in (0, t/2), kernel time t - s >= t/2
   gl_nodes(prm.n_time, 0.0, 0.5 * t, ss, ws);
   for (std::size_t i = 0; i < ss.size(); ++i) acc += ws[i] * piece(ss[i], t - ss[i]);
   // near half: s = t - sigma^2, sigma in (0, sqrt(t/2))
   gl_nodes(prm.n_time, 0.0, std::sqrt(0.5 * t), ss, ws);
   for (std::size_t i = 0; i < ss.size(); ++i)
      acc += ws[i] * 2.0 * ss[i] * piece(t - ss[i] * ss[i], ss[i] * ss[i]);
   return acc;
}

template <typename G>
inline double model_solve_inhomogeneous(BoundaryClass cls, const Frozen& fr, double t,
                                        Vec2 p, const G& g, InhomParams prm = {}) {
   return model_solve_inhom_deriv(cls, fr, t, p, KDeriv::val, g, prm);
}

}  // namespace kimura

#endif  // KIMURA_MODELS2D_HPP
