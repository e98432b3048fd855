#ifndef KIMURA_KERNELS1D_HPP
#define KIMURA_KERNELS1D_HPP

#include <cmath>
#include <stdexcept>
#include <vector>

#include "kimura/quadrature.hpp"
#include "kimura/specfun.hpp"

namespace kimura {

// 1-D degenerate transition density p^d_t on [0,inf): continuous part plus,
// when d = 0, an atom e^{-x/t} at the origin.
struct KimuraKernel1D {
   double d = 1.0;  // drift weight
   double t = 1.0;
   KimuraKernel1D() = default;
   KimuraKernel1D(double d_, double t_) : d(d_), t(t_) {
      if (!(t > 0.0)) throw std::invalid_argument("KimuraKernel1D: t must be positive");
      if (d < 0.0) throw std::invalid_argument("KimuraKernel1D: d must be nonnegative");
   }
};

// Quadratic-direction density k'_{bt}(y,y1) = (4 pi b t)^{-1/2}
// exp(-(ln y - ln y1)^2 / (4bt)) / y1, supported on y1 > 0.
struct LogGaussianKernel1D {
   double b = 1.0;
   double t = 1.0;
   LogGaussianKernel1D() = default;
   LogGaussianKernel1D(double b_, double t_) : b(b_), t(t_) {
      if (!(b > 0.0) || !(t > 0.0))
         throw std::invalid_argument("LogGaussianKernel1D: b, t must be positive");
   }
};

// --- Kimura density and analytic derivatives ------------------------------
//
// Continuous part in the unified form p = pref * psi_d(z) with
// pref = t^{-d} xp^{d-1} e^{-(x+xp)/t}, z = x*xp/t^2.  For d = 0 this equals
// the printed (x/t^2) e^{-(x+xp)/t} psi_2(z) because psi_0(z) = z psi_2(z).
inline double ln_kimura_density(double d, double t, double x, double xp) {
   if (!(t > 0.0)) throw std::invalid_argument("kimura: t must be positive");
   if (!(xp > 0.0)) throw std::domain_error("kimura: continuous part needs xp > 0");
   if (x < 0.0) throw std::domain_error("kimura: x must be nonnegative");
   double z = x * xp / (t * t);
   return -d * std::log(t) + (d - 1.0) * std::log(xp) - (x + xp) / t + ln_psi_d(d, z);
}

inline double kimura_density(const KimuraKernel1D& k, double x, double xp) {
   return std::exp(ln_kimura_density(k.d, k.t, x, xp));
}

inline double kimura_atom(const KimuraKernel1D& k, double x) {
   if (k.d != 0.0) throw std::logic_error("kimura_atom: no atom when d > 0");
   if (x < 0.0) throw std::domain_error("kimura_atom: x must be nonnegative");
   return std::exp(-x / k.t);
}

// Value together with the analytic derivatives the estimates and the
// parametrix need.  Backward-variable (x) derivatives: dx, dxx; forward
// (xp) Kimura derivatives: f1 = xp d/dxp, f2 = (xp d/dxp)^2.
struct Kim1DBundle {
   double p = 0.0;
   double dx = 0.0;
   double dxx = 0.0;
   double f1 = 0.0;
   double f2 = 0.0;
};

inline Kim1DBundle kimura_bundle(double d, double t, double x, double xp) {
   Kim1DBundle out;
   double z = x * xp / (t * t);
   double m = ln_psi_d(d, z);
   double lp = -d * std::log(t) + (d - 1.0) * std::log(xp) - (x + xp) / t;
   if (m == -kInf) {
      // only at d = 0, z = 0 (x = 0): p = 0 but dx survives through psi_1(0)=1
      double pref = std::exp(lp);
      out.p = 0.0;
      out.dx = pref * xp / (t * t);  // psi_1(0) = 1
      out.dxx = pref * (-2.0 * xp / (t * t * t) + xp * xp / (t * t * t * t));
      out.f1 = 0.0;
      out.f2 = 0.0;
      return out;
   }
   double s1 = std::exp(ln_psi_d(d + 1.0, z) - m);
   double s2 = std::exp(ln_psi_d(d + 2.0, z) - m);
   double p = std::exp(lp + m);
   out.p = p;
   double c = xp / (t * t);
   out.dx = p * (-1.0 / t + c * s1);
   out.dxx = p * (1.0 / (t * t) - 2.0 * c / t * s1 + c * c * s2);
   double g1 = (d - 1.0 - xp / t) + z * s1;
   double g2 = -(xp / t) + (d - xp / t) * z * s1 + z * z * s2;
   out.f1 = p * g1;
   out.f2 = p * ((d - 1.0 - xp / t) * g1 + g2);
   return out;
}

enum class KimDeriv { dx, sqrtx_dx, x_dxx, ydy0, ydy1, ydy2 };

inline double kimura_deriv(const KimuraKernel1D& k, double x, double xp, KimDeriv which) {
   Kim1DBundle b = kimura_bundle(k.d, k.t, x, xp);
   switch (which) {
      case KimDeriv::dx: return b.dx;
      case KimDeriv::sqrtx_dx: return std::sqrt(x) * b.dx;
      case KimDeriv::x_dxx: return x * b.dxx;
      case KimDeriv::ydy0: return b.p;
      case KimDeriv::ydy1: return b.f1;
      case KimDeriv::ydy2: return b.f2;
   }
   throw std::invalid_argument("kimura_deriv: unsupported derivative");
}

// --- Gaussian / log-Gaussian primitives -----------------------------------

inline double gaussian_density(double e_shift, double t, double y, double yp) {
   if (!(t > 0.0)) throw std::invalid_argument("gaussian_density: t must be positive");
   double u = y + e_shift * t - yp;
   return std::exp(-u * u / (4.0 * t)) / std::sqrt(4.0 * M_PI * t);
}

inline double ln_loggaussian_density(double b, double t, double y, double yp) {
   if (!(b > 0.0) || !(t > 0.0))
      throw std::invalid_argument("loggaussian: b, t must be positive");
   if (!(y > 0.0) || !(yp > 0.0))
      throw std::domain_error("loggaussian: y, yp must be positive");
   double u = std::log(y) - std::log(yp);
   return -u * u / (4.0 * b * t) - 0.5 * std::log(4.0 * M_PI * b * t) - std::log(yp);
}

inline double loggaussian_density(const LogGaussianKernel1D& k, double y, double yp) {
   return std::exp(ln_loggaussian_density(k.b, k.t, y, yp));
}

// Backward-variable derivative bundles for the elliptic and quadratic factors.
struct Ell1DBundle {
   double p = 0.0, dy = 0.0, dyy = 0.0;
};

// Gaussian heat kernel of c*d^2/dy^2 at time t: k_{ct}(y,yp).
inline Ell1DBundle gaussian_bundle(double c, double t, double y, double yp) {
   double ct = c * t;
   double u = y - yp;
   double p = std::exp(-u * u / (4.0 * ct)) / std::sqrt(4.0 * M_PI * ct);
   double q = -u / (2.0 * ct);
   return {p, p * q, p * (q * q - 1.0 / (2.0 * ct))};
}

// Log-Gaussian bundle: derivatives reported as D = y d/dy and D^2.
inline Ell1DBundle loggaussian_bundle(double b, double t, double y, double yp) {
   double p = std::exp(ln_loggaussian_density(b, t, y, yp));
   double u = std::log(y) - std::log(yp);
   double q = -u / (2.0 * b * t);
   return {p, p * q, p * (q * q - 1.0 / (2.0 * b * t))};
}

// --- 1-D integration helpers ----------------------------------------------
//
// Integral of F against the Kimura transition measure from x (atom included
// when d = 0).  Substitution u = sqrt(xp) flattens the integrand in the
// metric suited to the degenerate direction.
template <typename F>
inline double kimura_integrate(double d, double t, double x, const F& f,
                               double eps_abs = 1e-9, double eps_rel = 1e-9) {
   double atom_part = 0.0;
   if (d == 0.0) atom_part = std::exp(-x / t) * f(0.0);
   double sx = std::sqrt(x);
   // transition measure lives within |sqrt(xp) - sqrt(x)| ~ O(sqrt(t)(1+d))
   double w = (12.0 + 4.0 * d) * std::sqrt(t) + 6.0 * t;
   double hi = sx + w;
   auto g = [&](double u) {
      double xp = u * u;
      if (xp <= 0.0) return 0.0;
      return std::exp(ln_kimura_density(d, t, x, xp)) * f(xp) * 2.0 * u;
   };
   double total = atom_part;
   double u_lo = 0.0;
   if (d > 0.0 && d < 0.5) {
      // near xp = 0 the integrand behaves like u^{2d-1}; soak up the endpoint
      // singularity with the substitution xp = v^q, q*d >= 1
      double q = std::min(1.5 / d, 100.0);
      double xp0 = std::min(t, hi * hi);
      auto gv = [&](double v) {
         double xp = std::pow(v, q);
         if (xp <= 0.0) return 0.0;
         return std::exp(ln_kimura_density(d, t, x, xp)) * f(xp) * q *
                std::pow(v, q - 1.0);
      };
      total += integrate(gv, 0.0, std::pow(xp0, 1.0 / q), eps_abs, eps_rel).value;
      u_lo = std::sqrt(xp0);
   }
   std::vector<double> pts;
   pts.push_back(u_lo);
   if (sx - w > u_lo) pts.push_back(sx - w);
   if (sx > u_lo && sx < hi) pts.push_back(sx);
   if (hi > pts.back()) pts.push_back(hi);
   total += integrate_split(g, pts, eps_abs, eps_rel).value;
   return total;
}

// Integral of F against the Gaussian factor k_{ct}(y, .) over the real line.
template <typename F>
inline double gaussian_integrate(double c, double t, double y, const F& f,
                                 double eps_abs = 1e-9, double eps_rel = 1e-9) {
   double w = 12.0 * std::sqrt(c * t);
   auto g = [&](double yp) { return gaussian_bundle(c, t, y, yp).p * f(yp); };
   QuadResult r = integrate_split(g, {y - w, y, y + w}, eps_abs, eps_rel);
   return r.value;
}

// Integral of F against the log-Gaussian factor k'_{bt}(y, .) over (0, inf),
// computed in v = ln yp coordinates.
template <typename F>
inline double loggaussian_integrate(double b, double t, double y, const F& f,
                                    double eps_abs = 1e-9, double eps_rel = 1e-9) {
   double ly = std::log(y);
   double w = 12.0 * std::sqrt(b * t);
   auto g = [&](double v) {
      double yp = std::exp(v);
      // density has the 1/yp Jacobian built in; dv measure cancels it
      return std::exp(ln_loggaussian_density(b, t, y, yp)) * yp * f(yp);
   };
   QuadResult r = integrate_split(g, {ly - w, ly, ly + w}, eps_abs, eps_rel);
   return r.value;
}

}  // namespace kimura

#endif  // KIMURA_KERNELS1D_HPP
