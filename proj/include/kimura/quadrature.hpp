#ifndef KIMURA_QUADRATURE_HPP
#define KIMURA_QUADRATURE_HPP

#include <array>
#include <cmath>
#include <functional>
#include <vector>

#include "kimura/common.hpp"

namespace kimura {

// 15-point Kronrod nodes with embedded 7-point Gauss rule on [-1,1].
struct GK15 {
   static constexpr std::array<double, 8> x = {
      0.991455371120812639206854697526329,
      0.949107912342758524526189684047851,
      0.864864423359769072789712788640926,
      0.741531185599394439863864773280788,
      0.586087235467691130294144838258730,
      0.405845151377397166906606412076961,
      0.207784955007898467600689403773245,
      0.000000000000000000000000000000000};
   static constexpr std::array<double, 8> wk = {
      0.022935322010529224963732008058970,
      0.063092092629978553290700663189204,
      0.104790010322250183839876322541518,
      0.140653259715525918745189590510238,
      0.169004726639267902826583426598550,
      0.190350578064785409913256402421014,
      0.204432940075298892414161999234649,
      0.209482141084727828012999174891714};
   static constexpr std::array<double, 4> wg = {
      0.129484966168869693270611432679082,
      0.279705391489276667901467771423780,
      0.381830050505118944950369775488975,
      0.417959183673469387755102040816327};
};

struct QuadResult {
   double value = 0.0;
   double error = 0.0;    // estimated absolute error
   bool converged = true; // false if depth budget was exhausted
};

namespace detail {

template <typename F>
inline void gk15_panel(const F& f, double a, double b, double& kron, double& err) {
   double h = 0.5 * (b - a), c = 0.5 * (a + b);
   double fc = f(c);
   double resk = GK15::wk[7] * fc;
   double resg = GK15::wg[3] * fc;
   for (int i = 0; i < 7; ++i) {
      double fv = f(c - h * GK15::x[i]) + f(c + h * GK15::x[i]);
      resk += GK15::wk[i] * fv;
      if (i % 2 == 1) resg += GK15::wg[i / 2] * fv;
   }
   kron = resk * h;
   err = std::abs((resk - resg) * h);
}

template <typename F>
inline void adapt(const F& f, double a, double b, double eps_abs, double eps_rel, int depth,
                  QuadResult& out) {
   double v, e;
   gk15_panel(f, a, b, v, e);
   if (e <= eps_abs || e <= eps_rel * std::abs(v) || depth <= 0) {
      out.value += v;
      out.error += e;
      if (depth <= 0 && e > eps_abs && e > eps_rel * std::abs(v)) out.converged = false;
      return;
   }
   double m = 0.5 * (a + b);
   adapt(f, a, m, 0.5 * eps_abs, eps_rel, depth - 1, out);
   adapt(f, m, b, 0.5 * eps_abs, eps_rel, depth - 1, out);
}

}  // namespace detail

// Adaptive Gauss-Kronrod integration of f over [a,b].
template <typename F>
inline QuadResult integrate(const F& f, double a, double b, double eps_abs = 1e-9,
                            double eps_rel = 1e-9, int max_depth = 24) {
   QuadResult out;
   if (a == b) return out;
   detail::adapt(f, a, b, eps_abs, eps_rel, max_depth, out);
   return out;
}

// Integration over [a,b] split at interior breakpoints (e.g. the density mode).
template <typename F>
inline QuadResult integrate_split(const F& f, const std::vector<double>& pts,
                                  double eps_abs = 1e-9, double eps_rel = 1e-9,
                                  int max_depth = 24) {
   QuadResult out;
   for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
      QuadResult r = integrate(f, pts[i], pts[i + 1], eps_abs, eps_rel, max_depth);
      out.value += r.value;
      out.error += r.error;
      out.converged = out.converged && r.converged;
   }
   return out;
}

// --- fixed Gauss-Legendre rules (tensor quadratures in the parametrix) ----

struct GLRule {
   std::vector<double> x;  // nodes on [-1,1]
   std::vector<double> w;
};

// Nodes by Newton iteration on P_n with Chebyshev initial guesses.
inline const GLRule& gauss_legendre(int n) {
   static thread_local std::vector<GLRule> cache(65);
   if (n < 1 || n > 64) throw std::invalid_argument("gauss_legendre: order out of range");
   GLRule& r = cache[static_cast<std::size_t>(n)];
   if (!r.x.empty()) return r;
   r.x.resize(static_cast<std::size_t>(n));
   r.w.resize(static_cast<std::size_t>(n));
   for (int i = 0; i < n; ++i) {
      double t = std::cos(M_PI * (i + 0.75) / (n + 0.5));
      for (int it = 0; it < 100; ++it) {
         double p0 = 1.0, p1 = t;
         for (int k = 2; k <= n; ++k) {
            double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
            p0 = p1;
            p1 = p2;
         }
         double dp = n * (t * p1 - p0) / (t * t - 1.0);
         double dt = p1 / dp;
         t -= dt;
         if (std::abs(dt) < 1e-15) break;
      }
      double p0 = 1.0, p1 = t;
      for (int k = 2; k <= n; ++k) {
         double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
         p0 = p1;
         p1 = p2;
      }
      double dp = n * (t * p1 - p0) / (t * t - 1.0);
      r.x[static_cast<std::size_t>(n - 1 - i)] = t;
      r.w[static_cast<std::size_t>(n - 1 - i)] = 2.0 / ((1.0 - t * t) * dp * dp);
   }
   return r;
}

// Nodes/weights of the n-point rule mapped to [a,b].
inline void gl_nodes(int n, double a, double b, std::vector<double>& xs,
                     std::vector<double>& ws) {
   const GLRule& r = gauss_legendre(n);
   xs.resize(static_cast<std::size_t>(n));
   ws.resize(static_cast<std::size_t>(n));
   double h = 0.5 * (b - a), c = 0.5 * (a + b);
   for (int i = 0; i < n; ++i) {
      xs[static_cast<std::size_t>(i)] = c + h * r.x[static_cast<std::size_t>(i)];
      ws[static_cast<std::size_t>(i)] = h * r.w[static_cast<std::size_t>(i)];
   }
}

}  // namespace kimura

#endif  // KIMURA_QUADRATURE_HPP
