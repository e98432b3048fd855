#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "kimura/kernels1d.hpp"

using namespace kimura;

TEST_CASE("kimura density pinned values") {
   // closed form collapses via psi_1(0)=1
   CHECK(kimura_density({1.0, 1.0}, 0.0, 2.0) ==
         doctest::Approx(std::exp(-2.0)).epsilon(1e-12));
   // frozen noncentral-chi-squared oracle: dof 2d=1, noncentrality 2x/t=4, scale t/2
   CHECK(kimura_density({0.5, 0.5}, 1.0, 1.0) ==
         doctest::Approx(0.39907611062719756).epsilon(1e-11));
   CHECK(kimura_density({2.5, 0.7}, 0.3, 1.2) ==
         doctest::Approx(0.37536430445031202).epsilon(1e-11));
   // d = 0 continuous part
   CHECK(kimura_density({0.0, 1.0}, 0.0, 1.0) == 0.0);
   CHECK(kimura_density({0.0, 1.0}, 1.0, 0.5) ==
         doctest::Approx(0.28375985847144186).epsilon(1e-11));
}

TEST_CASE("d=0 psi_2 form equals the I_1 form") {
   // (x/t^2) e^{-(x+xp)/t} psi_2(z)  vs  (1/t) sqrt(x/xp) e^{-(x+xp)/t} I_1(2 sqrt(z))
   for (double t : {0.2, 1.0}) {
      for (double x : {0.4, 1.7}) {
         for (double xp : {0.1, 0.9, 3.0}) {
            double z = x * xp / (t * t);
            double a = x / (t * t) * std::exp(-(x + xp) / t) * psi_d(2.0, z);
            double b = std::sqrt(x / xp) / t * std::exp(-(x + xp) / t) *
                       bessel_i(1.0, 2.0 * std::sqrt(z));
            CHECK(a == doctest::Approx(b).epsilon(1e-12));
            CHECK(kimura_density({0.0, t}, x, xp) == doctest::Approx(a).epsilon(1e-12));
         }
      }
   }
}

TEST_CASE("atom") {
   CHECK(kimura_atom({0.0, 1.0}, 0.0) == 1.0);
   CHECK(kimura_atom({0.0, 1.0}, 1.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
   CHECK(kimura_atom({0.0, 1e9}, 3.0) == doctest::Approx(1.0).epsilon(1e-8));
   CHECK_THROWS_AS(kimura_atom({1.0, 1.0}, 0.5), std::logic_error);
}

TEST_CASE("normalization incl. atom") {
   for (double d : {0.0, 0.25, 0.5, 1.0, 2.5}) {
      for (double t : {0.1, 1.0}) {
         for (double x : {0.0, 0.3, 2.0}) {
            double mass = kimura_integrate(d, t, x, [](double) { return 1.0; });
            CHECK(std::abs(mass - 1.0) < 1e-6);
         }
      }
   }
}

TEST_CASE("mean displacement x + d t") {
   for (double d : {0.0, 0.5, 2.0}) {
      for (double t : {0.3, 1.0}) {
         for (double x : {0.0, 1.2}) {
            double mean = kimura_integrate(d, t, x, [](double xp) { return xp; });
            CHECK(mean == doctest::Approx(x + d * t).epsilon(1e-7));
         }
      }
   }
}

TEST_CASE("chapman-kolmogorov for 1-D factors") {
   for (double d : {0.0, 0.5, 1.5}) {
      double t = 0.4, s = 0.3;
      for (double x : {0.2, 1.0}) {
         for (double y : {0.5, 1.8}) {
            // atom cross-terms: z=0 atom feeds p_s(0,y)
            double conv = kimura_integrate(
               d, t, x, [&](double z) {
                  return z > 0.0 ? std::exp(ln_kimura_density(d, s, z, y))
                                 : std::exp(ln_kimura_density(d, s, 0.0, y));
               });
            double direct = std::exp(ln_kimura_density(d, t + s, x, y));
            CHECK(std::abs(conv - direct) <= 1e-4 * direct);
         }
      }
   }
}

TEST_CASE("gaussian density") {
   CHECK(gaussian_density(0, 1, 0, 0) == doctest::Approx(1.0 / std::sqrt(4 * M_PI)).epsilon(1e-13));
   CHECK(gaussian_density(0, 0.25, 1, 0) ==
         doctest::Approx(std::exp(-1.0) / std::sqrt(M_PI)).epsilon(1e-13));
   double mass = gaussian_integrate(1.0, 0.7, 0.3, [](double) { return 1.0; });
   CHECK(mass == doctest::Approx(1.0).epsilon(1e-10));
   // drift shift moves the mean by e*t
   double mean = 0.0;
   {
      auto f = [](double yp) { return yp; };
      double w = 12.0 * std::sqrt(0.5);
      auto g = [&](double yp) { return gaussian_density(2.0, 0.5, 1.0, yp) * f(yp); };
      mean = integrate_split(g, {1.0 - w, 1.0, 1.0 + w}, 1e-11, 1e-11).value;
   }
   CHECK(mean == doctest::Approx(1.0 + 2.0 * 0.5).epsilon(1e-9));
}

TEST_CASE("loggaussian density") {
   CHECK(loggaussian_density({1, 1}, 1.0, 1.0) ==
         doctest::Approx(1.0 / std::sqrt(4 * M_PI)).epsilon(1e-13));
   CHECK(loggaussian_density({1, 1}, std::exp(1.0), 1.0) ==
         doctest::Approx(0.2196956447338612).epsilon(1e-12));
   double mass = loggaussian_integrate(0.8, 0.6, 2.0, [](double) { return 1.0; });
   CHECK(std::abs(mass - 1.0) < 1e-8);
   CHECK_THROWS_AS(loggaussian_density({1, 1}, -1.0, 1.0), std::domain_error);
}

TEST_CASE("analytic derivatives match finite differences") {
   KimuraKernel1D k{1.0, 1.0};
   double h = 1e-5;
   // dx at the boundary source of the pinned example
   for (double x : {0.0, 0.7}) {
      double xp = 2.0;
      double fd = (kimura_density({1.0, 1.0}, x + h, xp) -
                   kimura_density({1.0, 1.0}, std::max(x - h, 0.0), xp)) /
                  (x - h < 0 ? h : 2 * h);
      CHECK(kimura_deriv(k, x, xp, KimDeriv::dx) == doctest::Approx(fd).epsilon(1e-5));
   }
   // x_dxx annihilated at x = 0
   CHECK(kimura_deriv(k, 0.0, 1.0, KimDeriv::x_dxx) == 0.0);
   // second backward derivative
   {
      double x = 0.9, xp = 1.4;
      double fd2 = (kimura_density(k, x + h, xp) - 2 * kimura_density(k, x, xp) +
                    kimura_density(k, x - h, xp)) /
                   (h * h);
      Kim1DBundle b = kimura_bundle(k.d, k.t, x, xp);
      CHECK(b.dxx == doctest::Approx(fd2).epsilon(1e-4));
   }
   // forward logarithmic derivatives
   {
      double d = 1.7, t = 0.6, x = 0.8, xp = 1.1;
      auto p = [&](double v) { return std::exp(ln_kimura_density(d, t, x, v)); };
      double f1 = xp * (p(xp + h) - p(xp - h)) / (2 * h);
      Kim1DBundle b = kimura_bundle(d, t, x, xp);
      CHECK(b.f1 == doctest::Approx(f1).epsilon(1e-6));
      double g = 1e-4;
      auto F1 = [&](double v) {
         return v * (p(v + g) - p(v - g)) / (2 * g);
      };
      double f2 = xp * (F1(xp + g) - F1(xp - g)) / (2 * g);
      CHECK(b.f2 == doctest::Approx(f2).epsilon(1e-4));
   }
   // ydy0 is the density itself
   CHECK(kimura_deriv(k, 0.3, 0.8, KimDeriv::ydy0) ==
         doctest::Approx(kimura_density(k, 0.3, 0.8)).epsilon(1e-14));
}

TEST_CASE("derivative bundle at the d=0, x=0 degenerate point") {
   Kim1DBundle b = kimura_bundle(0.0, 0.5, 0.0, 1.0);
   CHECK(b.p == 0.0);
   double h = 1e-6;
   double fd = std::exp(ln_kimura_density(0.0, 0.5, h, 1.0)) / h;
   CHECK(b.dx == doctest::Approx(fd).epsilon(1e-4));
}

TEST_CASE("pde residual of closed forms decays at second order") {
   // |d_t p - (x d^2_x + d d_x) p| via central differences, halving h
   auto resid_kimura = [](double d, double t, double x, double xp, double h) {
      auto p = [&](double tt, double xx) {
         return std::exp(ln_kimura_density(d, tt, xx, xp));
      };
      double pt = (p(t + h * h, x) - p(t - h * h, x)) / (2 * h * h);
      double px = (p(t, x + h) - p(t, x - h)) / (2 * h);
      double pxx = (p(t, x + h) - 2 * p(t, x) + p(t, x - h)) / (h * h);
      return std::abs(pt - (x * pxx + d * px));
   };
   for (double d : {0.7, 1.5}) {
      for (double t : {0.1, 1.0}) {
         double r1 = resid_kimura(d, t, 0.8, 1.1, 2e-2);
         double r2 = resid_kimura(d, t, 0.8, 1.1, 1e-2);
         double order = std::log2(r1 / r2);
         CHECK(order > 1.5);
         CHECK(order < 2.5);
      }
   }
   // log-gaussian against b (y^2 d^2_y + y d_y)
   auto resid_lg = [](double b, double t, double y, double yp, double h) {
      auto p = [&](double tt, double yy) {
         return std::exp(ln_loggaussian_density(b, tt, yy, yp));
      };
      double pt = (p(t + h * h, y) - p(t - h * h, y)) / (2 * h * h);
      double py = (p(t, y + h) - p(t, y - h)) / (2 * h);
      double pyy = (p(t, y + h) - 2 * p(t, y) + p(t, y - h)) / (h * h);
      return std::abs(pt - b * (y * y * pyy + y * py));
   };
   {
      double r1 = resid_lg(0.9, 0.5, 1.3, 0.8, 2e-2);
      double r2 = resid_lg(0.9, 0.5, 1.3, 0.8, 1e-2);
      double order = std::log2(r1 / r2);
      CHECK(order > 1.5);
      CHECK(order < 2.5);
   }
}

TEST_CASE("off-diagonal decay: e^{c/t} p stays bounded as t -> 0") {
   // |sqrt(x) - sqrt(xp)| = 1 here, so the kernel decays like e^{-1/t};
   // with c = 0.5 the weighted sup must not blow up.
   double x = 0.25, xp = 2.25, c = 0.5;
   double prev = kInf;
   for (double t : {0.1, 0.05, 0.01}) {
      double v = std::exp(ln_kimura_density(1.0, t, x, xp) + c / t);
      double dv = std::abs(kimura_deriv({1.0, t}, x, xp, KimDeriv::dx)) * std::exp(c / t);
      CHECK(v < prev + 1.0);
      CHECK(std::isfinite(dv));
      CHECK(v < 1.0);
      prev = v;
   }
}
