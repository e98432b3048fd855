#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "kimura/specfun.hpp"

using namespace kimura;

TEST_CASE("ln_gamma pinned values") {
   CHECK(ln_gamma(1.0) == doctest::Approx(0.0).epsilon(1e-12));
   CHECK(ln_gamma(0.5) == doctest::Approx(0.5 * std::log(M_PI)).epsilon(1e-12));
   CHECK(ln_gamma(5.0) == doctest::Approx(std::log(24.0)).epsilon(1e-12));
   CHECK_THROWS_AS(ln_gamma(0.0), std::domain_error);
   CHECK_THROWS_AS(ln_gamma(-1.0), std::domain_error);
}

TEST_CASE("psi_d pinned values") {
   CHECK(psi_d(1.0, 0.0) == doctest::Approx(1.0).epsilon(1e-12));
   CHECK(psi_d(0.0, 0.0) == 0.0);
   // independently frozen reference values (30-digit series summation)
   CHECK(psi_d(2.0, 1.0) == doctest::Approx(1.5906368546373291).epsilon(1e-12));
   CHECK(psi_d(1.5, 7.3) == doctest::Approx(23.201870204124735).epsilon(1e-12));
   CHECK(psi_d(0.25, 55.0) == doctest::Approx(1272999.9162705105).epsilon(1e-12));
   CHECK(psi_d(3.0, 150.0) == doctest::Approx(21594719.399685369).epsilon(1e-10));
   CHECK(psi_d(0.0, 2.5) == doctest::Approx(7.2352607896949616).epsilon(1e-12));
}

TEST_CASE("psi_d_deriv is the shifted function") {
   CHECK(psi_d_deriv(1.0, 0.0, 1) == doctest::Approx(1.0).epsilon(1e-12));
   CHECK(psi_d_deriv(0.5, 0.0, 2) == doctest::Approx(0.75225277806367505).epsilon(1e-12));
   CHECK(psi_d_deriv(1.3, 4.2, 0) == doctest::Approx(psi_d(1.3, 4.2)).epsilon(1e-14));
   CHECK_THROWS_AS(psi_d_deriv(1.0, 1.0, 7), std::invalid_argument);
}

TEST_CASE("series and asymptotic regimes agree on the overlap band") {
   PsiEvalRegime regime;
   double thr = regime.threshold_z;
   for (double d : {0.0, 0.25, 0.5, 1.0, 1.7, 2.4, 3.0}) {
      for (double z = thr / 2; z <= 2 * thr; z += thr / 8) {
         double series = (d == 0.0) ? z * detail::psi_series_pos(2.0, z)
                                    : detail::psi_series_pos(d, z);
         double asym = std::exp(detail::ln_psi_asym(d, z));
         CHECK(std::abs(series - asym) / series < 1e-10);
      }
   }
}

TEST_CASE("psi_d nondecreasing in z") {
   for (double d : {0.0, 0.5, 1.0, 2.0, 3.0}) {
      double prev = psi_d(d, 0.0);
      for (double z = 0.5; z <= 200.0; z += 0.5) {
         double v = psi_d(d, z);
         CHECK(v >= prev);
         prev = v;
      }
   }
}

TEST_CASE("bessel recurrence I_{nu-1} - I_{nu+1} = (2 nu / x) I_nu") {
   for (double nu : {0.3, 0.7, 1.0, 1.5, 2.2}) {
      for (double x : {0.5, 2.0, 9.0, 30.0, 120.0}) {
         bool scaled = x > 50.0;
         double lhs = bessel_i(nu - 1.0, x, scaled) - bessel_i(nu + 1.0, x, scaled);
         double rhs = 2.0 * nu / x * bessel_i(nu, x, scaled);
         CHECK(std::abs(lhs - rhs) <= 1e-9 * std::abs(rhs));
      }
   }
}

TEST_CASE("bessel pinned values and symmetry") {
   CHECK(bessel_i(0.0, 0.0) == 1.0);
   CHECK(bessel_i(1.0, 0.0) == 0.0);
   CHECK(bessel_i(-1.0, 2.0) == doctest::Approx(bessel_i(1.0, 2.0)).epsilon(1e-14));
   CHECK(bessel_i(1.0, 2.0) == doctest::Approx(1.5906368546373291).epsilon(1e-12));
   CHECK(bessel_i(0.7, 2.3) == doctest::Approx(2.4186288158986452).epsilon(1e-12));
   CHECK(bessel_i(2.2, 120.0, true) == doctest::Approx(0.03572554700847549).epsilon(1e-11));
   CHECK_THROWS_AS(bessel_i(0.0, -1.0), std::domain_error);
}

TEST_CASE("finite-difference check of psi' = psi_{d+1}") {
   for (double d : {0.3, 1.0, 2.5}) {
      for (double z : {0.8, 5.0, 40.0}) {
         double exact = psi_d_deriv(d, z, 1);
         double e_prev = kInf;
         for (double h : {1e-3, 5e-4}) {
            double fd = (psi_d(d, z + h) - psi_d(d, z - h)) / (2 * h);
            double err = std::abs(fd - exact) / std::abs(exact);
            CHECK(err < 1e-5);
            CHECK(err <= e_prev + 1e-12);
            e_prev = err;
         }
      }
   }
}

TEST_CASE("ln_psi_d consistent with psi_d and safe for huge z") {
   CHECK(ln_psi_d(1.5, 20.0) == doctest::Approx(std::log(psi_d(1.5, 20.0))).epsilon(1e-13));
   double big = ln_psi_d(1.0, 1e12);  // ~2e6; plain psi_d would overflow
   CHECK(big == doctest::Approx(2e6).epsilon(1e-4));
   CHECK(std::isfinite(big));
}
