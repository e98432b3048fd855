#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "kimura/quadrature.hpp"

using namespace kimura;

TEST_CASE("polynomials integrate exactly") {
   auto r = integrate([](double x) { return 3.0 * x * x; }, 0.0, 2.0);
   CHECK(r.value == doctest::Approx(8.0).epsilon(1e-12));
   CHECK(r.converged);
}

TEST_CASE("gaussian tail integral") {
   auto r = integrate([](double x) { return std::exp(-x * x); }, -10.0, 10.0, 1e-12, 1e-12);
   CHECK(r.value == doctest::Approx(std::sqrt(M_PI)).epsilon(1e-11));
}

TEST_CASE("sharply peaked integrand through split points") {
   double s = 1e-3;
   auto f = [s](double x) { return std::exp(-(x - 0.5) * (x - 0.5) / (2 * s * s)); };
   auto r = integrate_split(f, {0.0, 0.5, 1.0}, 1e-13, 1e-11);
   CHECK(r.value == doctest::Approx(s * std::sqrt(2 * M_PI)).epsilon(1e-9));
}

TEST_CASE("gauss-legendre nodes integrate high-degree polynomials") {
   // n-point rule is exact through degree 2n-1
   for (int n : {4, 8, 16, 32}) {
      std::vector<double> xs, ws;
      gl_nodes(n, -1.0, 3.0, xs, ws);
      int deg = 2 * n - 1;
      double acc = 0.0;
      for (std::size_t i = 0; i < xs.size(); ++i) acc += ws[i] * std::pow(xs[i], deg);
      double exact = (std::pow(3.0, deg + 1) - std::pow(-1.0, deg + 1)) / (deg + 1);
      CHECK(acc == doctest::Approx(exact).epsilon(1e-10));
   }
}

TEST_CASE("gauss-legendre weights sum to interval length") {
   std::vector<double> xs, ws;
   gl_nodes(20, 2.0, 7.0, xs, ws);
   double s = 0.0;
   for (double w : ws) s += w;
   CHECK(s == doctest::Approx(5.0).epsilon(1e-13));
}
