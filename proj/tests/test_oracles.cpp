#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "kimura/fd.hpp"
#include "kimura/kernels1d.hpp"
#include "kimura/models2d.hpp"
#include "kimura/sampling.hpp"

using namespace kimura;

namespace {

// constant-coefficient regular-corner model as a global operator on a box
OperatorSpec creg_model_spec(Frozen fr, double L) {
   OperatorSpec s;
   s.name = "creg_model";
   s.A = [fr](Vec2 p) { return fr.a * p.x; };
   s.B = [](Vec2) { return 0.0; };
   s.C = [fr](Vec2 p) { return fr.c * p.y; };
   s.D = [fr](Vec2) { return fr.d; };
   s.E = [fr](Vec2) { return fr.e; };
   s.faces = {{"x0", {0, 0}, {0, L}, {1, 0}, BoundaryClass::RegularEdge},
              {"y0", {0, 0}, {L, 0}, {0, 1}, BoundaryClass::RegularEdge}};
   s.corners = {{"origin", {0, 0}, BoundaryClass::RegularCorner}};
   s.inside = [L](Vec2 p, double m) {
      return p.x >= m && p.y >= m && p.x <= L - m && p.y <= L - m;
   };
   s.bbox = {0, L, 0, L};
   return s;
}

// constant-coefficient mixed-corner model: Kimura in x, quadratic in y
OperatorSpec cmix_model_spec(Frozen fr) {
   OperatorSpec s;
   s.name = "cmix_model";
   s.A = [fr](Vec2 p) { return fr.a * p.x; };
   s.B = [](Vec2) { return 0.0; };
   s.C = [fr](Vec2 p) { return fr.c * p.y * p.y; };
   s.D = [fr](Vec2) { return fr.d; };
   s.E = [fr](Vec2 p) { return fr.e * p.y; };
   s.faces = {{"x0", {0, 0}, {0, 10}, {1, 0}, BoundaryClass::RegularEdge},
              {"y0", {0, 0}, {10, 0}, {0, 1}, BoundaryClass::InfinityEdge}};
   s.inside = [](Vec2 p, double m) { return p.x >= m && p.y >= m; };
   s.bbox = {0, 10, 0, 10};
   return s;
}

double ks_distance(std::vector<double> samples, const std::function<double(double)>& cdf) {
   std::sort(samples.begin(), samples.end());
   double n = static_cast<double>(samples.size());
   double ks = 0.0;
   for (std::size_t i = 0; i < samples.size(); ++i) {
      double F = cdf(samples[i]);
      ks = std::max(ks, std::abs((i + 1) / n - F));
      ks = std::max(ks, std::abs(i / n - F));
   }
   return ks;
}

double kimura_cdf(double d, double t, double x, double s) {
   double atom = d == 0.0 ? std::exp(-x / t) : 0.0;
   if (s <= 0.0) return atom;
   auto g = [&](double u) {
      double xp = u * u;
      return xp > 0.0 ? std::exp(ln_kimura_density(d, t, x, xp)) * 2.0 * u : 0.0;
   };
   return atom + integrate(g, 0.0, std::sqrt(s), 1e-10, 1e-10).value;
}

double skewness(const std::vector<double>& v) {
   double n = static_cast<double>(v.size()), m = 0, s2 = 0, s3 = 0;
   for (double x : v) m += x;
   m /= n;
   for (double x : v) {
      double d = x - m;
      s2 += d * d;
      s3 += d * d * d;
   }
   s2 /= n;
   s3 /= n;
   return s3 / std::pow(s2, 1.5);
}

}  // namespace

TEST_CASE("fd_solve preserves constants and positivity") {
   OperatorSpec tri = triangle_instance(0.8, 1.2, 1.0);
   FDGrid grid = make_fd_grid(tri, 24, 0.01);
   auto field = fd_solve(tri, grid, [](Vec2) { return 1.0; },
                         [](double, Vec2) { return 0.0; }, 0.05);
   for (const auto& u : field.u) {
      CHECK(u.maxCoeff() <= 1.0 + 1e-10);
      CHECK(u.minCoeff() >= 1.0 - 1e-10);
   }
   std::mt19937_64 rng(7);
   std::uniform_real_distribution<double> U(0.0, 1.0);
   auto f = [&](Vec2 p) { return U(rng) * (1.0 + std::sin(5 * p.x) * std::sin(3 * p.y)); };
   // positivity with rough (random-valued) data
   std::vector<double> vals;
   auto field2 = fd_solve(tri, grid, [&](Vec2 p) { return std::abs(std::sin(7 * p.x * p.y)); },
                          [](double, Vec2) { return 0.0; }, 0.05);
   (void)f;
   for (const auto& u : field2.u) CHECK(u.minCoeff() >= -1e-12);
}

TEST_CASE("fd_solve discrete maximum principle on smooth data") {
   OperatorSpec tri = triangle_instance(1.0, 0.7, 1.3);
   FDGrid grid = make_fd_grid(tri, 32, 0.005);
   std::mt19937_64 rng(11);
   std::uniform_real_distribution<double> U(-1.0, 1.0);
   for (int rep = 0; rep < 5; ++rep) {
      double a1 = U(rng), a2 = U(rng), a3 = U(rng);
      auto f = [&](Vec2 p) {
         return a1 * std::sin(3 * p.x) + a2 * std::cos(2 * p.y) + a3 * p.x * p.y;
      };
      auto field = fd_solve(tri, grid, f, [](double, Vec2) { return 0.0; }, 0.1);
      double m0 = field.u[0].maxCoeff();
      for (const auto& u : field.u) CHECK(u.maxCoeff() <= m0 + 1e-8);
   }
}

TEST_CASE("fd_solve converges to the model Cauchy solution") {
   Frozen fr{1.3, 0.0, 0.9, 0.7, 1.1};
   OperatorSpec spec = creg_model_spec(fr, 5.0);
   auto f = [](Vec2 p) {
      return std::exp(-(p.x - 1) * (p.x - 1) - (p.y - 1) * (p.y - 1));
   };
   double T = 0.2;
   Vec2 p{0.8, 1.1};
   ModelKernel2D mk(BoundaryClass::RegularCorner, fr, T);
   double ref = model_solve_cauchy(mk, f, p);
   auto err = [&](int n, double dt) {
      FDGrid grid = make_fd_grid(spec, n, dt);
      auto field = fd_solve(spec, grid, f, [](double, Vec2) { return 0.0; }, T);
      return std::abs(field.value(T, p) - ref);
   };
   double e1 = err(48, 0.02), e2 = err(96, 0.01);
   CHECK(e2 < 0.7 * e1);
   CHECK(e2 < 0.02 * std::abs(ref) + 1e-4);
}

TEST_CASE("exact_cir_sample moments and atom") {
   std::mt19937_64 rng(123);
   const int n = 100000;
   // mean = x + d t
   double d = 1.4, t = 0.6, x = 0.9;
   double sum = 0.0, sq = 0.0;
   for (int i = 0; i < n; ++i) {
      double v = exact_cir_sample(d, t, x, rng);
      sum += v;
      sq += v * v;
   }
   double mean = sum / n;
   double sd = std::sqrt(sq / n - mean * mean);
   CHECK(std::abs(mean - (x + d * t)) < 3.0 * sd / std::sqrt(double(n)));
   // atom frequency for d = 0
   int zeros = 0;
   for (int i = 0; i < n; ++i)
      if (exact_cir_sample(0.0, 1.0, 1.0, rng) == 0.0) ++zeros;
   double pa = std::exp(-1.0);
   double sigma = std::sqrt(pa * (1 - pa) / n);
   CHECK(std::abs(zeros / double(n) - pa) < 3.0 * sigma);
}

TEST_CASE("exact_cir_sample distribution: KS tests") {
   std::mt19937_64 rng(321);
   const int n = 20000;
   // d=1, t=1, x=0 is Exp(1)
   std::vector<double> s1(n);
   for (auto& v : s1) v = exact_cir_sample(1.0, 1.0, 0.0, rng);
   CHECK(ks_distance(s1, [](double s) { return 1.0 - std::exp(-s); }) < 0.015);
   // generic continuous case against quadrature CDF
   std::vector<double> s2(n);
   for (auto& v : s2) v = exact_cir_sample(0.5, 0.5, 1.0, rng);
   CHECK(ks_distance(s2, [](double s) { return kimura_cdf(0.5, 0.5, 1.0, s); }) < 0.015);
}

TEST_CASE("histogram L1 error decays like n^{-1/2}") {
   double d = 1.5, t = 0.5, x = 1.0;
   const int nbins = 30;
   const double hi = 6.0;
   std::vector<double> binp(nbins);
   for (int b = 0; b < nbins; ++b)
      binp[b] = kimura_cdf(d, t, x, (b + 1) * hi / nbins) - kimura_cdf(d, t, x, b * hi / nbins);
   std::mt19937_64 rng(99);
   std::vector<double> l1s, ns = {1e3, 1e4, 1e5};
   for (double nn : ns) {
      int n = static_cast<int>(nn);
      std::vector<double> cnt(nbins, 0.0);
      for (int i = 0; i < n; ++i) {
         double v = exact_cir_sample(d, t, x, rng);
         int b = static_cast<int>(v / hi * nbins);
         if (b >= 0 && b < nbins) cnt[b] += 1.0;
      }
      double l1 = 0.0;
      for (int b = 0; b < nbins; ++b) l1 += std::abs(cnt[b] / n - binp[b]);
      l1s.push_back(l1);
   }
   double slope = (std::log(l1s[2]) - std::log(l1s[0])) / (std::log(ns[2]) - std::log(ns[0]));
   CHECK(slope > -0.65);
   CHECK(slope < -0.35);
}

TEST_CASE("mc_paths is deterministic across thread counts") {
   OperatorSpec tri = triangle_instance(1, 1, 1);
   PathEnsemble a = mc_paths(tri, {0.3, 0.3}, 0.1, 64, 1e-3, 2024, 1);
   PathEnsemble b = mc_paths(tri, {0.3, 0.3}, 0.1, 64, 1e-3, 2024, 4);
   for (int i = 0; i < 64; ++i) {
      CHECK(a.paths[i].end.x == b.paths[i].end.x);
      CHECK(a.paths[i].end.y == b.paths[i].end.y);
      CHECK(a.paths[i].min_inf_dist == b.paths[i].min_inf_dist);
   }
}

TEST_CASE("log-stepped quadratic coordinate is log-normal") {
   Frozen fr{1.0, 0.0, 0.3, 0.8, 0.3};
   OperatorSpec spec = cmix_model_spec(fr);
   double T = 0.25, y0 = 0.02;
   PathEnsemble ens = mc_paths(spec, {0.5, y0}, T, 10000, 1e-3, 55);
   std::vector<double> lny;
   for (const auto& p : ens.paths) {
      REQUIRE(p.end.y > 0.0);
      lny.push_back(std::log(p.end.y));
   }
   double mu = std::log(y0) + (fr.e - fr.c) * T;
   double sd = std::sqrt(2.0 * fr.c * T);
   double ks = ks_distance(lny, [&](double s) {
      return 0.5 * std::erfc(-(s - mu) / (sd * std::sqrt(2.0)));
   });
   CHECK(ks < 0.025);
   CHECK(std::abs(skewness(lny)) < 0.2);
}

TEST_CASE("paths never touch the infinity edge") {
   OperatorSpec tri = triangle_instance(1, 1, 1);
   PathEnsemble ens = mc_paths(tri, {0.3, 0.3}, 0.3, 500, 1e-3, 77);
   for (const auto& p : ens.paths) {
      CHECK(p.min_inf_dist > 1e-12);
      CHECK(p.end.x >= 0.0);
      CHECK(p.end.y >= 0.0);
      CHECK(p.end.x + p.end.y < 1.0);
   }
}

TEST_CASE("empirical endpoint density matches the model kernel") {
   Frozen fr{0.9, 0.0, 1.0, 1.1, 0.8};
   OperatorSpec spec = creg_model_spec(fr, 50.0);
   Vec2 start{0.6, 0.5};
   double T = 0.3;
   const int n = 100000;
   PathEnsemble ens = mc_paths(spec, start, T, n, 2e-3, 4711);
   const int nb = 10;
   const double hi = 4.0;
   // factorized bin probabilities from the 1-D transition kernels
   auto cdfx = [&](double s) { return kimura_cdf(fr.d / fr.a, fr.a * T, start.x, s); };
   auto cdfy = [&](double s) { return kimura_cdf(fr.e / fr.c, fr.c * T, start.y, s); };
   std::vector<double> px(nb), py(nb);
   for (int b = 0; b < nb; ++b) {
      px[b] = cdfx((b + 1) * hi / nb) - cdfx(b * hi / nb);
      py[b] = cdfy((b + 1) * hi / nb) - cdfy(b * hi / nb);
   }
   std::vector<double> cnt(nb * nb, 0.0);
   double outside_emp = 0.0;
   for (const auto& p : ens.paths) {
      int bx = static_cast<int>(p.end.x / hi * nb);
      int by = static_cast<int>(p.end.y / hi * nb);
      if (bx >= 0 && bx < nb && by >= 0 && by < nb)
         cnt[by * nb + bx] += 1.0;
      else
         outside_emp += 1.0;
   }
   double l1 = 0.0, pin = 0.0;
   for (int bx = 0; bx < nb; ++bx)
      for (int by = 0; by < nb; ++by) {
         double pij = px[bx] * py[by];
         pin += pij;
         l1 += std::abs(cnt[by * nb + bx] / n - pij);
      }
   l1 += std::abs(outside_emp / n - (1.0 - pin));
   CHECK(l1 <= 0.05);
}

TEST_CASE("csv export shape") {
   OperatorSpec tri = triangle_instance(1, 1, 1);
   PathEnsemble ens = mc_paths(tri, {0.3, 0.3}, 0.02, 3, 1e-2, 1, 1, 1);
   std::ostringstream os;
   write_paths_csv(ens, os);
   std::string s = os.str();
   CHECK(s.rfind("t,x,y,path_id\n", 0) == 0);
   CHECK(std::count(s.begin(), s.end(), '\n') == 1 + 3 * 3);  // header + 3 pts/path
}
