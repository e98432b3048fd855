#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "kimura/config.hpp"
#include "kimura/geometry.hpp"

using namespace kimura;

namespace {

double test_fn(Vec2 p) {
   // low-degree polynomial: the fourth-order stencils differentiate it
   // exactly, so chart comparisons probe only the coefficients
   return p.x * p.x * p.x * p.y * p.y + 0.7 * p.x * p.y + p.y * p.y * p.y -
          0.4 * p.x * p.x + 1.3;
}

}  // namespace

TEST_CASE("triangle coefficients: pinned value and exchange symmetry") {
   OperatorSpec tri = triangle_instance(1, 1, 1);
   CHECK(tri.A({0.25, 0.25}) == doctest::Approx(7.0 / 32.0).epsilon(1e-14));
   // swapping x<->y exchanges the roles of the two regular edges
   OperatorSpec t1 = triangle_instance(0.7, 1.3, 0.9);
   OperatorSpec t2 = triangle_instance(0.7, 0.9, 1.3);
   for (Vec2 p : {Vec2{0.2, 0.3}, Vec2{0.05, 0.6}, Vec2{0.4, 0.1}}) {
      Vec2 q{p.y, p.x};
      CHECK(t1.A(p) == doctest::Approx(t2.C(q)).epsilon(1e-13));
      CHECK(t1.B(p) == doctest::Approx(t2.B(q)).epsilon(1e-13));
      CHECK(t1.D(p) == doctest::Approx(t2.E(q)).epsilon(1e-13));
   }
}

TEST_CASE("triangle drift points inward at the regular corner") {
   for (double g12 : {0.5, 1.0}) {
      for (double g13 : {0.8, 2.0}) {
         OperatorSpec tri = triangle_instance(g12, g13, 1.1);
         CHECK(tri.D({0, 0}) > 0.0);
         CHECK(tri.E({0, 0}) > 0.0);
      }
   }
}

TEST_CASE("chart-overlap consistency validates the hard-coded letters") {
   std::vector<OperatorSpec> specs;
   specs.push_back(triangle_instance(0.7, 1.3, 0.9));
   specs.push_back(unit_square_instance());
   for (const OperatorSpec& spec : specs) {
      int compared = 0;
      for (int i = 1; i < 20; ++i) {
         for (int j = 1; j < 20; ++j) {
            Vec2 p{i / 20.0, j / 20.0};
            if (!spec.inside(p, 1e-3)) continue;
            double ref = spec.apply(test_fn, p);
            for (const Chart& ch : spec.charts) {
               if (!ch.covers(p, -0.02)) continue;
               double via = ch.apply(test_fn, p);
               CHECK(std::abs(via - ref) <= 1e-8 * (1.0 + std::abs(ref)));
               ++compared;
            }
         }
      }
      CHECK(compared > 100);  // every chart actually exercised somewhere
   }
}

TEST_CASE("classification of boundary points") {
   OperatorSpec tri = triangle_instance(1.0, 1.0, 1.0);
   CHECK(classify_boundary(tri, {0.0, 0.5}) == BoundaryClass::RegularEdge);
   CHECK(classify_boundary(tri, {0.3, 0.0}) == BoundaryClass::RegularEdge);
   CHECK(classify_boundary(tri, {0.5, 0.5}) == BoundaryClass::InfinityEdge);
   CHECK(classify_boundary(tri, {0.0, 0.0}) == BoundaryClass::RegularCorner);
   CHECK(classify_boundary(tri, {1.0, 0.0}) == BoundaryClass::MixedCorner);
   CHECK(classify_boundary(tri, {0.0, 1.0}) == BoundaryClass::MixedCorner);
   OperatorSpec sq = unit_square_instance();
   CHECK(classify_boundary(sq, {0.0, 0.0}) == BoundaryClass::RegularCorner);
   CHECK(classify_boundary(sq, {1.0, 0.4}) == BoundaryClass::RegularEdge);
   CHECK_THROWS_AS(classify_boundary(sq, {0.5, 0.5}), std::invalid_argument);
}

TEST_CASE("tangent / transverse / violation on a regular edge") {
   auto make = [](CoeffFn D) {
      OperatorSpec s;
      s.A = [](Vec2 p) { return p.x; };
      s.B = [](Vec2) { return 0.0; };
      s.C = [](Vec2) { return 1.0; };
      s.D = std::move(D);
      s.E = [](Vec2) { return 0.0; };
      s.faces = {{"x0", {0, 0}, {0, 1}, {1, 0}, BoundaryClass::RegularEdge}};
      return s;
   };
   OperatorSpec trans = make([](Vec2 p) { return 1.0 + p.x; });
   CHECK(tangent_or_transverse(trans, trans.faces[0]) == EdgeKind::Transverse);
   OperatorSpec tang = make([](Vec2 p) { return p.x * (2.0 + p.y); });
   CHECK(tangent_or_transverse(tang, tang.faces[0]) == EdgeKind::Tangent);
   OperatorSpec bad = make([](Vec2 p) { return p.y - 0.5; });
   CHECK_THROWS_AS(tangent_or_transverse(bad, bad.faces[0]), AssumptionViolation);
   OperatorSpec tri = triangle_instance(0.6, 1.4, 1.0);
   CHECK(tangent_or_transverse(tri, tri.faces[0]) == EdgeKind::Transverse);
   CHECK(tangent_or_transverse(tri, tri.faces[1]) == EdgeKind::Transverse);
}

TEST_CASE("principal symbol: interior positivity and conormal vanishing order") {
   OperatorSpec tri = triangle_instance(0.9, 1.2, 0.8);
   CHECK(principal_symbol(tri, {0.3, 0.3}, 1.0, -0.5) > 0.0);
   CHECK(principal_symbol(tri, {0.3, 0.3}, -2.0, 1.0) > 0.0);
   // conormal to x=0: simple vanishing
   double s1 = principal_symbol(tri, {1e-4, 0.5}, 1.0, 0.0);
   double s2 = principal_symbol(tri, {2e-4, 0.5}, 1.0, 0.0);
   CHECK(s2 / s1 == doctest::Approx(2.0).epsilon(1e-3));
   // conormal to x+y=1: quadratic vanishing
   double r = std::sqrt(0.5);
   auto conormal = [&](double s) {
      Vec2 p{0.5 - s * r, 0.5 - s * r};
      return principal_symbol(tri, p, r, r);
   };
   CHECK(conormal(2e-4) / conormal(1e-4) == doctest::Approx(4.0).epsilon(1e-3));
}

TEST_CASE("wf_distance: pinned values") {
   CHECK(wf_distance({BoundaryClass::RegularCorner}, {0, 0}, {1, 1}) ==
         doctest::Approx(4.0).epsilon(1e-14));
   CHECK(wf_distance({BoundaryClass::InfinityEdge}, {0, 1}, {0, std::exp(1.0)}) ==
         doctest::Approx(1.0).epsilon(1e-14));
   CHECK(wf_distance({BoundaryClass::MixedCorner}, {0.4, 0.9}, {0.4, 0.9}) == 0.0);
   CHECK(wf_distance({BoundaryClass::InfinityCorner}, {1.0, 0.0}, {1.0, 1.0}) == kInf);
   CHECK(wf_distance({BoundaryClass::RegularEdge}, {0.25, 1.0}, {1.0, 0.0}) ==
         doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("wf_distance: metric axioms on random triples") {
   std::mt19937_64 rng(42);
   std::uniform_real_distribution<double> U(0.05, 3.0);
   const std::vector<BoundaryClass> classes = {
      BoundaryClass::RegularCorner, BoundaryClass::RegularEdge, BoundaryClass::MixedCorner,
      BoundaryClass::InfinityEdge, BoundaryClass::InfinityCorner};
   for (BoundaryClass cls : classes) {
      WFMetric m{cls};
      for (int k = 0; k < 10000; ++k) {
         Vec2 p{U(rng), U(rng)}, q{U(rng), U(rng)}, r{U(rng), U(rng)};
         double dpq = wf_distance(m, p, q), dqp = wf_distance(m, q, p);
         double dpr = wf_distance(m, p, r), drq = wf_distance(m, r, q);
         REQUIRE(dpq == dqp);
         REQUIRE(dpq >= 0.0);
         REQUIRE(dpq <= dpr + drq + 1e-12);
      }
      CHECK(wf_distance(m, {0.7, 0.9}, {0.7, 0.9}) == 0.0);
   }
}

TEST_CASE("expression parser") {
   Expr e("2*x^2 - y/(1+x) + sqrt(4) - exp(0)");
   CHECK(e.eval({{"x", 3.0}, {"y", 8.0}}) == doctest::Approx(18.0 - 2.0 + 2.0 - 1.0));
   Expr f("-(x - 1)*(x + 1)");
   CHECK(f.eval({{"x", 2.0}}) == doctest::Approx(-3.0));
   CHECK_THROWS(Expr("x +"));
   CHECK_THROWS(Expr("2*)x"));
}

TEST_CASE("operator loadable from config text") {
   std::string text = R"(
# all-Kimura square, custom declaration
[params]
h = 0.5

[operator]
instance = custom
name = cfg_square
A = x*(1-x)
B = 0
C = y*(1-y)
D = h - x
E = h - y
bbox = 0,1,0,1

[face.x0]
p0 = 0,0
p1 = 0,1
inward = 1,0
class = regular_edge
[face.x1]
p0 = 1,0
p1 = 1,1
inward = -1,0
class = regular_edge
[face.y0]
p0 = 0,0
p1 = 1,0
inward = 0,1
class = regular_edge
[face.y1]
p0 = 0,1
p1 = 1,1
inward = 0,-1
class = regular_edge

[corner.sw]
p = 0,0
class = regular_corner

[chart.sw]
class = regular_corner
map = 1,0,0,1
origin = 0,0
domain = 0,0.4,0,0.4
a = 1 - X
b = 0
c = 1 - Y
d = h - X
e = h - Y
)";
   std::istringstream in(text);
   Config cfg = parse_config(in);
   CHECK(cfg.get_double("params", "h") == 0.5);
   OperatorSpec spec = load_operator(cfg);
   OperatorSpec ref = unit_square_instance();
   for (Vec2 p : {Vec2{0.2, 0.3}, Vec2{0.7, 0.1}}) {
      CHECK(spec.apply(test_fn, p) == doctest::Approx(ref.apply(test_fn, p)).epsilon(1e-10));
   }
   CHECK(classify_boundary(spec, {0.0, 0.0}) == BoundaryClass::RegularCorner);
   CHECK(spec.inside({0.5, 0.5}, 0.4));
   CHECK(!spec.inside({0.5, 0.96}, 0.05));
   // built-in instances through the same entry point
   std::istringstream in2("[operator]\ninstance = triangle\ngamma12 = 1\ngamma13 = 1\ngamma23 = 1\n");
   OperatorSpec tri = load_operator(parse_config(in2));
   CHECK(tri.A({0.25, 0.25}) == doctest::Approx(7.0 / 32.0).epsilon(1e-14));
}

TEST_CASE("chart transition maps round-trip") {
   OperatorSpec tri = triangle_instance(1, 1, 1);
   const Chart* einf = nullptr;
   const Chart* cmix = nullptr;
   for (const Chart& ch : tri.charts) {
      if (ch.name == "einf") einf = &ch;
      if (ch.name == "cmix10") cmix = &ch;
   }
   REQUIRE(einf != nullptr);
   REQUIRE(cmix != nullptr);
   Vec2 g{0.3, 0.55};
   Vec2 l = einf->to_local(g);
   CHECK(einf->to_global(l).x == doctest::Approx(g.x).epsilon(1e-14));
   CHECK(einf->to_global(l).y == doctest::Approx(g.y).epsilon(1e-14));
   Vec2 via = einf->transition_to(*cmix, l);
   Vec2 direct = cmix->to_local(g);
   CHECK(via.x == doctest::Approx(direct.x).epsilon(1e-14));
   CHECK(via.y == doctest::Approx(direct.y).epsilon(1e-14));
}
