#ifndef KIMURA_TESTS_SYNTHETIC_HPP
#define KIMURA_TESTS_SYNTHETIC_HPP

#include "kimura/geometry.hpp"

// Constant-letter regular corner on the unit square: L = x uxx + y uyy + ux + uy.
// The top/right sides are artificial cutoffs, not boundary faces; tests stay at
// small times or away from them.  All chart letters are constant, so every
// frozen model matches the operator exactly on its chart.
inline kimura::OperatorSpec const_corner_spec() {
   using namespace kimura;
   OperatorSpec s;
   s.name = "const_corner";
   s.bbox = {0, 1, 0, 1};
   auto one = [](Vec2) { return 1.0; };
   auto zero = [](Vec2) { return 0.0; };
   Chart corner;
   corner.name = "c";
   corner.cls = BoundaryClass::RegularCorner;
   corner.dom = {0, 1, 0, 1};
   corner.M = {1, 0, 0, 1};
   corner.p0 = {0, 0};
   corner.a = one; corner.b = zero; corner.c = one; corner.d = one; corner.e = one;
   Chart ex = corner;
   ex.name = "ex0";
   ex.cls = BoundaryClass::RegularEdge;  // first coordinate Kimura, second tangential
   ex.dom = {0, 0.12, 0.0, 1.0};
   Chart ey = ex;
   ey.name = "ey0";
   ey.M = {0, 1, 1, 0};  // swap: the y=0 face becomes the first local coordinate
   s.charts = {corner, ex, ey};
   s.A = [](Vec2 p) { return p.x; };
   s.B = [](Vec2) { return 0.0; };
   s.C = [](Vec2 p) { return p.y; };
   s.D = one;
   s.E = one;
   s.faces = {{"x0", {0, 0}, {0, 1}, {1, 0}, BoundaryClass::RegularEdge},
              {"y0", {0, 0}, {1, 0}, {0, 1}, BoundaryClass::RegularEdge}};
   s.corners = {{"sw", {0, 0}, BoundaryClass::RegularCorner}};
   s.inside = [](Vec2 p, double m) {
      return p.x >= m && p.y >= m && p.x <= 1 - m && p.y <= 1 - m;
   };
   return s;
}

#endif
