#ifndef KIMURA_GEOMETRY_HPP
#define KIMURA_GEOMETRY_HPP

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "kimura/common.hpp"
#include "kimura/models2d.hpp"

namespace kimura {

struct AssumptionViolation : std::runtime_error {
   using std::runtime_error::runtime_error;
};

enum class EdgeKind { Tangent, Transverse };

using CoeffFn = std::function<double(Vec2)>;

inline BoundaryClass boundary_class_from_name(const std::string& s) {
   if (s == "interior") return BoundaryClass::Interior;
   if (s == "regular_edge") return BoundaryClass::RegularEdge;
   if (s == "infinity_edge") return BoundaryClass::InfinityEdge;
   if (s == "regular_corner") return BoundaryClass::RegularCorner;
   if (s == "mixed_corner") return BoundaryClass::MixedCorner;
   if (s == "infinity_corner") return BoundaryClass::InfinityCorner;
   throw std::invalid_argument("unknown boundary class '" + s + "'");
}

// Vanishing factors multiplying the letters a..e in each normal form; the
// first local coordinate X carries the Kimura degeneracy (elliptic instead
// for the infinity-edge form), the second carries the quadratic one.
inline void vanishing_factors(BoundaryClass cls, Vec2 v, double& fa, double& fb,
                              double& fc, double& fd, double& fe) {
   double X = v.x, Y = v.y;
   switch (cls) {
      case BoundaryClass::Interior: fa = fb = fc = fd = fe = 1.0; return;
      case BoundaryClass::RegularEdge:
         fa = X; fb = X; fc = 1.0; fd = 1.0; fe = 1.0; return;
      case BoundaryClass::InfinityEdge:
         fa = 1.0; fb = Y; fc = Y * Y; fd = 1.0; fe = Y; return;
      case BoundaryClass::RegularCorner:
         fa = X; fb = X * Y; fc = Y; fd = 1.0; fe = 1.0; return;
      case BoundaryClass::MixedCorner:
         fa = X; fb = X * Y; fc = Y * Y; fd = 1.0; fe = Y; return;
      case BoundaryClass::InfinityCorner:
         fa = X * X; fb = X * Y; fc = Y * Y; fd = X; fe = Y; return;
   }
   throw std::invalid_argument("vanishing_factors: bad class");
}

// Full second/first-order local coefficients of a normal form: letters times
// their vanishing factors.
struct Hatted {
   double A = 0, B = 0, C = 0, D = 0, E = 0;
};

// Chart: an affine local frame (local = M*global + p0) over an axis-aligned
// local box, carrying the normal-form letters a..e as functions of the local
// coordinates.
struct Chart {
   std::string name;
   BoundaryClass cls = BoundaryClass::Interior;
   Mat2 M;      // global -> local linear part
   Vec2 p0;     // global -> local offset
   Box dom;     // local coordinates
   CoeffFn a, b, c, d, e;

   Vec2 to_local(Vec2 g) const { return M.apply(g) + p0; }
   Vec2 to_global(Vec2 l) const { return M.inverse().apply(l - p0); }
   bool covers(Vec2 g, double tol = 0.0) const { return dom.contains(to_local(g), tol); }
   Vec2 transition_to(const Chart& other, Vec2 local) const {
      return other.to_local(to_global(local));
   }

   Hatted hatted(Vec2 local) const {
      double fa, fb, fc, fd, fe;
      vanishing_factors(cls, local, fa, fb, fc, fd, fe);
      return {a(local) * fa, b(local) * fb, c(local) * fc, d(local) * fd,
              e(local) * fe};
   }

   // L f at a global point, computed in this chart's coordinates with
   // fourth-order centered differences (f must extend smoothly past faces).
   double apply(const std::function<double(Vec2)>& f, Vec2 g, double h = 4e-3) const {
      Vec2 v = to_local(g);
      Hatted H = hatted(v);
      auto fl = [&](double X, double Y) { return f(to_global({X, Y})); };
      auto d1 = [&](auto&& u, double s) {
         return (-u(s + 2 * h) + 8 * u(s + h) - 8 * u(s - h) + u(s - 2 * h)) / (12 * h);
      };
      auto d2 = [&](auto&& u, double s) {
         return (-u(s + 2 * h) + 16 * u(s + h) - 30 * u(s) + 16 * u(s - h) -
                 u(s - 2 * h)) / (12 * h * h);
      };
      auto ux = [&](double X) { return fl(X, v.y); };
      auto uy = [&](double Y) { return fl(v.x, Y); };
      auto dyf = [&](double X) {
         auto w = [&](double Y) { return fl(X, Y); };
         return d1(w, v.y);
      };
      double fX = d1(ux, v.x), fY = d1(uy, v.y);
      double fXX = d2(ux, v.x), fYY = d2(uy, v.y);
      double fXY = d1(dyf, v.x);
      return H.A * fXX + H.B * fXY + H.C * fYY + H.D * fX + H.E * fY;
   }
};

struct Face {
   std::string name;
   Vec2 p0, p1;   // global endpoints
   Vec2 inward;   // unit inward normal
   BoundaryClass cls = BoundaryClass::RegularEdge;
   Vec2 point(double s) const { return p0 + (p1 - p0) * s; }
};

struct CornerPoint {
   std::string name;
   Vec2 p;
   BoundaryClass cls = BoundaryClass::RegularCorner;
};

// A 2-D compact domain carrying the operator: global coefficients (boundary
// vanishing built in), declared faces/corners, and normal-form charts.
struct OperatorSpec {
   std::string name;
   CoeffFn A, B, C, D, E;           // global hatted coefficients
   std::vector<Face> faces;
   std::vector<CornerPoint> corners;
   std::vector<Chart> charts;
   // inside(p, m): p lies in the domain with margin m from the boundary
   std::function<bool(Vec2, double)> inside;
   Box bbox;

   double apply(const std::function<double(Vec2)>& f, Vec2 p, double h = 4e-3) const {
      auto d1 = [&](auto&& u, double s) {
         return (-u(s + 2 * h) + 8 * u(s + h) - 8 * u(s - h) + u(s - 2 * h)) / (12 * h);
      };
      auto d2 = [&](auto&& u, double s) {
         return (-u(s + 2 * h) + 16 * u(s + h) - 30 * u(s) + 16 * u(s - h) -
                 u(s - 2 * h)) / (12 * h * h);
      };
      auto ux = [&](double x) { return f({x, p.y}); };
      auto uy = [&](double y) { return f({p.x, y}); };
      auto dyf = [&](double x) {
         auto w = [&](double y) { return f({x, y}); };
         return d1(w, p.y);
      };
      return A(p) * d2(ux, p.x) + B(p) * d1(dyf, p.x) + C(p) * d2(uy, p.y) +
             D(p) * d1(ux, p.x) + E(p) * d1(uy, p.y);
   }
};

inline double principal_symbol(const OperatorSpec& spec, Vec2 p, double xi, double eta) {
   return spec.A(p) * xi * xi + spec.B(p) * xi * eta + spec.C(p) * eta * eta;
}

// --- boundary classification ------------------------------------------------

// Tangent iff the inward normal drift vanishes identically on the face;
// Transverse iff it is strictly positive; anything else violates the standing
// assumption and the theory does not apply.
inline EdgeKind tangent_or_transverse(const OperatorSpec& spec, const Face& face) {
   if (face.cls != BoundaryClass::RegularEdge)
      throw std::invalid_argument("tangent_or_transverse: face is not a regular edge");
   double max_abs = 0.0, min_val = kInf, scale = 1.0;
   for (int i = 1; i < 32; ++i) {
      Vec2 p = face.point(i / 32.0);
      double dn = spec.D(p) * face.inward.x + spec.E(p) * face.inward.y;
      max_abs = std::max(max_abs, std::abs(dn));
      min_val = std::min(min_val, dn);
      scale = std::max(scale, std::abs(spec.A(p)) + std::abs(spec.B(p)) +
                                 std::abs(spec.C(p)) + std::abs(spec.D(p)) +
                                 std::abs(spec.E(p)));
   }
   if (max_abs <= 1e-12 * scale) return EdgeKind::Tangent;
   if (min_val > 0.0) return EdgeKind::Transverse;
   throw AssumptionViolation("drift on regular edge '" + face.name +
                             "' is neither tangent nor transverse");
}

namespace detail {

// least-squares slope of ln(sigma_nn) vs ln(s) along the inward normal
inline double vanishing_order(const OperatorSpec& spec, Vec2 p, Vec2 n) {
   const int m = 8;
   double sx = 0, sy = 0, sxx = 0, sxy = 0;
   for (int k = 0; k < m; ++k) {
      double s = 1e-4 * std::pow(2.0, k);
      Vec2 q = p + n * s;
      double v = principal_symbol(spec, q, n.x, n.y);
      if (!(v > 0.0))
         throw std::runtime_error("vanishing_order: symbol not positive off the face");
      double lx = std::log(s), ly = std::log(v);
      sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
   }
   return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

}  // namespace detail

// Declared class of a boundary point, cross-checked against the measured
// vanishing order of the normal-normal principal coefficient.
inline BoundaryClass classify_boundary(const OperatorSpec& spec, Vec2 p,
                                       double tol = 1e-9) {
   for (const CornerPoint& c : spec.corners) {
      Vec2 d = p - c.p;
      if (std::abs(d.x) <= tol && std::abs(d.y) <= tol) return c.cls;
   }
   for (const Face& f : spec.faces) {
      Vec2 e = f.p1 - f.p0;
      double len2 = e.x * e.x + e.y * e.y;
      double s = ((p.x - f.p0.x) * e.x + (p.y - f.p0.y) * e.y) / len2;
      if (s < -tol || s > 1.0 + tol) continue;
      Vec2 foot = f.point(s);
      Vec2 d = p - foot;
      if (std::hypot(d.x, d.y) > tol) continue;
      double order = detail::vanishing_order(spec, p, f.inward);
      double expected = f.cls == BoundaryClass::RegularEdge ? 1.0 : 2.0;
      if (std::abs(order - expected) > 0.1 * expected)
         throw std::runtime_error("classify_boundary: declared class of face '" +
                                  f.name + "' contradicts fitted vanishing order " +
                                  std::to_string(order));
      return f.cls;
   }
   throw std::invalid_argument("classify_boundary: point is not on the boundary");
}

// --- metrics ----------------------------------------------------------------

struct WFMetric {
   BoundaryClass cls = BoundaryClass::RegularCorner;
};

namespace detail {

inline double sqrt_term(double x, double xp) {
   if (x < 0.0 || xp < 0.0) throw std::domain_error("wf_distance: negative Kimura coordinate");
   return 2.0 * std::abs(std::sqrt(x) - std::sqrt(xp));
}

inline double log_term(double y, double yp) {
   if (y == yp) return 0.0;
   if (y <= 0.0 || yp <= 0.0) return kInf;  // boundary at infinite distance
   return std::abs(std::log(y) - std::log(yp));
}

}  // namespace detail

inline double wf_distance(const WFMetric& m, Vec2 p, Vec2 q) {
   switch (m.cls) {
      case BoundaryClass::RegularCorner:
         return detail::sqrt_term(p.x, q.x) + detail::sqrt_term(p.y, q.y);
      case BoundaryClass::MixedCorner:
         return detail::sqrt_term(p.x, q.x) + detail::log_term(p.y, q.y);
      case BoundaryClass::InfinityCorner:
         return detail::log_term(p.x, q.x) + detail::log_term(p.y, q.y);
      case BoundaryClass::RegularEdge:
         return detail::sqrt_term(p.x, q.x) + std::abs(p.y - q.y);
      case BoundaryClass::InfinityEdge:
         return std::abs(p.x - q.x) + detail::log_term(p.y, q.y);
      case BoundaryClass::Interior:
         throw std::invalid_argument("wf_distance: no metric for interior class");
   }
   throw std::invalid_argument("wf_distance: bad class");
}

// --- invariants --------------------------------------------------------------

// Sampled checks of the structural requirements: positive letters a, c on
// chart closures, interior ellipticity, and tangent-or-transverse drift on
// every regular edge.
inline void validate_spec(const OperatorSpec& spec) {
   for (const Chart& ch : spec.charts) {
      if (ch.cls == BoundaryClass::Interior) continue;
      for (int i = 0; i <= 20; ++i) {
         for (int j = 0; j <= 20; ++j) {
            Vec2 v{ch.dom.x0 + (ch.dom.x1 - ch.dom.x0) * i / 20.0,
                   ch.dom.y0 + (ch.dom.y1 - ch.dom.y0) * j / 20.0};
            if (!(ch.a(v) > 0.0) || !(ch.c(v) > 0.0))
               throw std::runtime_error("validate_spec: letter a or c not positive on chart '" +
                                        ch.name + "'");
         }
      }
   }
   for (int i = 1; i < 24; ++i) {
      for (int j = 1; j < 24; ++j) {
         Vec2 p{spec.bbox.x0 + (spec.bbox.x1 - spec.bbox.x0) * i / 24.0,
                spec.bbox.y0 + (spec.bbox.y1 - spec.bbox.y0) * j / 24.0};
         if (!spec.inside(p, 0.05)) continue;
         double a = spec.A(p), b = spec.B(p), c = spec.C(p);
         if (!(a > 0.0) || !(c > 0.0) || !(4.0 * a * c - b * b > 0.0))
            throw std::runtime_error("validate_spec: principal symbol not positive definite");
      }
   }
   for (const Face& f : spec.faces)
      if (f.cls == BoundaryClass::RegularEdge) (void)tangent_or_transverse(spec, f);
}

// --- built-in instances -------------------------------------------------------

// Three-parameter mixed-type operator on the triangle {x,y >= 0, x+y <= 1}:
// edges x=0 and y=0 are regular Kimura edges, the hypotenuse x+y=1 is an
// infinity edge (quadratic degeneracy), corners (0,0) regular, (1,0) and
// (0,1) mixed.  Coefficients are exact polynomial expansions of the
// three-term pair-interaction generator; letters per chart were extracted by
// computer algebra and are cross-checked by the chart-overlap test.
inline OperatorSpec triangle_instance(double g12, double g13, double g23) {
   if (!(g12 > 0.0) || !(g13 > 0.0) || !(g23 > 0.0))
      throw std::invalid_argument("triangle_instance: all rate parameters must be positive");

   OperatorSpec spec;
   spec.name = "triangle";
   spec.A = [=](Vec2 p) {
      double x = p.x, y = p.y;
      return x * (g12 * y + g13 * x * x - 2 * g13 * x + g13 + g23 * x * y);
   };
   spec.B = [=](Vec2 p) {
      double x = p.x, y = p.y;
      return 2 * x * y * (-g12 + g13 * x - g13 + g23 * y - g23);
   };
   spec.C = [=](Vec2 p) {
      double x = p.x, y = p.y;
      return y * (g12 * x + g13 * x * y + g23 * y * y - 2 * g23 * y + g23);
   };
   spec.D = [=](Vec2 p) {
      double x = p.x, y = p.y;
      return -g12 * x + g12 * y + 2 * g13 * x * x - 3 * g13 * x + g13 +
             2 * g23 * x * y - g23 * x;
   };
   spec.E = [=](Vec2 p) {
      double x = p.x, y = p.y;
      return g12 * x - g12 * y + 2 * g13 * x * y - g13 * y + 2 * g23 * y * y -
             3 * g23 * y + g23;
   };
   spec.inside = [](Vec2 p, double m) {
      return p.x >= m && p.y >= m && p.x + p.y <= 1.0 - m * std::sqrt(2.0);
   };
   spec.bbox = {0, 1, 0, 1};

   double rt2 = std::sqrt(0.5);
   spec.faces = {
      {"x0", {0, 0}, {0, 1}, {1, 0}, BoundaryClass::RegularEdge},
      {"y0", {0, 0}, {1, 0}, {0, 1}, BoundaryClass::RegularEdge},
      {"hyp", {1, 0}, {0, 1}, {-rt2, -rt2}, BoundaryClass::InfinityEdge},
   };
   spec.corners = {
      {"origin", {0, 0}, BoundaryClass::RegularCorner},
      {"x1", {1, 0}, BoundaryClass::MixedCorner},
      {"y1", {0, 1}, BoundaryClass::MixedCorner},
   };

   Chart interior;
   interior.name = "interior";
   interior.cls = BoundaryClass::Interior;
   interior.dom = {0.0, 1.0, 0.0, 1.0};
   interior.a = spec.A; interior.b = spec.B; interior.c = spec.C;
   interior.d = spec.D; interior.e = spec.E;

   Chart creg00;
   creg00.name = "creg00";
   creg00.cls = BoundaryClass::RegularCorner;
   creg00.dom = {0.0, 0.35, 0.0, 0.35};
   creg00.a = [=](Vec2 v) {
      double X = v.x, Y = v.y;
      return X * X * g13 + X * Y * g23 - 2 * X * g13 + Y * g12 + g13;
   };
   creg00.b = [=](Vec2 v) {
      double X = v.x, Y = v.y;
      return 2 * X * g13 + 2 * Y * g23 - 2 * g12 - 2 * g13 - 2 * g23;
   };
   creg00.c = [=](Vec2 v) {
      double X = v.x, Y = v.y;
      return X * Y * g13 + X * g12 + Y * Y * g23 - 2 * Y * g23 + g23;
   };
   creg00.d = [=](Vec2 v) {
      double X = v.x, Y = v.y;
      return 2 * X * X * g13 + 2 * X * Y * g23 - X * g12 - 3 * X * g13 - X * g23 +
             Y * g12 + g13;
   };
   creg00.e = [=](Vec2 v) {
      double X = v.x, Y = v.y;
      return 2 * X * Y * g13 + X * g12 + 2 * Y * Y * g23 - Y * g12 - Y * g13 -
             3 * Y * g23 + g23;
   };

   Chart ereg_x0;
   ereg_x0.name = "ereg_x0";
   ereg_x0.cls = BoundaryClass::RegularEdge;
   ereg_x0.dom = {0.0, 0.12, 0.02, 0.98};
   ereg_x0.a = creg00.a;
   ereg_x0.b = [=](Vec2 v) {
      double X = v.x, Y = v.y;
      return 2 * X * Y * g13 + 2 * Y * Y * g23 - 2 * Y * g12 - 2 * Y * g13 -
             2 * Y * g23;
   };
   ereg_x0.c = [=](Vec2 v) {
      double X = v.x, Y = v.y;
      return X * Y * Y * g13 + X * Y * g12 + Y * Y * Y * g23 - 2 * Y * Y * g23 +
             Y * g23;
   };
   ereg_x0.d = creg00.d;
   ereg_x0.e = creg00.e;

   Chart ereg_y0;
   ereg_y0.name = "ereg_y0";
   ereg_y0.cls = BoundaryClass::RegularEdge;
   ereg_y0.M = {0, 1, 1, 0};  // (X,Y) = (y,x)
   ereg_y0.dom = {0.0, 0.12, 0.02, 0.98};
   ereg_y0.a = [=](Vec2 v) {
      double X = v.x, Y = v.y;
      return X * X * g23 + X * Y * g13 - 2 * X * g23 + Y * g12 + g23;
   };
   ereg_y0.b = [=](Vec2 v) {
      double X = v.x, Y = v.y;
      return 2 * X * Y * g23 + 2 * Y * Y * g13 - 2 * Y * g12 - 2 * Y * g13 -
             2 * Y * g23;
   };
   ereg_y0.c = [=](Vec2 v) {
      double X = v.x, Y = v.y;
      return X * Y * Y * g23 + X * Y * g12 + Y * Y * Y * g13 - 2 * Y * Y * g13 +
             Y * g13;
   };
   ereg_y0.d = [=](Vec2 v) {
      double X = v.x, Y = v.y;
      return 2 * X * X * g23 + 2 * X * Y * g13 - X * g12 - X * g13 - 3 * X * g23 +
             Y * g12 + g23;
   };
   ereg_y0.e = [=](Vec2 v) {
      double X = v.x, Y = v.y;
      return 2 * X * Y * g23 + X * g12 + 2 * Y * Y * g13 - Y * g12 - 3 * Y * g13 -
             Y * g23 + g13;
   };

   Chart cmix10;
   cmix10.name = "cmix10";
   cmix10.cls = BoundaryClass::MixedCorner;
   cmix10.M = {0, 1, -1, -1};  // (X,Y) = (y, 1-x-y)
   cmix10.p0 = {0, 1};
   cmix10.dom = {0.0, 0.35, 0.0, 0.35};
   cmix10.a = [=](Vec2 v) {
      double X = v.x, Y = v.y;
      return -X * X * g13 + X * X * g23 - X * Y * g13 - X * g12 + X * g13 -
             2 * X * g23 - Y * g12 + g12 + g23;
   };
   cmix10.b = [=](Vec2 v) {
      double X = v.x, Y = v.y;
      return -2 * (X * g13 - X * g23 + Y * g13 - g13 + g23);
   };
   cmix10.c = [=](Vec2 v) {
      double X = v.x, Y = v.y;
      return -X * g13 + X * g23 - Y * g13 + g13;
   };
   cmix10.d = [=](Vec2 v) {
      double X = v.x, Y = v.y;
      return -2 * X * X * g13 + 2 * X * X * g23 - 2 * X * Y * g13 - 2 * X * g12 +
             X * g13 - 3 * X * g23 - Y * g12 + g12 + g23;
   };
   cmix10.e = [=](Vec2 v) {
      double X = v.x, Y = v.y;
      return -2 * X * g13 + 2 * X * g23 - 2 * Y * g13 + g13 - g23;
   };

   Chart cmix01;
   cmix01.name = "cmix01";
   cmix01.cls = BoundaryClass::MixedCorner;
   cmix01.M = {1, 0, -1, -1};  // (X,Y) = (x, 1-x-y)
   cmix01.p0 = {0, 1};
   cmix01.dom = {0.0, 0.35, 0.0, 0.35};
   cmix01.a = [=](Vec2 v) {
      double X = v.x, Y = v.y;
      return X * X * g13 - X * X * g23 - X * Y * g23 - X * g12 - 2 * X * g13 +
             X * g23 - Y * g12 + g12 + g13;
   };
   cmix01.b = [=](Vec2 v) {
      double X = v.x, Y = v.y;
      return 2 * (X * g13 - X * g23 - Y * g23 - g13 + g23);
   };
   cmix01.c = [=](Vec2 v) {
      double X = v.x, Y = v.y;
      return X * g13 - X * g23 - Y * g23 + g23;
   };
   cmix01.d = [=](Vec2 v) {
      double X = v.x, Y = v.y;
      return 2 * X * X * g13 - 2 * X * X * g23 - 2 * X * Y * g23 - 2 * X * g12 -
             3 * X * g13 + X * g23 - Y * g12 + g12 + g13;
   };
   cmix01.e = [=](Vec2 v) {
      double X = v.x, Y = v.y;
      return 2 * X * g13 - 2 * X * g23 - 2 * Y * g23 - g13 + g23;
   };

   Chart einf;
   einf.name = "einf";
   einf.cls = BoundaryClass::InfinityEdge;
   einf.M = {-1, 1, -1, -1};  // (X,Y) = (y-x, 1-x-y)
   einf.p0 = {0, 1};
   einf.dom = {-0.97, 0.97, 0.0, 0.02};
   einf.a = [=](Vec2 v) {
      double X = v.x, Y = v.y;
      return -(X * X * X * g13 - X * X * X * g23 + X * X * Y * g13 + X * X * Y * g23 +
               2 * X * X * g12 + X * X * g13 + X * X * g23 + 2 * X * Y * g13 -
               2 * X * Y * g23 - X * g13 + X * g23 - 2 * Y * Y * g12 + 4 * Y * g12 +
               Y * g13 + Y * g23 - 2 * g12 - g13 - g23) / 2;
   };
   einf.b = [=](Vec2 v) {
      double X = v.x, Y = v.y;
      return -X * X * g13 + X * X * g23 - X * Y * g13 - X * Y * g23 - Y * g13 +
             Y * g23 + g13 - g23;
   };
   einf.c = [=](Vec2 v) {
      double X = v.x, Y = v.y;
      return (-X * g13 + X * g23 - Y * g13 - Y * g23 + g13 + g23) / 2;
   };
   einf.d = [=](Vec2 v) {
      double X = v.x, Y = v.y;
      return -X * X * g13 + X * X * g23 - X * Y * g13 - X * Y * g23 - 2 * X * g12 -
             X * g13 - X * g23 - Y * g13 + Y * g23;
   };
   einf.e = [=](Vec2 v) {
      double X = v.x, Y = v.y;
      return -X * g13 + X * g23 - Y * g13 - Y * g23;
   };

   spec.charts = {interior, creg00, ereg_x0, ereg_y0, cmix10, cmix01, einf};
   validate_spec(spec);
   return spec;
}

// All-Kimura operator on the unit square: A = x(1-x), C = y(1-y), drift
// (1/2 - x, 1/2 - y).  Every edge is regular and transverse, every corner
// regular.
inline OperatorSpec unit_square_instance() {
   OperatorSpec spec;
   spec.name = "unit_square";
   spec.A = [](Vec2 p) { return p.x * (1.0 - p.x); };
   spec.B = [](Vec2) { return 0.0; };
   spec.C = [](Vec2 p) { return p.y * (1.0 - p.y); };
   spec.D = [](Vec2 p) { return 0.5 - p.x; };
   spec.E = [](Vec2 p) { return 0.5 - p.y; };
   spec.inside = [](Vec2 p, double m) {
      return p.x >= m && p.x <= 1.0 - m && p.y >= m && p.y <= 1.0 - m;
   };
   spec.bbox = {0, 1, 0, 1};
   spec.faces = {
      {"x0", {0, 0}, {0, 1}, {1, 0}, BoundaryClass::RegularEdge},
      {"x1", {1, 0}, {1, 1}, {-1, 0}, BoundaryClass::RegularEdge},
      {"y0", {0, 0}, {1, 0}, {0, 1}, BoundaryClass::RegularEdge},
      {"y1", {0, 1}, {1, 1}, {0, -1}, BoundaryClass::RegularEdge},
   };
   spec.corners = {
      {"sw", {0, 0}, BoundaryClass::RegularCorner},
      {"se", {1, 0}, BoundaryClass::RegularCorner},
      {"nw", {0, 1}, BoundaryClass::RegularCorner},
      {"ne", {1, 1}, BoundaryClass::RegularCorner},
   };

   // the same letters serve every reflected frame
   CoeffFn one_mX = [](Vec2 v) { return 1.0 - v.x; };
   CoeffFn one_mY = [](Vec2 v) { return 1.0 - v.y; };
   CoeffFn half_mX = [](Vec2 v) { return 0.5 - v.x; };
   CoeffFn half_mY = [](Vec2 v) { return 0.5 - v.y; };
   CoeffFn zero = [](Vec2) { return 0.0; };
   CoeffFn y_onemy = [](Vec2 v) { return v.y * (1.0 - v.y); };

   Chart interior;
   interior.name = "interior";
   interior.cls = BoundaryClass::Interior;
   interior.dom = {0, 1, 0, 1};
   interior.a = spec.A; interior.b = spec.B; interior.c = spec.C;
   interior.d = spec.D; interior.e = spec.E;
   spec.charts.push_back(interior);

   struct Frame { std::string name; Mat2 M; Vec2 p0; };
   std::vector<Frame> corner_frames = {
      {"sw", {1, 0, 0, 1}, {0, 0}},
      {"se", {-1, 0, 0, 1}, {1, 0}},
      {"nw", {1, 0, 0, -1}, {0, 1}},
      {"ne", {-1, 0, 0, -1}, {1, 1}},
   };
   for (const Frame& fr : corner_frames) {
      Chart ch;
      ch.name = "corner_" + fr.name;
      ch.cls = BoundaryClass::RegularCorner;
      ch.M = fr.M;
      ch.p0 = fr.p0;
      ch.dom = {0.0, 0.4, 0.0, 0.4};
      ch.a = one_mX; ch.b = zero; ch.c = one_mY; ch.d = half_mX; ch.e = half_mY;
      spec.charts.push_back(ch);
   }
   std::vector<Frame> edge_frames = {
      {"x0", {1, 0, 0, 1}, {0, 0}},
      {"x1", {-1, 0, 0, 1}, {1, 0}},
      {"y0", {0, 1, 1, 0}, {0, 0}},
      {"y1", {0, -1, 1, 0}, {1, 0}},
   };
   for (const Frame& fr : edge_frames) {
      Chart ch;
      ch.name = "edge_" + fr.name;
      ch.cls = BoundaryClass::RegularEdge;
      ch.M = fr.M;
      ch.p0 = fr.p0;
      ch.dom = {0.0, 0.4, 0.02, 0.98};
      ch.a = one_mX; ch.b = zero; ch.c = y_onemy; ch.d = half_mX; ch.e = half_mY;
      spec.charts.push_back(ch);
   }
   validate_spec(spec);
   return spec;
}

}  // namespace kimura

#endif  // KIMURA_GEOMETRY_HPP
