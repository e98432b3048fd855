#ifndef KIMURA_SAMPLING_HPP
#define KIMURA_SAMPLING_HPP

#include <cmath>
#include <ostream>
#include <random>
#include <vector>

#include "kimura/geometry.hpp"

namespace kimura {

// Exact draw from the 1-D degenerate transition density p^d_t(x, .): a
// Poisson(x/t) mixture of Gamma(d + N, scale t) variables.  For d = 0 and
// N = 0 the draw is exactly 0, reproducing the atom with mass e^{-x/t}.
inline double exact_cir_sample(double d, double t, double x, std::mt19937_64& rng) {
   if (d < 0.0 || !(t > 0.0) || x < 0.0)
      throw std::invalid_argument("exact_cir_sample: need d >= 0, t > 0, x >= 0");
   long n = 0;
   if (x > 0.0) {
      std::poisson_distribution<long> pois(x / t);
      n = pois(rng);
   }
   double shape = d + static_cast<double>(n);
   if (shape == 0.0) return 0.0;
   std::gamma_distribution<double> gamma(shape, t);
   return gamma(rng);
}

struct PathStats {
   Vec2 end;
   double min_inf_dist = kInf;  // least perpendicular distance to any infinity face
};

struct PathEnsemble {
   double T = 0.0;
   double dt = 0.0;
   std::vector<PathStats> paths;
   // optional trajectories, recorded every record_every steps
   int record_every = 0;
   std::vector<std::vector<Vec2>> trajectories;
};

// header: t,x,y,path_id -- trajectories when recorded, endpoints otherwise
inline void write_paths_csv(const PathEnsemble& ens, std::ostream& os) {
   os << "t,x,y,path_id\n";
   if (ens.record_every > 0) {
      for (std::size_t p = 0; p < ens.trajectories.size(); ++p) {
         const auto& tr = ens.trajectories[p];
         for (std::size_t k = 0; k < tr.size(); ++k)
            os << k * ens.record_every * ens.dt << ',' << tr[k].x << ',' << tr[k].y
               << ',' << p << '\n';
      }
   } else {
      for (std::size_t p = 0; p < ens.paths.size(); ++p)
         os << ens.T << ',' << ens.paths[p].end.x << ',' << ens.paths[p].end.y << ','
            << p << '\n';
   }
}

namespace detail {

struct StepCoeffs {
   double A, B, C, D, E;
};

inline StepCoeffs eval_coeffs(const OperatorSpec& spec, Vec2 p) {
   return {std::max(spec.A(p), 0.0), spec.B(p), std::max(spec.C(p), 0.0), spec.D(p),
           spec.E(p)};
}

}  // namespace detail

// Euler--Maruyama paths of the diffusion generated by the operator:
// covariance [[2A, B], [B, 2C]], drift (D, E).  Kimura faces are handled by
// full truncation (coefficients evaluated at the projected point, iterate
// projected back); within a collar of an infinity face the perpendicular
// distance is stepped exponentially in log coordinates, which keeps the face
// unattainable exactly as it is for the continuous process.  Deterministic:
// path i uses the substream (seed, i) regardless of thread count.
inline PathEnsemble mc_paths(const OperatorSpec& spec, Vec2 start, double T,
                             int n_paths, double dt, std::uint64_t seed,
                             int threads = 0, int record_every = 0) {
   if (!spec.inside(start, 0.0))
      throw std::invalid_argument("mc_paths: start must lie in the domain");
   std::vector<const Face*> inf_faces, reg_faces;
   for (const Face& f : spec.faces) {
      if (f.cls == BoundaryClass::InfinityEdge)
         inf_faces.push_back(&f);
      else
         reg_faces.push_back(&f);
   }
   const int steps = std::max(1, static_cast<int>(std::llround(T / dt)));
   const double log_collar = 0.1;

   PathEnsemble ens;
   ens.T = steps * dt;
   ens.dt = dt;
   ens.paths.resize(n_paths);
   ens.record_every = record_every;
   if (record_every > 0) ens.trajectories.resize(n_paths);

   parallel_for(static_cast<std::size_t>(n_paths), [&](std::size_t ip) {
      std::mt19937_64 rng(substream_seed(seed, ip));
      std::normal_distribution<double> N01(0.0, 1.0);
      Vec2 p = start;
      double min_inf = kInf;
      auto project = [&](Vec2 q) {
         for (const Face* f : reg_faces) {
            double s = (q.x - f->p0.x) * f->inward.x + (q.y - f->p0.y) * f->inward.y;
            if (s < 0.0) q = q - f->inward * s;
         }
         return q;
      };
      if (record_every > 0) ens.trajectories[ip].push_back(p);
      for (int s = 0; s < steps; ++s) {
         const Face* nearest = nullptr;
         double u = kInf;
         for (const Face* f : inf_faces) {
            double d = (p.x - f->p0.x) * f->inward.x + (p.y - f->p0.y) * f->inward.y;
            if (d < u) {
               u = d;
               nearest = f;
            }
         }
         if (nearest != nullptr) min_inf = std::min(min_inf, u);
         detail::StepCoeffs c = detail::eval_coeffs(spec, p);
         double z1 = N01(rng), z2 = N01(rng);
         if (nearest != nullptr && u < log_collar) {
            // face frame: n inward, t tangent; log-step the distance u
            Vec2 n = nearest->inward;
            Vec2 tg{-n.y, n.x};
            double Qn = c.A * n.x * n.x + c.B * n.x * n.y + c.C * n.y * n.y;
            double Qt = c.A * tg.x * tg.x + c.B * tg.x * tg.y + c.C * tg.y * tg.y;
            double cov = 2.0 * c.A * n.x * tg.x + c.B * (n.x * tg.y + n.y * tg.x) +
                         2.0 * c.C * n.y * tg.y;
            double Dn = c.D * n.x + c.E * n.y;
            double Dt = c.D * tg.x + c.E * tg.y;
            double vu = 2.0 * Qn, vv = 2.0 * Qt;
            double s11 = std::sqrt(vu);
            double s21 = s11 > 0.0 ? cov / s11 : 0.0;
            double s22 = std::sqrt(std::max(vv - s21 * s21, 0.0));
            double du = s11 * z1 * std::sqrt(dt);
            double dv = (s21 * z1 + s22 * z2) * std::sqrt(dt) + Dt * dt;
            double dlnu = (Dn / u - Qn / (u * u)) * dt + du / u;
            double v = (p.x - nearest->p0.x) * tg.x + (p.y - nearest->p0.y) * tg.y;
            double un = u * std::exp(dlnu);
            double vn = v + dv;
            p = Vec2{nearest->p0.x, nearest->p0.y} + n * un + tg * vn;
         } else {
            double s11 = std::sqrt(2.0 * c.A);
            double s21 = s11 > 0.0 ? c.B / s11 : 0.0;
            double s22 = std::sqrt(std::max(2.0 * c.C - s21 * s21, 0.0));
            p.x += c.D * dt + s11 * z1 * std::sqrt(dt);
            p.y += c.E * dt + (s21 * z1 + s22 * z2) * std::sqrt(dt);
         }
         p = project(p);
         if (record_every > 0 && (s + 1) % record_every == 0)
            ens.trajectories[ip].push_back(p);
      }
      ens.paths[ip] = {p, min_inf};
   }, threads);
   return ens;
}

}  // namespace kimura

#endif  // KIMURA_SAMPLING_HPP
