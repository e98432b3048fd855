#ifndef KIMURA_COMMON_HPP
#define KIMURA_COMMON_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace kimura {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Vec2 {
   double x = 0.0, y = 0.0;
   Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
   Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
   Vec2 operator*(double s) const { return {x * s, y * s}; }
};

// Row-major 2x2 matrix, enough linear algebra for chart maps.
struct Mat2 {
   double m00 = 1.0, m01 = 0.0, m10 = 0.0, m11 = 1.0;
   Vec2 apply(Vec2 v) const { return {m00 * v.x + m01 * v.y, m10 * v.x + m11 * v.y}; }
   double det() const { return m00 * m11 - m01 * m10; }
   Mat2 inverse() const {
      double d = det();
      if (std::abs(d) < 1e-300) throw std::runtime_error("singular 2x2 matrix");
      return {m11 / d, -m01 / d, -m10 / d, m00 / d};
   }
   Mat2 transpose() const { return {m00, m10, m01, m11}; }
};

struct Box {
   double x0 = 0.0, x1 = 0.0, y0 = 0.0, y1 = 0.0;
   bool contains(Vec2 p, double tol = 0.0) const {
      return p.x >= x0 - tol && p.x <= x1 + tol && p.y >= y0 - tol && p.y <= y1 + tol;
   }
};

// --- smooth bump profiles -------------------------------------------------
//
// step01(s): C^inf monotone step, 0 for s<=0, 1 for s>=1, built from the
// standard exp(-1/s) mollifier.
inline double mollify(double s) { return s <= 0.0 ? 0.0 : std::exp(-1.0 / s); }

inline double step01(double s) {
   if (s <= 0.0) return 0.0;
   if (s >= 1.0) return 1.0;
   double a = mollify(s), b = mollify(1.0 - s);
   return a / (a + b);
}

// bump(r; r1, r0): identically 1 for |r| <= r1, 0 for |r| >= r0, smooth.
inline double bump(double r, double r1, double r0) {
   return step01((r0 - std::abs(r)) / (r0 - r1));
}

// First/second derivatives of bump in r, by high-order central differences
// (the profiles only enter measured residuals, never tight tolerances).
inline double bump_d1(double r, double r1, double r0) {
   double h = 1e-5 * (r0 - r1);
   return (bump(r + h, r1, r0) - bump(r - h, r1, r0)) / (2 * h);
}
inline double bump_d2(double r, double r1, double r0) {
   double h = 3e-4 * (r0 - r1);
   return (bump(r + h, r1, r0) - 2 * bump(r, r1, r0) + bump(r - h, r1, r0)) / (h * h);
}

// --- deterministic parallel map ------------------------------------------
//
// Thread count resolved once per call; results independent of it because
// each index computes in isolation.
inline int resolve_threads(int requested) {
   if (requested > 0) return requested;
   if (const char* env = std::getenv("KIMURA_THREADS")) {
      int n = std::atoi(env);
      if (n > 0) return n;
   }
   unsigned hc = std::thread::hardware_concurrency();
   return hc == 0 ? 1 : static_cast<int>(hc);
}

inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body,
                         int threads = 0) {
   int nt = resolve_threads(threads);
   if (nt <= 1 || n < 2) {
      for (std::size_t i = 0; i < n; ++i) body(i);
      return;
   }
   std::vector<std::thread> pool;
   std::size_t chunk = (n + nt - 1) / nt;
   for (int t = 0; t < nt; ++t) {
      std::size_t lo = t * chunk, hi = std::min(n, lo + chunk);
      if (lo >= hi) break;
      pool.emplace_back([&body, lo, hi] {
         for (std::size_t i = lo; i < hi; ++i) body(i);
      });
   }
   for (auto& th : pool) th.join();
}

// splitmix64: used to derive independent per-path RNG substreams.
inline std::uint64_t splitmix64(std::uint64_t& state) {
   std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
   z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
   z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
   return z ^ (z >> 31);
}

inline std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index) {
   std::uint64_t s = seed;
   (void)splitmix64(s);
   s ^= 0x5851f42d4c957f2dULL * (index + 1);
   return splitmix64(s);
}

}  // namespace kimura

#endif  // KIMURA_COMMON_HPP
