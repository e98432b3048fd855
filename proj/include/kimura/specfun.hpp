#ifndef KIMURA_SPECFUN_HPP
#define KIMURA_SPECFUN_HPP

#include <cmath>
#include <stdexcept>

#include "kimura/common.hpp"

namespace kimura {

// Switch point between the power series and the asymptotic (scaled-Bessel)
// evaluation of psi_d.  At z = 100 the Bessel argument is 2*sqrt(z) = 20,
// where the optimally truncated asymptotic series reaches ~1e-17 relative;
// the overlap band [50, 200] then agrees to well below 1e-10.
struct PsiEvalRegime {
   double threshold_z = 100.0;
};

inline double ln_gamma(double x) {
   if (!(x > 0.0)) throw std::domain_error("ln_gamma: requires x > 0");
   return std::lgamma(x);
}

namespace detail {

// Power series sum_{k>=0} z^k / (k! Gamma(d+k)) for d > 0.  All terms are
// positive, so there is no cancellation; terms follow the two-term
// recurrence t_{k+1} = t_k * z / ((k+1)(d+k)).
inline double psi_series_pos(double d, double z) {
   double term = std::exp(-ln_gamma(d));  // k = 0
   double sum = term;
   for (int k = 0; k < 500; ++k) {
      term *= z / ((k + 1.0) * (d + k));
      sum += term;
      if (term < 1e-17 * sum) break;
   }
   return sum;
}

// ln of the uniform large-argument form: psi_d(z) = z^{(1-d)/2} I_{d-1}(2 sqrt z),
// I_nu(x) ~ e^x / sqrt(2 pi x) * sum_k (-1)^k a_k(nu) / x^k,
// a_k(nu) = prod_{j=1..k} (4 nu^2 - (2j-1)^2) / (k! 8^k).
inline double ln_psi_asym(double d, double z) {
   double nu = d - 1.0;
   double x = 2.0 * std::sqrt(z);
   double mu = 4.0 * nu * nu;
   double term = 1.0, sum = 1.0, prev = kInf;
   for (int k = 1; k <= 40; ++k) {
      term *= -(mu - (2.0 * k - 1.0) * (2.0 * k - 1.0)) / (8.0 * k * x);
      if (std::abs(term) >= prev) break;  // optimal truncation
      sum += term;
      prev = std::abs(term);
      if (std::abs(term) < 1e-17 * std::abs(sum)) break;
   }
   return 0.5 * (1.0 - d) * std::log(z) + x - 0.5 * std::log(2.0 * M_PI * x) +
          std::log(sum);
}

}  // namespace detail

// psi_d(z) = sum_{k>=0} z^k / (k! Gamma(d+k)), entire in z, with the
// convention 1/Gamma(0) = 0 (so psi_0(z) = z * psi_2(z)).
inline double psi_d(double d, double z, PsiEvalRegime regime = {}) {
   if (z < 0.0 || d < 0.0) throw std::domain_error("psi_d: requires z >= 0, d >= 0");
   if (d == 0.0) {
      if (z == 0.0) return 0.0;
      if (z <= regime.threshold_z) return z * detail::psi_series_pos(2.0, z);
      return std::exp(detail::ln_psi_asym(0.0, z));
   }
   if (z <= regime.threshold_z) return detail::psi_series_pos(d, z);
   return std::exp(detail::ln_psi_asym(d, z));
}

// ln psi_d(z); -inf when the value is exactly 0 (d=0, z=0).  Safe for the
// huge arguments z = x*x'/t^2 the kernels produce at small t.
inline double ln_psi_d(double d, double z, PsiEvalRegime regime = {}) {
   if (z < 0.0 || d < 0.0) throw std::domain_error("ln_psi_d: requires z >= 0, d >= 0");
   if (z == 0.0) return d == 0.0 ? -kInf : -ln_gamma(d);
   if (z <= regime.threshold_z) {
      if (d == 0.0) return std::log(z) + std::log(detail::psi_series_pos(2.0, z));
      return std::log(detail::psi_series_pos(d, z));
   }
   return detail::ln_psi_asym(d, z);
}

// d^k/dz^k psi_d = psi_{d+k}.
inline double psi_d_deriv(double d, double z, int k, PsiEvalRegime regime = {}) {
   if (k < 0 || k > 6) throw std::invalid_argument("psi_d_deriv: k must be in [0,6]");
   return psi_d(d + k, z, regime);
}

// Modified Bessel I_nu(x) for real nu >= -1 via I_nu(x) = (x/2)^nu psi_{nu+1}(x^2/4);
// I_{-1} = I_1.  `scaled` returns e^{-x} I_nu(x) (mandatory for large x).
inline double bessel_i(double nu, double x, bool scaled = false) {
   if (x < 0.0) throw std::domain_error("bessel_i: requires x >= 0");
   if (nu < -1.0) throw std::domain_error("bessel_i: requires nu >= -1");
   if (nu < 0.0 && nu > -1.0 && x == 0.0) return kInf;
   double nu_eff = (nu == -1.0) ? 1.0 : nu;
   if (x == 0.0) return nu_eff == 0.0 ? 1.0 : 0.0;
   double ln_i = nu_eff * std::log(0.5 * x) + ln_psi_d(nu_eff + 1.0, 0.25 * x * x);
   return std::exp(scaled ? ln_i - x : ln_i);
}

}  // namespace kimura

#endif  // KIMURA_SPECFUN_HPP
