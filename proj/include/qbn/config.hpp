#pragma once

#include <cstddef>

namespace qbn {

// Numerical policy shared across the library. The defaults are the documented
// ones; CLI flags override a copy per invocation.
struct Config {
  // Zero-mass regularizer. 0 means strict mode: dividing by a vanishing mass
  // is an error. Positive values substitute eps and flag the result.
  double eps = 0.0;

  double norm_tol = 1e-9;          // Sum |A|^2 == 1 / sum P == 1 checks
  double hermitian_tol = 1e-8;     // max |M - M^dagger| entry
  double trace_tol = 1e-9;         // density matrix trace == 1
  double entropy_trace_tol = 1e-7; // eigenvalue-sum check inside entropy
  double eig_clamp = 1e-9;         // eigenvalues in [-eig_clamp, 0) clamp to 0

  // Factorization equality: relative on entries above abs threshold.
  double factor_rel_tol = 1e-8;
  double factor_abs_tol = 1e-10;

  // CMI truth threshold with a 10x hysteresis band reported as indeterminate.
  double cmi_tol = 1e-8;
  double cmi_band_factor = 10.0;
  double cmi_clamp = 1e-8;         // [-cmi_clamp, 0) reported as 0 (flagged)

  int enumeration_limit = 8;       // global I-set / triple enumeration guard
  int mobius_ground_limit = 20;
  std::size_t max_joint_states = std::size_t(1) << 16;
};

inline const Config& default_config() {
  static const Config cfg{};
  return cfg;
}

}  // namespace qbn
