#pragma once

namespace qlchain {

// Tolerances shared by production code and the test suites.
struct NumericPolicy {
  double symmetry_rel = 1e-12;          // palindrome check on couplings/onsite
  double singular_eigenvalue = 1e-10;   // smallest admissible eigenvalue of C
  double mode_degeneracy = 1e-10;       // |Omega_i^2 - Omega_j^2|
  double pole_stability = 1e-12;        // Re(lambda) must be below -this
  // Poles refined against the factored resolvent keep their real part to
  // full relative precision; weakly coupled localized modes legitimately
  // sit ~1e-15 left of the axis, so only strict negativity is required.
  double refined_pole_stability = 0.0;
  double pole_degeneracy = 1e-8;        // relative pairwise pole distance
  double reconstruction = 1e-8;         // rational reconstruction checks
  double residue_derivative = 1e-12;    // |D'(lambda)| relative floor
  double quadrature_rel = 1e-11;
  double quadrature_abs = 1e-13;
  double flux_uniformity = 1e-8;
  double symplectic_floor = 1e-6;       // V physicality threshold
  double zero_point_slack = 1e-9;
};

inline const NumericPolicy& policy() {
  static const NumericPolicy p{};
  return p;
}

}  // namespace qlchain
