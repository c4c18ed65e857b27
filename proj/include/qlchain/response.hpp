#pragma once

#include <Eigen/Dense>
#include <complex>
#include <iosfwd>
#include <vector>

#include "qlchain/model.hpp"
#include "qlchain/numeric_policy.hpp"
#include "qlchain/polynomial.hpp"
#include "qlchain/spectral.hpp"

namespace qlchain {

enum class PoleFamily { Even, Odd, Full };

// Partial-fraction representation of the response functions. The sums run
// over every pole (conjugates included), so e.g.
//   F^a_j(t) = sum_k left(j,k) exp(lambda_k t),
//   A(t)     = sum_k norm_k * v_k v_k^T exp(lambda_k t).
struct ResponseSet {
  Eigen::VectorXcd poles;
  std::vector<PoleFamily> family;
  Eigen::MatrixXcd left;    // residues of F^a (bath a at site 1), l x K
  Eigen::MatrixXcd right;   // residues of F^b (bath b at site l), l x K
  Eigen::MatrixXcd vectors; // null vectors v_k of B(lambda_k), l x K
  Eigen::VectorXcd norms;   // 1 / (v_k^T B'(lambda_k) v_k)

  int modes() const { return static_cast<int>(left.rows()); }
  int size() const { return static_cast<int>(poles.size()); }

  // Time-domain evaluation from the residues.
  Eigen::VectorXd noise_response(bool bath_a, double t, int derivative = 0) const;
  Eigen::MatrixXd initial_response(double t, int derivative = 0) const;
  // Laplace-domain reconstruction sum_k res_k / (s - lambda_k).
  Eigen::VectorXcd noise_response_laplace(bool bath_a, cplx s) const;
  Eigen::MatrixXcd initial_response_laplace(cplx s) const;
  double slowest_decay() const;  // min |Re lambda|
  double fastest_decay() const;  // max |Re lambda|
};

// Direct rational evaluation of B(s) and its derivative in s.
Eigen::MatrixXcd interaction_matrix(const ModeBasis& basis, const BathConfig& bath, cplx s);
Eigen::MatrixXcd interaction_matrix_derivative(const ModeBasis& basis, const BathConfig& bath,
                                               cplx s);

// D(s) = (s+Gamma) prod_j (s^2+Omega_j^2)
//        + 2 s (gamma Gamma / M) sum_j G_1j^2 prod_{k != j} (s^2+Omega_k^2)
// over the modes of one parity family; degree 2m+1, leading coefficient 1.
Polynomial interaction_matrix_denominator(const ModeBasis& basis, const BathConfig& bath,
                                          PoleFamily family);

// Roots of a real polynomial: companion matrix plus Newton polish, then
// stability (Re < -margin) and simplicity checks. Throws StabilityError or
// DegeneracyError.
std::vector<cplx> poles(const Polynomial& denominator, const RootPolisher& polish = {},
                        double stability_margin = policy().pole_stability);

// Closed-form residues for one parity family of a mirror-symmetric chain.
ResponseSet symmetric_response_coefficients(const ModeBasis& basis, const BathConfig& bath,
                                            PoleFamily family);

// Residues for an arbitrary chain. Poles are the eigenvalues of the
// (2l+2)-dimensional first-order realization of B(s) (modes, velocities and
// one Drude memory variable per bath); residues of A = B^{-1} are the
// rank-one matrices v v^T / (v^T B'(lambda) v).
ResponseSet general_response_coefficients(const ModeBasis& basis, const BathConfig& bath);

enum class ResponsePath { Auto, Symmetric, General };

// Symmetric chains use the per-family closed form, others the general path.
ResponseSet build_response(const ModeBasis& basis, const BathConfig& bath,
                           ResponsePath path = ResponsePath::Auto);

// Concatenates family fragments into one set.
ResponseSet merge(const ResponseSet& a, const ResponseSet& b);

// Debug dump: poles and residue norms as JSON.
void write_response_json(std::ostream& os, const ResponseSet& r);

}  // namespace qlchain
