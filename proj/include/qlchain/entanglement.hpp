#pragma once

#include <Eigen/Dense>
#include <ostream>
#include <vector>

#include "qlchain/correlations.hpp"
#include "qlchain/model.hpp"

namespace qlchain {

// V over (X_1..X_l, P_1..P_l), twice the symmetrized correlations so that
// the vacuum of a unit-frequency oscillator is the identity. Throws
// NumericError when a symplectic eigenvalue falls below 1 - symplectic_floor.
Eigen::MatrixXd assemble_covariance(const CorrelationMatrices& real_space, bool check = true);

// Moduli of the eigenvalues of sigma V, one per +-pair, ascending.
Eigen::VectorXd symplectic_eigenvalues(const Eigen::MatrixXd& v);

// Flips the sign of the momenta of sites k+1..l (0-based: k..l-1).
Eigen::MatrixXd partial_transpose(const Eigen::MatrixXd& v, int k);

// N_k = -sum_j log2(min(1, |gamma_j|)) for the cut after site k, 1 <= k <= l-1.
double log_negativity(const Eigen::MatrixXd& v, int k);
// Same, transposing subsystem A = {1..k} instead of B.
double log_negativity_transpose_a(const Eigen::MatrixXd& v, int k);

struct NegativityPoint {
  double Tm;
  int cut;
  double N;
  double Gth;
};

// Ordered-pinning chain, T_a = (1+eps) T_m, T_b = (1-eps) T_m; empty `cuts`
// means all cuts 1..l-1.
std::vector<NegativityPoint> negativity_temperature_scan(const ChainSpec& spec,
                                                         const BathConfig& bath,
                                                         const std::vector<double>& tm_grid,
                                                         double eps, std::vector<int> cuts = {});

void write_negativity_csv(std::ostream& os, const std::vector<NegativityPoint>& rows);

}  // namespace qlchain
