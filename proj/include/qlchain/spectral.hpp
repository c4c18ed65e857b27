#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <vector>

namespace qlchain {

enum class Parity { Even, Odd, None };

// Normal modes of the isolated chain. Columns of `transform` are the
// eigenvectors of C, so X = G Y and G^T C G = diag(Omega^2).
struct ModeBasis {
  Eigen::VectorXd frequencies;  // Omega_i, ascending
  Eigen::MatrixXd transform;    // G, orthogonal
  std::vector<Parity> parity;
  bool symmetric = false;

  int size() const { return static_cast<int>(frequencies.size()); }
  double left_amplitude(int i) const { return transform(0, i); }
  double right_amplitude(int i) const { return transform(transform.rows() - 1, i); }
  // Indices of modes with the given parity, ascending in frequency.
  std::vector<int> family(Parity p) const;
};

// Diagonalizes a symmetric positive-definite C. With `symmetric` set the
// even and odd mirror subspaces are diagonalized separately so that every
// mode carries an exact parity label. Sign convention: G_{1i} >= 0, with
// the first non-zero component positive when G_{1i} vanishes.
// Throws NumericError on non-convergence and DegeneracyError when two
// modes of the same family are closer than NumericPolicy::mode_degeneracy.
ModeBasis diagonalize(const Eigen::MatrixXd& c, bool symmetric = false);

struct LocalizationReport {
  Eigen::VectorXd participation;  // p_i = sum_j G_ji^4
  Eigen::VectorXd length;         // xi_i = 1 / p_i
};

LocalizationReport localization(const ModeBasis& basis);

// CSV rows: mode_index,Omega,xi
void write_localization_csv(std::ostream& os, const ModeBasis& basis,
                            const LocalizationReport& report, bool header = true);

}  // namespace qlchain
