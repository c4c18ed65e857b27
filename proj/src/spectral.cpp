#include "qlchain/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <sstream>

#include "qlchain/errors.hpp"
#include "qlchain/io.hpp"
#include "qlchain/numeric_policy.hpp"

namespace qlchain {

std::vector<int> ModeBasis::family(Parity p) const {
  std::vector<int> out;
  for (int i = 0; i < size(); ++i) {
    if (parity[static_cast<std::size_t>(i)] == p) out.push_back(i);
  }
  return out;
}

namespace {

struct Eig {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
};

Eig symmetric_eigen(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
  if (solver.info() != Eigen::Success) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const auto& s = svd.singularValues();
    std::ostringstream os;
    os << "eigensolver did not converge (size " << m.rows() << ", condition estimate "
       << s(0) / s(s.size() - 1) << ")";
    throw NumericError(os.str());
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

void fix_sign(Eigen::Ref<Eigen::VectorXd> v) {
  const double tiny = 1e-14;
  double pivot = v(0);
  if (std::abs(pivot) <= tiny) {
    for (Eigen::Index k = 0; k < v.size(); ++k) {
      if (std::abs(v(k)) > tiny) {
        pivot = v(k);
        break;
      }
    }
  }
  if (pivot < 0.0) v = -v;
}

void check_degeneracy(const Eigen::VectorXd& sq) {
  for (Eigen::Index i = 1; i < sq.size(); ++i) {
    if (std::abs(sq(i) - sq(i - 1)) < policy().mode_degeneracy) {
      std::ostringstream os;
      os << "degenerate mode frequencies: Omega^2 = " << sq(i - 1) << " and " << sq(i);
      throw DegeneracyError(os.str());
    }
  }
}

}  // namespace

ModeBasis diagonalize(const Eigen::MatrixXd& c, bool symmetric) {
  const Eigen::Index l = c.rows();
  ModeBasis basis;
  basis.symmetric = symmetric;
  Eigen::VectorXd squares(l);
  Eigen::MatrixXd vectors(l, l);
  std::vector<Parity> parity(static_cast<std::size_t>(l), Parity::None);

  if (!symmetric) {
    Eig e = symmetric_eigen(c);
    check_degeneracy(e.values);
    squares = e.values;
    vectors = e.vectors;
  } else {
    // Orthonormal bases of the mirror-even and mirror-odd subspaces.
    const Eigen::Index half = l / 2;
    const Eigen::Index n_even = l - half;
    Eigen::MatrixXd even = Eigen::MatrixXd::Zero(l, n_even);
    Eigen::MatrixXd odd = Eigen::MatrixXd::Zero(l, half);
    const double r = 1.0 / std::sqrt(2.0);
    for (Eigen::Index n = 0; n < half; ++n) {
      even(n, n) = r;
      even(l - 1 - n, n) = r;
      odd(n, n) = r;
      odd(l - 1 - n, n) = -r;
    }
    if (l % 2 == 1) even(half, half) = 1.0;
    Eig ee = symmetric_eigen(even.transpose() * c * even);
    check_degeneracy(ee.values);
    Eigen::Index col = 0;
    Eigen::MatrixXd all(l, l);
    for (Eigen::Index k = 0; k < n_even; ++k, ++col) {
      all.col(col) = even * ee.vectors.col(k);
      squares(col) = ee.values(k);
      parity[static_cast<std::size_t>(col)] = Parity::Even;
    }
    if (half > 0) {
      Eig eo = symmetric_eigen(odd.transpose() * c * odd);
      check_degeneracy(eo.values);
      for (Eigen::Index k = 0; k < half; ++k, ++col) {
        all.col(col) = odd * eo.vectors.col(k);
        squares(col) = eo.values(k);
        parity[static_cast<std::size_t>(col)] = Parity::Odd;
      }
    }
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(l));
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return squares(a) < squares(b); });
    Eigen::VectorXd sorted(l);
    std::vector<Parity> sorted_parity(static_cast<std::size_t>(l));
    for (Eigen::Index k = 0; k < l; ++k) {
      const Eigen::Index src = idx[static_cast<std::size_t>(k)];
      vectors.col(k) = all.col(src);
      sorted(k) = squares(src);
      sorted_parity[static_cast<std::size_t>(k)] = parity[static_cast<std::size_t>(src)];
    }
    squares = sorted;
    parity = sorted_parity;
  }

  if (squares.minCoeff() <= 0.0) {
    throw ValidationError("coupling matrix is not positive definite");
  }
  for (Eigen::Index k = 0; k < l; ++k) fix_sign(vectors.col(k));
  basis.frequencies = squares.cwiseSqrt();
  basis.transform = vectors;
  basis.parity = std::move(parity);
  return basis;
}

LocalizationReport localization(const ModeBasis& basis) {
  LocalizationReport r;
  r.participation = basis.transform.array().pow(4).colwise().sum().transpose();
  r.length = r.participation.cwiseInverse();
  return r;
}

void write_localization_csv(std::ostream& os, const ModeBasis& basis,
                            const LocalizationReport& report, bool header) {
  CsvWriter csv(os);
  if (header) csv.header({"mode_index", "Omega", "xi"});
  for (int i = 0; i < basis.size(); ++i) {
    csv.row(i + 1, basis.frequencies(i), report.length(i));
  }
}

}  // namespace qlchain
