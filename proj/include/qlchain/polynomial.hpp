#pragma once

#include <complex>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace qlchain {

using cplx = std::complex<double>;

// Real polynomial, coefficients in ascending powers: c[0] + c[1] s + ...
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<double> coeffs);

  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  const std::vector<double>& coeffs() const { return coeffs_; }
  double operator[](int k) const { return coeffs_[static_cast<std::size_t>(k)]; }
  double leading() const { return coeffs_.back(); }

  cplx operator()(cplx s) const;
  double operator()(double s) const;
  Polynomial derivative() const;

  Polynomial operator*(const Polynomial& o) const;
  Polynomial operator+(const Polynomial& o) const;
  Polynomial operator*(double a) const;

 private:
  void trim();
  std::vector<double> coeffs_{0.0};
};

// Function and derivative used to polish roots; defaults to the polynomial.
using RootPolisher = std::function<std::pair<cplx, cplx>(cplx)>;

// Roots via eigenvalues of the companion matrix of the rescaled monic
// polynomial, each refined by Newton iterations on `polish` (or on the
// polynomial itself). Conjugate pairs are made exactly conjugate.
std::vector<cplx> companion_roots(const Polynomial& p, const RootPolisher& polish = {});

}  // namespace qlchain
