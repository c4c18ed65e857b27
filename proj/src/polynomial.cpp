#include "qlchain/polynomial.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "qlchain/errors.hpp"

namespace qlchain {

Polynomial::Polynomial(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {
  if (coeffs_.empty()) coeffs_.push_back(0.0);
  trim();
}

void Polynomial::trim() {
  while (coeffs_.size() > 1 && coeffs_.back() == 0.0) coeffs_.pop_back();
}

cplx Polynomial::operator()(cplx s) const {
  cplx acc = 0.0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * s + *it;
  return acc;
}

double Polynomial::operator()(double s) const {
  double acc = 0.0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * s + *it;
  return acc;
}

Polynomial Polynomial::derivative() const {
  if (coeffs_.size() <= 1) return Polynomial({0.0});
  std::vector<double> d(coeffs_.size() - 1);
  for (std::size_t k = 1; k < coeffs_.size(); ++k) d[k - 1] = static_cast<double>(k) * coeffs_[k];
  return Polynomial(std::move(d));
}

Polynomial Polynomial::operator*(const Polynomial& o) const {
  std::vector<double> r(coeffs_.size() + o.coeffs_.size() - 1, 0.0);
  for (std::size_t i = 0; i < coeffs_.size(); ++i)
    for (std::size_t j = 0; j < o.coeffs_.size(); ++j) r[i + j] += coeffs_[i] * o.coeffs_[j];
  return Polynomial(std::move(r));
}

Polynomial Polynomial::operator+(const Polynomial& o) const {
  std::vector<double> r(std::max(coeffs_.size(), o.coeffs_.size()), 0.0);
  for (std::size_t i = 0; i < coeffs_.size(); ++i) r[i] += coeffs_[i];
  for (std::size_t i = 0; i < o.coeffs_.size(); ++i) r[i] += o.coeffs_[i];
  return Polynomial(std::move(r));
}

Polynomial Polynomial::operator*(double a) const {
  std::vector<double> r = coeffs_;
  for (auto& c : r) c *= a;
  return Polynomial(std::move(r));
}

std::vector<cplx> companion_roots(const Polynomial& p, const RootPolisher& polish) {
  const int n = p.degree();
  if (n < 1) return {};
  const auto& c = p.coeffs();
  if (c[0] == 0.0) throw NumericError("polynomial has a root at s = 0");

  // Variable scaling s = rho x so the monic coefficients are O(1):
  // rho = max_k |c_k / c_n|^{1/(n-k)} (Fujiwara-type bound).
  double rho = 0.0;
  for (int k = 0; k < n; ++k) {
    const double r = std::abs(c[static_cast<std::size_t>(k)] / c[static_cast<std::size_t>(n)]);
    if (r > 0.0) rho = std::max(rho, std::pow(r, 1.0 / (n - k)));
  }
  if (!(rho > 0.0) || !std::isfinite(rho)) throw NumericError("polynomial scaling failed");

  std::vector<double> a(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    a[static_cast<std::size_t>(k)] =
        c[static_cast<std::size_t>(k)] / c[static_cast<std::size_t>(n)] * std::pow(rho, k - n);
  }
  Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) comp(k, k - 1) = 1.0;
  for (int k = 0; k < n; ++k) comp(k, n - 1) = -a[static_cast<std::size_t>(k)];

  Eigen::EigenSolver<Eigen::MatrixXd> es(comp, false);
  if (es.info() != Eigen::Success) throw NumericError("companion eigensolver did not converge");

  const Polynomial dp = p.derivative();
  RootPolisher f = polish;
  if (!f) f = [&](cplx s) { return std::pair<cplx, cplx>{p(s), dp(s)}; };

  std::vector<cplx> roots;
  roots.reserve(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    cplx z = es.eigenvalues()(k) * rho;
    for (int it = 0; it < 8; ++it) {
      auto [v, dv] = f(z);
      if (dv == 0.0) break;
      const cplx step = v / dv;
      z -= step;
      if (std::abs(step) <= 4e-16 * std::abs(z)) break;
    }
    roots.push_back(z);
  }

  // Exact conjugate symmetry for real coefficients.
  std::sort(roots.begin(), roots.end(), [](cplx x, cplx y) {
    if (x.real() != y.real()) return x.real() < y.real();
    return x.imag() < y.imag();
  });
  std::vector<bool> used(roots.size(), false);
  const double scale = std::abs(roots.back()) + std::abs(roots.front());
  for (std::size_t i = 0; i < roots.size(); ++i) {
    if (used[i]) continue;
    if (std::abs(roots[i].imag()) <= 1e-13 * scale) {
      roots[i] = {roots[i].real(), 0.0};
      used[i] = true;
      continue;
    }
    std::size_t best = i;
    double dist = INFINITY;
    for (std::size_t j = 0; j < roots.size(); ++j) {
      if (j == i || used[j]) continue;
      const double d = std::abs(roots[j] - std::conj(roots[i]));
      if (d < dist) {
        dist = d;
        best = j;
      }
    }
    if (best != i) {
      const cplx avg = 0.5 * (roots[i] + std::conj(roots[best]));
      roots[i] = avg;
      roots[best] = std::conj(avg);
      used[best] = true;
    }
    used[i] = true;
  }
  return roots;
}

}  // namespace qlchain
