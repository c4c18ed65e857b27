#include "qlchain/model.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "qlchain/errors.hpp"
#include "qlchain/numeric_policy.hpp"

namespace qlchain {

std::vector<double> PinningStyle::onsite(int l) const {
  std::vector<double> w(static_cast<std::size_t>(std::max(l, 0)), omega0);
  if (kind == Pinning::EndsOnly) {
    for (int i = 1; i + 1 < l; ++i) w[static_cast<std::size_t>(i)] = 0.0;
  }
  return w;
}

ChainSpec make_ordered_chain(int l, double f, PinningStyle pinning) {
  ChainSpec spec;
  spec.onsite = pinning.onsite(l);
  spec.couplings.assign(static_cast<std::size_t>(std::max(l - 1, 0)), f);
  return spec;
}

void ChainSpec::validate() const {
  const int l = length();
  if (l < 2) throw ValidationError("length: chain needs at least 2 oscillators");
  if (static_cast<int>(couplings.size()) != l - 1) {
    std::ostringstream os;
    os << "couplings: expected " << l - 1 << " spring constants, got " << couplings.size();
    throw ValidationError(os.str());
  }
  if (mass != 1.0) throw ValidationError("mass: must be 1 (dimensionless units)");
  for (std::size_t i = 0; i < couplings.size(); ++i) {
    if (!(couplings[i] > 0.0) || !std::isfinite(couplings[i])) {
      std::ostringstream os;
      os << "couplings: f_" << i + 1 << " = " << couplings[i] << " must be positive";
      throw ValidationError(os.str());
    }
  }
  bool any_pinned = false;
  for (std::size_t i = 0; i < onsite.size(); ++i) {
    if (!(onsite[i] >= 0.0) || !std::isfinite(onsite[i])) {
      std::ostringstream os;
      os << "onsite: omega_" << i + 1 << " = " << onsite[i] << " must be non-negative";
      throw ValidationError(os.str());
    }
    any_pinned = any_pinned || onsite[i] > 0.0;
  }
  if (!any_pinned) {
    throw ValidationError("onsite: all onsite frequencies are zero; the translation mode must be pinned");
  }
  const Eigen::MatrixXd c = build_coupling_matrix(*this);
  const double smallest = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(c, Eigen::EigenvaluesOnly)
                              .eigenvalues()
                              .minCoeff();
  if (smallest < policy().singular_eigenvalue) {
    std::ostringstream os;
    os << "onsite: coupling matrix is singular (smallest eigenvalue " << smallest << ")";
    throw ValidationError(os.str());
  }
}

void BathConfig::validate() const {
  auto bad = [](const char* key, double v, const char* rule) {
    std::ostringstream os;
    os << key << ": " << v << " " << rule;
    throw ValidationError(os.str());
  };
  if (!(gamma > 0.0) || !std::isfinite(gamma)) bad("bath.gamma", gamma, "must be positive");
  if (!(cutoff > 0.0) || !std::isfinite(cutoff)) bad("bath.cutoff", cutoff, "must be positive");
  if (!(Ta >= 0.0) || !std::isfinite(Ta)) bad("bath.Ta", Ta, "must be non-negative");
  if (!(Tb >= 0.0) || !std::isfinite(Tb)) bad("bath.Tb", Tb, "must be non-negative");
}

Eigen::MatrixXd build_coupling_matrix(const ChainSpec& spec) {
  const int l = spec.length();
  const double m = spec.mass;
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(l, l);
  for (int i = 0; i < l; ++i) {
    const double left = i > 0 ? spec.couplings[static_cast<std::size_t>(i - 1)] : 0.0;
    const double right = i + 1 < l ? spec.couplings[static_cast<std::size_t>(i)] : 0.0;
    const double w = spec.onsite[static_cast<std::size_t>(i)];
    c(i, i) = w * w + (left + right) / m;
    if (i + 1 < l) {
      c(i, i + 1) = -right / m;
      c(i + 1, i) = -right / m;
    }
  }
  return c;
}

namespace {
bool close_rel(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({std::abs(a), std::abs(b), 1e-300});
}
}  // namespace

bool detect_symmetry(const ChainSpec& spec) {
  const double tol = policy().symmetry_rel;
  const std::size_t l = spec.onsite.size();
  for (std::size_t n = 0; n < l; ++n) {
    if (!close_rel(spec.onsite[n], spec.onsite[l - 1 - n], tol)) return false;
  }
  const std::size_t nf = spec.couplings.size();
  for (std::size_t n = 0; n < nf; ++n) {
    if (!close_rel(spec.couplings[n], spec.couplings[nf - 1 - n], tol)) return false;
  }
  return true;
}

}  // namespace qlchain
