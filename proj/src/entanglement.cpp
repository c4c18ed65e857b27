#include "qlchain/entanglement.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "qlchain/errors.hpp"
#include "qlchain/io.hpp"
#include "qlchain/numeric_policy.hpp"
#include "qlchain/observables.hpp"
#include "qlchain/pipeline.hpp"

namespace qlchain {

namespace {

Eigen::MatrixXd symplectic_form(int l) {
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(2 * l, 2 * l);
  s.topRightCorner(l, l) = Eigen::MatrixXd::Identity(l, l);
  s.bottomLeftCorner(l, l) = -Eigen::MatrixXd::Identity(l, l);
  return s;
}

double negativity_from(const Eigen::MatrixXd& vpt) {
  const Eigen::VectorXd g = symplectic_eigenvalues(vpt);
  double n = 0.0;
  for (Eigen::Index j = 0; j < g.size(); ++j) {
    if (g(j) < 1.0) n -= std::log2(g(j));
  }
  return n;
}

}  // namespace

Eigen::MatrixXd assemble_covariance(const CorrelationMatrices& rs, bool check) {
  if (rs.basis != CorrelationBasis::RealSpace) {
    throw ValidationError("covariance needs real-space correlations");
  }
  const int l = rs.size();
  Eigen::MatrixXd v(2 * l, 2 * l);
  v.topLeftCorner(l, l) = 2.0 * rs.pos;
  v.bottomRightCorner(l, l) = 2.0 * rs.mom;
  v.topRightCorner(l, l) = 2.0 * rs.cross;
  v.bottomLeftCorner(l, l) = 2.0 * rs.cross.transpose();
  v = 0.5 * (v + v.transpose()).eval();
  if (check) {
    const double gmin = symplectic_eigenvalues(v).minCoeff();
    if (gmin < 1.0 - policy().symplectic_floor) {
      std::ostringstream os;
      os << "unphysical covariance: symplectic eigenvalue " << gmin << " < 1";
      throw NumericError(os.str());
    }
  }
  return v;
}

Eigen::VectorXd symplectic_eigenvalues(const Eigen::MatrixXd& v) {
  const int l = static_cast<int>(v.rows() / 2);
  Eigen::EigenSolver<Eigen::MatrixXd> es(symplectic_form(l) * v, false);
  if (es.info() != Eigen::Success) throw NumericError("symplectic eigensolve did not converge");
  std::vector<double> m(static_cast<std::size_t>(2 * l));
  for (int i = 0; i < 2 * l; ++i) m[static_cast<std::size_t>(i)] = std::abs(es.eigenvalues()(i));
  std::sort(m.begin(), m.end());
  Eigen::VectorXd g(l);
  for (int j = 0; j < l; ++j) {
    const double a = m[static_cast<std::size_t>(2 * j)], b = m[static_cast<std::size_t>(2 * j + 1)];
    if (std::abs(a - b) > 1e-6 * std::max(1.0, b)) {
      std::ostringstream os;
      os << "symplectic eigenvalues do not pair: " << a << " vs " << b;
      throw NumericError(os.str());
    }
    g(j) = 0.5 * (a + b);
  }
  return g;
}

Eigen::MatrixXd partial_transpose(const Eigen::MatrixXd& v, int k) {
  const int l = static_cast<int>(v.rows() / 2);
  Eigen::VectorXd d = Eigen::VectorXd::Ones(2 * l);
  for (int j = k; j < l; ++j) d(l + j) = -1.0;
  return d.asDiagonal() * v * d.asDiagonal();
}

double log_negativity(const Eigen::MatrixXd& v, int k) {
  const int l = static_cast<int>(v.rows() / 2);
  if (k < 1 || k > l - 1) throw ValidationError("cut must lie in 1..l-1");
  return negativity_from(partial_transpose(v, k));
}

double log_negativity_transpose_a(const Eigen::MatrixXd& v, int k) {
  const int l = static_cast<int>(v.rows() / 2);
  if (k < 1 || k > l - 1) throw ValidationError("cut must lie in 1..l-1");
  Eigen::VectorXd d = Eigen::VectorXd::Ones(2 * l);
  for (int j = 0; j < k; ++j) d(l + j) = -1.0;
  return negativity_from(d.asDiagonal() * v * d.asDiagonal());
}

std::vector<NegativityPoint> negativity_temperature_scan(const ChainSpec& spec,
                                                         const BathConfig& bath,
                                                         const std::vector<double>& tm_grid,
                                                         double eps, std::vector<int> cuts) {
  if (!(eps > 0.0 && eps < 1.0)) throw ValidationError("eps: must lie in (0, 1)");
  const int l = spec.length();
  if (cuts.empty()) {
    for (int k = 1; k < l; ++k) cuts.push_back(k);
  }
  ChainSolver solver(spec, bath);
  std::vector<NegativityPoint> out;
  for (double tm : tm_grid) {
    const double ta = (1.0 + eps) * tm, tb = (1.0 - eps) * tm;
    const CorrelationMatrices rs = solver.real_space(solver.stationary(ta, tb));
    const double gth = heat_flux(rs, spec, ta, tb).conductivity;
    const Eigen::MatrixXd v = assemble_covariance(rs);
    for (int k : cuts) out.push_back({tm, k, log_negativity(v, k), gth});
  }
  return out;
}

void write_negativity_csv(std::ostream& os, const std::vector<NegativityPoint>& rows) {
  CsvWriter w(os);
  w.header({"Tm", "cut", "N", "Gth"});
  for (const auto& r : rows) w.row(r.Tm, r.cut, r.N, r.Gth);
}

}  // namespace qlchain
