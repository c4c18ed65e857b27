#include "qlchain/response.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "qlchain/errors.hpp"
#include "qlchain/io.hpp"
#include "qlchain/numeric_policy.hpp"

namespace qlchain {

namespace {

Eigen::MatrixXd end_coupling(const ModeBasis& basis) {
  const Eigen::VectorXd ga = basis.transform.row(0).transpose();
  const Eigen::VectorXd gb = basis.transform.row(basis.transform.rows() - 1).transpose();
  return ga * ga.transpose() + gb * gb.transpose();
}

cplx memory_factor(const BathConfig& bath, cplx s, double mass) {
  return s * bath.gamma * bath.cutoff / ((bath.cutoff + s) * mass);
}

cplx memory_factor_derivative(const BathConfig& bath, cplx s, double mass) {
  const cplx d = bath.cutoff + s;
  return bath.gamma * bath.cutoff * bath.cutoff / (d * d * mass);
}

constexpr double kMass = 1.0;

// s^2 + Omega^2 in factored form; keeps the small real part of poles next
// to +-i Omega for weakly coupled modes.
cplx near_resonance(cplx s, double omega) {
  const cplx i(0.0, 1.0);
  return (s - i * omega) * (s + i * omega);
}

cplx normalization(const ModeBasis& basis, const BathConfig& bath, cplx lambda,
                   const Eigen::VectorXcd& v) {
  const Eigen::MatrixXcd bp = interaction_matrix_derivative(basis, bath, lambda);
  const cplx q = (v.transpose() * bp * v)(0, 0);
  if (std::abs(q) < policy().residue_derivative * std::max(1.0, v.squaredNorm() * std::abs(lambda))) {
    std::ostringstream os;
    os << "ill-conditioned residue at pole " << lambda;
    throw NumericError(os.str());
  }
  return 1.0 / q;
}

void check_stability(const std::vector<cplx>& roots, double margin) {
  for (const cplx& z : roots) {
    if (!(z.real() < -margin)) {
      std::ostringstream os;
      os << "pole " << z << " is not in the open left half plane";
      throw StabilityError(os.str());
    }
  }
}

void check_simple(const std::vector<cplx>& roots) {
  double scale = 0.0;
  for (const cplx& z : roots) scale = std::max(scale, std::abs(z));
  for (std::size_t i = 0; i < roots.size(); ++i) {
    for (std::size_t j = i + 1; j < roots.size(); ++j) {
      if (std::abs(roots[i] - roots[j]) < policy().pole_degeneracy * scale) {
        std::ostringstream os;
        os << "near-degenerate poles " << roots[i] << " and " << roots[j];
        throw DegeneracyError(os.str());
      }
    }
  }
}

void sort_poles(std::vector<cplx>& roots) {
  std::sort(roots.begin(), roots.end(), [](cplx a, cplx b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
}

// Fills residues given poles and null vectors.
ResponseSet assemble(const ModeBasis& basis, const BathConfig& bath,
                     const std::vector<cplx>& roots, const std::vector<Eigen::VectorXcd>& vecs,
                     PoleFamily fam) {
  const int l = basis.size();
  const int k = static_cast<int>(roots.size());
  ResponseSet r;
  r.poles.resize(k);
  r.family.assign(static_cast<std::size_t>(k), fam);
  r.left.resize(l, k);
  r.right.resize(l, k);
  r.vectors.resize(l, k);
  r.norms.resize(k);
  const Eigen::VectorXcd ga = basis.transform.row(0).transpose().cast<cplx>();
  const Eigen::VectorXcd gb = basis.transform.row(l - 1).transpose().cast<cplx>();
  for (int m = 0; m < k; ++m) {
    const Eigen::VectorXcd& v = vecs[static_cast<std::size_t>(m)];
    const cplx c = normalization(basis, bath, roots[static_cast<std::size_t>(m)], v);
    r.poles(m) = roots[static_cast<std::size_t>(m)];
    r.vectors.col(m) = v;
    r.norms(m) = c;
    r.left.col(m) = c * v * v.cwiseProduct(ga).sum();
    r.right.col(m) = c * v * v.cwiseProduct(gb).sum();
  }
  return r;
}

// Pairs each root with Im > 0 with an exact conjugate partner.
void enforce_conjugates(std::vector<cplx>& roots, std::vector<Eigen::VectorXcd>& vecs) {
  std::vector<cplx> out_r;
  std::vector<Eigen::VectorXcd> out_v;
  double scale = 0.0;
  for (const cplx& z : roots) scale = std::max(scale, std::abs(z));
  for (std::size_t i = 0; i < roots.size(); ++i) {
    const cplx z = roots[i];
    if (std::abs(z.imag()) <= 1e-13 * scale) {
      out_r.emplace_back(z.real(), 0.0);
      Eigen::VectorXcd v = vecs[i];
      // rotate to a real vector
      Eigen::Index piv;
      v.cwiseAbs().maxCoeff(&piv);
      v *= std::abs(v(piv)) / v(piv);
      out_v.push_back(v.real().cast<cplx>());
    } else if (z.imag() > 0.0) {
      out_r.push_back(z);
      out_v.push_back(vecs[i]);
      out_r.push_back(std::conj(z));
      out_v.push_back(vecs[i].conjugate());
    }
  }
  if (out_r.size() != roots.size()) {
    throw NumericError("pole set is not closed under conjugation");
  }
  std::vector<std::size_t> idx(out_r.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (out_r[a].real() != out_r[b].real()) return out_r[a].real() < out_r[b].real();
    return out_r[a].imag() < out_r[b].imag();
  });
  roots.clear();
  vecs.clear();
  for (auto i : idx) {
    roots.push_back(out_r[i]);
    vecs.push_back(out_v[i]);
  }
}

}  // namespace

Eigen::MatrixXcd interaction_matrix(const ModeBasis& basis, const BathConfig& bath, cplx s) {
  const int l = basis.size();
  Eigen::MatrixXcd b = memory_factor(bath, s, kMass) * end_coupling(basis).cast<cplx>();
  for (int i = 0; i < l; ++i) b(i, i) += near_resonance(s, basis.frequencies(i));
  return b;
}

Eigen::MatrixXcd interaction_matrix_derivative(const ModeBasis& basis, const BathConfig& bath,
                                               cplx s) {
  const int l = basis.size();
  Eigen::MatrixXcd b = memory_factor_derivative(bath, s, kMass) * end_coupling(basis).cast<cplx>();
  for (int i = 0; i < l; ++i) b(i, i) += 2.0 * s;
  return b;
}

Polynomial interaction_matrix_denominator(const ModeBasis& basis, const BathConfig& bath,
                                          PoleFamily family) {
  if (!basis.symmetric || family == PoleFamily::Full) {
    throw ValidationError("interaction_matrix_denominator requires a mirror-symmetric basis and a parity family");
  }
  const auto modes = basis.family(family == PoleFamily::Even ? Parity::Even : Parity::Odd);
  Polynomial prod({1.0});
  for (int j : modes) prod = prod * Polynomial({basis.frequencies(j) * basis.frequencies(j), 0.0, 1.0});
  Polynomial d = prod * Polynomial({bath.cutoff, 1.0});
  const double w = 2.0 * bath.gamma * bath.cutoff / kMass;
  Polynomial sum({0.0});
  for (int j : modes) {
    Polynomial others({1.0});
    for (int k : modes) {
      if (k != j) others = others * Polynomial({basis.frequencies(k) * basis.frequencies(k), 0.0, 1.0});
    }
    const double g = basis.left_amplitude(j);
    sum = sum + others * (g * g);
  }
  return d + sum * Polynomial({0.0, w});
}

std::vector<cplx> poles(const Polynomial& denominator, const RootPolisher& polish,
                        double stability_margin) {
  std::vector<cplx> roots = companion_roots(denominator, polish);
  check_stability(roots, stability_margin);
  check_simple(roots);
  sort_poles(roots);
  return roots;
}

namespace {

// Family restricted first-order realization: (Y, V, z) with
// z' = -Gamma z + gamma Gamma g.V and V' = -Omega^2 Y - (2/M) g z.
std::vector<cplx> family_linearization_roots(const ModeBasis& basis, const BathConfig& bath,
                                             const std::vector<int>& modes) {
  const int m = static_cast<int>(modes.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2 * m + 1, 2 * m + 1);
  for (int i = 0; i < m; ++i) {
    const int j = modes[static_cast<std::size_t>(i)];
    const double g = basis.left_amplitude(j);
    a(i, m + i) = 1.0;
    a(m + i, i) = -basis.frequencies(j) * basis.frequencies(j);
    a(m + i, 2 * m) = -2.0 * g / kMass;
    a(2 * m, m + i) = bath.gamma * bath.cutoff * g;
  }
  a(2 * m, 2 * m) = -bath.cutoff;
  Eigen::EigenSolver<Eigen::MatrixXd> es(a, false);
  if (es.info() != Eigen::Success) throw NumericError("family eigensolver did not converge");
  std::vector<cplx> out(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  return out;
}

}  // namespace

ResponseSet symmetric_response_coefficients(const ModeBasis& basis, const BathConfig& bath,
                                            PoleFamily family) {
  if (!basis.symmetric || family == PoleFamily::Full) {
    throw ValidationError("symmetric_response_coefficients requires a mirror-symmetric basis and a parity family");
  }
  const auto modes = basis.family(family == PoleFamily::Even ? Parity::Even : Parity::Odd);
  const int l = basis.size();
  if (modes.empty()) {
    ResponseSet empty;
    empty.poles.resize(0);
    empty.left.resize(l, 0);
    empty.right.resize(l, 0);
    empty.vectors.resize(l, 0);
    empty.norms.resize(0);
    return empty;
  }

  const double w = 2.0 * bath.gamma * bath.cutoff / kMass;
  const cplx iu(0.0, 1.0);

  // A pole is stored as s = sigma i Omega_n + eps for its nearest mode n, so
  // that s^2 + Omega_n^2 = eps (eps + 2 sigma i Omega_n) keeps full relative
  // precision. Weakly coupled (localized) modes put poles within ~1e-15 of
  // +-i Omega_n, below the resolution of s itself.
  struct Anchored {
    int mode = 0;
    double sigma = 1.0;
    cplx eps;
  };
  auto anchor = [&](cplx z) {
    Anchored a;
    a.sigma = z.imag() >= 0.0 ? 1.0 : -1.0;
    double best = std::numeric_limits<double>::infinity();
    for (int j : modes) {
      const double d = std::abs(z - a.sigma * iu * basis.frequencies(j));
      if (d < best) {
        best = d;
        a.mode = j;
      }
    }
    a.eps = z - a.sigma * iu * basis.frequencies(a.mode);
    return a;
  };
  auto point = [&](const Anchored& a) { return a.sigma * iu * basis.frequencies(a.mode) + a.eps; };
  auto resonance = [&](const Anchored& a, int j) {
    if (j == a.mode && a.sigma != 0.0) return a.eps * (a.eps + 2.0 * a.sigma * iu * basis.frequencies(j));
    return near_resonance(point(a), basis.frequencies(j));
  };
  // g = h(s) (s^2 + Omega_n^2), smooth next to the anchor; h = D / prod(s^2 + Omega^2).
  auto target = [&](const Anchored& a) {
    const cplx s = point(a);
    cplx rest = 0.0, drest = 0.0;
    for (int j : modes) {
      if (j == a.mode) continue;
      const double g2 = basis.left_amplitude(j) * basis.left_amplitude(j);
      const cplx q = resonance(a, j);
      rest += g2 / q;
      drest -= 2.0 * s * g2 / (q * q);
    }
    const double gn = basis.left_amplitude(a.mode) * basis.left_amplitude(a.mode);
    const cplx qn = resonance(a, a.mode);
    const cplx val = qn * (s + bath.cutoff) + w * s * gn + w * s * qn * rest;
    const cplx der = 2.0 * s * (s + bath.cutoff) + qn + w * gn + w * qn * rest +
                     2.0 * w * s * s * rest + w * s * qn * drest;
    return std::pair<cplx, cplx>{val, der};
  };
  auto refine = [&](cplx z) {
    Anchored a = anchor(z);
    for (int it = 0; it < 12; ++it) {
      auto [v, dv] = target(a);
      const cplx step = v / dv;
      a.eps -= step;
      if (std::abs(step) <= 1e-15 * std::abs(a.eps)) break;
    }
    // re-anchor if Newton moved to another resonance
    const Anchored b = anchor(point(a));
    if (b.mode != a.mode || b.sigma != a.sigma) {
      a = b;
      for (int it = 0; it < 12; ++it) {
        auto [v, dv] = target(a);
        const cplx step = v / dv;
        a.eps -= step;
        if (std::abs(step) <= 1e-15 * std::abs(a.eps)) break;
      }
    }
    return a;
  };
  auto polish = [&](cplx z) {
    const Anchored a = anchor(z);
    return target(a);
  };
  // residual of h relative to the size of its individual terms
  auto residual_ok = [&](const Anchored& a) {
    const cplx s = point(a);
    double terms = std::abs(s) + bath.cutoff;
    cplx h = s + bath.cutoff;
    for (int j : modes) {
      const double g2 = basis.left_amplitude(j) * basis.left_amplitude(j);
      const cplx q = resonance(a, j);
      h += w * s * g2 / q;
      terms += w * std::abs(s) * g2 / std::abs(q);
    }
    return std::abs(h) <= 1e-8 * terms;
  };

  const Polynomial d = interaction_matrix_denominator(basis, bath, family);
  std::vector<cplx> roots;
  auto finish = [&](std::vector<cplx> rs) {
    std::vector<Anchored> out;
    for (cplx z : rs) {
      Anchored a = refine(z);
      if (!residual_ok(a)) throw NumericError("family poles failed verification");
      out.push_back(a);
    }
    return out;
  };
  std::vector<Anchored> anchored;
  try {
    roots = poles(d, polish, policy().refined_pole_stability);
    anchored = finish(roots);
  } catch (const NumericError&) {
    // Monomial coefficients lose roots for long families; the linearized
    // eigenproblem has the same spectrum without coefficient growth.
    anchored = finish(family_linearization_roots(basis, bath, modes));
  }
  if (static_cast<int>(anchored.size()) != 2 * static_cast<int>(modes.size()) + 1) {
    throw NumericError("family pole count does not match 2m+1");
  }
  // exact conjugate pairs: keep the upper member, mirror it
  std::vector<Anchored> upper, real;
  for (const Anchored& a : anchored) {
    const cplx z = point(a);
    if (std::abs(z.imag()) <= 1e-13 * (std::abs(z) + 1.0)) {
      Anchored r = a;
      r.eps = cplx(z.real(), 0.0);
      r.sigma = 0.0;
      real.push_back(r);
    } else if (z.imag() > 0.0) {
      upper.push_back(a);
    }
  }
  if (2 * upper.size() + real.size() != anchored.size()) {
    throw NumericError("family poles are not closed under conjugation");
  }
  std::vector<Anchored> all = real;
  std::sort(upper.begin(), upper.end(), [&](const Anchored& x, const Anchored& y) {
    return point(x).real() < point(y).real();
  });
  for (const Anchored& a : upper) {
    all.push_back(a);
    Anchored c = a;
    c.sigma = -a.sigma;
    c.eps = std::conj(a.eps);
    all.push_back(c);
  }
  roots.clear();
  for (const Anchored& a : all) roots.push_back(point(a));
  check_stability(roots, policy().refined_pole_stability);
  check_simple(roots);

  std::vector<Eigen::VectorXcd> vecs;
  for (const Anchored& a : all) {
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(l);
    for (int j : modes) v(j) = basis.left_amplitude(j) / resonance(a, j);
    const double hp = std::abs(target(a).second);
    if (hp < policy().residue_derivative * std::abs(resonance(a, a.mode))) {
      std::ostringstream os;
      os << "ill-conditioned residue: |D'| vanishes at pole " << point(a);
      throw NumericError(os.str());
    }
    vecs.push_back(v / v.norm());
  }
  return assemble(basis, bath, roots, vecs, family);
}

ResponseSet general_response_coefficients(const ModeBasis& basis, const BathConfig& bath) {
  const int l = basis.size();
  const int n = 2 * l + 2;
  const Eigen::VectorXd ga = basis.transform.row(0).transpose();
  const Eigen::VectorXd gb = basis.transform.row(l - 1).transpose();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < l; ++i) {
    a(i, l + i) = 1.0;
    a(l + i, i) = -basis.frequencies(i) * basis.frequencies(i);
    a(l + i, 2 * l) = -ga(i) / kMass;
    a(l + i, 2 * l + 1) = -gb(i) / kMass;
    a(2 * l, l + i) = bath.gamma * bath.cutoff * ga(i);
    a(2 * l + 1, l + i) = bath.gamma * bath.cutoff * gb(i);
  }
  a(2 * l, 2 * l) = -bath.cutoff;
  a(2 * l + 1, 2 * l + 1) = -bath.cutoff;

  Eigen::EigenSolver<Eigen::MatrixXd> es(a, true);
  if (es.info() != Eigen::Success) throw NumericError("state-space eigensolver did not converge");
  if (es.eigenvalues().size() != n) throw NumericError("determinant degree mismatch");

  std::vector<cplx> roots;
  std::vector<Eigen::VectorXcd> vecs;
  for (int k = 0; k < n; ++k) {
    cplx z = es.eigenvalues()(k);
    Eigen::VectorXcd v = es.eigenvectors().col(k).head(l);
    v /= v.norm();
    // Refine: inverse iteration for v, Rayleigh-functional Newton for lambda.
    for (int it = 0; it < 2; ++it) {
      const Eigen::MatrixXcd b = interaction_matrix(basis, bath, z);
      Eigen::PartialPivLU<Eigen::MatrixXcd> lu(b);
      Eigen::VectorXcd x = lu.solve(v);
      if (x.allFinite() && x.norm() > 0.0) v = x / x.norm();
      const cplx num = (v.transpose() * interaction_matrix(basis, bath, z) * v)(0, 0);
      const cplx den = (v.transpose() * interaction_matrix_derivative(basis, bath, z) * v)(0, 0);
      if (std::abs(den) > 0.0) z -= num / den;
    }
    roots.push_back(z);
    vecs.push_back(v);
  }
  enforce_conjugates(roots, vecs);
  check_stability(roots, policy().refined_pole_stability);
  check_simple(roots);
  return assemble(basis, bath, roots, vecs, PoleFamily::Full);
}

ResponseSet merge(const ResponseSet& a, const ResponseSet& b) {
  ResponseSet r;
  const int ka = a.size(), kb = b.size();
  const int l = std::max(a.modes(), b.modes());
  r.poles.resize(ka + kb);
  r.poles << a.poles, b.poles;
  r.family = a.family;
  r.family.insert(r.family.end(), b.family.begin(), b.family.end());
  r.left.resize(l, ka + kb);
  r.left << a.left, b.left;
  r.right.resize(l, ka + kb);
  r.right << a.right, b.right;
  r.vectors.resize(l, ka + kb);
  r.vectors << a.vectors, b.vectors;
  r.norms.resize(ka + kb);
  r.norms << a.norms, b.norms;
  return r;
}

ResponseSet build_response(const ModeBasis& basis, const BathConfig& bath, ResponsePath path) {
  if (path == ResponsePath::Auto) path = basis.symmetric ? ResponsePath::Symmetric : ResponsePath::General;
  if (path == ResponsePath::Symmetric) {
    return merge(symmetric_response_coefficients(basis, bath, PoleFamily::Even),
                 symmetric_response_coefficients(basis, bath, PoleFamily::Odd));
  }
  return general_response_coefficients(basis, bath);
}

Eigen::VectorXd ResponseSet::noise_response(bool bath_a, double t, int derivative) const {
  const Eigen::MatrixXcd& res = bath_a ? left : right;
  Eigen::VectorXcd w(size());
  for (int k = 0; k < size(); ++k) w(k) = std::pow(poles(k), derivative) * std::exp(poles(k) * t);
  return (res * w).real();
}

Eigen::MatrixXd ResponseSet::initial_response(double t, int derivative) const {
  Eigen::VectorXcd w(size());
  for (int k = 0; k < size(); ++k) {
    w(k) = norms(k) * std::pow(poles(k), derivative) * std::exp(poles(k) * t);
  }
  return (vectors * w.asDiagonal() * vectors.transpose()).real();
}

Eigen::VectorXcd ResponseSet::noise_response_laplace(bool bath_a, cplx s) const {
  const Eigen::MatrixXcd& res = bath_a ? left : right;
  Eigen::VectorXcd w(size());
  for (int k = 0; k < size(); ++k) w(k) = 1.0 / (s - poles(k));
  return res * w;
}

Eigen::MatrixXcd ResponseSet::initial_response_laplace(cplx s) const {
  Eigen::VectorXcd w(size());
  for (int k = 0; k < size(); ++k) w(k) = norms(k) / (s - poles(k));
  return vectors * w.asDiagonal() * vectors.transpose();
}

double ResponseSet::slowest_decay() const { return poles.real().cwiseAbs().minCoeff(); }
double ResponseSet::fastest_decay() const { return poles.real().cwiseAbs().maxCoeff(); }

void write_response_json(std::ostream& os, const ResponseSet& r) {
  os << "{\"poles\":[";
  for (int k = 0; k < r.size(); ++k) {
    if (k) os << ',';
    os << "{\"re\":" << format_double(r.poles(k).real()) << ",\"im\":"
       << format_double(r.poles(k).imag()) << ",\"family\":\""
       << (r.family[static_cast<std::size_t>(k)] == PoleFamily::Even  ? "even"
           : r.family[static_cast<std::size_t>(k)] == PoleFamily::Odd ? "odd"
                                                                      : "full")
       << "\",\"left_norm\":" << format_double(r.left.col(k).norm())
       << ",\"right_norm\":" << format_double(r.right.col(k).norm()) << '}';
  }
  os << "]}";
}

}  // namespace qlchain
