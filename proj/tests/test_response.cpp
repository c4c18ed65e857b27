#include <doctest.h>

#include <algorithm>
#include <random>

#include "oracle_helpers.hpp"
#include "qlchain/ensemble.hpp"
#include "qlchain/errors.hpp"
#include "qlchain/pipeline.hpp"
#include "qlchain/polynomial.hpp"
#include "qlchain/response.hpp"

using namespace qlchain;

namespace {

std::vector<cplx> sorted(std::vector<cplx> v) {
  std::sort(v.begin(), v.end(), [](cplx a, cplx b) {
    return std::abs(a.real() - b.real()) > 1e-9 ? a.real() < b.real() : a.imag() < b.imag();
  });
  return v;
}

void check_reconstruction(const ModeBasis& b, const BathConfig& bath, const ResponseSet& r,
                          std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  const int l = b.size();
  const Eigen::VectorXcd g1 = b.transform.row(0).transpose().cast<cplx>();
  const Eigen::VectorXcd gl = b.transform.row(l - 1).transpose().cast<cplx>();
  for (int trial = 0; trial < 10; ++trial) {
    const cplx s(0.5 + std::abs(u(rng)), u(rng));
    const Eigen::MatrixXcd a = oracle::interaction(b, bath, s).inverse();
    const Eigen::MatrixXcd rec = r.initial_response_laplace(s);
    CHECK((rec - a).cwiseAbs().maxCoeff() <= 1e-8 * a.cwiseAbs().maxCoeff());
    const Eigen::VectorXcd fa = a * g1, fb = a * gl;
    CHECK((r.noise_response_laplace(true, s) - fa).cwiseAbs().maxCoeff() <= 1e-8 * fa.cwiseAbs().maxCoeff());
    CHECK((r.noise_response_laplace(false, s) - fb).cwiseAbs().maxCoeff() <= 1e-8 * fb.cwiseAbs().maxCoeff());
  }
}

}  // namespace

TEST_SUITE("response") {

TEST_CASE("companion roots of a known quartic") {
  // (s+1)(s+2)(s^2+2s+5)
  const Polynomial p = Polynomial({1, 1}) * Polynomial({2, 1}) * Polynomial({5, 2, 1});
  const auto r = sorted(companion_roots(p));
  REQUIRE(r.size() == 4);
  CHECK(std::abs(r[0] - cplx(-2, 0)) < 1e-12);
  CHECK(std::abs(r[1] - cplx(-1, -2)) < 1e-12);
  CHECK(std::abs(r[2] - cplx(-1, 0)) < 1e-12);
  CHECK(std::abs(r[3] - cplx(-1, 2)) < 1e-12);
  CHECK(r[1] == std::conj(r[3]));
}

TEST_CASE("family denominator vanishes where B(s) is singular") {
  const ModeBasis b = diagonalize(build_coupling_matrix(make_ordered_chain(6, 1.0)), true);
  const BathConfig bath{2.0, 10.0, 0.0, 0.0};
  const ResponseSet r = build_response(b, bath);
  for (int k = 0; k < r.size(); ++k) {
    const Eigen::MatrixXcd m = oracle::interaction(b, bath, r.poles(k));
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
    CHECK(svd.singularValues().minCoeff() < 1e-9 * svd.singularValues().maxCoeff());
  }
}

TEST_CASE("residues reconstruct B^-1 on both paths") {
  std::mt19937_64 rng(11);
  const BathConfig bath{2.0, 10.0, 0.0, 0.0};
  const ModeBasis ordered = diagonalize(build_coupling_matrix(make_ordered_chain(4, 1.0)), true);
  check_reconstruction(ordered, bath, build_response(ordered, bath, ResponsePath::Symmetric), rng);
  check_reconstruction(ordered, bath, build_response(ordered, bath, ResponsePath::General), rng);
  DisorderSpec d;
  d.sigma = 0.2;
  for (int i = 0; i < 5; ++i) {
    const ChainSpec s = sample_chain(d, 6 + i, rng);
    const ModeBasis b = diagonalize(build_coupling_matrix(s));
    const ResponseSet r = build_response(b, {0.5 + i, 10.0, 0.0, 0.0});
    CHECK(r.size() == 2 * s.length() + 2);
    check_reconstruction(b, {0.5 + i, 10.0, 0.0, 0.0}, r, rng);
  }
  d.symmetric = true;
  for (int l : {9, 20}) {
    const ChainSpec s = sample_chain(d, l, rng);
    const ModeBasis b = diagonalize(build_coupling_matrix(s), true);
    const ResponseSet r = build_response(b, bath);
    CHECK(r.size() == 2 * l + 2);
    check_reconstruction(b, bath, r, rng);
  }
}

TEST_CASE("symmetric and general paths find the same poles") {
  for (double gamma : {0.5, 2.0, 10.0}) {
    const BathConfig bath{gamma, 10.0, 0.0, 0.0};
    ChainSpec s = make_ordered_chain(4, 1.0);
    s.couplings = {1.2, 0.7, 1.2};
    const ModeBasis b = diagonalize(build_coupling_matrix(s), true);
    const ResponseSet sym = build_response(b, bath, ResponsePath::Symmetric);
    const ResponseSet gen = build_response(b, bath, ResponsePath::General);
    REQUIRE(sym.size() == gen.size());
    std::vector<cplx> a(sym.poles.data(), sym.poles.data() + sym.size());
    std::vector<cplx> c(gen.poles.data(), gen.poles.data() + gen.size());
    a = sorted(a);
    c = sorted(c);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - c[i]) < 1e-9 * (1 + std::abs(a[i])));
  }
}

TEST_CASE("A(0) = 0 and A'(0) = 1") {
  const ModeBasis b = diagonalize(build_coupling_matrix(make_ordered_chain(8, 1.0)), true);
  const ResponseSet r = build_response(b, {2.0, 10.0, 0.0, 0.0});
  const int l = b.size();
  CHECK(r.initial_response(0.0, 0).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((r.initial_response(0.0, 1) - Eigen::MatrixXd::Identity(l, l)).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(r.noise_response(true, 0.0).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(r.noise_response(true, 40.0 / r.slowest_decay()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("poles are stable for random chains") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> gam(0.05, 20.0), cut(1.0, 50.0);
  DisorderSpec d;
  d.sigma = 0.3;
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    d.symmetric = trial % 3 == 0;
    const int l = 2 + static_cast<int>(rng() % 25);
    const ChainSpec s = sample_chain(d, l, rng);
    try {
      const ChainSolver solver(s, {gam(rng), cut(rng), 1.0, 1.0});
      CHECK(solver.response().poles.real().maxCoeff() < 0.0);
      ++checked;
    } catch (const DegeneracyError&) {
    }
  }
  CHECK(checked >= 190);
}

}
