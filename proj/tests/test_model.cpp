#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "qlchain/ensemble.hpp"
#include "qlchain/errors.hpp"
#include "qlchain/model.hpp"
#include "qlchain/spectral.hpp"

using namespace qlchain;

TEST_SUITE("model") {

TEST_CASE("coupling matrix of a three-site chain") {
  ChainSpec s;
  s.onsite = {1.0, 0.5, 2.0};
  s.couplings = {0.3, 0.7};
  const Eigen::MatrixXd c = build_coupling_matrix(s);
  CHECK(c(0, 0) == doctest::Approx(1.0 + 0.3));
  CHECK(c(1, 1) == doctest::Approx(0.25 + 0.3 + 0.7));
  CHECK(c(2, 2) == doctest::Approx(4.0 + 0.7));
  CHECK(c(0, 1) == doctest::Approx(-0.3));
  CHECK(c(1, 2) == doctest::Approx(-0.7));
  CHECK(c(0, 2) == 0.0);
  CHECK((c - c.transpose()).norm() == 0.0);
}

TEST_CASE("mirror symmetry detection") {
  CHECK(detect_symmetry(make_ordered_chain(7, 1.3)));
  ChainSpec s;
  s.onsite = {1, 1, 1, 1};
  s.couplings = {1.1, 0.9, 1.1};
  CHECK(detect_symmetry(s));
  s.couplings = {1.1, 0.9, 0.8};
  CHECK_FALSE(detect_symmetry(s));
  s.couplings = {1.1, 0.9, 1.1 * (1 + 1e-9)};
  CHECK_FALSE(detect_symmetry(s));
}

TEST_CASE("invalid chains are rejected") {
  ChainSpec s = make_ordered_chain(4, 1.0);
  s.mass = 2.0;
  CHECK_THROWS_AS(s.validate(), ValidationError);
  s = make_ordered_chain(4, 1.0);
  s.couplings[1] = -0.1;
  CHECK_THROWS_AS(s.validate(), ValidationError);
  s = make_ordered_chain(4, 1.0);
  s.onsite.assign(4, 0.0);
  CHECK_THROWS_AS(s.validate(), ValidationError);
  CHECK_NOTHROW(make_ordered_chain(6, 1.0, {Pinning::EndsOnly, 1.0}).validate());
}

TEST_CASE("ordered spectrum matches the tridiagonal closed form") {
  for (int l : {2, 5, 20, 33}) {
    for (double f : {0.5, 1.0, 2.0}) {
      const ModeBasis b = diagonalize(build_coupling_matrix(make_ordered_chain(l, f)));
      // free ends: Omega_k^2 = 1 + 2f(1 - cos(k pi/l)), k = 0..l-1
      for (int k = 0; k < l; ++k) {
        const double w2 = 1.0 + 2.0 * f * (1.0 - std::cos(k * std::numbers::pi / l));
        CHECK(std::abs(b.frequencies(k) * b.frequencies(k) - w2) <= 1e-10 * w2);
      }
    }
  }
}

TEST_CASE("mode basis is orthogonal and reconstructs C") {
  std::mt19937_64 rng(7);
  DisorderSpec d;
  d.sigma = 0.3;
  for (int trial = 0; trial < 200; ++trial) {
    const int l = 2 + static_cast<int>(rng() % 40);
    d.symmetric = trial % 2 == 0;
    const ChainSpec s = sample_chain(d, l, rng);
    const Eigen::MatrixXd c = build_coupling_matrix(s);
    const ModeBasis b = diagonalize(c, d.symmetric);
    const Eigen::MatrixXd& g = b.transform;
    CHECK((g * g.transpose() - Eigen::MatrixXd::Identity(l, l)).cwiseAbs().maxCoeff() < 1e-9);
    const Eigen::MatrixXd rec = g * b.frequencies.array().square().matrix().asDiagonal() * g.transpose();
    CHECK((rec - c).cwiseAbs().maxCoeff() < 1e-9 * c.cwiseAbs().maxCoeff());
    // Gershgorin
    double lo = 1e300, hi = 0.0;
    for (int i = 0; i < l; ++i) {
      const double w = s.onsite[static_cast<std::size_t>(i)];
      const double fl = i > 0 ? s.couplings[static_cast<std::size_t>(i - 1)] : 0.0;
      const double fr = i + 1 < l ? s.couplings[static_cast<std::size_t>(i)] : 0.0;
      lo = std::min(lo, w * w);
      hi = std::max(hi, w * w + 2.0 * (fl + fr));
    }
    CHECK(b.frequencies.minCoeff() * b.frequencies.minCoeff() >= lo - 1e-12);
    CHECK(b.frequencies.maxCoeff() * b.frequencies.maxCoeff() <= hi + 1e-12);
  }
}

TEST_CASE("parity labels of a symmetric chain") {
  ChainSpec s;
  s.onsite.assign(6, 1.0);
  s.couplings = {1.2, 0.8, 1.0, 0.8, 1.2};
  const ModeBasis b = diagonalize(build_coupling_matrix(s), true);
  CHECK(b.symmetric);
  CHECK(b.family(Parity::Even).size() == 3);
  CHECK(b.family(Parity::Odd).size() == 3);
  for (int i = 0; i < 6; ++i) {
    const double sign = b.parity[static_cast<std::size_t>(i)] == Parity::Even ? 1.0 : -1.0;
    for (int n = 0; n < 6; ++n) CHECK(b.transform(5 - n, i) == doctest::Approx(sign * b.transform(n, i)).epsilon(1e-12));
    CHECK(b.left_amplitude(i) >= 0.0);
  }
}

TEST_CASE("localization length of standing waves") {
  const int l = 20;
  const ModeBasis b = diagonalize(build_coupling_matrix(make_ordered_chain(l, 1.0)));
  const LocalizationReport r = localization(b);
  for (int k = 0; k < l; ++k) {
    double p = 0.0;
    for (int j = 1; j <= l; ++j) {
      const double norm = k == 0 ? std::sqrt(1.0 / l) : std::sqrt(2.0 / l);
      const double g = norm * std::cos((j - 0.5) * k * std::numbers::pi / l);
      p += g * g * g * g;
    }
    CHECK(r.participation(k) == doctest::Approx(p).epsilon(1e-10));
    CHECK(r.length(k) == doctest::Approx(1.0 / p).epsilon(1e-10));
  }
}

TEST_CASE("degenerate spectra are reported") {
  ChainSpec s = make_ordered_chain(3, 1e-12);
  s.couplings = {1e-14, 1e-14};
  CHECK_THROWS_AS(diagonalize(build_coupling_matrix(s)), DegeneracyError);
}

}
