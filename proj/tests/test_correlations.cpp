#include <doctest.h>

#include <cmath>
#include <random>

#include "oracle_helpers.hpp"
#include "qlchain/correlations.hpp"
#include "qlchain/ensemble.hpp"
#include "qlchain/pipeline.hpp"

using namespace qlchain;

namespace {

double max_dev(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).cwiseAbs().maxCoeff() / std::max(1e-300, b.cwiseAbs().maxCoeff());
}

}  // namespace

TEST_SUITE("correlations") {

TEST_CASE("weak coupling gives thermal mode energies") {
  const double t = 1.5;
  const ChainSolver s(make_ordered_chain(5, 1.0), {0.01, 10.0, t, t});
  const CorrelationMatrices c = s.stationary();
  for (int i = 0; i < 5; ++i) {
    const double w = s.basis().frequencies(i);
    const double ref = 0.5 * w / std::tanh(w / (2.0 * t));
    CHECK(c.mom(i, i) == doctest::Approx(ref).epsilon(0.01));
    CHECK(c.pos(i, i) * w * w == doctest::Approx(ref).epsilon(0.01));
  }
}

TEST_CASE("classical stationary state solves the Lyapunov equation") {
  std::mt19937_64 rng(17);
  DisorderSpec d;
  d.sigma = 0.25;
  for (int trial = 0; trial < 6; ++trial) {
    d.symmetric = trial % 2 == 1;
    const ChainSpec spec = sample_chain(d, 3 + trial, rng);
    const BathConfig bath{0.3 + trial, 4.0 + 3.0 * trial, 3.0, 1.0};
    const ChainSolver s(spec, bath);
    const CorrelationMatrices c = s.real_space(s.stationary(bath.Ta, bath.Tb, NoiseModel::Classical));
    const auto e = oracle::classical_embedding(spec, bath);
    const Eigen::MatrixXd sig = oracle::lyapunov(e.a, e.d);
    const int l = spec.length();
    CHECK(max_dev(c.pos, sig.topLeftCorner(l, l)) < 1e-8);
    CHECK(max_dev(c.mom, sig.block(l, l, l, l)) < 1e-8);
    CHECK((c.cross - sig.block(0, l, l, l)).cwiseAbs().maxCoeff() < 1e-8 * sig.block(l, l, l, l).maxCoeff());
  }
}

TEST_CASE("classical transient follows the Lyapunov flow") {
  ChainSpec spec = make_ordered_chain(4, 1.0);
  spec.couplings = {0.8, 1.3, 0.6};
  const BathConfig bath{0.7, 6.0, 4.0, 1.0};
  const ChainSolver s(spec, bath, ResponsePath::General);
  const double tch = 2.0;
  CorrelationMatrices init;
  {
    // classical thermal chain in normal modes
    const int l = 4;
    init.pos = Eigen::MatrixXd::Zero(l, l);
    init.mom = Eigen::MatrixXd::Zero(l, l);
    init.cross = Eigen::MatrixXd::Zero(l, l);
    for (int i = 0; i < l; ++i) {
      const double w = s.basis().frequencies(i);
      init.pos(i, i) = tch / (w * w);
      init.mom(i, i) = tch;
    }
    init.time = 0.0;
  }
  const auto e = oracle::classical_embedding(spec, bath);
  const Eigen::MatrixXd sinf = oracle::lyapunov(e.a, e.d);
  const Eigen::MatrixXd s0 = oracle::initial_state(e, spec, bath, tch);
  for (double t : {0.3, 1.0, 4.0, 15.0}) {
    const CorrelationMatrices c =
        s.real_space(transient_correlations(s.response(), bath, init, t, NoiseModel::Classical));
    const Eigen::MatrixXd ref = oracle::evolve(e, s0, sinf, t);
    CHECK(max_dev(c.pos, ref.topLeftCorner(4, 4)) < 1e-7);
    CHECK(max_dev(c.mom, ref.block(4, 4, 4, 4)) < 1e-7);
    CHECK((c.cross - ref.block(0, 4, 4, 4)).cwiseAbs().maxCoeff() < 1e-7 * ref.block(4, 4, 4, 4).maxCoeff());
  }
}

TEST_CASE("classical lagged correlations follow e^{A tau}") {
  ChainSpec spec = make_ordered_chain(5, 1.0);
  const BathConfig bath{1.0, 8.0, 3.0, 1.0};
  const ChainSolver s(spec, bath);
  const auto e = oracle::classical_embedding(spec, bath);
  const Eigen::MatrixXd sinf = oracle::lyapunov(e.a, e.d);
  for (double tau : {0.0, 0.5, 2.0, 7.0}) {
    const CorrelationMatrices c =
        s.real_space(time_shifted_stationary(s.response(), bath, tau, NoiseModel::Classical));
    // <z_i(t) z_j(t+tau)> = (e^{A tau} S)_{ji}
    const Eigen::MatrixXd lag = ((e.a * tau).exp() * sinf).transpose();
    const double scale = sinf.block(5, 5, 5, 5).maxCoeff();
    CHECK((c.pos - lag.topLeftCorner(5, 5)).cwiseAbs().maxCoeff() < 1e-7 * scale);
    CHECK((c.mom - lag.block(5, 5, 5, 5)).cwiseAbs().maxCoeff() < 1e-7 * scale);
    CHECK((c.cross - lag.block(0, 5, 5, 5)).cwiseAbs().maxCoeff() < 1e-7 * scale);
  }
}

TEST_CASE("transient limits") {
  const BathConfig bath{0.5, 10.0, 5.0, 2.0};
  const ChainSolver s(make_ordered_chain(4, 1.0), bath);
  const CorrelationMatrices init = thermal_chain_state(s.basis(), 1.0);
  const CorrelationMatrices at0 = transient_correlations(s.response(), bath, init, 0.0);
  CHECK((at0.pos - init.pos).cwiseAbs().maxCoeff() == 0.0);
  const CorrelationMatrices stat = s.stationary();
  const CorrelationMatrices late = transient_correlations(s.response(), bath, init, 60.0 / s.response().slowest_decay());
  CHECK(max_dev(late.mom, stat.mom) < 1e-6);
  CHECK(max_dev(late.pos, stat.pos) < 1e-6);
  const CorrelationMatrices lag0 = time_shifted_stationary(s.response(), bath, 0.0);
  CHECK(max_dev(lag0.pos, stat.pos) < 1e-12);
}

TEST_CASE("thermal chain state") {
  const ModeBasis b = diagonalize(build_coupling_matrix(make_ordered_chain(3, 1.0)));
  const CorrelationMatrices g = thermal_chain_state(b, 0.0);
  const CorrelationMatrices h = thermal_chain_state(b, 2.0);
  for (int i = 0; i < 3; ++i) {
    const double w = b.frequencies(i);
    CHECK(g.mom(i, i) == doctest::Approx(0.5 * w));
    CHECK(h.pos(i, i) == doctest::Approx(0.5 / w / std::tanh(w / 4.0)));
  }
}

TEST_CASE("basis round trip") {
  const ChainSolver s(make_ordered_chain(6, 1.0), {2.0, 10.0, 3.0, 1.0});
  const CorrelationMatrices c = s.stationary();
  const CorrelationMatrices back = to_normal_modes(s.real_space(c), s.basis());
  CHECK(max_dev(back.pos, c.pos) < 1e-12);
  CHECK(max_dev(back.cross, c.cross) < 1e-10);
  CHECK_THROWS(to_normal_modes(c, s.basis()));
}

}
