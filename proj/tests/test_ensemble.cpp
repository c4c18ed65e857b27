#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "qlchain/ensemble.hpp"
#include "qlchain/errors.hpp"

using namespace qlchain;

TEST_SUITE("ensemble") {

TEST_CASE("substreams are deterministic and distinct") {
  CHECK(substream_seed(1, 2, 0) == substream_seed(1, 2, 0));
  CHECK(substream_seed(1, 2, 0) != substream_seed(1, 3, 0));
  CHECK(substream_seed(1, 2, 0) != substream_seed(1, 2, 1));
  CHECK(substream_seed(1, 2, 0) != substream_seed(2, 2, 0));
}

TEST_CASE("sampled chains respect cutoff and symmetry") {
  std::mt19937_64 rng(1);
  DisorderSpec d;
  d.sigma = 0.6;
  d.symmetric = true;
  for (int trial = 0; trial < 100; ++trial) {
    const ChainSpec s = sample_chain(d, 2 + trial % 17, rng);
    for (double f : s.couplings) CHECK(f >= 0.05);
    CHECK(detect_symmetry(s));
  }
  d.sigma = 1.5;
  CHECK_THROWS_AS(d.validate(), ValidationError);
}

TEST_CASE("ensembles reproduce across worker counts") {
  DisorderSpec d;
  d.sigma = 0.2;
  const BathConfig bath{2.0, 10.0, 5.0, 2.0};
  EnsembleOptions one, four;
  four.workers = 4;
  const auto a = run_ensemble(d, 10, bath, profile_columns(10), profile_observable(5, 2), 12, 77, one);
  const auto b = run_ensemble(d, 10, bath, profile_columns(10), profile_observable(5, 2), 12, 77, four);
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) CHECK(a.rows[i].values == b.rows[i].values);
  CHECK(a.mean == b.mean);
  const int j = a.column("J");
  CHECK(a.stderr_sqrt(j) == doctest::Approx(a.std(j) / std::sqrt(11.0)));
  CHECK(a.stderr_linear(j) == doctest::Approx(a.std(j) / 11.0));
}

TEST_CASE("resume reuses stored rows") {
  const auto dir = std::filesystem::temp_directory_path() / "qlchain_resume_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  DisorderSpec d;
  d.sigma = 0.2;
  const BathConfig bath{2.0, 10.0, 5.0, 2.0};
  EnsembleOptions o;
  o.store = dir / "rows.csv";
  const auto first = run_ensemble(d, 8, bath, profile_columns(8), profile_observable(5, 2), 6, 3, o);
  o.resume = true;
  const auto again = run_ensemble(d, 8, bath, profile_columns(8), profile_observable(5, 2), 9, 3, o);
  CHECK(again.resumed == 6);
  CHECK(again.k == 9);
  for (std::size_t i = 0; i < first.rows.size(); ++i) CHECK(first.rows[i].values == again.rows[i].values);
  const auto fresh = run_ensemble(d, 8, bath, profile_columns(8), profile_observable(5, 2), 9, 3);
  for (std::size_t i = 0; i < fresh.rows.size(); ++i) CHECK(fresh.rows[i].values == again.rows[i].values);
  std::filesystem::remove_all(dir);
}

TEST_CASE("scaling fit recovers synthetic resistances") {
  const std::vector<double> l{5, 10, 20, 40, 65};
  std::vector<double> j, se(5, 0.01);
  for (double x : l) j.push_back(3.0 / (4.0 + 0.7 * std::sqrt(x)));
  const ScalingFit s = fit_scaling(l, j, se, 3.0, ScalingFit::Model::Sqrt);
  CHECK(s.Rc == doctest::Approx(4.0).epsilon(1e-6));
  CHECK(s.R == doctest::Approx(0.7).epsilon(1e-6));
  CHECK(s.rss < 1e-12);
  const ScalingFit lin = fit_scaling(l, j, se, 3.0, ScalingFit::Model::Linear);
  CHECK(lin.rss > s.rss);
}

TEST_CASE("spearman rank correlation") {
  const std::vector<double> x{1, 2, 3, 4, 5, 6};
  const auto [rho, p] = spearman(x, {2, 4, 6, 8, 10, 12});
  CHECK(rho == doctest::Approx(1.0));
  CHECK(p < 1e-3);
  const auto [rho2, p2] = spearman(x, {6, 5, 4, 3, 2, 1});
  CHECK(rho2 == doctest::Approx(-1.0));
  const auto [rho3, p3] = spearman({1, 2, 3, 4, 5}, {2, 1, 4, 3, 5});
  CHECK(rho3 == doctest::Approx(0.8));
  CHECK(p3 > 0.05);
}

TEST_CASE("localization ensemble rows") {
  DisorderSpec d;
  d.sigma = 0.3;
  const auto rows = localization_ensemble(d, 12, 4, 5);
  CHECK(rows.size() == 48);
  for (const auto& r : rows) {
    CHECK(r.xi >= 1.0);
    CHECK(r.xi <= 12.0 + 1e-9);
  }
}

}
