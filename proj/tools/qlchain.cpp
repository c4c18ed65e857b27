// qlchain: run one figure family from a key = value config and write
// CSV/JSON artifacts plus manifest.json into --out.
#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>

#include "qlchain/config.hpp"
#include "qlchain/correlations.hpp"
#include "qlchain/ensemble.hpp"
#include "qlchain/entanglement.hpp"
#include "qlchain/errors.hpp"
#include "qlchain/io.hpp"
#include "qlchain/observables.hpp"
#include "qlchain/oracles.hpp"
#include "qlchain/pipeline.hpp"
#include "qlchain/spectral.hpp"

#ifndef QLCHAIN_VERSION
#define QLCHAIN_VERSION "unknown"
#endif

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace qlchain;

namespace {

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

class Run {
 public:
  Run(RunConfig cfg, fs::path out, std::string verb, EnsembleOptions opts, bool dump_poles)
      : cfg_(std::move(cfg)), out_(std::move(out)), verb_(std::move(verb)),
        opts_(std::move(opts)), dump_poles_(dump_poles) {
    manifest_["verb"] = verb_;
    manifest_["version"] = QLCHAIN_VERSION;
    manifest_["seed"] = cfg_.seed;
    manifest_["config"] = dump_config(cfg_);
    manifest_["started"] = utc_now();
    manifest_["stages"] = json::array();
    manifest_["rejections"] = json::object();
    manifest_["summary"] = json::object();
    manifest_["outputs"] = json::array();
  }

  template <typename F>
  void stage(const std::string& name, F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::lock_guard<std::mutex> lock(mu_);
    manifest_["stages"].push_back({{"name", name}, {"seconds", secs}});
  }

  // Writes one artifact and records its hash.
  template <typename W>
  void emit(const std::string& name, W&& writer) {
    std::ostringstream os;
    writer(os);
    const std::string body = os.str();
    write_file_atomic(out_ / name, body);
    std::lock_guard<std::mutex> lock(mu_);
    manifest_["outputs"].push_back({{"file", name}, {"fnv1a64", content_hash(body)}, {"bytes", body.size()}});
  }

  void rejections(const std::string& what, int n) { manifest_["rejections"][what] = n; }
  json& summary() { return manifest_["summary"]; }

  void poles(const ChainSolver& s) {
    if (!dump_poles_) return;
    std::ostringstream os;
    write_response_json(os, s.response());
    json entry = json::parse(os.str());
    entry["couplings"] = s.spec().couplings;
    std::lock_guard<std::mutex> lock(mu_);
    pole_dump_.push_back(std::move(entry));
  }

  RealizationFn with_pole_dump(RealizationFn fn) {
    if (!dump_poles_) return fn;
    return [this, fn](const ChainSolver& s) {
      poles(s);
      return fn(s);
    };
  }

  void finish(int status) {
    if (dump_poles_ && !pole_dump_.empty()) {
      emit("poles.json", [&](std::ostream& os) { os << pole_dump_.dump(1) << '\n'; });
    }
    manifest_["finished"] = utc_now();
    manifest_["status"] = status;
    write_file_atomic(out_ / "manifest.json", manifest_.dump(2) + "\n");
  }

  const RunConfig& cfg() const { return cfg_; }
  const EnsembleOptions& options() const { return opts_; }
  EnsembleOptions store_options(const std::string& stem) const {
    EnsembleOptions o = opts_;
    o.store = out_ / (stem + "_rows.csv");
    return o;
  }

 private:
  RunConfig cfg_;
  fs::path out_;
  std::string verb_;
  EnsembleOptions opts_;
  bool dump_poles_;
  json manifest_;
  json pole_dump_ = json::array();
  std::mutex mu_;
};

void verb_profile(Run& r) {
  const RunConfig& c = r.cfg();
  if (!c.disordered()) {
    ChainSolver solver(c.ordered_chain(), c.bath);
    r.poles(solver);
    SiteProfile p;
    FluxReport f;
    r.stage("solve", [&] {
      p = site_profile(solver, c.bath.Ta, c.bath.Tb);
      f = steady_flux(solver, c.bath.Ta, c.bath.Tb);
    });
    r.emit("profile.csv", [&](std::ostream& os) { write_profile_csv(os, p); });
    r.summary()["J"] = f.flux;
    r.summary()["interior_slope"] = interior_slope(p.T_R);
    if (c.length >= 6) {
      // sites 3..l-2
      const Eigen::VectorXd e = p.energy.segment(2, c.length - 4);
      r.summary()["interior_energy_spread"] = (e.maxCoeff() - e.minCoeff()) / e.mean();
    }
    return;
  }
  EnsembleResult e;
  r.stage("ensemble", [&] {
    e = run_ensemble(c.coupling, c.length, c.bath, profile_columns(c.length),
                     r.with_pole_dump(profile_observable(c.bath.Ta, c.bath.Tb)), c.realizations,
                     c.seed, r.store_options("profile"));
  });
  r.emit("profile_ensemble.csv", [&](std::ostream& os) { write_ensemble_csv(os, e); });
  r.emit("profile_mean.csv", [&](std::ostream& os) {
    CsvWriter w(os);
    w.header({"site", "T_R_mean", "T_R_stderr_sqrt", "T_R_stderr_linear", "E_mean"});
    for (int n = 0; n < c.length; ++n) {
      const int t = e.column("T_R_" + std::to_string(n + 1));
      const int en = e.column("E_" + std::to_string(n + 1));
      w.row(n + 1, e.mean(t), e.stderr_sqrt(t), e.stderr_linear(t), e.mean(en));
    }
  });
  const int s = e.column("slope");
  r.summary()["slope_mean"] = e.mean(s);
  r.summary()["slope_stderr"] = e.stderr_sqrt(s);
  r.summary()["J_mean"] = e.mean(e.column("J"));
  r.summary()["realizations"] = e.k;
  r.summary()["resumed"] = e.resumed;
  r.rejections("profile", e.rejections);
}

void verb_flux_length(Run& r) {
  const RunConfig& c = r.cfg();
  if (!c.disordered()) {
    std::vector<std::pair<int, double>> rows;
    r.stage("scan", [&] {
      for (int l : c.lengths) {
        ChainSolver solver(make_ordered_chain(l, c.coupling.mean, c.coupling.pinning), c.bath);
        r.poles(solver);
        rows.emplace_back(l, steady_flux(solver, c.bath.Ta, c.bath.Tb).flux);
      }
    });
    r.emit("flux_length.csv", [&](std::ostream& os) {
      CsvWriter w(os);
      w.header({"l", "J"});
      for (auto& [l, j] : rows) w.row(l, j);
    });
    return;
  }
  FluxLengthScan scan;
  r.stage("ensemble", [&] {
    scan = flux_length_scan(c.coupling, c.bath, c.lengths, c.realizations, c.seed,
                            r.store_options("flux_length"));
  });
  r.emit("flux_length.csv", [&](std::ostream& os) { write_flux_length_csv(os, scan); });
  r.emit("fits.csv", [&](std::ostream& os) { write_fits_csv(os, scan); });
  int rej = 0;
  for (const auto& row : scan.rows) rej += row.rejections;
  r.rejections("flux_length", rej);
  r.summary()["preferred"] = scan.sqrt.preferred ? "sqrt" : "linear";
  r.summary()["rss_linear"] = scan.linear.rss;
  r.summary()["rss_sqrt"] = scan.sqrt.rss;
}

void verb_flux_surface(Run& r) {
  const RunConfig& c = r.cfg();
  FluxSurface s;
  r.stage("scan", [&] {
    s = flux_coupling_scan(c.length, c.f_grid, c.gamma_grid, c.bath, c.coupling.pinning);
  });
  r.emit("flux_surface.csv", [&](std::ostream& os) { write_flux_surface_csv(os, s); });
  r.emit("flux_maxima.csv", [&](std::ostream& os) { write_flux_maxima_csv(os, s); });
}

void verb_conductivity(Run& r) {
  const RunConfig& c = r.cfg();
  std::vector<ConductivityPoint> rows;
  r.stage("scan", [&] { rows = conductivity_scan(c.ordered_chain(), c.bath, c.tm, c.eps); });
  r.emit("conductivity.csv", [&](std::ostream& os) { write_conductivity_csv(os, rows); });
}

void verb_occupations(Run& r) {
  const RunConfig& c = r.cfg();
  if (!c.disordered()) {
    ChainSolver solver(c.ordered_chain(), c.bath);
    r.poles(solver);
    ModeOccupation occ;
    r.stage("solve", [&] {
      occ = effective_frequencies_and_occupations(solver.stationary(), solver.ground());
    });
    r.emit("occupations.csv", [&](std::ostream& os) { write_occupation_csv(os, occ); });
    r.summary()["T_fit"] = occ.T_fit;
    r.summary()["fit_rms"] = occ.fit_rms;
    return;
  }
  OccupationEnsemble e;
  r.stage("ensemble", [&] {
    e = occupation_ensemble(c.coupling, c.length, c.bath, c.realizations, c.seed,
                            r.store_options("occupations"));
  });
  r.emit("occupations_ensemble.csv", [&](std::ostream& os) { write_occupation_ensemble_csv(os, e); });
  r.summary()["T_pooled"] = e.T_pooled;
  r.summary()["rms_Ta"] = e.rms_Ta;
  r.summary()["rms_Tb"] = e.rms_Tb;
  r.summary()["rms_Tm"] = e.rms_Tm;
  r.summary()["rms_pooled"] = e.rms_pooled;
  r.summary()["teff_var_top"] = e.teff_var_top;
  r.summary()["teff_var_bottom"] = e.teff_var_bottom;
  r.rejections("occupations", e.rejections);
}

void verb_localization(Run& r) {
  const RunConfig& c = r.cfg();
  if (!c.disordered()) {
    const ModeBasis basis = diagonalize(build_coupling_matrix(c.ordered_chain()));
    r.emit("localization.csv", [&](std::ostream& os) {
      write_localization_csv(os, basis, localization(basis));
    });
    return;
  }
  std::vector<LocalizationPoint> rows;
  r.stage("ensemble", [&] {
    rows = localization_ensemble(c.coupling, c.length, c.realizations, c.seed);
  });
  r.emit("localization.csv", [&](std::ostream& os) { write_localization_ensemble_csv(os, rows); });
  std::vector<double> om, xi;
  for (const auto& p : rows) {
    om.push_back(p.omega);
    xi.push_back(p.xi);
  }
  if (om.size() >= 3) {
    const auto [rho, p] = spearman(om, xi);
    r.summary()["spearman_rho"] = rho;
    r.summary()["spearman_p"] = p;
  }
}

void verb_negativity(Run& r) {
  const RunConfig& c = r.cfg();
  std::vector<NegativityPoint> rows;
  r.stage("scan", [&] {
    rows = negativity_temperature_scan(c.ordered_chain(), c.bath, c.tm, c.eps, c.cuts);
  });
  r.emit("negativity.csv", [&](std::ostream& os) { write_negativity_csv(os, rows); });
}

void verb_transient(Run& r) {
  const RunConfig& c = r.cfg();
  ChainSolver solver(c.ordered_chain(), c.bath);
  r.poles(solver);
  const int l = c.length;
  const CorrelationMatrices init = thermal_chain_state(solver.basis(), c.chain_temperature);
  const CorrelationMatrices stat = solver.real_space(solver.stationary());
  r.emit("transient.csv", [&](std::ostream& os) {
    CsvWriter w(os);
    w.header({"t", "site", "X2", "P2", "P2_stationary"});
    r.stage("transient", [&] {
      for (double t : c.times) {
        const CorrelationMatrices rs =
            solver.real_space(transient_correlations(solver.response(), c.bath, init, t));
        for (int n = 0; n < l; ++n) w.row(t, n + 1, rs.pos(n, n), rs.mom(n, n), stat.mom(n, n));
      }
    });
  });
  r.emit("lagged.csv", [&](std::ostream& os) {
    CsvWriter w(os);
    w.header({"tau", "site", "XX_tau", "PP_tau"});
    r.stage("lagged", [&] {
      for (double tau : c.lags) {
        const CorrelationMatrices rs =
            solver.real_space(time_shifted_stationary(solver.response(), c.bath, tau));
        for (int n = 0; n < l; ++n) w.row(tau, n + 1, rs.pos(n, n), rs.mom(n, n));
      }
    });
  });
}

int verb_verify(Run& r) {
  const RunConfig& c = r.cfg();
  ExplicitBathRun run;
  run.modes = c.oracle_modes;
  run.spacing = c.oracle_spacing;
  run.horizon = c.oracle_horizon;
  run.dt = c.oracle_dt;
  run.seed = c.seed;
  ChainSpec spec = c.ordered_chain();
  if (c.disordered()) {
    std::mt19937_64 rng(substream_seed(c.seed, 0));
    spec = sample_chain(c.coupling, c.length, rng);
  }
  TriangleReport rep;
  r.stage("triangle", [&] { rep = verify_triangle(spec, c.bath, run); });
  json j = {{"fourier_deviation", rep.fourier_deviation},
            {"fourier_tol", rep.fourier_tol},
            {"fourier_pass", rep.fourier_pass()},
            {"classical_Ta", rep.classical_Ta},
            {"classical_Tb", rep.classical_Tb},
            {"classical_flux_deviation", rep.classical_flux_deviation},
            {"classical_energy_deviation", rep.classical_energy_deviation},
            {"classical_tol", rep.classical_tol},
            {"classical_pass", rep.classical_pass()},
            {"pass", rep.pass()}};
  r.emit("verify.json", [&](std::ostream& os) { os << j.dump(2) << '\n'; });
  r.summary() = j;
  std::cout << "fourier vs laplace: " << rep.fourier_deviation << (rep.fourier_pass() ? " PASS" : " FAIL")
            << "\nexplicit bath vs classical kernel: flux " << rep.classical_flux_deviation << ", <P^2> "
            << rep.classical_energy_deviation << (rep.classical_pass() ? " PASS" : " FAIL") << '\n';
  if (!rep.pass()) throw OracleDisagreement("oracle triangle disagrees");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Heat transport in harmonic chains between two quantum Langevin baths"};
  std::string verb, config_path, out_dir = ".";
  std::uint64_t seed = 0;
  bool have_seed = false;
  int workers = 1;
  bool resume = false, dump_poles = false;
  app.add_option("verb", verb, "profile | flux-length | flux-surface | conductivity | occupations | "
                               "localization | negativity | transient | verify")
      ->required()
      ->check(CLI::IsMember({"profile", "flux-length", "flux-surface", "conductivity", "occupations",
                             "localization", "negativity", "transient", "verify"}));
  app.add_option("--config", config_path, "key = value configuration file");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seed", seed, "overrides the config seed")->each([&](const std::string&) { have_seed = true; });
  app.add_option("--workers", workers, "parallel realizations")->check(CLI::PositiveNumber);
  app.add_flag("--resume", resume, "reuse realization rows already in --out");
  app.add_flag("--dump-poles", dump_poles, "write poles.json with per-chain poles and residue norms");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  std::unique_ptr<Run> run;
  try {
    RunConfig cfg = config_path.empty() ? build_config({}, process_environment())
                                        : load_config(config_path);
    if (have_seed) cfg.seed = seed;
    fs::create_directories(out_dir);
    EnsembleOptions opts;
    opts.workers = workers;
    opts.resume = resume;
    run = std::make_unique<Run>(cfg, out_dir, verb, opts, dump_poles);
    int status = 0;
    if (verb == "profile") verb_profile(*run);
    else if (verb == "flux-length") verb_flux_length(*run);
    else if (verb == "flux-surface") verb_flux_surface(*run);
    else if (verb == "conductivity") verb_conductivity(*run);
    else if (verb == "occupations") verb_occupations(*run);
    else if (verb == "localization") verb_localization(*run);
    else if (verb == "negativity") verb_negativity(*run);
    else if (verb == "transient") verb_transient(*run);
    else status = verb_verify(*run);
    run->finish(status);
    return status;
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    if (run) run->finish(2);
    return 2;
  } catch (const OracleDisagreement& e) {
    std::cerr << "oracle disagreement: " << e.what() << '\n';
    if (run) run->finish(4);
    return 4;
  } catch (const OracleInconclusive& e) {
    std::cerr << "oracle inconclusive: " << e.what() << '\n';
    if (run) run->finish(3);
    return 3;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    if (run) run->finish(3);
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    if (run) run->finish(3);
    return 3;
  }
}
