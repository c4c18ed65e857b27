#include "qlchain/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>
#include <unsupported/Eigen/NonLinearOptimization>

#include "qlchain/errors.hpp"
#include "qlchain/io.hpp"
#include "qlchain/observables.hpp"
#include "qlchain/spectral.hpp"

namespace qlchain {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

// Rows stored from an earlier run with the same seed and column layout.
std::map<std::uint64_t, RealizationRow> load_store(const std::filesystem::path& path,
                                                   std::uint64_t seed, std::size_t ncols) {
  std::map<std::uint64_t, RealizationRow> rows;
  std::ifstream in(path);
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (header) {
      header = false;
      continue;
    }
    const auto f = split(line, ',');
    if (f.size() != ncols + 3) continue;  // torn or foreign line
    if (std::stoull(f[0]) != seed) continue;
    RealizationRow r;
    r.index = std::stoull(f[1]);
    r.attempt = std::stoi(f[2]);
    for (std::size_t c = 0; c < ncols; ++c) r.values.push_back(std::stod(f[c + 3]));
    rows[r.index] = std::move(r);
  }
  return rows;
}

struct RowSink {
  std::mutex mu;
  std::ofstream out;

  void append(std::uint64_t seed, const RealizationRow& r) {
    std::ostringstream line;
    line << seed << ',' << r.index << ',' << r.attempt;
    for (double v : r.values) line << ',' << format_double(v);
    line << '\n';
    const std::string s = line.str();
    std::lock_guard<std::mutex> lock(mu);
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
    out.flush();
  }
};

template <typename Body>
void parallel_for(int n, int workers, Body body) {
  workers = std::max(1, std::min(workers, n));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex err_mu;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mu);
          if (!error) error = std::current_exception();
          next = n;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

double bose_temperature(double omega, double n) {
  return n > 0.0 ? omega / std::log1p(1.0 / n) : 0.0;
}

double variance(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  const double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size());
}

}  // namespace

void DisorderSpec::validate() const {
  if (!(mean > 0.0)) throw ValidationError("coupling.mean: must be positive");
  if (!(sigma >= 0.0)) throw ValidationError("coupling.sigma: must be non-negative");
  if (!(cutoff_fraction > 0.0 && cutoff_fraction < 1.0)) {
    throw ValidationError("coupling.cutoff: must lie in (0, 1)");
  }
  if (sigma > 0.0 && sigma >= mean) {
    throw ValidationError("coupling.sigma: must be smaller than coupling.mean");
  }
}

std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index, std::uint64_t attempt) {
  return splitmix64(splitmix64(seed ^ splitmix64(index)) + attempt);
}

ChainSpec sample_chain(const DisorderSpec& d, int l, std::mt19937_64& rng) {
  d.validate();
  if (l < 2) throw ValidationError("length: must be at least 2");
  std::normal_distribution<double> gauss(d.mean, d.sigma);
  auto draw = [&] {
    if (d.sigma == 0.0) return d.mean;
    for (;;) {
      const double f = gauss(rng);
      if (f >= d.cutoff_fraction * d.mean) return f;
    }
  };
  ChainSpec spec;
  spec.onsite = d.pinning.onsite(l);
  spec.couplings.resize(static_cast<std::size_t>(l - 1));
  const int n = l - 1;
  if (d.symmetric) {
    for (int i = 0; i < (n + 1) / 2; ++i) {
      const double f = draw();
      spec.couplings[static_cast<std::size_t>(i)] = f;
      spec.couplings[static_cast<std::size_t>(n - 1 - i)] = f;
    }
  } else {
    for (auto& f : spec.couplings) f = draw();
  }
  return spec;
}

int EnsembleResult::column(const std::string& name) const {
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (columns[c] == name) return static_cast<int>(c);
  }
  throw ValidationError("unknown ensemble column " + name);
}

EnsembleResult run_ensemble(const DisorderSpec& disorder, int l, const BathConfig& bath,
                            const std::vector<std::string>& columns, const RealizationFn& fn,
                            int k, std::uint64_t seed, const EnsembleOptions& options) {
  disorder.validate();
  bath.validate();
  if (k < 1) throw ValidationError("realizations: must be at least 1");
  EnsembleResult res;
  res.columns = columns;
  res.k = k;
  res.seed = seed;

  std::map<std::uint64_t, RealizationRow> done;
  std::unique_ptr<RowSink> sink;
  if (!options.store.empty()) {
    if (options.resume && std::filesystem::exists(options.store)) {
      done = load_store(options.store, seed, columns.size());
    }
    const bool fresh = !options.resume || !std::filesystem::exists(options.store);
    sink = std::make_unique<RowSink>();
    sink->out.open(options.store, fresh ? std::ios::trunc : std::ios::app);
    if (!sink->out) throw ValidationError("cannot open " + options.store.string());
    if (fresh) {
      sink->out << "seed,index,attempt";
      for (const auto& c : columns) sink->out << ',' << c;
      sink->out << '\n';
      sink->out.flush();
    }
  }

  std::vector<RealizationRow> rows(static_cast<std::size_t>(k));
  std::vector<char> have(static_cast<std::size_t>(k), 0);
  for (auto& [i, r] : done) {
    if (i < static_cast<std::uint64_t>(k)) {
      rows[i] = r;
      have[i] = 1;
      ++res.resumed;
    }
  }

  parallel_for(k, options.workers, [&](int i) {
    if (have[static_cast<std::size_t>(i)]) return;
    for (int attempt = 0; attempt < options.max_attempts; ++attempt) {
      std::mt19937_64 rng(substream_seed(seed, static_cast<std::uint64_t>(i),
                                         static_cast<std::uint64_t>(attempt)));
      try {
        const ChainSolver solver(sample_chain(disorder, l, rng), bath);
        RealizationRow r;
        r.index = static_cast<std::uint64_t>(i);
        r.attempt = attempt;
        r.values = fn(solver);
        if (r.values.size() != columns.size()) {
          throw ValidationError("observable returned a row of the wrong width");
        }
        if (sink) sink->append(seed, r);
        rows[static_cast<std::size_t>(i)] = std::move(r);
        return;
      } catch (const DegeneracyError&) {
        continue;
      } catch (const StabilityError&) {
        continue;
      }
    }
    throw ValidationError("realization " + std::to_string(i) + ": every draw was degenerate");
  });

  for (const auto& r : rows) res.rejections += r.attempt;
  if (res.rejections > 0 &&
      static_cast<double>(res.rejections) > 0.1 * static_cast<double>(k + res.rejections)) {
    std::ostringstream os;
    os << "ensemble rejected " << res.rejections << " of " << k + res.rejections
       << " draws as degenerate; check the disorder parameters";
    throw ValidationError(os.str());
  }

  const int nc = static_cast<int>(columns.size());
  Eigen::MatrixXd data(k, nc);
  for (int i = 0; i < k; ++i) {
    for (int c = 0; c < nc; ++c) data(i, c) = rows[static_cast<std::size_t>(i)].values[static_cast<std::size_t>(c)];
  }
  res.mean = data.colwise().mean().transpose();
  res.std = ((data.rowwise() - res.mean.transpose()).array().square().colwise().sum() / k)
                .sqrt()
                .transpose();
  const double km1 = std::max(k - 1, 1);
  res.stderr_sqrt = res.std / std::sqrt(km1);
  res.stderr_linear = res.std / km1;
  res.rows = std::move(rows);
  return res;
}

std::vector<std::string> profile_columns(int l) {
  std::vector<std::string> c;
  for (int n = 1; n <= l; ++n) c.push_back("T_R_" + std::to_string(n));
  for (int n = 1; n <= l; ++n) c.push_back("E_" + std::to_string(n));
  c.push_back("J");
  c.push_back("slope");
  return c;
}

double interior_slope(const Eigen::VectorXd& tr) {
  const int l = static_cast<int>(tr.size());
  // sites 3..l-2 (1-based)
  const int lo = 2, hi = l - 3;
  if (hi - lo < 1) return 0.0;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const int n = hi - lo + 1;
  for (int i = lo; i <= hi; ++i) {
    const double x = i + 1;
    sx += x;
    sy += tr(i);
    sxx += x * x;
    sxy += x * tr(i);
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

RealizationFn profile_observable(double ta, double tb) {
  return [ta, tb](const ChainSolver& s) {
    const SiteProfile p = site_profile(s, ta, tb);
    std::vector<double> row(p.T_R.data(), p.T_R.data() + p.T_R.size());
    row.insert(row.end(), p.energy.data(), p.energy.data() + p.energy.size());
    row.push_back(steady_flux(s, ta, tb).flux);
    row.push_back(interior_slope(p.T_R));
    return row;
  };
}

std::vector<std::string> occupation_columns(int l) {
  std::vector<std::string> c;
  for (int n = 1; n <= l; ++n) c.push_back("Omega_eff_" + std::to_string(n));
  for (int n = 1; n <= l; ++n) c.push_back("n_" + std::to_string(n));
  return c;
}

RealizationFn occupation_observable(double ta, double tb) {
  return [ta, tb](const ChainSolver& s) {
    const ModeOccupation o = effective_frequencies_and_occupations(s.stationary(ta, tb), s.ground());
    std::vector<double> row(o.omega_eff.data(), o.omega_eff.data() + o.omega_eff.size());
    row.insert(row.end(), o.occupation.data(), o.occupation.data() + o.occupation.size());
    return row;
  };
}

namespace {

struct ScalingFunctor {
  using Scalar = double;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;

  Eigen::VectorXd x, j, w;
  double c;

  int inputs() const { return 2; }
  int values() const { return static_cast<int>(x.size()); }

  int operator()(const Eigen::VectorXd& p, Eigen::VectorXd& f) const {
    for (Eigen::Index i = 0; i < x.size(); ++i) f(i) = w(i) * (j(i) - c / (p(0) + p(1) * x(i)));
    return 0;
  }
  int df(const Eigen::VectorXd& p, Eigen::MatrixXd& jac) const {
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double d = p(0) + p(1) * x(i);
      jac(i, 0) = w(i) * c / (d * d);
      jac(i, 1) = w(i) * c * x(i) / (d * d);
    }
    return 0;
  }
};

}  // namespace

ScalingFit fit_scaling(const std::vector<double>& l, const std::vector<double>& j,
                       const std::vector<double>& se, double delta_t, ScalingFit::Model model) {
  const Eigen::Index n = static_cast<Eigen::Index>(l.size());
  if (n < 2) throw ValidationError("scaling fit needs at least two lengths");
  ScalingFunctor fn;
  fn.x.resize(n);
  fn.j.resize(n);
  fn.w.resize(n);
  fn.c = delta_t;
  const bool weighted = std::all_of(se.begin(), se.end(), [](double s) { return s > 0.0; });
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto u = static_cast<std::size_t>(i);
    fn.x(i) = model == ScalingFit::Model::Linear ? l[u] : std::sqrt(l[u]);
    fn.j(i) = j[u];
    fn.w(i) = weighted ? 1.0 / se[u] : 1.0;
  }
  // start from the weighted linear fit of c/J = R_c + R x
  Eigen::MatrixXd a(n, 2);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double wi = fn.w(i) * fn.j(i) * fn.j(i) / delta_t;  // delta method
    a(i, 0) = wi;
    a(i, 1) = wi * fn.x(i);
    b(i) = wi * delta_t / fn.j(i);
  }
  Eigen::VectorXd p = a.colPivHouseholderQr().solve(b);
  Eigen::LevenbergMarquardt<ScalingFunctor> lm(fn);
  lm.parameters.xtol = 1e-14;
  lm.parameters.ftol = 1e-14;
  lm.minimize(p);
  Eigen::VectorXd f(n);
  fn(p, f);
  ScalingFit fit;
  fit.model = model;
  fit.Rc = p(0);
  fit.R = p(1);
  fit.rss = f.squaredNorm();
  return fit;
}

FluxLengthScan flux_length_scan(const DisorderSpec& disorder, const BathConfig& bath,
                                const std::vector<int>& lengths, int k, std::uint64_t seed,
                                const EnsembleOptions& options) {
  if (lengths.empty()) throw ValidationError("length grid is empty");
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    if (lengths[i] < 2 || (i > 0 && lengths[i] <= lengths[i - 1])) {
      throw ValidationError("length grid must be ascending and >= 2");
    }
  }
  if (lengths.back() > 75) throw ValidationError("length grid: chains longer than 75 are not supported");
  const double ta = bath.Ta, tb = bath.Tb;
  if (ta == tb) throw ValidationError("flux-length scan needs T_a != T_b");
  FluxLengthScan scan;
  std::vector<double> xs, js, ses;
  for (int l : lengths) {
    EnsembleOptions o = options;
    if (!o.store.empty()) {
      o.store = o.store.parent_path() / (o.store.stem().string() + "_l" + std::to_string(l) +
                                         o.store.extension().string());
    }
    const auto res = run_ensemble(
        disorder, l, bath, {"J"},
        [ta, tb](const ChainSolver& s) { return std::vector<double>{steady_flux(s, ta, tb).flux}; },
        k, substream_seed(seed, static_cast<std::uint64_t>(l), 0xF1u), o);
    scan.rows.push_back({l, res.mean(0), res.std(0), res.stderr_sqrt(0), res.stderr_linear(0), k,
                         res.rejections});
    xs.push_back(l);
    js.push_back(res.mean(0));
    ses.push_back(res.stderr_sqrt(0));
  }
  if (lengths.size() >= 2) {
    scan.linear = fit_scaling(xs, js, ses, ta - tb, ScalingFit::Model::Linear);
    scan.sqrt = fit_scaling(xs, js, ses, ta - tb, ScalingFit::Model::Sqrt);
    (scan.sqrt.rss < scan.linear.rss ? scan.sqrt : scan.linear).preferred = true;
  }
  return scan;
}

OccupationEnsemble occupation_ensemble(const DisorderSpec& disorder, int l, const BathConfig& bath,
                                       int k, std::uint64_t seed, const EnsembleOptions& options) {
  const auto res = run_ensemble(disorder, l, bath, occupation_columns(l),
                                occupation_observable(bath.Ta, bath.Tb), k, seed, options);
  OccupationEnsemble e;
  e.rejections = res.rejections;
  Eigen::VectorXd w(k * l), n(k * l);
  for (const auto& r : res.rows) {
    for (int m = 0; m < l; ++m) {
      const double om = r.values[static_cast<std::size_t>(m)];
      const double nn = r.values[static_cast<std::size_t>(l + m)];
      const Eigen::Index idx = static_cast<Eigen::Index>(r.index) * l + m;
      w(idx) = om;
      n(idx) = nn;
      e.points.push_back({r.index, m + 1, om, nn, bose_temperature(om, nn)});
    }
  }
  const double tm = 0.5 * (bath.Ta + bath.Tb);
  auto rms = [&](double t) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < w.size(); ++i) s += std::pow(n(i) - bose(w(i), t), 2);
    return std::sqrt(s / static_cast<double>(w.size()));
  };
  e.T_pooled = fit_temperature(w, n, 10.0 * std::max({bath.Ta, bath.Tb, 1e-3}));
  e.rms_Ta = rms(bath.Ta);
  e.rms_Tb = rms(bath.Tb);
  e.rms_Tm = rms(tm);
  e.rms_pooled = rms(e.T_pooled);
  std::vector<double> sorted(w.data(), w.data() + w.size());
  std::sort(sorted.begin(), sorted.end());
  const double q1 = sorted[sorted.size() / 4], q3 = sorted[(3 * sorted.size()) / 4];
  std::vector<double> top, bottom;
  for (const auto& p : e.points) {
    if (p.omega_eff >= q3) top.push_back(p.T_eff);
    if (p.omega_eff <= q1) bottom.push_back(p.T_eff);
  }
  e.teff_var_top = variance(top);
  e.teff_var_bottom = variance(bottom);
  return e;
}

std::vector<LocalizationPoint> localization_ensemble(const DisorderSpec& disorder, int l, int k,
                                                     std::uint64_t seed) {
  std::vector<LocalizationPoint> out;
  for (int i = 0; i < k; ++i) {
    for (int attempt = 0;; ++attempt) {
      std::mt19937_64 rng(substream_seed(seed, static_cast<std::uint64_t>(i),
                                         static_cast<std::uint64_t>(attempt)));
      const ChainSpec spec = sample_chain(disorder, l, rng);
      try {
        const ModeBasis b = diagonalize(build_coupling_matrix(spec), detect_symmetry(spec));
        const LocalizationReport rep = localization(b);
        for (int m = 0; m < l; ++m) {
          out.push_back({static_cast<std::uint64_t>(i), m + 1, b.frequencies(m), rep.length(m)});
        }
        break;
      } catch (const DegeneracyError&) {
        if (attempt > 20) throw;
      }
    }
  }
  return out;
}

std::pair<double, double> spearman(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n != y.size() || n < 3) throw ValidationError("spearman needs >= 3 paired values");
  auto ranks = [n](const std::vector<double>& v) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n;) {
      std::size_t j = i;
      while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
      for (std::size_t m = i; m <= j; ++m) r[idx[m]] = 0.5 * static_cast<double>(i + j) + 1.0;
      i = j + 1;
    }
    return r;
  };
  const auto rx = ranks(x), ry = ranks(y);
  const Eigen::Map<const Eigen::VectorXd> a(rx.data(), static_cast<Eigen::Index>(n));
  const Eigen::Map<const Eigen::VectorXd> b(ry.data(), static_cast<Eigen::Index>(n));
  const Eigen::VectorXd da = a.array() - a.mean(), db = b.array() - b.mean();
  const double rho = da.dot(db) / std::sqrt(da.squaredNorm() * db.squaredNorm());
  if (std::abs(rho) >= 1.0) return {rho, 0.0};
  const double dof = static_cast<double>(n) - 2.0;
  const double t = rho * std::sqrt(dof / (1.0 - rho * rho));
  boost::math::students_t dist(dof);
  const double p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
  return {rho, p};
}

void write_ensemble_csv(std::ostream& os, const EnsembleResult& r) {
  os << "column,mean,std,stderr_sqrt,stderr_linear,k\n";
  CsvWriter w(os);
  for (std::size_t c = 0; c < r.columns.size(); ++c) {
    const auto i = static_cast<Eigen::Index>(c);
    w.row(r.columns[c], r.mean(i), r.std(i), r.stderr_sqrt(i), r.stderr_linear(i), r.k);
  }
}

void write_flux_length_csv(std::ostream& os, const FluxLengthScan& s) {
  CsvWriter w(os);
  w.header({"l", "J_mean", "J_std", "k_realizations", "J_stderr_sqrt", "J_stderr_linear"});
  for (const auto& r : s.rows) w.row(r.l, r.J_mean, r.J_std, r.k, r.stderr_sqrt, r.stderr_linear);
}

void write_fits_csv(std::ostream& os, const FluxLengthScan& s) {
  CsvWriter w(os);
  w.header({"model", "R_c", "R", "rss", "preferred"});
  for (const ScalingFit* f : {&s.linear, &s.sqrt}) {
    w.row(std::string(f->model == ScalingFit::Model::Linear ? "l" : "sqrt_l"), f->Rc, f->R, f->rss,
          f->preferred ? 1 : 0);
  }
}

void write_occupation_ensemble_csv(std::ostream& os, const OccupationEnsemble& e) {
  CsvWriter w(os);
  w.header({"realization", "mode", "Omega_eff", "n", "T_eff"});
  for (const auto& p : e.points) w.row(p.realization, p.mode, p.omega_eff, p.n, p.T_eff);
}

void write_localization_ensemble_csv(std::ostream& os, const std::vector<LocalizationPoint>& rows) {
  CsvWriter w(os);
  w.header({"realization", "mode_index", "Omega", "xi"});
  for (const auto& p : rows) w.row(p.realization, p.mode, p.omega, p.xi);
}

}  // namespace qlchain
