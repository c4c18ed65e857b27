#include "qlchain/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "qlchain/errors.hpp"
#include "qlchain/io.hpp"

namespace qlchain {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& v, const char* what) {
  throw ValidationError(key + ": cannot parse '" + v + "' as " + what);
}

double to_double(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double d = 0.0;
  try {
    d = std::stod(v, &pos);
  } catch (const std::exception&) {
    bad_value(key, v, "a number");
  }
  if (pos != v.size()) bad_value(key, v, "a number");
  return d;
}

long long to_int(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  long long d = 0;
  try {
    d = std::stoll(v, &pos);
  } catch (const std::exception&) {
    bad_value(key, v, "an integer");
  }
  if (pos != v.size()) bad_value(key, v, "an integer");
  return d;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  unsigned long long d = 0;
  if (!v.empty() && v[0] == '-') bad_value(key, v, "an unsigned integer");
  try {
    d = std::stoull(v, &pos);
  } catch (const std::exception&) {
    bad_value(key, v, "an unsigned integer");
  }
  if (pos != v.size()) bad_value(key, v, "an unsigned integer");
  return d;
}

bool to_bool(const std::string& key, std::string v) {
  std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  bad_value(key, v, "a boolean");
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> to_doubles(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& s : split_list(v)) out.push_back(to_double(key, s));
  return out;
}

std::vector<int> to_ints(const std::string& key, const std::string& v) {
  std::vector<int> out;
  for (const auto& s : split_list(v)) out.push_back(static_cast<int>(to_int(key, s)));
  return out;
}

template <typename T>
std::string join(const std::vector<T>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    if constexpr (std::is_floating_point_v<T>) {
      out += format_double(v[i]);
    } else {
      out += std::to_string(v[i]);
    }
  }
  return out;
}

}  // namespace

RawConfig parse_config(const std::string& text) {
  RawConfig out;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ValidationError("config line " + std::to_string(lineno) + ": unterminated section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ValidationError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ValidationError("config line " + std::to_string(lineno) + ": empty key");
    if (!section.empty()) key = section + "." + key;
    if (out.count(key)) throw ValidationError(key + ": given twice");
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

std::string env_name(const std::string& key) {
  std::string out = "QLCHAIN_";
  for (char c : key) {
    out += c == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  }
  return out;
}

EnvLookup process_environment() {
  return [](const std::string& name) -> std::optional<std::string> {
    const char* v = std::getenv(name.c_str());
    if (!v) return std::nullopt;
    return std::string(v);
  };
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "length",          "coupling.mean",   "coupling.sigma", "coupling.symmetric",
      "coupling.cutoff", "onsite.style",    "onsite.omega0",  "mass",
      "bath.gamma",      "bath.cutoff",     "bath.Ta",        "bath.Tb",
      "seed",            "ensemble.k",      "ensemble.lengths", "scan.tm",
      "scan.eps",        "scan.f",          "scan.gamma",     "scan.cuts",
      "transient.times", "transient.lags",  "transient.Tch",  "verify.modes",
      "verify.spacing",  "verify.horizon",  "verify.dt"};
  return keys;
}

RunConfig build_config(const RawConfig& raw_in, const EnvLookup& env) {
  const auto& keys = config_keys();
  std::vector<std::string> unknown;
  for (const auto& [k, v] : raw_in) {
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) unknown.push_back(k);
  }
  if (!unknown.empty()) {
    std::string msg = "unknown config keys:";
    for (const auto& k : unknown) msg += " " + k;
    throw ValidationError(msg);
  }
  RawConfig raw = raw_in;
  if (env) {
    for (const auto& k : keys) {
      if (auto v = env(env_name(k))) raw[k] = trim(*v);
    }
  }

  RunConfig c;
  auto has = [&](const char* k) { return raw.count(k) > 0; };
  auto get = [&](const char* k) { return raw.at(k); };
  if (has("length")) c.length = static_cast<int>(to_int("length", get("length")));
  if (has("coupling.mean")) c.coupling.mean = to_double("coupling.mean", get("coupling.mean"));
  if (has("coupling.sigma")) c.coupling.sigma = to_double("coupling.sigma", get("coupling.sigma"));
  if (has("coupling.symmetric")) c.coupling.symmetric = to_bool("coupling.symmetric", get("coupling.symmetric"));
  if (has("coupling.cutoff")) c.coupling.cutoff_fraction = to_double("coupling.cutoff", get("coupling.cutoff"));
  if (has("onsite.style")) {
    const std::string s = get("onsite.style");
    if (s == "everywhere") {
      c.coupling.pinning.kind = Pinning::OnsiteEverywhere;
    } else if (s == "ends") {
      c.coupling.pinning.kind = Pinning::EndsOnly;
    } else {
      throw ValidationError("onsite.style: expected 'everywhere' or 'ends', got '" + s + "'");
    }
  }
  if (has("onsite.omega0")) c.coupling.pinning.omega0 = to_double("onsite.omega0", get("onsite.omega0"));
  if (has("mass")) c.mass = to_double("mass", get("mass"));
  if (has("bath.gamma")) c.bath.gamma = to_double("bath.gamma", get("bath.gamma"));
  if (has("bath.cutoff")) c.bath.cutoff = to_double("bath.cutoff", get("bath.cutoff"));
  if (has("bath.Ta")) c.bath.Ta = to_double("bath.Ta", get("bath.Ta"));
  if (has("bath.Tb")) c.bath.Tb = to_double("bath.Tb", get("bath.Tb"));
  if (has("seed")) c.seed = to_u64("seed", get("seed"));
  if (has("ensemble.k")) c.realizations = static_cast<int>(to_int("ensemble.k", get("ensemble.k")));
  if (has("ensemble.lengths")) c.lengths = to_ints("ensemble.lengths", get("ensemble.lengths"));
  if (has("scan.tm")) c.tm = to_doubles("scan.tm", get("scan.tm"));
  if (has("scan.eps")) c.eps = to_double("scan.eps", get("scan.eps"));
  if (has("scan.f")) c.f_grid = to_doubles("scan.f", get("scan.f"));
  if (has("scan.gamma")) c.gamma_grid = to_doubles("scan.gamma", get("scan.gamma"));
  if (has("scan.cuts")) c.cuts = to_ints("scan.cuts", get("scan.cuts"));
  if (has("transient.times")) c.times = to_doubles("transient.times", get("transient.times"));
  if (has("transient.lags")) c.lags = to_doubles("transient.lags", get("transient.lags"));
  if (has("transient.Tch")) c.chain_temperature = to_double("transient.Tch", get("transient.Tch"));
  if (has("verify.modes")) c.oracle_modes = static_cast<int>(to_int("verify.modes", get("verify.modes")));
  if (has("verify.spacing")) c.oracle_spacing = to_double("verify.spacing", get("verify.spacing"));
  if (has("verify.horizon")) c.oracle_horizon = to_double("verify.horizon", get("verify.horizon"));
  if (has("verify.dt")) c.oracle_dt = to_double("verify.dt", get("verify.dt"));
  c.validate();
  return c;
}

RunConfig load_config(const std::string& path, const EnvLookup& env) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return build_config(parse_config(ss.str()), env);
}

ChainSpec RunConfig::ordered_chain() const {
  ChainSpec s = make_ordered_chain(length, coupling.mean, coupling.pinning);
  s.mass = mass;
  return s;
}

void RunConfig::validate() const {
  if (length < 2) throw ValidationError("length: must be at least 2");
  if (mass != 1.0) throw ValidationError("mass: must be 1 (dimensionless units)");
  if (!(coupling.pinning.omega0 > 0.0)) throw ValidationError("onsite.omega0: must be positive");
  coupling.validate();
  bath.validate();
  if (realizations < 1) throw ValidationError("ensemble.k: must be at least 1");
  if (!(eps > 0.0 && eps < 1.0)) throw ValidationError("scan.eps: must lie in (0, 1)");
  for (double t : tm) {
    if (!(t > 0.0)) throw ValidationError("scan.tm: temperatures must be positive");
  }
  for (double f : f_grid) {
    if (!(f > 0.0)) throw ValidationError("scan.f: couplings must be positive");
  }
  for (double g : gamma_grid) {
    if (!(g > 0.0)) throw ValidationError("scan.gamma: damping values must be positive");
  }
  for (int k : cuts) {
    if (k < 1 || k >= length) throw ValidationError("scan.cuts: cuts must lie in 1..length-1");
  }
  for (double t : times) {
    if (!(t >= 0.0)) throw ValidationError("transient.times: times must be non-negative");
  }
  for (double t : lags) {
    if (!(t >= 0.0)) throw ValidationError("transient.lags: lags must be non-negative");
  }
  if (!(chain_temperature >= 0.0)) throw ValidationError("transient.Tch: must be non-negative");
  if (oracle_modes < 1) throw ValidationError("verify.modes: must be positive");
  if (!(oracle_spacing > 0.0)) throw ValidationError("verify.spacing: must be positive");
  if (!(oracle_horizon > 0.0)) throw ValidationError("verify.horizon: must be positive");
  if (!(oracle_dt > 0.0)) throw ValidationError("verify.dt: must be positive");
}

std::string dump_config(const RunConfig& c) {
  std::ostringstream os;
  os << "length = " << c.length << '\n'
     << "coupling.mean = " << format_double(c.coupling.mean) << '\n'
     << "coupling.sigma = " << format_double(c.coupling.sigma) << '\n'
     << "coupling.symmetric = " << (c.coupling.symmetric ? "true" : "false") << '\n'
     << "coupling.cutoff = " << format_double(c.coupling.cutoff_fraction) << '\n'
     << "onsite.style = " << (c.coupling.pinning.kind == Pinning::EndsOnly ? "ends" : "everywhere") << '\n'
     << "onsite.omega0 = " << format_double(c.coupling.pinning.omega0) << '\n'
     << "mass = " << format_double(c.mass) << '\n'
     << "bath.gamma = " << format_double(c.bath.gamma) << '\n'
     << "bath.cutoff = " << format_double(c.bath.cutoff) << '\n'
     << "bath.Ta = " << format_double(c.bath.Ta) << '\n'
     << "bath.Tb = " << format_double(c.bath.Tb) << '\n'
     << "seed = " << c.seed << '\n'
     << "ensemble.k = " << c.realizations << '\n'
     << "ensemble.lengths = " << join(c.lengths) << '\n'
     << "scan.tm = " << join(c.tm) << '\n'
     << "scan.eps = " << format_double(c.eps) << '\n'
     << "scan.f = " << join(c.f_grid) << '\n'
     << "scan.gamma = " << join(c.gamma_grid) << '\n'
     << "scan.cuts = " << join(c.cuts) << '\n'
     << "transient.times = " << join(c.times) << '\n'
     << "transient.lags = " << join(c.lags) << '\n'
     << "transient.Tch = " << format_double(c.chain_temperature) << '\n'
     << "verify.modes = " << c.oracle_modes << '\n'
     << "verify.spacing = " << format_double(c.oracle_spacing) << '\n'
     << "verify.horizon = " << format_double(c.oracle_horizon) << '\n'
     << "verify.dt = " << format_double(c.oracle_dt) << '\n';
  return os.str();
}

}  // namespace qlchain
