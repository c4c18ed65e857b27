#pragma once
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>
#include "qlchain/ensemble.hpp"
#include "qlchain/model.hpp"

namespace qlchain {

// Flat key = value text. "[section]" prefixes the following keys with
// "section."; '#' starts a comment. List values are comma separated.
//
//   length = 20
//   [bath]
//   gamma = 2
//   Ta = 5
using RawConfig = std::map<std::string, std::string>;

RawConfig parse_config(const std::string& text);

// Environment lookup, injectable for tests. Key "bath.Ta" is overridden by
// QLCHAIN_BATH_TA.
using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;
EnvLookup process_environment();
std::string env_name(const std::string& key);

struct RunConfig {
  int length = 20;
  DisorderSpec coupling;  // mean, sigma, symmetric, cutoff_fraction, pinning
  double mass = 1.0;
  BathConfig bath{2.0, 10.0, 5.0, 2.0};
  std::uint64_t seed = 1;

  int realizations = 50;                       // ensemble.k
  std::vector<int> lengths{5, 10, 20, 40, 65};  // ensemble.lengths
  std::vector<double> tm{0.1, 0.2, 0.5, 1, 2, 5, 10};  // scan.tm
  double eps = 0.1;                            // scan.eps, T_a,b = (1 +- eps) T_m
  std::vector<double> f_grid{0.5, 1, 2};       // scan.f
  std::vector<double> gamma_grid{0.25, 0.5, 1, 2, 4, 8, 16, 40, 80};  // scan.gamma
  std::vector<int> cuts;                       // scan.cuts, empty = all
  std::vector<double> times{0, 0.5, 1, 2, 5, 10, 20, 50};  // transient.times
  std::vector<double> lags{0, 0.5, 1, 2, 5, 10, 20, 50};   // transient.lags
  double chain_temperature = 0.0;              // transient.Tch

  int oracle_modes = 2000;       // verify.modes
  double oracle_spacing = 0.05;  // verify.spacing
  double oracle_horizon = 120.0; // verify.horizon
  double oracle_dt = 0.005;      // verify.dt

  ChainSpec ordered_chain() const;  // length, coupling.mean, onsite.*
  bool disordered() const { return coupling.sigma > 0.0; }
  void validate() const;
};

// Every key known to RunConfig, in file order.
const std::vector<std::string>& config_keys();

// Unknown keys raise a ValidationError listing all of them; malformed
// values raise a ValidationError naming the key.
RunConfig build_config(const RawConfig& raw, const EnvLookup& env = {});
RunConfig load_config(const std::string& path, const EnvLookup& env = process_environment());

// key = value echo of the effective configuration (17 significant digits).
std::string dump_config(const RunConfig& c);

}  // namespace qlchain
