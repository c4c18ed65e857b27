#pragma once

#include <Eigen/Dense>
#include <vector>

namespace qlchain {

// Units: hbar = k_B = M = omega_0 = 1 throughout.

enum class Pinning { OnsiteEverywhere, EndsOnly };

struct PinningStyle {
  Pinning kind = Pinning::OnsiteEverywhere;
  double omega0 = 1.0;

  // Onsite frequencies for a chain of length l.
  std::vector<double> onsite(int l) const;
};

// Harmonic chain H_ch: l oscillators of common mass, onsite frequencies
// omega_i and nearest-neighbour springs f_i (l-1 of them).
struct ChainSpec {
  std::vector<double> onsite;     // omega_i, size l
  std::vector<double> couplings;  // f_i, size l-1
  double mass = 1.0;

  int length() const { return static_cast<int>(onsite.size()); }

  // Throws ValidationError naming the violated invariant.
  void validate() const;
};

ChainSpec make_ordered_chain(int l, double f, PinningStyle pinning = {});

struct BathConfig {
  double gamma = 2.0;    // damping strength
  double cutoff = 10.0;  // Drude cutoff Gamma
  double Ta = 0.0;
  double Tb = 0.0;

  void validate() const;
  BathConfig with_temperatures(double ta, double tb) const {
    BathConfig b = *this;
    b.Ta = ta;
    b.Tb = tb;
    return b;
  }
};

// C_ii = omega_i^2 + (f_{i-1} + f_i)/M, C_{i,i+1} = -f_i/M, f_0 = f_l = 0.
Eigen::MatrixXd build_coupling_matrix(const ChainSpec& spec);

// True iff the chain is invariant under n -> l+1-n (relative tolerance
// NumericPolicy::symmetry_rel).
bool detect_symmetry(const ChainSpec& spec);

}  // namespace qlchain
