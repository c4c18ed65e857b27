#pragma once

#include "qlchain/correlations.hpp"
#include "qlchain/model.hpp"
#include "qlchain/response.hpp"
#include "qlchain/spectral.hpp"

namespace qlchain {

// One chain coupled to one pair of baths. The response set depends only on
// gamma and Gamma, so runs at different temperatures share it.
class ChainSolver {
 public:
  ChainSolver(ChainSpec spec, BathConfig bath, ResponsePath path = ResponsePath::Auto);

  const ChainSpec& spec() const { return spec_; }
  const BathConfig& bath() const { return bath_; }
  const ModeBasis& basis() const { return basis_; }
  const ResponseSet& response() const { return response_; }

  // Normal-mode stationary correlations at the given bath temperatures.
  CorrelationMatrices stationary(double ta, double tb, NoiseModel model = NoiseModel::Quantum) const;
  CorrelationMatrices stationary() const { return stationary(bath_.Ta, bath_.Tb); }
  CorrelationMatrices ground() const { return stationary(0.0, 0.0); }
  CorrelationMatrices real_space(const CorrelationMatrices& c) const {
    return to_real_space(c, basis_);
  }

 private:
  ChainSpec spec_;
  BathConfig bath_;
  ModeBasis basis_;
  ResponseSet response_;
};

}  // namespace qlchain
