#include "qlchain/pipeline.hpp"

namespace qlchain {

ChainSolver::ChainSolver(ChainSpec spec, BathConfig bath, ResponsePath path)
    : spec_(std::move(spec)), bath_(bath) {
  spec_.validate();
  bath_.validate();
  const bool sym = path != ResponsePath::General && detect_symmetry(spec_);
  basis_ = diagonalize(build_coupling_matrix(spec_), sym);
  response_ = build_response(basis_, bath_, sym ? ResponsePath::Symmetric : ResponsePath::General);
}

CorrelationMatrices ChainSolver::stationary(double ta, double tb, NoiseModel model) const {
  return stationary_correlations(response_, bath_.with_temperatures(ta, tb), model);
}

}  // namespace qlchain
