#include "rmtspec/solver_config.hpp"

#include <cmath>

namespace rmtspec {

void validate(const SolverConfig& cfg) {
    if (!(cfg.tolerance > 0.0) || !std::isfinite(cfg.tolerance))
        throw Error("solver config: tolerance must be positive");
    if (cfg.max_iterations <= 0)
        throw Error("solver config: max_iterations must be positive");
    if (!(cfg.damping > 0.0 && cfg.damping <= 1.0))
        throw Error("solver config: damping must lie in (0, 1]");
}

}  // namespace rmtspec
