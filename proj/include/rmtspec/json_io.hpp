#pragma once

#include <vector>

#include <json.hpp>

#include "rmtspec/cdma.hpp"
#include "rmtspec/measure.hpp"
#include "rmtspec/solver_config.hpp"
#include "rmtspec/stieltjes.hpp"

namespace rmtspec {

// Measures accept either explicit atoms
//   {"atoms": [[location, weight], ...]}
// or a named family
//   {"family": "exponential", "mean": 1.0, "atom_count": 256}
//   {"family": "uniform", "a": 0.0, "b": 1.0, "atom_count": 256}
//   {"family": "semicircle", "variance": 1.0, "atom_count": 256}
//   {"family": "bernoulli", "p": 0.5, "lo": 0.0, "hi": 1.0}
SpectralMeasure measure_from_json(const nlohmann::json& j);
nlohmann::json measure_to_json(const SpectralMeasure& m);

// Joint channels accept independent marginals
//   {"marginals": [measure, ...]}
// or explicit joint atoms
//   {"dimension": 2, "atoms": [[[h1, h2], weight], ...]}
JointChannelMeasure joint_from_json(const nlohmann::json& j);

CdmaScenario scenario_from_json(const nlohmann::json& j);
SolverConfig solver_from_json(const nlohmann::json& j);
std::vector<HalfPlanePoint> z_grid_from_json(const nlohmann::json& j);

}  // namespace rmtspec
