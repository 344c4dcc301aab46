#pragma once

#include <string>

#include "forestfill/stochastic.hpp"

namespace forestfill {

/// Data-generation settings; every scenario has columns (Y, X1, X2).
enum class ScenarioKind { Uncorrelated, Weak, Strong };

/// Uncorrelated: mean (2, 1, 1), cov [[21,10,10],[10,10,0],[10,0,10]].
/// Weak / Strong: mean (1, 1, 1), variances 10, all correlations rho
/// (0.25 / 0.75).
MvnSpec scenario_mvn(ScenarioKind kind);

std::string to_string(ScenarioKind kind);
ScenarioKind parse_scenario(const std::string& name);

}  // namespace forestfill
