#include "forestfill/scenario.hpp"

#include "forestfill/errors.hpp"

namespace forestfill {

namespace {

MvnSpec equicorrelated(double rho) {
    const double c = 10.0 * rho;
    return {{1.0, 1.0, 1.0}, SquareMatrix(3, {10.0, c, c, c, 10.0, c, c, c, 10.0})};
}

}  // namespace

MvnSpec scenario_mvn(ScenarioKind kind) {
    switch (kind) {
        case ScenarioKind::Uncorrelated:
            return {{2.0, 1.0, 1.0}, SquareMatrix(3, {21.0, 10.0, 10.0, 10.0, 10.0, 0.0, 10.0, 0.0, 10.0})};
        case ScenarioKind::Weak: return equicorrelated(0.25);
        case ScenarioKind::Strong: return equicorrelated(0.75);
    }
    throw InvalidInput("unknown scenario kind");
}

std::string to_string(ScenarioKind kind) {
    switch (kind) {
        case ScenarioKind::Uncorrelated: return "uncorrelated";
        case ScenarioKind::Weak: return "weak";
        case ScenarioKind::Strong: return "strong";
    }
    return "?";
}

ScenarioKind parse_scenario(const std::string& name) {
    if (name == "uncorrelated") return ScenarioKind::Uncorrelated;
    if (name == "weak") return ScenarioKind::Weak;
    if (name == "strong") return ScenarioKind::Strong;
    throw ParseError("unknown scenario '" + name + "' (expected uncorrelated, weak or strong)");
}

}  // namespace forestfill
