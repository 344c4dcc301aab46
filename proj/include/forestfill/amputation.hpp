#pragma once

#include <cstddef>
#include <vector>

#include "forestfill/dataset.hpp"
#include "forestfill/stochastic.hpp"

namespace forestfill {

enum class PatternKind { TwoCells, OneCell };

/// MAR amputation driven by one always-observed weight column. A row
/// assigned to pattern k and selected for missingness loses every column of
/// patterns[k].
struct AmputationSpec {
    std::vector<std::vector<std::size_t>> patterns;
    std::vector<double> pattern_freq;
    std::size_t weight_column = 0;
    double prop = 0.5;

    void validate(std::size_t n_cols) const;
};

struct AmputationOutcome {
    MissingMask mask;
    double realized_prop = 0.0;  // fraction of rows with any masked cell
    double shift = 0.0;          // logistic offset b
    std::vector<double> probabilities;
    std::vector<std::size_t> assigned_pattern;
};

double logistic(double x);

/// Offset b such that mean(logistic(z_i + b)) == prop within 1e-6, by
/// bisection on [-50, 50].
double solve_logistic_shift(const std::vector<double>& z, double prop);

/// Right-tailed logistic amputation: P(row missing) = logistic(z + b) with
/// z the standardized weight column.
AmputationOutcome ampute(const DataMatrix& data, const AmputationSpec& spec, const SeedSpec& seed);

/// Patterns for the (Y, X1, X2) layout with Y as weight column: TwoCells
/// masks {X1, X2} together; OneCell masks X1 or X2 with equal frequency.
AmputationSpec scenario_patterns(PatternKind kind, double prop = 0.5);

}  // namespace forestfill
