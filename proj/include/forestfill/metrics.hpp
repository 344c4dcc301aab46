#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "forestfill/dataset.hpp"
#include "forestfill/scenario.hpp"

namespace forestfill {

struct ScenarioTruth {
    std::array<double, 3> true_means{};  // Y, X1, X2
    std::array<double, 3> true_sds{};
    std::array<double, 3> true_coefs{};  // intercept, X1, X2 of E[Y | X1, X2]
    double true_resid_var = 0.0;
    double true_rho = 0.0;  // corr(X1, X2)
};

ScenarioTruth scenario_truth(ScenarioKind kind);

/// mean(v_imp) / mean(v_true) - 1 over all values.
double relative_bias_mean(std::span<const double> v_imp, std::span<const double> v_true);
/// sd(v_imp) / sd(v_true) - 1 with n-1 standard deviations.
double relative_bias_sd(std::span<const double> v_imp, std::span<const double> v_true);

struct OlsFit {
    std::vector<double> coefficients;
    double rss = 0.0;
};

/// Least squares via column-pivoted Householder QR. `design` must carry the
/// intercept column itself.
OlsFit ols_fit(const DataMatrix& design, std::span<const double> y);

/// Regresses y on an intercept plus the given predictor columns.
OlsFit ols_with_intercept(std::span<const double> y,
                          std::span<const std::span<const double>> predictors);

enum class BiasKind { Relative, Absolute };

struct CoefBias {
    double value = 0.0;
    BiasKind kind = BiasKind::Relative;
};

/// (est - truth) / truth, or est - truth where the truth is exactly zero.
std::vector<CoefBias> coef_relative_bias(std::span<const double> est, std::span<const double> truth);

/// sqrt(mean((true - imp)^2) / var(true)) over masked cells only; the
/// variance uses the n-1 denominator.
double nrmse(const DataMatrix& x_true, const DataMatrix& x_imp, const MissingMask& mask);

double pearson(std::span<const double> a, std::span<const double> b);

}  // namespace forestfill
