#include "forestfill/metrics.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "forestfill/errors.hpp"

namespace forestfill {

ScenarioTruth scenario_truth(ScenarioKind kind) {
    ScenarioTruth t;
    switch (kind) {
        case ScenarioKind::Uncorrelated:
            t.true_means = {2.0, 1.0, 1.0};
            t.true_sds = {std::sqrt(21.0), std::sqrt(10.0), std::sqrt(10.0)};
            t.true_coefs = {0.0, 1.0, 1.0};
            t.true_resid_var = 1.0;
            t.true_rho = 0.0;
            break;
        case ScenarioKind::Weak:
            t.true_means = {1.0, 1.0, 1.0};
            t.true_sds = {std::sqrt(10.0), std::sqrt(10.0), std::sqrt(10.0)};
            t.true_coefs = {0.6, 0.2, 0.2};
            t.true_resid_var = 9.0;
            t.true_rho = 0.25;
            break;
        case ScenarioKind::Strong:
            t.true_means = {1.0, 1.0, 1.0};
            t.true_sds = {std::sqrt(10.0), std::sqrt(10.0), std::sqrt(10.0)};
            t.true_coefs = {1.0 / 7.0, 3.0 / 7.0, 3.0 / 7.0};
            t.true_resid_var = 25.0 / 7.0;
            t.true_rho = 0.75;
            break;
    }
    return t;
}

double relative_bias_mean(std::span<const double> v_imp, std::span<const double> v_true) {
    if (v_imp.size() != v_true.size()) throw ShapeError("relative_bias_mean: length mismatch");
    const double m_true = mean(v_true);
    if (m_true == 0.0) throw ZeroDenominator("relative_bias_mean: true mean is zero");
    return mean(v_imp) / m_true - 1.0;
}

double relative_bias_sd(std::span<const double> v_imp, std::span<const double> v_true) {
    if (v_imp.size() != v_true.size()) throw ShapeError("relative_bias_sd: length mismatch");
    const double sd_true = sample_sd(v_true);
    if (sd_true == 0.0) throw ZeroDenominator("relative_bias_sd: true SD is zero");
    return sample_sd(v_imp) / sd_true - 1.0;
}

OlsFit ols_fit(const DataMatrix& design, std::span<const double> y) {
    const auto n = static_cast<Eigen::Index>(design.rows());
    const auto k = static_cast<Eigen::Index>(design.cols());
    if (static_cast<std::size_t>(n) != y.size()) throw ShapeError("ols_fit: y length does not match design");
    if (n <= k) throw SingularDesign("ols_fit: need more rows than columns");

    Eigen::MatrixXd A(n, k);
    for (Eigen::Index c = 0; c < k; ++c)
        for (Eigen::Index r = 0; r < n; ++r)
            A(r, c) = design(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
    const Eigen::Map<const Eigen::VectorXd> b(y.data(), n);

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    if (qr.rank() < k) throw SingularDesign("ols_fit: design matrix is rank deficient");
    const Eigen::VectorXd beta = qr.solve(b);

    OlsFit fit;
    fit.coefficients.assign(beta.data(), beta.data() + k);
    fit.rss = (b - A * beta).squaredNorm();
    return fit;
}

OlsFit ols_with_intercept(std::span<const double> y,
                          std::span<const std::span<const double>> predictors) {
    DataMatrix design(y.size(), predictors.size() + 1);
    for (std::size_t r = 0; r < y.size(); ++r) design(r, 0) = 1.0;
    for (std::size_t j = 0; j < predictors.size(); ++j) {
        if (predictors[j].size() != y.size()) throw ShapeError("ols: predictor length mismatch");
        for (std::size_t r = 0; r < y.size(); ++r) design(r, j + 1) = predictors[j][r];
    }
    return ols_fit(design, y);
}

std::vector<CoefBias> coef_relative_bias(std::span<const double> est, std::span<const double> truth) {
    if (est.size() != truth.size()) throw ShapeError("coef_relative_bias: length mismatch");
    std::vector<CoefBias> out(est.size());
    for (std::size_t i = 0; i < est.size(); ++i) {
        if (truth[i] == 0.0)
            out[i] = {est[i] - truth[i], BiasKind::Absolute};
        else
            out[i] = {(est[i] - truth[i]) / truth[i], BiasKind::Relative};
    }
    return out;
}

double nrmse(const DataMatrix& x_true, const DataMatrix& x_imp, const MissingMask& mask) {
    check_same_shape(x_true, mask);
    check_same_shape(x_imp, mask);
    std::vector<double> truth;
    double se = 0.0;
    for (std::size_t c = 0; c < mask.cols(); ++c)
        for (std::size_t r = 0; r < mask.rows(); ++r) {
            if (!mask(r, c)) continue;
            const double d = x_true(r, c) - x_imp(r, c);
            se += d * d;
            truth.push_back(x_true(r, c));
        }
    if (truth.size() < 2) throw DegenerateNrmse("nrmse needs at least two masked cells");
    const double var = sample_variance(truth);
    if (!(var > 0.0)) throw DegenerateNrmse("masked true values have zero variance");
    return std::sqrt(se / static_cast<double>(truth.size()) / var);
}

double pearson(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw ShapeError("pearson: length mismatch");
    if (a.size() < 2) throw DegenerateCorrelation("pearson needs at least two points");
    const double ma = mean(a), mb = mean(b);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - ma, db = b[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (!(saa > 0.0) || !(sbb > 0.0)) throw DegenerateCorrelation("pearson: zero variance input");
    const double r = sab / std::sqrt(saa * sbb);
    return std::clamp(r, -1.0, 1.0);
}

}  // namespace forestfill
