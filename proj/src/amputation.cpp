#include "forestfill/amputation.hpp"

#include <cmath>
#include <numeric>

#include "forestfill/errors.hpp"

namespace forestfill {

void AmputationSpec::validate(std::size_t n_cols) const {
    if (patterns.empty()) throw InvalidInput("amputation needs at least one pattern");
    if (pattern_freq.size() != patterns.size())
        throw InvalidInput("pattern_freq must have one entry per pattern");
    if (weight_column >= n_cols) throw InvalidInput("weight column out of range");
    for (const auto& pat : patterns) {
        if (pat.empty()) throw InvalidInput("amputation patterns must be non-empty");
        for (std::size_t c : pat) {
            if (c >= n_cols) throw InvalidInput("pattern column out of range");
            if (c == weight_column) throw InvalidInput("patterns must exclude the weight column");
        }
    }
    double total = 0.0;
    for (double f : pattern_freq) {
        if (!(f > 0.0)) throw InvalidInput("pattern frequencies must be positive");
        total += f;
    }
    if (std::abs(total - 1.0) > 1e-9) throw InvalidInput("pattern frequencies must sum to 1");
    if (!(prop > 0.0 && prop < 1.0)) throw InvalidInput("prop must lie in (0, 1)");
}

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double solve_logistic_shift(const std::vector<double>& z, double prop) {
    auto excess = [&](double b) {
        double s = 0.0;
        for (double zi : z) s += logistic(zi + b);
        return s / static_cast<double>(z.size()) - prop;
    };
    double lo = -50.0, hi = 50.0;
    if (excess(lo) > 0.0 || excess(hi) < 0.0)
        throw AmputationFailure("target proportion unreachable on [-50, 50]");
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double e = excess(mid);
        if (std::abs(e) < 1e-6) return mid;
        (e < 0.0 ? lo : hi) = mid;
    }
    throw AmputationFailure("logistic shift bisection did not converge");
}

AmputationOutcome ampute(const DataMatrix& data, const AmputationSpec& spec, const SeedSpec& seed) {
    spec.validate(data.cols());
    const std::size_t n = data.rows();
    const auto w = data.column(spec.weight_column);
    if (n < 2) throw AmputationFailure("amputation needs at least two rows");
    const double mu = mean(w);
    const double sd = sample_sd(w);
    if (!(sd > 0.0)) throw AmputationFailure("weight column has zero variance");

    AmputationOutcome out;
    out.mask = MissingMask(n, data.cols());

    // Pattern assignment is drawn first and independently of the weights.
    Rng assign_rng(seed.child(0));
    std::vector<double> cdf(spec.pattern_freq.size());
    std::partial_sum(spec.pattern_freq.begin(), spec.pattern_freq.end(), cdf.begin());
    out.assigned_pattern.resize(n);
    for (auto& a : out.assigned_pattern) {
        const double u = assign_rng.uniform() * cdf.back();
        std::size_t k = 0;
        while (k + 1 < cdf.size() && u >= cdf[k]) ++k;
        a = k;
    }

    std::vector<double> z(n);
    for (std::size_t i = 0; i < n; ++i) z[i] = (w[i] - mu) / sd;
    out.shift = solve_logistic_shift(z, spec.prop);

    Rng draw_rng(seed.child(1));
    out.probabilities.resize(n);
    std::size_t masked_rows = 0;
    for (std::size_t i = 0; i < n; ++i) {
        out.probabilities[i] = logistic(z[i] + out.shift);
        if (!draw_rng.bernoulli(out.probabilities[i])) continue;
        ++masked_rows;
        for (std::size_t c : spec.patterns[out.assigned_pattern[i]]) out.mask.set(i, c);
    }
    out.realized_prop = static_cast<double>(masked_rows) / static_cast<double>(n);
    return out;
}

AmputationSpec scenario_patterns(PatternKind kind, double prop) {
    AmputationSpec spec;
    spec.weight_column = 0;
    spec.prop = prop;
    if (kind == PatternKind::TwoCells) {
        spec.patterns = {{1, 2}};
        spec.pattern_freq = {1.0};
    } else {
        spec.patterns = {{1}, {2}};
        spec.pattern_freq = {0.5, 0.5};
    }
    return spec;
}

}  // namespace forestfill
