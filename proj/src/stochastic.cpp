#include "forestfill/stochastic.hpp"

#include <algorithm>
#include <cmath>

#include "forestfill/errors.hpp"

namespace forestfill {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

SeedSpec SeedSpec::child(std::uint64_t index) const {
    SeedSpec s = *this;
    s.path.push_back(index);
    return s;
}

SeedSpec SeedSpec::child(std::initializer_list<std::uint64_t> indices) const {
    SeedSpec s = *this;
    s.path.insert(s.path.end(), indices.begin(), indices.end());
    return s;
}

std::uint64_t SeedSpec::key() const {
    // Length-prefixed so that {1} and {1, 0} never collide structurally.
    std::uint64_t h = splitmix64(master_seed ^ 0x6a09e667f3bcc908ULL);
    h = splitmix64(h ^ static_cast<std::uint64_t>(path.size()));
    for (std::uint64_t p : path) h = splitmix64(h ^ splitmix64(p + 0x3c6ef372fe94f82bULL));
    return h;
}

std::size_t Rng::index(std::size_t n) {
    if (n == 0) throw InvalidInput("Rng::index requires n > 0");
    // Lemire's nearly-divisionless rejection.
    const auto bound = static_cast<std::uint64_t>(n);
    unsigned __int128 m = static_cast<unsigned __int128>(engine_()) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
        const std::uint64_t threshold = (0 - bound) % bound;
        while (low < threshold) {
            m = static_cast<unsigned __int128>(engine_()) * bound;
            low = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::size_t>(m >> 64);
}

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    // Marsaglia polar method.
    double u = 0.0, v = 0.0, s = 0.0;
    do {
        u = 2.0 * uniform() - 1.0;
        v = 2.0 * uniform() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
}

SquareMatrix::SquareMatrix(std::size_t n, std::initializer_list<double> rowmajor)
    : dim(n), a(rowmajor) {
    if (a.size() != n * n) throw ShapeError("SquareMatrix initializer has wrong element count");
}

SquareMatrix SquareMatrix::identity(std::size_t n) {
    SquareMatrix m(n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

SquareMatrix cholesky(const SquareMatrix& cov) {
    const std::size_t n = cov.dim;
    if (n == 0 || cov.a.size() != n * n) throw ShapeError("cholesky needs a non-empty square matrix");
    double max_diag = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        max_diag = std::max(max_diag, cov(i, i));
        for (std::size_t j = 0; j < i; ++j)
            if (std::abs(cov(i, j) - cov(j, i)) > 1e-12)
                throw InvalidInput("covariance matrix is not symmetric");
    }
    const double min_pivot = 1e-12 * max_diag;

    SquareMatrix L(n);
    for (std::size_t j = 0; j < n; ++j) {
        double d = cov(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= L(j, k) * L(j, k);
        if (!(d > min_pivot) || !(max_diag > 0.0)) throw FactorizationFailure(j);
        const double ljj = std::sqrt(d);
        L(j, j) = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = cov(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= L(i, k) * L(j, k);
            L(i, j) = s / ljj;
        }
    }
    return L;
}

DataMatrix sample_mvn(const MvnSpec& spec, std::size_t n, const SeedSpec& seed) {
    const std::size_t p = spec.mean.size();
    if (n == 0) throw InvalidInput("sample_mvn needs n >= 1");
    if (spec.cov.dim != p) throw ShapeError("mean and covariance dimensions differ");
    const SquareMatrix L = cholesky(spec.cov);

    DataMatrix out(n, p);
    Rng rng(seed);
    std::vector<double> z(p);
    for (std::size_t r = 0; r < n; ++r) {
        for (auto& zi : z) zi = rng.normal();
        for (std::size_t i = 0; i < p; ++i) {
            double x = spec.mean[i];
            for (std::size_t k = 0; k <= i; ++k) x += L(i, k) * z[k];
            out(r, i) = x;
        }
    }
    return out;
}

BootstrapSample bootstrap_indices(std::size_t n, Rng& rng) {
    if (n == 0) throw InvalidInput("bootstrap needs n >= 1");
    BootstrapSample s;
    s.indices.resize(n);
    std::vector<std::uint8_t> drawn(n, 0);
    for (auto& i : s.indices) {
        i = rng.index(n);
        drawn[i] = 1;
    }
    for (std::size_t i = 0; i < n; ++i)
        if (!drawn[i]) s.oob.push_back(i);
    return s;
}

BootstrapSample bootstrap_indices(std::size_t n, const SeedSpec& seed) {
    Rng rng(seed);
    return bootstrap_indices(n, rng);
}

}  // namespace forestfill
