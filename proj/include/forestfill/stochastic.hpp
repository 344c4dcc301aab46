#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <vector>

#include "forestfill/dataset.hpp"

namespace forestfill {

/// Names a random stream by (master seed, path). Streams are derived by
/// hashing, never by splitting a shared generator, so a task's draws depend
/// only on its own path and not on scheduling.
struct SeedSpec {
    std::uint64_t master_seed = 0;
    std::vector<std::uint64_t> path;

    SeedSpec() = default;
    explicit SeedSpec(std::uint64_t master, std::vector<std::uint64_t> p = {})
        : master_seed(master), path(std::move(p)) {}

    SeedSpec child(std::uint64_t index) const;
    SeedSpec child(std::initializer_list<std::uint64_t> indices) const;

    /// 64-bit key identifying this stream.
    std::uint64_t key() const;

    bool operator==(const SeedSpec&) const = default;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Per-task generator. Distributions are implemented here rather than with
/// <random> distribution objects, whose output is implementation-defined.
class Rng {
public:
    explicit Rng(const SeedSpec& seed) : engine_(seed.key()) {}

    std::uint64_t next() { return engine_(); }
    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    /// Uniform integer on [0, n); n > 0.
    std::size_t index(std::size_t n);
    double normal();
    bool bernoulli(double p) { return uniform() < p; }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// Dense row-major square matrix used for covariance work.
struct SquareMatrix {
    std::size_t dim = 0;
    std::vector<double> a;

    SquareMatrix() = default;
    explicit SquareMatrix(std::size_t n) : dim(n), a(n * n, 0.0) {}
    SquareMatrix(std::size_t n, std::initializer_list<double> rowmajor);
    static SquareMatrix identity(std::size_t n);

    double operator()(std::size_t i, std::size_t j) const { return a[i * dim + j]; }
    double& operator()(std::size_t i, std::size_t j) { return a[i * dim + j]; }
};

/// Lower-triangular L with L * L^T = cov. Rejects non-symmetric input and
/// any pivot below 1e-12 times the largest diagonal entry.
SquareMatrix cholesky(const SquareMatrix& cov);

struct MvnSpec {
    std::vector<double> mean;
    SquareMatrix cov;
};

DataMatrix sample_mvn(const MvnSpec& spec, std::size_t n, const SeedSpec& seed);

struct BootstrapSample {
    std::vector<std::size_t> indices;  // n draws with replacement, in draw order
    std::vector<std::size_t> oob;      // ascending rows never drawn
};

BootstrapSample bootstrap_indices(std::size_t n, const SeedSpec& seed);
BootstrapSample bootstrap_indices(std::size_t n, Rng& rng);

}  // namespace forestfill
