#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace forestfill {

/// Value stored in missing cells. Never read without consulting the mask.
inline constexpr double kMissingPlaceholder = 0.0;

/// n x p table of finite reals, stored column-major so that a column is a
/// contiguous span (the forest code works column-wise).
class DataMatrix {
public:
    DataMatrix() = default;
    DataMatrix(std::size_t rows, std::size_t cols);
    DataMatrix(std::size_t rows, std::vector<std::string> column_names);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    double operator()(std::size_t r, std::size_t c) const { return values_[c * rows_ + r]; }
    double& operator()(std::size_t r, std::size_t c) { return values_[c * rows_ + r]; }

    std::span<const double> column(std::size_t c) const {
        return {values_.data() + c * rows_, rows_};
    }
    std::span<double> column(std::size_t c) { return {values_.data() + c * rows_, rows_}; }

    const std::vector<std::string>& column_names() const noexcept { return names_; }
    void set_column_names(std::vector<std::string> names);

    bool operator==(const DataMatrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> values_;
    std::vector<std::string> names_;
};

/// Boolean missingness indicator with the shape of its DataMatrix
/// (true = missing).
class MissingMask {
public:
    MissingMask() = default;
    MissingMask(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), bits_(rows * cols, 0) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    bool operator()(std::size_t r, std::size_t c) const { return bits_[c * rows_ + r] != 0; }
    void set(std::size_t r, std::size_t c, bool missing = true) {
        bits_[c * rows_ + r] = missing ? 1 : 0;
    }

    std::size_t missing_in_column(std::size_t c) const;
    std::size_t missing_total() const;
    bool any() const { return missing_total() > 0; }

    bool operator==(const MissingMask&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<std::uint8_t> bits_;
};

struct ColumnSummary {
    std::size_t col = 0;
    std::size_t n_observed = 0;
    double mean_observed = 0.0;
    double sd_observed = 0.0;  // n-1 denominator; 0 when fewer than two observations
};

void check_same_shape(const DataMatrix& matrix, const MissingMask& mask);

double observed_mean(const DataMatrix& matrix, const MissingMask& mask, std::size_t col);
ColumnSummary summarize_column(const DataMatrix& matrix, const MissingMask& mask, std::size_t col);

/// Replaces every masked cell by its column's observed mean.
DataMatrix initialize_missing(const DataMatrix& matrix, const MissingMask& mask);

/// Columns with at least one missing cell, ascending by missing count,
/// ties by column index.
std::vector<std::size_t> imputation_order(const MissingMask& mask);

double mean(std::span<const double> v);
/// Sample standard deviation (n-1 denominator).
double sample_sd(std::span<const double> v);
double sample_variance(std::span<const double> v);

// ---- CSV ----------------------------------------------------------------

struct CsvTable {
    DataMatrix data;
    MissingMask mask;
};

/// Header row of names, decimal cells; empty field or "NA" is missing.
CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::string& path);

/// Masked cells are written as "NA"; reals use the shortest round-trip form.
void write_csv(std::ostream& out, const DataMatrix& data, const MissingMask* mask = nullptr);
void write_csv_file(const std::string& path, const DataMatrix& data,
                    const MissingMask* mask = nullptr);

/// Shortest representation that parses back to the same double.
std::string format_real(double v);

}  // namespace forestfill
