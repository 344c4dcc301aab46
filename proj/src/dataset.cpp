#include "forestfill/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include "forestfill/errors.hpp"

namespace forestfill {

DataMatrix::DataMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), values_(rows * cols, 0.0) {
    names_.reserve(cols);
    for (std::size_t c = 0; c < cols; ++c) names_.push_back("V" + std::to_string(c + 1));
}

DataMatrix::DataMatrix(std::size_t rows, std::vector<std::string> column_names)
    : DataMatrix(rows, column_names.size()) {
    set_column_names(std::move(column_names));
}

void DataMatrix::set_column_names(std::vector<std::string> names) {
    if (names.size() != cols_) throw ShapeError("column name count does not match matrix width");
    std::set<std::string> seen(names.begin(), names.end());
    if (seen.size() != names.size()) throw InvalidInput("column names must be unique");
    names_ = std::move(names);
}

std::size_t MissingMask::missing_in_column(std::size_t c) const {
    auto first = bits_.begin() + static_cast<std::ptrdiff_t>(c * rows_);
    return static_cast<std::size_t>(std::count(first, first + static_cast<std::ptrdiff_t>(rows_), 1));
}

std::size_t MissingMask::missing_total() const {
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), 1));
}

void check_same_shape(const DataMatrix& matrix, const MissingMask& mask) {
    if (matrix.rows() != mask.rows() || matrix.cols() != mask.cols())
        throw ShapeError("mask shape " + std::to_string(mask.rows()) + "x" +
                         std::to_string(mask.cols()) + " does not match matrix " +
                         std::to_string(matrix.rows()) + "x" + std::to_string(matrix.cols()));
}

ColumnSummary summarize_column(const DataMatrix& matrix, const MissingMask& mask, std::size_t col) {
    check_same_shape(matrix, mask);
    if (col >= matrix.cols()) throw ShapeError("column index out of range");
    ColumnSummary s;
    s.col = col;
    double sum = 0.0;
    for (std::size_t r = 0; r < matrix.rows(); ++r) {
        if (mask(r, col)) continue;
        sum += matrix(r, col);
        ++s.n_observed;
    }
    if (s.n_observed == 0) throw UnimputableColumn(col);
    s.mean_observed = sum / static_cast<double>(s.n_observed);
    if (s.n_observed > 1) {
        double ss = 0.0;
        for (std::size_t r = 0; r < matrix.rows(); ++r) {
            if (mask(r, col)) continue;
            const double d = matrix(r, col) - s.mean_observed;
            ss += d * d;
        }
        s.sd_observed = std::sqrt(ss / static_cast<double>(s.n_observed - 1));
    }
    return s;
}

double observed_mean(const DataMatrix& matrix, const MissingMask& mask, std::size_t col) {
    return summarize_column(matrix, mask, col).mean_observed;
}

DataMatrix initialize_missing(const DataMatrix& matrix, const MissingMask& mask) {
    check_same_shape(matrix, mask);
    DataMatrix out = matrix;
    for (std::size_t c = 0; c < matrix.cols(); ++c) {
        if (mask.missing_in_column(c) == 0) continue;
        const double fill = observed_mean(matrix, mask, c);
        for (std::size_t r = 0; r < matrix.rows(); ++r)
            if (mask(r, c)) out(r, c) = fill;
    }
    return out;
}

std::vector<std::size_t> imputation_order(const MissingMask& mask) {
    std::vector<std::size_t> cols;
    std::vector<std::size_t> counts(mask.cols());
    for (std::size_t c = 0; c < mask.cols(); ++c) {
        counts[c] = mask.missing_in_column(c);
        if (counts[c] > 0) cols.push_back(c);
    }
    std::stable_sort(cols.begin(), cols.end(),
                     [&](std::size_t a, std::size_t b) { return counts[a] < counts[b]; });
    return cols;
}

double mean(std::span<const double> v) {
    if (v.empty()) throw InvalidInput("mean of empty vector");
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_variance(std::span<const double> v) {
    if (v.size() < 2) throw InvalidInput("sample variance needs at least two values");
    const double m = mean(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return ss / static_cast<double>(v.size() - 1);
}

double sample_sd(std::span<const double> v) { return std::sqrt(sample_variance(v)); }

// ---- CSV ----------------------------------------------------------------

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (char ch : line) {
        if (ch == '"') {
            quoted = !quoted;
        } else if (ch == ',' && !quoted) {
            fields.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    fields.push_back(trim(cur));
    return fields;
}

}  // namespace

CsvTable read_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty CSV input: missing header row");
    std::vector<std::string> names = split_fields(line);

    std::vector<std::vector<double>> cols(names.size());
    std::vector<std::vector<std::uint8_t>> miss(names.size());
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        ++row;
        auto fields = split_fields(line);
        if (fields.size() != names.size())
            throw ParseError("row " + std::to_string(row) + ": expected " +
                             std::to_string(names.size()) + " fields, got " +
                             std::to_string(fields.size()));
        for (std::size_t c = 0; c < fields.size(); ++c) {
            const std::string& f = fields[c];
            if (f.empty() || f == "NA") {
                cols[c].push_back(kMissingPlaceholder);
                miss[c].push_back(1);
                continue;
            }
            double v = 0.0;
            const char* begin = f.data();
            const char* end = f.data() + f.size();
            if (*begin == '+') ++begin;
            auto [ptr, ec] = std::from_chars(begin, end, v);
            if (ec != std::errc() || ptr != end || !std::isfinite(v))
                throw ParseError("row " + std::to_string(row) + ", column " +
                                 std::to_string(c + 1) + " ('" + names[c] +
                                 "'): cannot parse '" + f + "' as a real number");
            cols[c].push_back(v);
            miss[c].push_back(0);
        }
    }
    if (row == 0) throw ParseError("CSV has a header but no data rows");

    CsvTable t{DataMatrix(row, names.size()), MissingMask(row, names.size())};
    t.data.set_column_names(std::move(names));
    for (std::size_t c = 0; c < cols.size(); ++c)
        for (std::size_t r = 0; r < row; ++r) {
            t.data(r, c) = cols[c][r];
            t.mask.set(r, c, miss[c][r] != 0);
        }
    return t;
}

CsvTable read_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    return read_csv(in);
}

std::string format_real(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

void write_csv(std::ostream& out, const DataMatrix& data, const MissingMask* mask) {
    if (mask) check_same_shape(data, *mask);
    const auto& names = data.column_names();
    for (std::size_t c = 0; c < names.size(); ++c) out << (c ? "," : "") << names[c];
    out << '\n';
    for (std::size_t r = 0; r < data.rows(); ++r) {
        for (std::size_t c = 0; c < data.cols(); ++c) {
            if (c) out << ',';
            if (mask && (*mask)(r, c))
                out << "NA";
            else
                out << format_real(data(r, c));
        }
        out << '\n';
    }
}

void write_csv_file(const std::string& path, const DataMatrix& data, const MissingMask* mask) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    write_csv(out, data, mask);
    if (!out) throw IoError("write to '" + path + "' failed");
}

}  // namespace forestfill
