#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "forestfill/metrics.hpp"

namespace forestfill {

/// One long-format result row: a (scenario, pattern, strategy) cell for
/// one replicate. Metric fields are meaningless when ok == false.
struct MetricsRecord {
    std::size_t replicate = 0;
    std::string scenario;
    std::string pattern;
    std::string strategy;
    bool ok = true;
    std::string error;
    std::size_t iterations = 0;
    std::string stopped_by;
    double rel_bias_mean_x1 = 0.0;
    double rel_bias_mean_x2 = 0.0;
    double rel_bias_sd_x1 = 0.0;
    double rel_bias_sd_x2 = 0.0;
    double coef_bias_b0 = 0.0;
    BiasKind coef_bias_b0_kind = BiasKind::Relative;
    double coef_bias_b1 = 0.0;
    double coef_bias_b2 = 0.0;
    double nrmse_true = 0.0;
    double nrmse_oob = 0.0;
    double corr_x1x2 = 0.0;
    double elapsed_ms = 0.0;

    bool operator==(const MetricsRecord&) const = default;
};

/// Fixed column order of the results CSV.
const std::vector<std::string>& record_columns();

/// Names of the numeric metric columns, in CSV order.
const std::vector<std::string>& record_metric_names();
/// Value of a metric column by name (see record_metric_names).
double record_metric(const MetricsRecord& r, const std::string& name);

void write_records_header(std::ostream& out);
void write_record(std::ostream& out, const MetricsRecord& r);
void write_records_csv(std::ostream& out, const std::vector<MetricsRecord>& records);

/// Throws ParseError on a header that differs from record_columns() or on a
/// malformed row.
std::vector<MetricsRecord> read_records_csv(std::istream& in);

std::string to_string(BiasKind k);

}  // namespace forestfill
