#include "forestfill/records.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

#include "forestfill/errors.hpp"

namespace forestfill {

namespace {

struct MetricField {
    const char* name;
    double MetricsRecord::*member;
};

const MetricField kMetricFields[] = {
    {"rel_bias_mean_x1", &MetricsRecord::rel_bias_mean_x1},
    {"rel_bias_mean_x2", &MetricsRecord::rel_bias_mean_x2},
    {"rel_bias_sd_x1", &MetricsRecord::rel_bias_sd_x1},
    {"rel_bias_sd_x2", &MetricsRecord::rel_bias_sd_x2},
    {"coef_bias_b0", &MetricsRecord::coef_bias_b0},
    {"coef_bias_b1", &MetricsRecord::coef_bias_b1},
    {"coef_bias_b2", &MetricsRecord::coef_bias_b2},
    {"nrmse_true", &MetricsRecord::nrmse_true},
    {"nrmse_oob", &MetricsRecord::nrmse_oob},
    {"corr_x1x2", &MetricsRecord::corr_x1x2},
    {"elapsed_ms", &MetricsRecord::elapsed_ms},
};

std::string sanitize(std::string s) {
    for (char& c : s)
        if (c == ',' || c == '\n' || c == '\r' || c == '"') c = ';';
    return s;
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

double parse_real(const std::string& s, std::size_t line, const char* field) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw ParseError("line " + std::to_string(line) + ": bad value '" + s + "' in " + field);
    return v;
}

std::size_t parse_count(const std::string& s, std::size_t line, const char* field) {
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw ParseError("line " + std::to_string(line) + ": bad count '" + s + "' in " + field);
    return v;
}

}  // namespace

std::string to_string(BiasKind k) { return k == BiasKind::Absolute ? "absolute" : "relative"; }

const std::vector<std::string>& record_columns() {
    static const std::vector<std::string> cols = {
        "replicate",        "scenario",         "pattern",          "strategy",
        "status",           "error",            "iterations",       "stopped_by",
        "rel_bias_mean_x1", "rel_bias_mean_x2", "rel_bias_sd_x1",   "rel_bias_sd_x2",
        "coef_bias_b0",     "coef_bias_b0_kind", "coef_bias_b1",    "coef_bias_b2",
        "nrmse_true",       "nrmse_oob",        "corr_x1x2",        "elapsed_ms"};
    return cols;
}

const std::vector<std::string>& record_metric_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v{"iterations"};
        for (const auto& f : kMetricFields) v.emplace_back(f.name);
        return v;
    }();
    return names;
}

double record_metric(const MetricsRecord& r, const std::string& name) {
    if (name == "iterations") return static_cast<double>(r.iterations);
    for (const auto& f : kMetricFields)
        if (name == f.name) return r.*(f.member);
    throw InvalidInput("unknown metric '" + name + "'");
}

void write_records_header(std::ostream& out) {
    const auto& cols = record_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
    out << '\n';
}

void write_record(std::ostream& out, const MetricsRecord& r) {
    auto num = [&](double v) { return r.ok ? format_real(v) : std::string("NA"); };
    out << r.replicate << ',' << r.scenario << ',' << r.pattern << ',' << r.strategy << ','
        << (r.ok ? "ok" : "failed") << ',' << sanitize(r.error) << ','
        << (r.ok ? std::to_string(r.iterations) : "NA") << ',' << (r.ok ? r.stopped_by : "NA") << ','
        << num(r.rel_bias_mean_x1) << ',' << num(r.rel_bias_mean_x2) << ','
        << num(r.rel_bias_sd_x1) << ',' << num(r.rel_bias_sd_x2) << ',' << num(r.coef_bias_b0)
        << ',' << (r.ok ? to_string(r.coef_bias_b0_kind) : "NA") << ',' << num(r.coef_bias_b1)
        << ',' << num(r.coef_bias_b2) << ',' << num(r.nrmse_true) << ',' << num(r.nrmse_oob)
        << ',' << num(r.corr_x1x2) << ',' << format_real(r.elapsed_ms) << '\n';
}

void write_records_csv(std::ostream& out, const std::vector<MetricsRecord>& records) {
    write_records_header(out);
    for (const auto& r : records) write_record(out, r);
}

std::vector<MetricsRecord> read_records_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("results file is empty");
    if (split(line) != record_columns()) throw ParseError("results header does not match the metrics schema");

    std::vector<MetricsRecord> out;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        const auto f = split(line);
        if (f.size() != record_columns().size())
            throw ParseError("line " + std::to_string(lineno) + ": expected " +
                             std::to_string(record_columns().size()) + " fields");
        MetricsRecord r;
        r.replicate = parse_count(f[0], lineno, "replicate");
        r.scenario = f[1];
        r.pattern = f[2];
        r.strategy = f[3];
        if (f[4] != "ok" && f[4] != "failed")
            throw ParseError("line " + std::to_string(lineno) + ": bad status '" + f[4] + "'");
        r.ok = f[4] == "ok";
        r.error = f[5];
        r.elapsed_ms = parse_real(f[19], lineno, "elapsed_ms");
        if (r.ok) {
            r.iterations = parse_count(f[6], lineno, "iterations");
            r.stopped_by = f[7];
            r.rel_bias_mean_x1 = parse_real(f[8], lineno, "rel_bias_mean_x1");
            r.rel_bias_mean_x2 = parse_real(f[9], lineno, "rel_bias_mean_x2");
            r.rel_bias_sd_x1 = parse_real(f[10], lineno, "rel_bias_sd_x1");
            r.rel_bias_sd_x2 = parse_real(f[11], lineno, "rel_bias_sd_x2");
            r.coef_bias_b0 = parse_real(f[12], lineno, "coef_bias_b0");
            if (f[13] != "relative" && f[13] != "absolute")
                throw ParseError("line " + std::to_string(lineno) + ": bad bias kind '" + f[13] + "'");
            r.coef_bias_b0_kind = f[13] == "absolute" ? BiasKind::Absolute : BiasKind::Relative;
            r.coef_bias_b1 = parse_real(f[14], lineno, "coef_bias_b1");
            r.coef_bias_b2 = parse_real(f[15], lineno, "coef_bias_b2");
            r.nrmse_true = parse_real(f[16], lineno, "nrmse_true");
            r.nrmse_oob = parse_real(f[17], lineno, "nrmse_oob");
            r.corr_x1x2 = parse_real(f[18], lineno, "corr_x1x2");
        }
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace forestfill
