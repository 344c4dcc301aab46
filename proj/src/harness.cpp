#include "forestfill/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "forestfill/errors.hpp"

namespace forestfill {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ','))
        if (auto t = trim(item); !t.empty()) out.push_back(t);
    return out;
}

template <typename T>
T parse_number(const std::string& key, const std::string& v, std::size_t line) {
    T out{};
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size())
        throw ParseError("config line " + std::to_string(line) + ": invalid value '" + v +
                         "' for " + key);
    return out;
}

bool parse_bool(const std::string& key, const std::string& v, std::size_t line) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ParseError("config line " + std::to_string(line) + ": invalid boolean '" + v + "' for " + key);
}

}  // namespace

StudyConfig parse_study_config(std::istream& in) {
    StudyConfig cfg;
    std::string raw;
    std::size_t lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const std::string line = trim(raw.substr(0, raw.find('#')));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (val.empty()) throw ParseError("config line " + std::to_string(lineno) + ": empty value for " + key);

        if (key == "scenarios") {
            cfg.scenarios.clear();
            for (const auto& s : split_list(val)) cfg.scenarios.push_back(parse_scenario(s));
        } else if (key == "patterns") {
            cfg.patterns.clear();
            for (const auto& s : split_list(val)) cfg.patterns.push_back(parse_pattern(s));
        } else if (key == "strategies") {
            cfg.strategies = split_list(val);
            for (const auto& s : cfg.strategies) make_strategy(s, 1, 1);
        } else if (key == "n_obs") {
            cfg.n_obs = parse_number<std::size_t>(key, val, lineno);
        } else if (key == "n_replicates") {
            cfg.n_replicates = parse_number<std::size_t>(key, val, lineno);
        } else if (key == "trees") {
            cfg.trees = parse_number<std::size_t>(key, val, lineno);
        } else if (key == "max_iterations") {
            cfg.max_iterations = parse_number<std::size_t>(key, val, lineno);
        } else if (key == "chunks") {
            cfg.chunks = parse_number<std::size_t>(key, val, lineno);
        } else if (key == "workers") {
            cfg.workers = parse_number<std::size_t>(key, val, lineno);
        } else if (key == "mtry") {
            cfg.mtry = parse_number<std::size_t>(key, val, lineno);
        } else if (key == "min_node_size") {
            cfg.min_node_size = parse_number<std::size_t>(key, val, lineno);
        } else if (key == "max_depth") {
            cfg.max_depth = parse_number<std::size_t>(key, val, lineno);
        } else if (key == "prop") {
            cfg.prop = parse_number<double>(key, val, lineno);
        } else if (key == "seed") {
            cfg.seed = parse_number<std::uint64_t>(key, val, lineno);
        } else if (key == "threads") {
            cfg.threads = parse_number<std::size_t>(key, val, lineno);
        } else if (key == "record_timings") {
            cfg.record_timings = parse_bool(key, val, lineno);
        } else {
            throw ParseError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        }
    }
    if (cfg.scenarios.empty() || cfg.patterns.empty() || cfg.strategies.empty())
        throw ParseError("config must list at least one scenario, pattern and strategy");
    return cfg;
}

StudyConfig load_study_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config '" + path + "'");
    return parse_study_config(in);
}

ImputationStrategy make_strategy(const std::string& name, std::size_t chunks, std::size_t workers) {
    if (name == "sequential") return Sequential{};
    if (name == "forests") return ParallelForests{chunks};
    if (name == "variables") return ParallelVariables{workers};
    throw ParseError("unknown strategy '" + name + "' (expected sequential, forests or variables)");
}

std::vector<ScenarioConfig> expand(const StudyConfig& cfg) {
    std::vector<ScenarioConfig> out;
    for (ScenarioKind s : cfg.scenarios)
        for (PatternKind p : cfg.patterns) {
            ScenarioConfig sc;
            sc.scenario = s;
            sc.pattern = p;
            sc.n_obs = cfg.n_obs;
            sc.n_replicates = cfg.n_replicates;
            sc.strategies.clear();
            for (const auto& name : cfg.strategies)
                sc.strategies.push_back(make_strategy(name, cfg.chunks, cfg.workers));
            sc.imputer.forest.n_trees = cfg.trees;
            sc.imputer.forest.mtry = cfg.mtry;
            sc.imputer.forest.min_node_size = cfg.min_node_size;
            if (cfg.max_depth > 0) sc.imputer.forest.max_depth = cfg.max_depth;
            sc.imputer.max_iterations = cfg.max_iterations;
            sc.master_seed = cfg.seed;
            sc.prop = cfg.prop;
            sc.record_timings = cfg.record_timings;
            out.push_back(std::move(sc));
        }
    return out;
}

// ---- summaries ------------------------------------------------------------

double lower_quantile(std::vector<double> values, double q) {
    if (values.empty()) return std::nan("");
    std::sort(values.begin(), values.end());
    const auto idx = static_cast<std::size_t>(std::floor(q * static_cast<double>(values.size() - 1)));
    return values[idx];
}

const SummaryRow* SummaryTable::find(const std::string& scenario, const std::string& pattern,
                                     const std::string& strategy) const {
    for (const auto& r : rows)
        if (r.scenario == scenario && r.pattern == pattern && r.strategy == strategy) return &r;
    return nullptr;
}

SummaryTable summarize(const std::vector<MetricsRecord>& records) {
    SummaryTable table;
    std::vector<std::vector<const MetricsRecord*>> groups;
    std::map<std::tuple<std::string, std::string, std::string>, std::size_t> index;
    for (const auto& r : records) {
        const auto key = std::make_tuple(r.scenario, r.pattern, r.strategy);
        auto [it, inserted] = index.emplace(key, groups.size());
        if (inserted) groups.emplace_back();
        groups[it->second].push_back(&r);
        if (r.ok) table.max_iteration = std::max(table.max_iteration, r.iterations);
    }

    const auto& names = record_metric_names();
    for (const auto& g : groups) {
        SummaryRow row;
        row.scenario = g.front()->scenario;
        row.pattern = g.front()->pattern;
        row.strategy = g.front()->strategy;
        row.n_rows = g.size();
        row.iteration_histogram.assign(table.max_iteration, 0);
        std::size_t at_max = 0, ok = 0;
        for (const auto* r : g) {
            if (!r->ok) {
                ++row.n_failed;
                continue;
            }
            ++ok;
            if (r->stopped_by == to_string(StopReason::MaxIterations)) ++at_max;
            if (r->iterations >= 1) ++row.iteration_histogram[r->iterations - 1];
        }
        row.frac_stopped_at_max = ok ? static_cast<double>(at_max) / static_cast<double>(ok) : std::nan("");
        for (const auto& name : names) {
            std::vector<double> v;
            for (const auto* r : g)
                if (r->ok) v.push_back(record_metric(*r, name));
            row.metrics.push_back({lower_quantile(v, 0.25), lower_quantile(v, 0.5), lower_quantile(v, 0.75)});
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

void write_summary_csv(std::ostream& out, const SummaryTable& table) {
    auto num = [](double v) { return std::isfinite(v) ? format_real(v) : std::string("NA"); };
    out << "scenario,pattern,strategy,n_rows,n_failed,frac_stopped_at_max";
    for (const auto& name : record_metric_names())
        out << ',' << name << "_median," << name << "_p25," << name << "_p75";
    for (std::size_t k = 1; k <= table.max_iteration; ++k) out << ",iter_" << k;
    out << '\n';
    for (const auto& r : table.rows) {
        out << r.scenario << ',' << r.pattern << ',' << r.strategy << ',' << r.n_rows << ','
            << r.n_failed << ',' << num(r.frac_stopped_at_max);
        for (const auto& q : r.metrics) out << ',' << num(q.median) << ',' << num(q.p25) << ',' << num(q.p75);
        for (std::size_t c : r.iteration_histogram) out << ',' << c;
        out << '\n';
    }
}

std::string summary_path_for(const std::string& results_path) {
    const auto slash = results_path.find_last_of('/');
    const auto dot = results_path.find_last_of('.');
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
        return results_path + ".summary.csv";
    return results_path.substr(0, dot) + ".summary" + results_path.substr(dot);
}

}  // namespace forestfill
