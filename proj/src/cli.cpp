#include <CLI11.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <fstream>
#include <optional>
#include <sstream>

#include "forestfill/errors.hpp"
#include "forestfill/harness.hpp"

namespace forestfill {

namespace {

constexpr const char* kEnvPrefix = "FORESTFILL_";

std::string env_name(const std::string& flag) {
    std::string s = kEnvPrefix;
    for (char c : flag) s.push_back(c == '-' ? '_' : static_cast<char>(std::toupper(c)));
    return s;
}

template <typename T>
CLI::Option* opt(CLI::App* app, const std::string& flag, T& target, const std::string& help) {
    return app->add_option("--" + flag, target, help)->envname(env_name(flag));
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open '" + path + "' for writing");
    f << content;
    if (!f) throw IoError("write to '" + path + "' failed");
}

struct ForestFlags {
    std::optional<std::size_t> trees, max_iter, mtry, min_node_size, chunks, workers, threads;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> strategy;

    void attach(CLI::App* app, bool with_strategy) {
        opt(app, "seed", seed, "master seed");
        opt(app, "threads", threads, "physical threads (0 = all cores); never changes results");
        opt(app, "trees", trees, "trees per forest");
        opt(app, "max-iter", max_iter, "maximum imputation cycles");
        opt(app, "chunks", chunks, "tree chunks for the forests strategy");
        opt(app, "workers", workers, "workers for the variables strategy");
        opt(app, "mtry", mtry, "features tried per split (0 = floor(sqrt(q)))");
        opt(app, "min-node-size", min_node_size, "minimum node size");
        if (with_strategy)
            opt(app, "strategy", strategy, "sequential | forests | variables")
                ->check(CLI::IsMember({"sequential", "forests", "variables"}));
    }
};

int cmd_simulate(const std::string& config_path, const std::string& out_path,
                 std::optional<std::string> summary_path, const ForestFlags& f,
                 std::optional<std::size_t> replicates, std::ostream& out, std::ostream& err) {
    const auto t0 = std::chrono::steady_clock::now();
    StudyConfig cfg = load_study_config(config_path);
    if (f.seed) cfg.seed = *f.seed;
    if (f.threads) cfg.threads = *f.threads;
    if (f.trees) cfg.trees = *f.trees;
    if (f.max_iter) cfg.max_iterations = *f.max_iter;
    if (f.chunks) cfg.chunks = *f.chunks;
    if (f.workers) cfg.workers = *f.workers;
    if (f.mtry) cfg.mtry = *f.mtry;
    if (f.min_node_size) cfg.min_node_size = *f.min_node_size;
    if (f.strategy) cfg.strategies = {*f.strategy};
    if (replicates) cfg.n_replicates = *replicates;

    const auto configs = expand(cfg);
    for (const auto& c : configs) c.validate();
    ThreadPool pool(cfg.threads);
    out << "simulate: " << configs.size() << " cells x " << cfg.n_replicates << " replicates on "
        << pool.size() << " thread(s)\n";

    std::size_t last_pct = 0;
    const StudyResult study = run_study(configs, pool, [&](std::size_t done, std::size_t total) {
        const std::size_t pct = done * 100 / total;
        if (pct >= last_pct + 10 || done == total) {
            last_pct = pct;
            err << "progress: " << done << "/" << total << " replicates (" << pct << "%)\n";
        }
    });

    std::ostringstream results;
    write_records_csv(results, study.records);
    std::ostringstream summary;
    write_summary_csv(summary, summarize(study.records));
    write_text_file(out_path, results.str());
    const std::string spath = summary_path ? *summary_path : summary_path_for(out_path);
    write_text_file(spath, summary.str());

    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out << "wrote " << study.records.size() << " rows to " << out_path << " and summary to " << spath << "\n";
    out << "failed replicates: " << study.failed_replicates << "/" << study.total_replicates << "\n";
    out << "elapsed: " << secs << " s\n";
    if (study.failed()) {
        err << "error: more than 1% of replicates failed\n";
        return kExitData;
    }
    return kExitOk;
}

int cmd_impute(const std::string& in_path, const std::string& out_path, const ForestFlags& f,
               std::ostream& out) {
    const CsvTable table = read_csv_file(in_path);
    if (table.data.cols() < 2) throw ParseError("imputation needs at least two columns");

    ImputerParams params;
    if (f.trees) params.forest.n_trees = *f.trees;
    if (f.mtry) params.forest.mtry = *f.mtry;
    if (f.min_node_size) params.forest.min_node_size = *f.min_node_size;
    if (f.max_iter) params.max_iterations = *f.max_iter;
    params.seed = SeedSpec(f.seed.value_or(20200101));
    const ImputationStrategy strategy =
        make_strategy(f.strategy.value_or("sequential"), f.chunks.value_or(3), f.workers.value_or(3));

    ThreadPool pool(f.threads.value_or(0));
    const auto t0 = std::chrono::steady_clock::now();
    const ImputationResult res = impute(table.data, table.mask, params, strategy, &pool);
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

    std::ostringstream csv;
    write_csv(csv, res.imputed);
    write_text_file(out_path, csv.str());
    out << "strategy: " << strategy_name(strategy) << "\n";
    out << "iterations: " << res.iterations_performed << "\n";
    out << "stopped_by: " << to_string(res.stopped_by) << "\n";
    out << "oob_nrmse: " << format_real(res.oob_nrmse_final) << "\n";
    out << "elapsed_ms: " << ms << "\n";
    return kExitOk;
}

std::size_t resolve_column(const std::string& token, const DataMatrix& data) {
    std::size_t idx = 0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), idx);
    if (ec == std::errc() && ptr == token.data() + token.size()) return idx;
    const auto& names = data.column_names();
    const auto it = std::find(names.begin(), names.end(), token);
    if (it == names.end()) throw ParseError("unknown column '" + token + "'");
    return static_cast<std::size_t>(it - names.begin());
}

int cmd_ampute(const std::string& in_path, const std::string& out_path, const std::string& weight,
               const std::optional<std::string>& patterns, const std::optional<std::string>& freq,
               double prop, std::uint64_t seed, std::ostream& out) {
    const CsvTable table = read_csv_file(in_path);
    if (table.mask.any()) throw InvalidInput("ampute expects a complete input file");

    AmputationSpec spec;
    spec.weight_column = resolve_column(weight, table.data);
    spec.prop = prop;
    if (patterns) {
        std::stringstream ss(*patterns);
        std::string group;
        while (std::getline(ss, group, ';')) {
            std::vector<std::size_t> cols;
            std::stringstream gs(group);
            std::string tok;
            while (std::getline(gs, tok, ','))
                if (!tok.empty()) cols.push_back(resolve_column(tok, table.data));
            spec.patterns.push_back(std::move(cols));
        }
    } else {
        std::vector<std::size_t> all;
        for (std::size_t c = 0; c < table.data.cols(); ++c)
            if (c != spec.weight_column) all.push_back(c);
        spec.patterns.push_back(std::move(all));
    }
    if (freq) {
        std::stringstream ss(*freq);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            double v = 0.0;
            auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
            if (ec != std::errc() || ptr != tok.data() + tok.size())
                throw ParseError("bad frequency '" + tok + "'");
            spec.pattern_freq.push_back(v);
        }
    } else {
        spec.pattern_freq.assign(spec.patterns.size(), 1.0 / static_cast<double>(spec.patterns.size()));
    }

    const AmputationOutcome res = ampute(table.data, spec, SeedSpec(seed));
    std::ostringstream csv;
    write_csv(csv, table.data, &res.mask);
    write_text_file(out_path, csv.str());
    out << "realized_prop: " << format_real(res.realized_prop) << "\n";
    out << "shift: " << format_real(res.shift) << "\n";
    return kExitOk;
}

int cmd_summarize(const std::string& in_path, const std::string& out_path, std::ostream& out) {
    std::ifstream in(in_path);
    if (!in) throw IoError("cannot open '" + in_path + "'");
    const auto records = read_records_csv(in);
    if (records.empty()) throw ParseError("results file has no rows");
    const SummaryTable table = summarize(records);
    std::ostringstream csv;
    write_summary_csv(csv, table);
    write_text_file(out_path, csv.str());
    out << "summarized " << records.size() << " rows into " << table.rows.size() << " groups\n";
    return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"forestfill: random-forest iterative imputation and strategy study"};
    app.require_subcommand(1);

    ForestFlags sim_flags, imp_flags;
    std::string config, sim_out;
    std::optional<std::string> summary_out;
    std::optional<std::size_t> replicates;
    auto* sim = app.add_subcommand("simulate", "run the Monte Carlo study");
    opt(sim, "config", config, "study config file")->required();
    opt(sim, "out", sim_out, "results CSV path")->required();
    opt(sim, "summary", summary_out, "summary CSV path (default: <out>.summary.csv)");
    opt(sim, "replicates", replicates, "override n_replicates");
    sim_flags.attach(sim, true);

    std::string imp_in, imp_out;
    auto* imp = app.add_subcommand("impute", "impute a CSV file (NA or empty = missing)");
    opt(imp, "in", imp_in, "input CSV")->required();
    opt(imp, "out", imp_out, "output CSV")->required();
    imp_flags.attach(imp, true);

    std::string amp_in, amp_out, weight = "0";
    std::optional<std::string> patterns, freq;
    double prop = 0.5;
    std::uint64_t amp_seed = 20200101;
    auto* amp = app.add_subcommand("ampute", "introduce MAR missingness into a complete CSV");
    opt(amp, "in", amp_in, "input CSV")->required();
    opt(amp, "out", amp_out, "output CSV")->required();
    opt(amp, "weight-col", weight, "column driving missingness (index or name)");
    opt(amp, "patterns", patterns, "patterns as column lists, e.g. \"1,2\" or \"X1;X2\"");
    opt(amp, "freq", freq, "pattern frequencies, e.g. \"0.5,0.5\"");
    opt(amp, "prop", prop, "missing-row proportion");
    opt(amp, "seed", amp_seed, "seed");

    std::string sum_in, sum_out;
    auto* sum = app.add_subcommand("summarize", "summarize a results CSV per (scenario, pattern, strategy)");
    opt(sum, "in", sum_in, "results CSV")->required();
    opt(sum, "out", sum_out, "summary CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitParse;
    }

    try {
        if (*sim) return cmd_simulate(config, sim_out, summary_out, sim_flags, replicates, out, err);
        if (*imp) return cmd_impute(imp_in, imp_out, imp_flags, out);
        if (*amp) return cmd_ampute(amp_in, amp_out, weight, patterns, freq, prop, amp_seed, out);
        if (*sum) return cmd_summarize(sum_in, sum_out, out);
    } catch (const ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitParse;
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const AmputationFailure& e) {
        err << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const UnimputableColumn& e) {
        err << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const InvalidInput& e) {
        err << "error: " << e.what() << "\n";
        return kExitParse;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitFailure;
}

}  // namespace forestfill
