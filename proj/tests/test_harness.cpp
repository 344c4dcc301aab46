#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>
#include <unistd.h>

#include "forestfill/errors.hpp"
#include "forestfill/harness.hpp"

using namespace forestfill;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("forestfill_test_" + std::to_string(::getpid()) + "_" +
                                            std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
    static int& counter() {
        static int c = 0;
        return c;
    }
};

void write_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    f << text;
}

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

struct CliRun {
    int code;
    std::string out;
    std::string err;
};

CliRun cli(std::vector<std::string> args) {
    args.insert(args.begin(), "forestfill");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::size_t metric_index(const std::string& name) {
    const auto& names = record_metric_names();
    return static_cast<std::size_t>(std::find(names.begin(), names.end(), name) - names.begin());
}

std::size_t count_lines(const std::string& s) {
    std::size_t n = 0;
    for (char c : s) n += c == '\n' ? 1 : 0;
    return n;
}

MetricsRecord record(const std::string& strategy, std::size_t iterations, double nrmse) {
    MetricsRecord r;
    r.scenario = "weak";
    r.pattern = "two_cells";
    r.strategy = strategy;
    r.iterations = iterations;
    r.stopped_by = iterations == 10 ? "max_iterations" : "difference_increased";
    r.nrmse_true = nrmse;
    return r;
}

const char* kMinimalConfig =
    "# smallest useful study\n"
    "scenarios = weak\n"
    "patterns = two_cells\n"
    "n_obs = 40\n"
    "n_replicates = 2\n"
    "trees = 8\n"
    "max_iterations = 4\n"
    "threads = 1\n";

}  // namespace

TEST_CASE("study config parsing") {
    std::istringstream in(
        "scenarios = strong, uncorrelated  # trailing comment\n"
        "\n"
        "patterns = one_cell\n"
        "strategies = variables\n"
        "trees = 50\nmax_iterations = 7\nchunks = 2\nworkers = 4\nmtry = 2\nmin_node_size = 3\n"
        "max_depth = 6\nprop = 0.4\nseed = 9\nthreads = 2\nn_obs = 100\nn_replicates = 5\n"
        "record_timings = true\n");
    const StudyConfig cfg = parse_study_config(in);
    CHECK(cfg.scenarios == std::vector<ScenarioKind>{ScenarioKind::Strong, ScenarioKind::Uncorrelated});
    CHECK(cfg.patterns == std::vector<PatternKind>{PatternKind::OneCell});
    CHECK(cfg.strategies == std::vector<std::string>{"variables"});
    CHECK(cfg.trees == 50);
    CHECK(cfg.max_iterations == 7);
    CHECK(cfg.prop == 0.4);
    CHECK(cfg.seed == 9);
    CHECK(cfg.record_timings);

    const auto cells = expand(cfg);
    REQUIRE(cells.size() == 2);
    CHECK(cells[0].scenario == ScenarioKind::Strong);
    CHECK(cells[1].scenario == ScenarioKind::Uncorrelated);
    CHECK(cells[0].strategies == std::vector<ImputationStrategy>{ParallelVariables{4}});
    CHECK(cells[0].imputer.forest.n_trees == 50);
    CHECK(cells[0].imputer.forest.mtry == 2);
    CHECK(cells[0].imputer.forest.min_node_size == 3);
    CHECK(cells[0].imputer.forest.max_depth == std::optional<std::size_t>(6));
    CHECK(cells[0].n_obs == 100);
    CHECK(cells[0].n_replicates == 5);
    CHECK(cells[0].master_seed == 9);

    std::istringstream defaults("");
    CHECK(expand(parse_study_config(defaults)).size() == 6);

    for (const char* bad : {"trees = many\n", "colour = red\n", "scenarios = medium\n", "no equals sign\n",
                            "strategies = turbo\n", "record_timings = maybe\n", "trees =\n"}) {
        std::istringstream b(bad);
        CHECK_THROWS_AS(parse_study_config(b), ParseError);
    }
}

TEST_CASE("lower_quantile") {
    CHECK(lower_quantile({3.0, 1.0, 2.0}, 0.5) == 2.0);
    CHECK(lower_quantile({4.0, 1.0, 3.0, 2.0}, 0.5) == 2.0);
    CHECK(lower_quantile({5.0}, 0.25) == 5.0);
    CHECK(std::isnan(lower_quantile({}, 0.5)));
}

TEST_CASE("summarize") {
    std::vector<MetricsRecord> recs{record("sequential", 3, 0.5)};
    SummaryTable one = summarize(recs);
    REQUIRE(one.rows.size() == 1);
    CHECK(one.rows[0].metrics[metric_index("nrmse_true")].median == 0.5);
    CHECK(one.rows[0].n_rows == 1);

    recs = {record("sequential", 1, 1.0), record("sequential", 2, 3.0), record("sequential", 10, 2.0),
            record("variables", 10, 7.0)};
    MetricsRecord failed = record("variables", 0, 0.0);
    failed.ok = false;
    failed.error = "boom";
    recs.push_back(failed);
    const SummaryTable t = summarize(recs);
    REQUIRE(t.rows.size() == 2);
    CHECK(t.max_iteration == 10);
    const SummaryRow* seq = t.find("weak", "two_cells", "sequential");
    REQUIRE(seq != nullptr);
    CHECK(seq->metrics[metric_index("nrmse_true")].median == 2.0);
    CHECK(seq->metrics[metric_index("iterations")].median == 2.0);
    CHECK(seq->frac_stopped_at_max == doctest::Approx(1.0 / 3.0));
    CHECK(seq->iteration_histogram[0] == 1);
    CHECK(seq->iteration_histogram[1] == 1);
    CHECK(seq->iteration_histogram[9] == 1);
    const SummaryRow* var = t.find("weak", "two_cells", "variables");
    REQUIRE(var != nullptr);
    CHECK(var->n_rows == 2);
    CHECK(var->n_failed == 1);
    CHECK(var->frac_stopped_at_max == 1.0);
    CHECK(seq->n_rows + var->n_rows == recs.size());

    std::ostringstream csv;
    write_summary_csv(csv, t);
    const std::string text = csv.str();
    CHECK(text.rfind("scenario,pattern,strategy,n_rows,n_failed,frac_stopped_at_max,iterations_median,", 0) == 0);
    CHECK(text.find(",iter_10\n") != std::string::npos);
    CHECK(count_lines(text) == 3);
}

TEST_CASE("summary_path_for") {
    CHECK(summary_path_for("results.csv") == "results.summary.csv");
    CHECK(summary_path_for("out/run.v2/results") == "out/run.v2/results.summary.csv");
    CHECK(summary_path_for("a.b/c.csv") == "a.b/c.summary.csv");
}

TEST_CASE("cli simulate: cardinality, determinism and summarize round trip") {
    TempDir dir;
    write_file(dir.file("study.cfg"), kMinimalConfig);
    const CliRun first = cli({"simulate", "--config", dir.file("study.cfg"), "--out", dir.file("a.csv")});
    REQUIRE(first.code == 0);
    const std::string results = read_file(dir.file("a.csv"));
    CHECK(count_lines(results) == 1 + 6);
    const std::string summary = read_file(dir.file("a.summary.csv"));
    CHECK(count_lines(summary) == 1 + 3);

    const CliRun second = cli({"simulate", "--config", dir.file("study.cfg"), "--out", dir.file("b.csv"),
                               "--summary", dir.file("b_sum.csv")});
    REQUIRE(second.code == 0);
    CHECK(read_file(dir.file("b.csv")) == results);
    CHECK(read_file(dir.file("b_sum.csv")) == summary);

    const CliRun sum = cli({"summarize", "--in", dir.file("a.csv"), "--out", dir.file("s.csv")});
    CHECK(sum.code == 0);
    CHECK(read_file(dir.file("s.csv")) == summary);

    const CliRun more = cli({"simulate", "--config", dir.file("study.cfg"), "--out", dir.file("c.csv"),
                             "--replicates", "3", "--strategy", "forests"});
    CHECK(more.code == 0);
    CHECK(count_lines(read_file(dir.file("c.csv"))) == 1 + 3);
}

TEST_CASE("cli impute") {
    TempDir dir;
    SUBCASE("no missing values") {
        write_file(dir.file("in.csv"), "a,b,c\n1,2,3\n4,5,6.5\n-1,0.25,8\n");
        const CliRun r = cli({"impute", "--in", dir.file("in.csv"), "--out", dir.file("out.csv")});
        CHECK(r.code == 0);
        CHECK(r.out.find("iterations: 0") != std::string::npos);
        CHECK(read_file(dir.file("out.csv")) == read_file(dir.file("in.csv")));
    }
    SUBCASE("one missing value") {
        std::string text = "a,b,c\n";
        Rng rng{SeedSpec(4)};
        for (int r = 0; r < 30; ++r) {
            const double z = rng.normal();
            const std::string b = r == 7 ? "NA" : format_real(z + 0.1 * rng.normal());
            text += format_real(z) + "," + b + "," + format_real(rng.normal()) + "\n";
        }
        write_file(dir.file("in.csv"), text);
        const CliRun r = cli({"impute", "--in", dir.file("in.csv"), "--out", dir.file("out.csv"), "--trees", "20"});
        REQUIRE(r.code == 0);
        CHECK(r.out.find("stopped_by: ") != std::string::npos);
        CHECK(r.out.find("oob_nrmse: ") != std::string::npos);
        std::istringstream before(text), after(read_file(dir.file("out.csv")));
        std::string lb, la;
        int line = 0;
        while (std::getline(before, lb) && std::getline(after, la)) {
            if (line++ == 8) {
                CHECK(la.find("NA") == std::string::npos);
                CHECK(la.substr(0, la.find(',')) == lb.substr(0, lb.find(',')));
            } else {
                CHECK(la == lb);
            }
        }
        CHECK(line == 31);
    }
    SUBCASE("duplicated column") {
        std::string text = "Y,X1,X2\n";
        std::vector<double> x1;
        Rng rng{SeedSpec(5)};
        for (int r = 0; r < 80; ++r) {
            const double x = 3.0 * rng.normal();
            x1.push_back(x);
            text += format_real(rng.normal()) + "," + format_real(x) + "," + (r == 11 ? "NA" : format_real(x)) + "\n";
        }
        write_file(dir.file("in.csv"), text);
        REQUIRE(cli({"impute", "--in", dir.file("in.csv"), "--out", dir.file("out.csv")}).code == 0);
        const CsvTable t = read_csv_file(dir.file("out.csv"));
        double lo = 1e300, hi = -1e300;
        for (int r = 0; r < 80; ++r)
            if (r != 11) {
                lo = std::min(lo, x1[r]);
                hi = std::max(hi, x1[r]);
            }
        std::vector<double> observed;
        for (int r = 0; r < 80; ++r)
            if (r != 11) observed.push_back(x1[r]);
        const double v = t.data(11, 2);
        CHECK(v >= lo);
        CHECK(v <= hi);
        CHECK(std::abs(v - x1[11]) <= sample_sd(observed));
    }
    SUBCASE("errors") {
        write_file(dir.file("bad.csv"), "a,b\n1,2\n3,oops\n");
        const CliRun parse = cli({"impute", "--in", dir.file("bad.csv"), "--out", dir.file("o.csv")});
        CHECK(parse.code == 2);
        CHECK(parse.err.find("row 2") != std::string::npos);

        write_file(dir.file("allna.csv"), "a,b\n1,NA\n3,NA\n");
        CHECK(cli({"impute", "--in", dir.file("allna.csv"), "--out", dir.file("o.csv")}).code == 4);

        CHECK(cli({"impute", "--in", dir.file("missing.csv"), "--out", dir.file("o.csv")}).code == 3);
        write_file(dir.file("ok.csv"), "a,b\n1,NA\n3,4\n5,6\n");
        CHECK(cli({"impute", "--in", dir.file("ok.csv"), "--out", dir.file("nodir/o.csv")}).code == 3);
        CHECK(cli({"impute", "--in", dir.file("ok.csv"), "--out", dir.file("o.csv"), "--strategy", "warp"}).code == 2);
        CHECK(cli({"bogus"}).code == 2);
    }
}

TEST_CASE("cli ampute") {
    TempDir dir;
    std::string text = "Y,X1,X2\n";
    Rng rng{SeedSpec(6)};
    for (int r = 0; r < 200; ++r)
        text += format_real(rng.normal()) + "," + format_real(rng.normal()) + "," + format_real(rng.normal()) + "\n";
    write_file(dir.file("in.csv"), text);

    const CliRun r = cli({"ampute", "--in", dir.file("in.csv"), "--out", dir.file("out.csv"), "--patterns", "X1;X2",
                          "--freq", "0.5,0.5", "--seed", "3"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("realized_prop: ") != std::string::npos);
    const CsvTable t = read_csv_file(dir.file("out.csv"));
    CHECK(t.mask.missing_in_column(0) == 0);
    CHECK(t.mask.missing_in_column(1) > 0);
    CHECK(t.mask.missing_in_column(2) > 0);
    for (std::size_t row = 0; row < 200; ++row) CHECK_FALSE((t.mask(row, 1) && t.mask(row, 2)));

    // Default pattern masks every other column together.
    REQUIRE(cli({"ampute", "--in", dir.file("in.csv"), "--out", dir.file("both.csv")}).code == 0);
    const CsvTable both = read_csv_file(dir.file("both.csv"));
    for (std::size_t row = 0; row < 200; ++row) CHECK(both.mask(row, 1) == both.mask(row, 2));

    write_file(dir.file("flat.csv"), "Y,X\n1,2\n1,3\n1,4\n");
    CHECK(cli({"ampute", "--in", dir.file("flat.csv"), "--out", dir.file("o.csv")}).code == 4);
    CHECK(cli({"ampute", "--in", dir.file("in.csv"), "--out", dir.file("o.csv"), "--patterns", "Z"}).code == 2);
}

TEST_CASE("cli summarize and simulate errors") {
    TempDir dir;
    write_file(dir.file("wrong.csv"), "a,b\n1,2\n");
    CHECK(cli({"summarize", "--in", dir.file("wrong.csv"), "--out", dir.file("o.csv")}).code == 2);
    CHECK(cli({"summarize", "--in", dir.file("none.csv"), "--out", dir.file("o.csv")}).code == 3);
    write_file(dir.file("bad.cfg"), "trees = lots\n");
    CHECK(cli({"simulate", "--config", dir.file("bad.cfg"), "--out", dir.file("o.csv")}).code == 2);
    CHECK(cli({"simulate", "--config", dir.file("nope.cfg"), "--out", dir.file("o.csv")}).code == 3);

    // Failures in more than 1% of replicates: nothing gets masked at this proportion.
    write_file(dir.file("empty.cfg"), std::string(kMinimalConfig) + "n_obs = 10\nprop = 0.0001\n");
    CHECK(cli({"simulate", "--config", dir.file("empty.cfg"), "--out", dir.file("o.csv")}).code == 4);
}

TEST_CASE("the installed binary honours environment overrides") {
    TempDir dir;
    write_file(dir.file("study.cfg"), kMinimalConfig);
    const std::string bin = FORESTFILL_CLI_PATH;
    const std::string base = " simulate --config " + dir.file("study.cfg") + " --out ";
    REQUIRE(std::system((bin + base + dir.file("plain.csv") + " > /dev/null 2>&1").c_str()) == 0);
    REQUIRE(std::system(("FORESTFILL_SEED=12345 " + bin + base + dir.file("env.csv") + " > /dev/null 2>&1").c_str()) == 0);
    REQUIRE(std::system((bin + base + dir.file("flag.csv") + " --seed 12345 > /dev/null 2>&1").c_str()) == 0);
    CHECK(read_file(dir.file("env.csv")) != read_file(dir.file("plain.csv")));
    CHECK(read_file(dir.file("env.csv")) == read_file(dir.file("flag.csv")));

    const int status = std::system((bin + " impute --in " + dir.file("absent.csv") + " --out " +
                                    dir.file("o.csv") + " > /dev/null 2>&1").c_str());
    CHECK(WEXITSTATUS(status) == 3);
}
