#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cutpipe/run.hpp"

using namespace cutpipe;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

RunConfig quick_config(const fs::path& out) {
    RunConfig cfg;
    cfg.analytic = true;
    cfg.maxiter = 1;
    cfg.seed = 7;
    cfg.robustness = false;
    cfg.out_dir = out;
    return cfg;
}

struct CliResult {
    int code = -1;
    std::string output;
};

CliResult cli(const std::string& args, const fs::path& dir) {
    const auto capture = dir / "cli_output.txt";
    const std::string cmd = std::string("\"") + CUTPIPE_CLI + "\" " + args + " > \"" + capture.string() + "\" 2>&1";
    const int status = std::system(cmd.c_str());
    CliResult r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(capture);
    std::ostringstream ss;
    ss << in.rdbuf();
    r.output = ss.str();
    return r;
}

}  // namespace

TEST_CASE("run id is a stable hash of the canonical config") {
    RunConfig a;
    const auto id = make_run_id(a);
    CHECK(id.size() == 12);
    CHECK(id.find_first_not_of("0123456789abcdef") == std::string::npos);
    CHECK(make_run_id(a) == id);
    RunConfig b = a;
    b.out_dir = "/elsewhere";
    CHECK(make_run_id(b) == id);
    b.seed = 1;
    CHECK(make_run_id(b) != id);
    RunConfig c = a;
    c.straggler_p = 0.2;
    CHECK(make_run_id(c) != id);
    CHECK(canonical_config(a).find("out_dir") == std::string::npos);
    CHECK(canonical_config(a).find("workers=1\n") != std::string::npos);
}

TEST_CASE("validation names the offending flag") {
    auto message = [](RunConfig cfg) {
        try {
            cfg.validate();
        } catch (const ConfigError& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    RunConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.workers = 0;
    CHECK(message(cfg).find("--workers") != std::string::npos);
    cfg = RunConfig{};
    cfg.cuts = "cut2@1";
    CHECK(message(cfg).find("--cuts") != std::string::npos);
    cfg = RunConfig{};
    cfg.policy = "lazy";
    CHECK(message(cfg).find("--policy") != std::string::npos);
    cfg = RunConfig{};
    cfg.straggler_p = 1.5;
    CHECK(message(cfg).find("--straggler-p") != std::string::npos);
    cfg = RunConfig{};
    cfg.lr = 0.0;
    CHECK(message(cfg).find("--lr") != std::string::npos);
}

TEST_CASE("grid parsing and expansion") {
    const auto grid = parse_grid("# sweep\nworkers = 1 16\nseeds = 1 2\ncuts = cut0 cut1@1\n");
    CHECK(grid.workers == std::vector<int>{1, 16});
    CHECK(grid.seeds == std::vector<std::uint64_t>{1, 2});
    CHECK(grid.straggler_p.empty());
    RunConfig base;
    base.straggler_p = 0.1;
    const auto configs = expand_grid(base, grid);
    REQUIRE(configs.size() == 8);
    CHECK(configs[0].cuts == "cut0");
    CHECK(configs[7].cuts == "cut1@1");
    for (const auto& c : configs) CHECK(c.straggler_p == 0.1);

    CHECK_THROWS_AS(parse_grid(""), ConfigError);
    CHECK_THROWS_AS(parse_grid("# only comments\n"), ConfigError);
    CHECK_THROWS_AS(parse_grid("colour = red\n"), ConfigError);
    CHECK_THROWS_AS(parse_grid("workers = 1\nworkers = 2\n"), ConfigError);
    CHECK_THROWS_AS(parse_grid("workers =\n"), ConfigError);
    CHECK_THROWS_AS(parse_grid("workers = many\n"), ConfigError);
}

TEST_CASE("training run writes log and summary reproducibly") {
    const auto dir = fresh_dir("cutpipe_run_test");
    const auto cfg = quick_config(dir / "a");
    const auto first = run_training(cfg);
    CHECK(first.summary.status == "ok");
    CHECK(first.summary.run_id == make_run_id(cfg));
    CHECK(fs::exists(first.log_path));
    CHECK(fs::exists(first.summary_path));
    CHECK(first.summary.n_queries > 0);
    CHECK(first.summary.loss_trace.size() == 1);

    auto again_cfg = cfg;
    again_cfg.out_dir = dir / "b";
    const auto second = run_training(again_cfg);
    CHECK(to_json_without_timing(read_run_summary(first.summary_path)) ==
          to_json_without_timing(read_run_summary(second.summary_path)));

    auto bad = cfg;
    bad.cuts = "cut1@7";
    CHECK_THROWS_AS(run_training(bad), ConfigError);
    bad = cfg;
    bad.dataset = "/no/such/file.csv";
    CHECK_THROWS_AS(run_training(bad), ConfigError);
    fs::remove_all(dir);
}

TEST_CASE("sweeps resume by skipping finished runs") {
    const auto dir = fresh_dir("cutpipe_sweep_test");
    const auto base = quick_config(dir);
    const auto grid = parse_grid("seeds = 1 2\n");
    std::ostringstream log;
    const auto first = run_sweep(base, grid, &log);
    CHECK(first.executed == 2);
    CHECK(first.skipped == 0);
    CHECK(first.failed == 0);
    const auto second = run_sweep(base, grid, &log);
    CHECK(second.executed == 0);
    CHECK(second.skipped == 2);
    CHECK(second.run_ids == first.run_ids);
    CHECK(log.str().find("skip") != std::string::npos);

    AnalyzeOptions opts;
    opts.inputs = {dir};
    opts.out_dir = dir / "reports";
    const auto an = run_analysis(opts);
    CHECK(an.summaries == 2);
    CHECK(an.records > 0);
    for (const char* f : {"rec_share.csv", "speedup.csv", "straggler.csv", "stage_share.csv", "unmatched.csv"}) {
        CHECK(fs::exists(opts.out_dir / f));
    }
    fs::remove_all(dir);
}

TEST_CASE("command line exit codes") {
    const auto dir = fresh_dir("cutpipe_cli_test");
    const std::string out = " --out \"" + (dir / "runs").string() + "\"";

    auto ok = cli("train --analytic --maxiter 1 --no-robustness --seed 7" + out, dir);
    CHECK(ok.code == 0);
    CHECK(ok.output.find(make_run_id(quick_config(dir))) != std::string::npos);

    auto bad = cli("train --workers 0" + out, dir);
    CHECK(bad.code == 2);
    CHECK(bad.output.find("--workers") != std::string::npos);

    CHECK(cli("train --no-such-flag", dir).code == 2);
    CHECK(cli("", dir).code == 2);

    {
        std::ofstream(dir / "empty.grid") << "# nothing here\n";
    }
    CHECK(cli("sweep --analytic --grid \"" + (dir / "empty.grid").string() + "\"" + out, dir).code == 2);

    {
        std::ofstream ini(dir / "run.ini");
        ini << "workers = 2\nstraggler-p = 0.1\nanalytic = true\nmaxiter = 1\nno-robustness = true\nseed = 7\n";
    }
    auto from_file = cli("train --config \"" + (dir / "run.ini").string() + "\" --workers 3" + out, dir);
    REQUIRE(from_file.code == 0);
    auto expected = quick_config(dir);
    expected.workers = 3;
    expected.straggler_p = 0.1;
    CHECK(from_file.output.find(make_run_id(expected)) != std::string::npos);
    {
        std::ofstream(dir / "bad.ini") << "colour = red\n";
    }
    CHECK(cli("train --config \"" + (dir / "bad.ini").string() + "\"" + out, dir).code == 2);

    auto an = cli("analyze \"" + (dir / "runs").string() + "\" --out \"" + (dir / "reports").string() + "\"", dir);
    CHECK(an.code == 0);
    CHECK(fs::exists(dir / "reports" / "speedup.csv"));

    auto st = cli("selftest --quick", dir);
    CHECK(st.code == 0);
    CHECK(st.output.find("FAIL") == std::string::npos);
    auto mutated = cli("selftest --quick --mutate-alpha", dir);
    CHECK(mutated.code != 0);
    CHECK(mutated.output.find("FAIL oracle-equality") != std::string::npos);
    fs::remove_all(dir);
}
