#include <algorithm>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cutpipe/run.hpp"
#include "cutpipe/selftest.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kRuntimeError = 1;
constexpr int kConfigError = 2;

void add_run_options(CLI::App& cmd, cutpipe::RunConfig& cfg, bool& no_robustness, std::string& out,
                     std::string& config) {
    cmd.add_option("--dataset", cfg.dataset, "builtin dataset name (iris) or CSV path");
    cmd.add_option("--cuts", cfg.cuts, "cut label: cut0 or cutN@q1,...,qN");
    cmd.add_option("--workers", cfg.workers, "worker threads");
    cmd.add_option("--shots", cfg.shots, "shots per subexperiment");
    cmd.add_flag("--analytic", cfg.analytic, "exact expectations instead of sampling");
    cmd.add_option("--maxiter", cfg.maxiter, "gradient-descent iterations");
    cmd.add_option("--lr", cfg.lr, "learning rate");
    cmd.add_option("--policy", cfg.policy, "eager or staggered");
    cmd.add_option("--batch-size", cfg.batch_size, "tasks per dispatch batch");
    cmd.add_option("--inter-batch-delay", cfg.inter_batch_delay, "seconds between batches (staggered)");
    cmd.add_option("--ordering", cfg.ordering, "fifo or group_by_label");
    cmd.add_option("--straggler-p", cfg.straggler_p, "per-task delay probability");
    cmd.add_option("--straggler-delay", cfg.straggler_delay, "injected delay in seconds");
    cmd.add_option("--seed", cfg.seed, "run seed");
    cmd.add_option("--feature-reps", cfg.feature_reps, "feature map repetitions");
    cmd.add_option("--ansatz-reps", cfg.ansatz_reps, "ansatz repetitions");
    cmd.add_flag("--no-robustness", no_robustness, "skip the robustness evaluation");
    cmd.add_option("--magnitudes", cfg.magnitudes, "perturbation magnitudes")->delimiter(',');
    cmd.add_option("--attacks", cfg.attacks, "gaussian, fgsm")->delimiter(',');
    cmd.add_option("--trials", cfg.trials, "gaussian trials per magnitude");
    cmd.add_option("--out", out, "output directory (default $CUTPIPE_OUT or ./runs)");
    cmd.add_option("--config", config, "INI file of key = value lines; flags override it");
}

// Values from the file fill only options not given on the command line.
void apply_config_file(CLI::App& cmd, const std::string& path) {
    if (path.empty()) return;
    std::ifstream in(path);
    if (!in) throw cutpipe::ConfigError("--config: cannot open " + path);
    std::vector<CLI::ConfigItem> items;
    try {
        items = CLI::ConfigINI().from_config(in);
    } catch (const CLI::ParseError& e) {
        throw cutpipe::ConfigError(std::string("--config: ") + e.what());
    }
    for (const auto& item : items) {
        if (item.name == "++" || item.name == "--") continue;
        std::string name = item.name;
        std::replace(name.begin(), name.end(), '_', '-');
        CLI::Option* opt = cmd.get_option_no_throw("--" + name);
        if (opt == nullptr || name == "config") {
            throw cutpipe::ConfigError("--config: unknown key '" + item.name + "' in " + path);
        }
        if (opt->count() > 0) continue;
        try {
            opt->add_result(item.inputs);
            opt->run_callback();
        } catch (const CLI::ParseError& e) {
            throw cutpipe::ConfigError("--config: key '" + item.name + "': " + e.what());
        }
    }
}

cutpipe::RunConfig finish(cutpipe::RunConfig cfg, bool no_robustness, const std::string& out) {
    cfg.robustness = !no_robustness;
    cfg.out_dir = out.empty() ? cutpipe::default_output_dir() : std::filesystem::path(out);
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Wire-cut variational classifier training and benchmarking"};
    app.require_subcommand(1);

    cutpipe::RunConfig train_cfg;
    bool train_no_rob = false;
    std::string train_out, train_ini;
    auto* train = app.add_subcommand("train", "train one model and write its query log and summary");
    add_run_options(*train, train_cfg, train_no_rob, train_out, train_ini);

    cutpipe::RunConfig sweep_cfg;
    bool sweep_no_rob = false;
    std::string sweep_out, sweep_ini;
    std::string grid_path;
    auto* sweep = app.add_subcommand("sweep", "run the Cartesian product of a grid file");
    add_run_options(*sweep, sweep_cfg, sweep_no_rob, sweep_out, sweep_ini);
    sweep->add_option("--grid", grid_path, "grid file (workers, cuts, seeds, straggler_p)")->required();

    cutpipe::AnalyzeOptions an;
    std::string an_out = ".";
    bool all_records = false;
    std::string phase;
    auto* analyze = app.add_subcommand("analyze", "derive CSV reports from logs and summaries");
    analyze->add_option("inputs", an.inputs, "log files, summary files or directories")->required();
    analyze->add_option("--out", an_out, "directory for the CSV reports");
    analyze->add_flag("--include-straggled", all_records, "keep records with injected delays in rec_share");
    analyze->add_option("--phase", phase, "only records of this phase in rec_share");
    analyze->add_option("--w-lo", an.w_lo, "baseline worker count for speedup");
    analyze->add_option("--w-hi", an.w_hi, "scaled worker count for speedup");
    analyze->add_option("--p-hi", an.p_hi, "straggler probability compared against p = 0");

    bool quick = false;
    bool mutate = false;
    auto* selftest = app.add_subcommand("selftest", "run the oracle, count-law, gradient and schema checks");
    selftest->add_flag("--quick", quick, "smaller instance counts");
    selftest->add_flag("--mutate-alpha", mutate, "corrupt one cut coefficient (the suite must fail)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfigError;
    }

    try {
        if (*train) {
            apply_config_file(*train, train_ini);
            const auto outcome = cutpipe::run_training(finish(train_cfg, train_no_rob, train_out));
            std::cout << outcome.summary.run_id << '\n';
            if (outcome.summary.status != "ok") {
                std::cerr << "run failed: " << outcome.summary.error << '\n';
                return kRuntimeError;
            }
            return kOk;
        }
        if (*sweep) {
            apply_config_file(*sweep, sweep_ini);
            const auto grid = cutpipe::read_grid(grid_path);
            const auto res = cutpipe::run_sweep(finish(sweep_cfg, sweep_no_rob, sweep_out), grid, &std::cout);
            std::cout << res.executed << " executed, " << res.skipped << " skipped, " << res.failed << " failed\n";
            return res.failed ? kRuntimeError : kOk;
        }
        if (*analyze) {
            an.out_dir = an_out;
            an.clean_only = !all_records;
            if (!phase.empty()) an.phase = phase;
            const auto res = cutpipe::run_analysis(an);
            for (const auto& w : res.warnings) std::cerr << "warning: " << w << '\n';
            std::cout << res.records << " records, " << res.summaries << " summaries, " << res.rejections
                      << " rejected lines\n";
            return kOk;
        }
        if (*selftest) {
            cutpipe::SelftestOptions opts;
            opts.quick = quick;
            cutpipe::CutTermTable corrupted = cutpipe::canonical_cut_terms();
            if (mutate) {
                corrupted[3].coefficient = -corrupted[3].coefficient;
                opts.table = &corrupted;
            }
            bool ok = true;
            for (const auto& r : cutpipe::run_selftest(opts)) {
                std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << '\n';
                ok = ok && r.passed;
            }
            return ok ? kOk : kRuntimeError;
        }
    } catch (const cutpipe::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kRuntimeError;
    }
    return kOk;
}
