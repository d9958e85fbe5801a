#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cutpipe/analysis.hpp"
#include "cutpipe/dataset.hpp"
#include "cutpipe/estimator.hpp"
#include "cutpipe/run.hpp"
#include "cutpipe/selftest.hpp"
#include "cutpipe/training.hpp"

using namespace cutpipe;
namespace fs = std::filesystem;

namespace {

int failures = 0;
std::map<int, std::string> lines;

void report(int id, const std::string& name, bool passed, const std::string& detail) {
    lines[id] = std::string(passed ? "PASS" : "FAIL") + " [" + std::to_string(id) + "] " + name + ": " + detail;
    std::fprintf(stderr, "finished criterion %d\n", id);
    if (!passed) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* format, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, format, a, b, c);
    return buf;
}

double median(std::vector<double> v) {
    return nearest_rank(std::move(v), 50);
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("cutpipe_acceptance_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

fs::path toy_csv(const fs::path& dir) {
    const auto path = dir / "toy.csv";
    std::ofstream out(path);
    out << "a,b,label\n";
    std::mt19937_64 rng(11);
    std::normal_distribution<double> noise(0.0, 0.3);
    for (int i = 0; i < 10; ++i) {
        const int y = i % 2;
        out << (y ? 1.0 : -1.0) + noise(rng) << ',' << 0.5 * y + noise(rng) << ',' << y << '\n';
    }
    return path;
}

void oracle_equality() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = check_oracle_equality(240, 2024);
    const double wall = seconds_since(t0);
    report(1, "oracle equality", r.passed && wall <= 120.0, r.detail + fmt(", %.1f s", wall));
}

void count_laws() {
    const auto r = check_count_laws(3);
    report(2, "count and coefficient laws", r.passed, r.detail);
}

void gradient() {
    const auto r = check_gradient(50, 2024);
    report(3, "parameter-shift gradient", r.passed, r.detail);
}

RunConfig iris_config(const fs::path& out, const std::string& cuts, std::uint64_t seed) {
    RunConfig cfg;
    cfg.cuts = cuts;
    cfg.analytic = true;
    cfg.maxiter = 60;
    cfg.seed = seed;
    cfg.out_dir = out;
    return cfg;
}

void cut_equivalence() {
    const auto dir = scratch("equivalence");
    const auto t0 = std::chrono::steady_clock::now();
    double max_loss_diff = 0.0;
    double max_summary_diff = 0.0;
    bool accuracy_equal = true;
    bool ok = true;
    std::string accs;
    for (std::uint64_t seed : {1, 2, 3}) {
        const auto uncut = run_training(iris_config(dir, "cut0", seed)).summary;
        const auto cut = run_training(iris_config(dir, "cut1@1", seed)).summary;
        ok = ok && uncut.status == "ok" && cut.status == "ok" && uncut.loss_trace.size() == 60 &&
             cut.loss_trace.size() == uncut.loss_trace.size();
        for (std::size_t i = 0; i < std::min(uncut.loss_trace.size(), cut.loss_trace.size()); ++i) {
            max_loss_diff = std::max(max_loss_diff, std::abs(uncut.loss_trace[i] - cut.loss_trace[i]));
        }
        accuracy_equal = accuracy_equal && uncut.test_accuracy == cut.test_accuracy;
        max_summary_diff = std::max(max_summary_diff, std::abs(uncut.robustness_summary - cut.robustness_summary));
        accs += fmt(" %.3f", uncut.test_accuracy);
    }
    const double wall = seconds_since(t0);
    report(4, "cut vs uncut training equality", ok && max_loss_diff <= 1e-7 && accuracy_equal && wall <= 600.0,
           fmt("max loss diff %.2e, %.1f s, accuracies", max_loss_diff, wall) + accs);

    const std::vector<AttackTrace> fixture{{"gaussian", {0.0, 0.1, 0.2}, {1.0, 0.75, 0.5}},
                                           {"fgsm", {0.0, 0.05, 0.1, 0.2}, {1.0, 0.5, 0.25, 0.0}}};
    const double expected = ((0.75 + 0.5) / 2.0 + (0.5 + 0.25 + 0.0) / 3.0) / 2.0;
    const double got = robustness_summary(fixture);
    report(9, "robustness summary rule", ok && got == expected && max_summary_diff <= 1e-9,
           fmt("fixture %.17g vs %.17g, cut/uncut diff %.2e", got, expected, max_summary_diff));
    fs::remove_all(dir);
}

void cut_scaling() {
    const auto dir = scratch("scaling");
    RunConfig base;
    base.shots = 1024;
    base.workers = 8;
    base.maxiter = 5;
    base.robustness = false;
    base.out_dir = dir;
    const auto grid = parse_grid("cuts = cut0 cut1@1 cut2@1,2\nseeds = 1 2 3\n");
    const auto sweep = run_sweep(base, grid);

    const std::vector<fs::path> inputs{dir};
    const auto logs = load_logs(inputs);
    std::map<int, std::vector<double>> times;
    for (const auto& s : logs.summaries) {
        if (s.status == "ok") times[s.cut_label == "cut0" ? 0 : s.cut_label[3] - '0'].push_back(s.train_time_s);
    }
    bool ok = sweep.failed == 0 && times.size() == 3;
    std::string detail = "median train_time_s";
    double prev = -1.0;
    for (const auto& [c, v] : times) {
        const double m = median(v);
        detail += fmt(" c%.0f=%.2f", c, m);
        ok = ok && v.size() == 3 && m > prev;
        prev = m;
    }
    report(5, "training time grows with cuts", ok, detail);

    const auto rows = rec_share_table(logs.records);
    bool share_ok = rows.size() == 2 && logs.rejections.empty();
    std::string share_detail = "median T_rec/T_total";
    prev = -1.0;
    for (const auto& r : rows) {
        share_detail += fmt(" c%.0f=%.3f (n=%.0f)", r.n_cuts, r.median_frac, static_cast<double>(r.n));
        share_ok = share_ok && r.median_frac > prev;
        prev = r.median_frac;
    }
    report(6, "reconstruction share grows with cuts", share_ok, share_detail);
    fs::remove_all(dir);
}

void straggler_arithmetic() {
    ParamCircuit bell;
    bell.n_qubits = 2;
    bell.gates = {Gate::fixed(GateKind::H, 0), Gate::cx(0, 1)};
    const double p = 0.2, delta = 0.1;
    NullSink sink;
    WorkerPool pool(1);
    double injected = 0.0;
    std::size_t n_tasks = 0;
    EstimateHooks hooks;
    hooks.on_execution = [&](std::span<const TaskResult> results, const ExecSummary& s) {
        injected += s.total_injected_s;
        n_tasks = results.size();
    };
    const int trials = 100;
    for (int t = 0; t < trials; ++t) {
        EstimatorQuery q;
        q.circuit = bell;
        q.observable = PauliObservable::single("ZZ");
        q.cut_label = "cut1@0";
        q.straggler = StragglerConfig{p, delta, mix_seed(2024, static_cast<std::uint64_t>(t))};
        estimate(q, sink, pool, hooks);
    }
    const double mean = injected / trials;
    const double target = p * static_cast<double>(n_tasks) * delta;
    const bool arithmetic_ok = n_tasks > 0 && std::abs(mean - target) <= 0.2 * target;

    const auto dir = scratch("straggler");
    RunConfig base;
    base.dataset = toy_csv(dir).string();
    base.workers = 8;
    base.maxiter = 1;
    base.seed = 1;
    base.straggler_delay = delta;
    base.robustness = false;
    base.out_dir = dir / "runs";
    const auto sweep = run_sweep(base, parse_grid("straggler_p = 0 0.2\n"));
    std::vector<RunSummary> summaries;
    for (const auto& id : sweep.run_ids) summaries.push_back(read_run_summary(base.out_dir / (id + ".summary.json")));
    const auto rep = straggler_report(summaries, p);
    const bool ratio_ok = sweep.failed == 0 && rep.rows.size() == 1 && rep.rows[0].slowdown > 1.0;
    report(7, "straggler injection arithmetic",
           arithmetic_ok && ratio_ok,
           fmt("mean injected %.4f s vs p*N*delta %.4f s", mean, target) +
               fmt(", w=8 slowdown %.3f", rep.rows.empty() ? 0.0 : rep.rows[0].slowdown));
    fs::remove_all(dir);
}

void makespan_sandwich() {
    const auto dir = scratch("sandwich");
    const auto dataset = load_dataset(toy_csv(dir).string(), 1);
    struct Case {
        std::string cuts;
        std::size_t workers;
        DispatchPolicy policy;
        StragglerConfig straggler;
    };
    const std::vector<Case> cases{
        {"cut0", 1, {}, {}},
        {"cut1@0", 2, {}, {0.2, 0.005, 3}},
        {"cut1@0", 8, {}, {0.3, 0.01, 4}},
        {"cut1@0", 4, {DispatchMode::Staggered, 3, 0.001, TaskOrdering::GroupByLabel}, {0.2, 0.005, 5}},
    };
    std::size_t queries = 0, violations = 0;
    double worst = -1e300;
    for (const auto& c : cases) {
        MemorySink sink;
        std::size_t observed = 0;
        EstimatorConfig cfg;
        cfg.cut_label = c.cuts;
        cfg.shots = 128;
        cfg.workers = c.workers;
        cfg.policy = c.policy;
        cfg.straggler = c.straggler;
        Estimator est(cfg, sink);
        est.hooks().on_execution = [&](std::span<const TaskResult>, const ExecSummary& s) {
            ++observed;
            worst = std::max({worst, s.max_task_s - s.makespan_s, s.work_bound_s - s.makespan_s - 0.05});
            if (s.max_task_s > s.makespan_s || s.work_bound_s > s.makespan_s + 0.05) ++violations;
        };
        TrainConfig tc;
        tc.maxiter = 1;
        tc.seed = 1;
        const auto res = train(dataset, tc, est);
        if (res.failed || sink.records().size() != observed) ++violations;
        queries += observed;
    }
    report(8, "makespan sandwich", queries > 0 && violations == 0,
           fmt("%.0f queries, %.0f violations, worst margin %.2e s", static_cast<double>(queries),
               static_cast<double>(violations), worst));
    fs::remove_all(dir);
}

void schema() {
    const auto r = check_schema_round_trip(10000, 2024);
    report(10, "record schema round trip", r.passed, r.detail);
}

}  // namespace

int main() {
    oracle_equality();
    count_laws();
    gradient();
    cut_equivalence();
    cut_scaling();
    straggler_arithmetic();
    makespan_sandwich();
    schema();
    for (const auto& [id, line] : lines) std::printf("%s\n", line.c_str());
    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
