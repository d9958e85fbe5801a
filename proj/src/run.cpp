#include "cutpipe/run.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <algorithm>
#include <fstream>
#include <memory>
#include <ostream>
#include <set>
#include <sstream>

#include "cutpipe/analysis.hpp"
#include "cutpipe/cutting.hpp"
#include "cutpipe/dataset.hpp"
#include "cutpipe/estimator.hpp"
#include "cutpipe/training.hpp"

namespace cutpipe {

namespace fs = std::filesystem;

namespace {

std::string exact(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    for (std::string item; in >> item;) out.push_back(item);
    return out;
}

template <typename T>
T parse_value(const std::string& key, const std::string& text) {
    std::istringstream in(text);
    T v{};
    in >> v;
    if (in.fail() || !in.eof()) throw ConfigError("grid key '" + key + "': cannot parse '" + text + "'");
    return v;
}

}  // namespace

void RunConfig::validate() const {
    if (workers < 1) throw ConfigError("--workers must be at least 1");
    if (!analytic && shots == 0) throw ConfigError("--shots must be positive (or use --analytic)");
    if (maxiter < 1) throw ConfigError("--maxiter must be at least 1");
    if (!(lr > 0.0) || !std::isfinite(lr)) throw ConfigError("--lr must be positive");
    if (policy != "eager" && policy != "staggered") throw ConfigError("--policy must be eager or staggered");
    if (batch_size < 1) throw ConfigError("--batch-size must be at least 1");
    if (!(inter_batch_delay >= 0.0)) throw ConfigError("--inter-batch-delay must be non-negative");
    if (ordering != "fifo" && ordering != "group_by_label") throw ConfigError("--ordering must be fifo or group_by_label");
    if (!(straggler_p >= 0.0 && straggler_p <= 1.0)) throw ConfigError("--straggler-p must be in [0, 1]");
    if (!(straggler_delay >= 0.0)) throw ConfigError("--straggler-delay must be non-negative");
    if (feature_reps < 1) throw ConfigError("--feature-reps must be at least 1");
    if (ansatz_reps < 1) throw ConfigError("--ansatz-reps must be at least 1");
    try {
        parse_cut_label(cuts);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("--cuts: ") + e.what());
    }
    for (const auto& a : attacks) {
        if (a != "gaussian" && a != "fgsm") throw ConfigError("--attacks: unknown attack '" + a + "'");
    }
    if (robustness) {
        RobustnessConfig rc{magnitudes, true, true, trials, 0};
        try {
            rc.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("--magnitudes/--trials: ") + e.what());
        }
    }
}

std::string canonical_config(const RunConfig& c) {
    std::map<std::string, std::string> kv;
    kv["dataset"] = c.dataset;
    kv["cuts"] = c.cuts;
    kv["workers"] = std::to_string(c.workers);
    kv["shots"] = std::to_string(c.effective_shots());
    kv["maxiter"] = std::to_string(c.maxiter);
    kv["lr"] = exact(c.lr);
    kv["policy"] = c.policy;
    kv["batch_size"] = std::to_string(c.batch_size);
    kv["inter_batch_delay"] = exact(c.inter_batch_delay);
    kv["ordering"] = c.ordering;
    kv["straggler_p"] = exact(c.straggler_p);
    kv["straggler_delay"] = exact(c.straggler_delay);
    kv["seed"] = std::to_string(c.seed);
    kv["feature_reps"] = std::to_string(c.feature_reps);
    kv["ansatz_reps"] = std::to_string(c.ansatz_reps);
    kv["robustness"] = c.robustness ? "1" : "0";
    std::string mags;
    for (double m : c.magnitudes) mags += exact(m) + " ";
    kv["magnitudes"] = mags;
    std::string attacks;
    for (const auto& a : c.attacks) attacks += a + " ";
    kv["attacks"] = attacks;
    kv["trials"] = std::to_string(c.trials);
    std::string out;
    for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
    return out;
}

std::string make_run_id(const RunConfig& cfg) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : canonical_config(cfg)) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf, 12);
}

fs::path default_output_dir() {
    if (const char* env = std::getenv("CUTPIPE_OUT"); env && *env) return env;
    return "runs";
}

RunOutcome run_training(const RunConfig& cfg) {
    cfg.validate();
    Dataset data;
    try {
        data = load_dataset(cfg.dataset, cfg.seed);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("--dataset: ") + e.what());
    }
    const int n = static_cast<int>(data.n_features());
    const ModelConfig model{cfg.feature_reps, cfg.ansatz_reps};
    if (n < 1 || n > kMaxQubits) throw ConfigError("--dataset: feature count must be in [1, 14]");
    try {
        const std::vector<double> x(static_cast<std::size_t>(n), 0.0);
        const auto circuit = model_circuit(x, std::vector<double>(parameter_count(n, model), 0.0), model);
        partition_problem(circuit, std::string(static_cast<std::size_t>(n), 'Z'), resolve_cut_label(cfg.cuts, circuit));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("--cuts: ") + e.what());
    }
    std::error_code ec;
    fs::create_directories(cfg.out_dir, ec);
    if (ec || !fs::is_directory(cfg.out_dir)) {
        throw ConfigError("--out: cannot create output directory " + cfg.out_dir.string());
    }

    RunOutcome outcome;
    RunSummary& s = outcome.summary;
    s.run_id = make_run_id(cfg);
    outcome.log_path = cfg.out_dir / (s.run_id + ".jsonl");
    outcome.summary_path = cfg.out_dir / (s.run_id + ".summary.json");

    s.dataset = data.name;
    s.seed = cfg.seed;
    s.n_qubits = n;
    s.cut_label = cfg.cuts;
    s.shots = cfg.effective_shots();
    s.workers = cfg.workers;
    s.maxiter = cfg.maxiter;
    s.learning_rate = cfg.lr;
    s.policy_mode = cfg.policy;
    s.batch_size = cfg.batch_size;
    s.inter_batch_delay_s = cfg.inter_batch_delay;
    s.ordering = cfg.ordering;
    s.straggler_p = cfg.straggler_p;
    s.straggler_delay_s = cfg.straggler_delay;
    s.feature_map_reps = cfg.feature_reps;
    s.ansatz_reps = cfg.ansatz_reps;
    if (cfg.robustness) {
        s.robust_magnitudes = cfg.magnitudes;
        s.attacks = cfg.attacks;
        s.robust_trials = cfg.trials;
    }

    std::unique_ptr<JsonlSink> sink;
    try {
        sink = std::make_unique<JsonlSink>(outcome.log_path);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("--out: ") + e.what());
    }

    EstimatorConfig ec_cfg;
    ec_cfg.run_id = s.run_id;
    ec_cfg.dataset = data.name;
    ec_cfg.cut_label = cfg.cuts;
    ec_cfg.shots = cfg.effective_shots();
    ec_cfg.workers = static_cast<std::size_t>(cfg.workers);
    ec_cfg.policy = {parse_dispatch_mode(cfg.policy), cfg.batch_size, cfg.inter_batch_delay,
                     parse_task_ordering(cfg.ordering)};
    ec_cfg.straggler = {cfg.straggler_p, cfg.straggler_delay, mix_seed(cfg.seed, 0x57a6)};
    ec_cfg.seed = cfg.seed;
    Estimator est(ec_cfg, *sink);

    TrainConfig tcfg{cfg.maxiter, cfg.lr, cfg.seed, model};
    const TrainResult tr = train(data, tcfg, est);
    s.loss_trace = tr.loss_trace;
    s.final_params = tr.params;
    s.train_time_s = tr.train_time_s;
    s.test_accuracy = tr.test_accuracy;
    if (tr.failed) {
        s.status = "failed";
        s.error = tr.error;
    } else if (cfg.robustness) {
        RobustnessConfig rc;
        rc.magnitudes = cfg.magnitudes;
        rc.gaussian = std::find(cfg.attacks.begin(), cfg.attacks.end(), "gaussian") != cfg.attacks.end();
        rc.fgsm = std::find(cfg.attacks.begin(), cfg.attacks.end(), "fgsm") != cfg.attacks.end();
        rc.trials = cfg.trials;
        rc.seed = mix_seed(cfg.seed, 0x2b);
        const double t0 = monotonic_seconds();
        try {
            const auto rep = robustness_eval(tr.params, data.samples(data.test), tr.test_accuracy, rc, est, model);
            s.robustness = rep.traces;
            s.robustness_summary = rep.summary;
        } catch (const std::exception& e) {
            s.status = "failed";
            s.error = e.what();
        }
        s.eval_time_s = monotonic_seconds() - t0;
    }
    s.n_queries = est.queries_issued();
    write_run_summary(s, outcome.summary_path);
    return outcome;
}

SweepGrid parse_grid(const std::string& text) {
    SweepGrid g;
    std::set<std::string> seen;
    std::istringstream in(text);
    std::size_t line_no = 0;
    for (std::string line; std::getline(in, line);) {
        ++line_no;
        line = trim(line.substr(0, line.find_first_of("#;")));
        if (line.empty() || line.front() == '[') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("grid line " + std::to_string(line_no) + ": expected key = values");
        const std::string key = trim(line.substr(0, eq));
        const auto values = split_ws(line.substr(eq + 1));
        if (values.empty()) throw ConfigError("grid key '" + key + "' has no values");
        if (!seen.insert(key).second) throw ConfigError("grid key '" + key + "' repeated");
        if (key == "workers") {
            for (const auto& v : values) g.workers.push_back(parse_value<int>(key, v));
        } else if (key == "cuts") {
            g.cuts = values;
        } else if (key == "seeds") {
            for (const auto& v : values) g.seeds.push_back(parse_value<std::uint64_t>(key, v));
        } else if (key == "straggler_p") {
            for (const auto& v : values) g.straggler_p.push_back(parse_value<double>(key, v));
        } else {
            throw ConfigError("unknown grid key '" + key + "'");
        }
    }
    if (g.workers.empty() && g.cuts.empty() && g.seeds.empty() && g.straggler_p.empty()) {
        throw ConfigError("grid is empty");
    }
    return g;
}

SweepGrid read_grid(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open grid file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_grid(ss.str());
}

std::vector<RunConfig> expand_grid(const RunConfig& base, const SweepGrid& grid) {
    const std::vector<std::string> cuts = grid.cuts.empty() ? std::vector<std::string>{base.cuts} : grid.cuts;
    const std::vector<int> workers = grid.workers.empty() ? std::vector<int>{base.workers} : grid.workers;
    const std::vector<std::uint64_t> seeds = grid.seeds.empty() ? std::vector<std::uint64_t>{base.seed} : grid.seeds;
    const std::vector<double> ps = grid.straggler_p.empty() ? std::vector<double>{base.straggler_p} : grid.straggler_p;
    std::vector<RunConfig> out;
    for (const auto& c : cuts) {
        for (int w : workers) {
            for (auto seed : seeds) {
                for (double p : ps) {
                    RunConfig cfg = base;
                    cfg.cuts = c;
                    cfg.workers = w;
                    cfg.seed = seed;
                    cfg.straggler_p = p;
                    out.push_back(cfg);
                }
            }
        }
    }
    return out;
}

SweepOutcome run_sweep(const RunConfig& base, const SweepGrid& grid, std::ostream* progress) {
    const auto configs = expand_grid(base, grid);
    for (const auto& cfg : configs) cfg.validate();
    SweepOutcome out;
    for (const auto& cfg : configs) {
        const std::string id = make_run_id(cfg);
        out.run_ids.push_back(id);
        const fs::path summary_path = cfg.out_dir / (id + ".summary.json");
        if (fs::exists(summary_path)) {
            try {
                if (read_run_summary(summary_path).status == "ok") {
                    ++out.skipped;
                    if (progress) *progress << "skip " << id << '\n';
                    continue;
                }
            } catch (const std::exception&) {
                // unreadable summary: rerun
            }
        }
        try {
            const auto r = run_training(cfg);
            ++out.executed;
            if (r.summary.status != "ok") ++out.failed;
            if (progress) {
                *progress << r.summary.status << ' ' << id << " cuts=" << cfg.cuts << " workers=" << cfg.workers
                          << " seed=" << cfg.seed << " p=" << cfg.straggler_p << " train_time_s="
                          << r.summary.train_time_s << '\n';
            }
        } catch (const std::exception& e) {
            ++out.executed;
            ++out.failed;
            if (progress) *progress << "failed " << id << ": " << e.what() << '\n';
        }
    }
    return out;
}

AnalyzeOutcome run_analysis(const AnalyzeOptions& opts) {
    if (opts.inputs.empty()) throw ConfigError("analyze needs at least one input path");
    LoadedLogs logs;
    try {
        logs = load_logs(opts.inputs);
    } catch (const std::runtime_error& e) {
        throw ConfigError(e.what());
    }
    AnalyzeOutcome out;
    out.records = logs.records.size();
    out.summaries = logs.summaries.size();
    out.rejections = logs.rejections.size();
    for (const auto& [path, rej] : logs.rejections) {
        out.warnings.push_back(path.string() + ":" + std::to_string(rej.line) + ": " + rej.message);
    }
    std::error_code ec;
    fs::create_directories(opts.out_dir, ec);
    auto open = [&](const char* name) {
        std::ofstream f(opts.out_dir / name);
        if (!f) throw ConfigError("cannot write " + (opts.out_dir / name).string());
        return f;
    };
    {
        auto f = open("rec_share.csv");
        write_rec_share_csv(f, rec_share_table(logs.records, opts.clean_only, opts.phase));
    }
    const auto speed = speedup_report(logs.summaries, opts.w_lo, opts.w_hi);
    const auto strag = straggler_report(logs.summaries, opts.p_hi);
    {
        auto f = open("speedup.csv");
        write_speedup_csv(f, speed.rows);
    }
    {
        auto f = open("straggler.csv");
        write_straggler_csv(f, strag.rows);
    }
    {
        auto f = open("stage_share.csv");
        write_stage_share_csv(f, stage_share_report(logs.records, &out.warnings));
    }
    {
        auto f = open("unmatched.csv");
        std::vector<UnmatchedRun> all = speed.unmatched;
        all.insert(all.end(), strag.unmatched.begin(), strag.unmatched.end());
        write_unmatched_csv(f, all);
    }
    return out;
}

}  // namespace cutpipe
