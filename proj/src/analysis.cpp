#include "cutpipe/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <stdexcept>
#include <tuple>

namespace cutpipe {

namespace fs = std::filesystem;

namespace {

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

void load_file(const fs::path& path, LoadedLogs& out) {
    const std::string name = path.filename().string();
    if (ends_with(name, ".jsonl")) {
        auto load = read_records(path);
        out.records.insert(out.records.end(), load.records.begin(), load.records.end());
        for (auto& r : load.rejections) out.rejections.emplace_back(path, std::move(r));
    } else if (ends_with(name, ".summary.json")) {
        out.summaries.push_back(read_run_summary(path));
    }
}

double median_time(std::vector<double> times) { return nearest_rank(std::move(times), 50.0); }

UnmatchedRun unmatched(const std::string& report, const RunSummary& s, std::string reason) {
    return {report, s.run_id, match_key(s), s.workers, s.straggler_p, std::move(reason)};
}

using PolicyKey = std::tuple<std::string, std::size_t, double, std::string>;

PolicyKey policy_key(const RunSummary& s) {
    return {s.policy_mode, s.batch_size, s.inter_batch_delay_s, s.ordering};
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string quoted = "\"";
    for (char c : s) {
        if (c == '"') quoted += '"';
        quoted += c;
    }
    return quoted + "\"";
}

void write_key(std::ostream& out, const MatchKey& k) {
    out << csv_field(k.dataset) << ',' << k.seed << ',' << k.n_qubits << ',' << csv_field(k.cut_label) << ','
        << k.shots << ',' << k.maxiter;
}

}  // namespace

LoadedLogs load_logs(std::span<const fs::path> paths) {
    LoadedLogs out;
    for (const fs::path& p : paths) {
        if (!fs::exists(p)) throw std::runtime_error("no such file or directory: " + p.string());
        if (fs::is_directory(p)) {
            std::vector<fs::path> files;
            for (const auto& entry : fs::directory_iterator(p)) {
                if (entry.is_regular_file()) files.push_back(entry.path());
            }
            std::sort(files.begin(), files.end());
            for (const auto& f : files) load_file(f, out);
        } else {
            load_file(p, out);
        }
    }
    return out;
}

MatchKey match_key(const RunSummary& s) {
    return {s.dataset, s.seed, s.n_qubits, s.cut_label, s.shots, s.maxiter};
}

double nearest_rank(std::vector<double> values, double pct) {
    if (values.empty()) throw std::invalid_argument("percentile of an empty set");
    if (!(pct > 0.0 && pct <= 100.0)) throw std::invalid_argument("percentile must be in (0, 100]");
    std::sort(values.begin(), values.end());
    const auto rank = static_cast<std::size_t>(std::ceil(pct / 100.0 * static_cast<double>(values.size())));
    return values[std::clamp<std::size_t>(rank, 1, values.size()) - 1];
}

std::vector<RecShareRow> rec_share_table(std::span<const QueryRecord> records, bool clean_only,
                                         const std::optional<std::string>& phase) {
    std::map<int, std::vector<double>> fractions;
    for (const QueryRecord& r : records) {
        if (r.n_cuts < 1 || r.error || !(r.t_total_s > 0.0)) continue;
        if (clean_only && r.straggler_delay_s != 0.0) continue;
        if (phase && r.phase != *phase) continue;
        fractions[r.n_cuts].push_back(std::clamp(r.t_rec_s / r.t_total_s, 0.0, 1.0));
    }
    std::vector<RecShareRow> rows;
    for (auto& [cuts, fr] : fractions) {
        rows.push_back({cuts, fr.size(), nearest_rank(fr, 50.0), nearest_rank(fr, 95.0)});
    }
    return rows;
}

SpeedupReport speedup_report(std::span<const RunSummary> summaries, int w_lo, int w_hi) {
    using GroupKey = std::tuple<MatchKey, double, double, PolicyKey>;
    struct Group {
        std::vector<const RunSummary*> lo, hi;
    };
    SpeedupReport report;
    std::map<GroupKey, Group> groups;
    for (const RunSummary& s : summaries) {
        if (s.workers != w_lo && s.workers != w_hi) continue;
        if (s.status != "ok") {
            report.unmatched.push_back(unmatched("speedup", s, "failed run"));
            continue;
        }
        auto& g = groups[{match_key(s), s.straggler_p, s.straggler_delay_s, policy_key(s)}];
        (s.workers == w_lo ? g.lo : g.hi).push_back(&s);
    }
    for (const auto& [key, g] : groups) {
        if (g.lo.empty() || g.hi.empty()) {
            const int missing = g.lo.empty() ? w_lo : w_hi;
            for (const auto* s : g.lo.empty() ? g.hi : g.lo) {
                report.unmatched.push_back(
                    unmatched("speedup", *s, "no matched run at workers=" + std::to_string(missing)));
            }
            continue;
        }
        std::vector<double> lo, hi;
        for (const auto* s : g.lo) lo.push_back(s->train_time_s);
        for (const auto* s : g.hi) hi.push_back(s->train_time_s);
        SpeedupRow row{std::get<0>(key), w_lo, w_hi, median_time(lo), median_time(hi), 0.0};
        row.speedup = row.t_hi_s > 0.0 ? row.t_lo_s / row.t_hi_s : std::nan("");
        report.rows.push_back(row);
    }
    return report;
}

StragglerReport straggler_report(std::span<const RunSummary> summaries, double p_hi) {
    using GroupKey = std::tuple<MatchKey, int, double, PolicyKey>;
    struct Group {
        std::vector<const RunSummary*> base, high;
    };
    StragglerReport report;
    std::map<GroupKey, Group> groups;
    for (const RunSummary& s : summaries) {
        const bool is_base = s.straggler_p == 0.0;
        const bool is_high = std::abs(s.straggler_p - p_hi) < 1e-12;
        if (!is_base && !is_high) continue;
        if (s.status != "ok") {
            report.unmatched.push_back(unmatched("straggler", s, "failed run"));
            continue;
        }
        auto& g = groups[{match_key(s), s.workers, s.straggler_delay_s, policy_key(s)}];
        (is_base ? g.base : g.high).push_back(&s);
    }
    for (const auto& [key, g] : groups) {
        if (g.base.empty() || g.high.empty()) {
            for (const auto* s : g.base.empty() ? g.high : g.base) {
                report.unmatched.push_back(unmatched(
                    "straggler", *s, g.base.empty() ? "no matched run at p=0" : "no matched run at p=" + format_decimal(p_hi)));
            }
            continue;
        }
        std::vector<double> base, high;
        for (const auto* s : g.base) base.push_back(s->train_time_s);
        for (const auto* s : g.high) high.push_back(s->train_time_s);
        StragglerRow row{std::get<0>(key), std::get<1>(key), std::get<2>(key), p_hi, median_time(base),
                         median_time(high), 0.0};
        row.slowdown = row.t_p0_s > 0.0 ? row.t_phi_s / row.t_p0_s : std::nan("");
        report.rows.push_back(row);
    }
    return report;
}

std::vector<StageShareRow> stage_share_report(std::span<const QueryRecord> records,
                                              std::vector<std::string>* warnings) {
    using Key = std::tuple<std::string, int, std::string, int, std::uint32_t, std::string, double, double>;
    struct Acc {
        std::size_t n = 0;
        double share[5] = {0, 0, 0, 0, 0};
    };
    std::map<Key, Acc> groups;
    for (const QueryRecord& r : records) {
        if (!(r.t_total_s > 0.0)) {
            if (warnings) {
                warnings->push_back("skipping record " + r.run_id + "#" + std::to_string(r.query_idx) +
                                    ": zero total duration");
            }
            continue;
        }
        Acc& a = groups[{r.dataset, r.n_qubits, r.cut_label, r.workers, r.shots, r.policy_mode, r.straggler_p,
                         r.straggler_delay_s}];
        const double parts[5] = {r.t_part_s, r.t_gen_s, r.t_exec_s, r.t_rec_s, r.t_other_s};
        for (int i = 0; i < 5; ++i) a.share[i] += parts[i] / r.t_total_s;
        ++a.n;
    }
    std::vector<StageShareRow> rows;
    for (const auto& [k, a] : groups) {
        const double n = static_cast<double>(a.n);
        StageShareRow row;
        std::tie(row.dataset, row.n_qubits, row.cut_label, row.workers, row.shots, row.policy_mode, row.straggler_p,
                 row.straggler_delay_s) = k;
        row.n = a.n;
        row.share_part = a.share[0] / n;
        row.share_gen = a.share[1] / n;
        row.share_exec = a.share[2] / n;
        row.share_rec = a.share[3] / n;
        row.share_other = a.share[4] / n;
        rows.push_back(row);
    }
    return rows;
}

std::string format_decimal(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9f", v);
    std::string s(buf);
    s.erase(s.find_last_not_of('0') + 1);
    if (s.back() == '.') s.pop_back();
    if (s == "-0") s = "0";
    return s;
}

void write_rec_share_csv(std::ostream& out, std::span<const RecShareRow> rows) {
    out << "n_cuts,n,median_frac,p95_frac\n";
    for (const auto& r : rows) {
        out << r.n_cuts << ',' << r.n << ',' << format_decimal(r.median_frac) << ',' << format_decimal(r.p95_frac)
            << '\n';
    }
}

void write_speedup_csv(std::ostream& out, std::span<const SpeedupRow> rows) {
    out << "dataset,seed,n_qubits,cut_label,shots,maxiter,workers_lo,workers_hi,t_lo_s,t_hi_s,speedup\n";
    for (const auto& r : rows) {
        write_key(out, r.key);
        out << ',' << r.workers_lo << ',' << r.workers_hi << ',' << format_decimal(r.t_lo_s) << ','
            << format_decimal(r.t_hi_s) << ',' << format_decimal(r.speedup) << '\n';
    }
}

void write_straggler_csv(std::ostream& out, std::span<const StragglerRow> rows) {
    out << "dataset,seed,n_qubits,cut_label,shots,maxiter,workers,straggler_delay_s,p_hi,t_p0_s,t_phi_s,slowdown\n";
    for (const auto& r : rows) {
        write_key(out, r.key);
        out << ',' << r.workers << ',' << format_decimal(r.straggler_delay_s) << ',' << format_decimal(r.p_hi) << ','
            << format_decimal(r.t_p0_s) << ',' << format_decimal(r.t_phi_s) << ',' << format_decimal(r.slowdown)
            << '\n';
    }
}

void write_stage_share_csv(std::ostream& out, std::span<const StageShareRow> rows) {
    out << "dataset,n_qubits,cut_label,workers,shots,policy_mode,straggler_p,straggler_delay_s,n,"
           "share_part,share_gen,share_exec,share_rec,share_other\n";
    for (const auto& r : rows) {
        out << csv_field(r.dataset) << ',' << r.n_qubits << ',' << csv_field(r.cut_label) << ',' << r.workers << ',' << r.shots << ','
            << r.policy_mode << ',' << format_decimal(r.straggler_p) << ',' << format_decimal(r.straggler_delay_s)
            << ',' << r.n << ',' << format_decimal(r.share_part) << ',' << format_decimal(r.share_gen) << ','
            << format_decimal(r.share_exec) << ',' << format_decimal(r.share_rec) << ','
            << format_decimal(r.share_other) << '\n';
    }
}

void write_unmatched_csv(std::ostream& out, std::span<const UnmatchedRun> rows) {
    out << "report,run_id,dataset,seed,n_qubits,cut_label,shots,maxiter,workers,straggler_p,reason\n";
    for (const auto& r : rows) {
        out << r.report << ',' << csv_field(r.run_id) << ',';
        write_key(out, r.key);
        out << ',' << r.workers << ',' << format_decimal(r.straggler_p) << ',' << csv_field(r.reason) << '\n';
    }
}

}  // namespace cutpipe
