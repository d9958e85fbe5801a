#pragma once

// Derived metrics over query logs and run summaries. Ratios are only ever
// formed between runs with equal MatchKey (plus the fields each report
// holds fixed); everything else is reported as unmatched.

#include <compare>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cutpipe/records.hpp"
#include "cutpipe/run_summary.hpp"

namespace cutpipe {

struct LoadedLogs {
    std::vector<QueryRecord> records;
    std::vector<RunSummary> summaries;
    std::vector<std::pair<std::filesystem::path, Rejection>> rejections;
};

// Accepts files and directories; `*.jsonl` are query logs and
// `*.summary.json` are run summaries.
LoadedLogs load_logs(std::span<const std::filesystem::path> paths);

struct MatchKey {
    std::string dataset;
    std::uint64_t seed = 0;
    int n_qubits = 0;
    std::string cut_label;
    std::uint32_t shots = 0;
    std::size_t maxiter = 0;

    auto operator<=>(const MatchKey&) const = default;
};

MatchKey match_key(const RunSummary& s);

// Nearest-rank percentile, pct in (0, 100].
double nearest_rank(std::vector<double> values, double pct);

struct RecShareRow {
    int n_cuts = 0;
    std::size_t n = 0;
    double median_frac = 0.0;
    double p95_frac = 0.0;
};

std::vector<RecShareRow> rec_share_table(std::span<const QueryRecord> records, bool clean_only = true,
                                         const std::optional<std::string>& phase = std::nullopt);

struct UnmatchedRun {
    std::string report;
    std::string run_id;
    MatchKey key;
    int workers = 0;
    double straggler_p = 0.0;
    std::string reason;
};

struct SpeedupRow {
    MatchKey key;
    int workers_lo = 1;
    int workers_hi = 16;
    double t_lo_s = 0.0;
    double t_hi_s = 0.0;
    double speedup = 0.0;
};

struct SpeedupReport {
    std::vector<SpeedupRow> rows;
    std::vector<UnmatchedRun> unmatched;
};

SpeedupReport speedup_report(std::span<const RunSummary> summaries, int w_lo = 1, int w_hi = 16);

struct StragglerRow {
    MatchKey key;
    int workers = 0;
    double straggler_delay_s = 0.0;
    double p_hi = 0.2;
    double t_p0_s = 0.0;
    double t_phi_s = 0.0;
    double slowdown = 0.0;
};

struct StragglerReport {
    std::vector<StragglerRow> rows;
    std::vector<UnmatchedRun> unmatched;
};

StragglerReport straggler_report(std::span<const RunSummary> summaries, double p_hi = 0.2);

struct StageShareRow {
    std::string dataset;
    int n_qubits = 0;
    std::string cut_label;
    int workers = 0;
    std::uint32_t shots = 0;
    std::string policy_mode;
    double straggler_p = 0.0;
    double straggler_delay_s = 0.0;
    std::size_t n = 0;
    double share_part = 0.0;
    double share_gen = 0.0;
    double share_exec = 0.0;
    double share_rec = 0.0;
    double share_other = 0.0;
};

// Mean of per-record stage shares per configuration. Records with zero
// total duration are skipped and reported through `warnings`.
std::vector<StageShareRow> stage_share_report(std::span<const QueryRecord> records,
                                              std::vector<std::string>* warnings = nullptr);

// Fixed-point decimal with trailing zeros trimmed.
std::string format_decimal(double v);

void write_rec_share_csv(std::ostream& out, std::span<const RecShareRow> rows);
void write_speedup_csv(std::ostream& out, std::span<const SpeedupRow> rows);
void write_straggler_csv(std::ostream& out, std::span<const StragglerRow> rows);
void write_stage_share_csv(std::ostream& out, std::span<const StageShareRow> rows);
void write_unmatched_csv(std::ostream& out, std::span<const UnmatchedRun> rows);

}  // namespace cutpipe
