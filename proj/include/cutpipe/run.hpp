#pragma once

// Run orchestration behind the command line: a RunConfig maps to one
// training + robustness run writing `<run_id>.jsonl` and
// `<run_id>.summary.json` into the output directory.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cutpipe/run_summary.hpp"

namespace cutpipe {

// Invalid flags, config files or grid files (exit code 2).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct RunConfig {
    std::string dataset = "iris";
    std::string cuts = "cut0";
    int workers = 1;
    std::uint32_t shots = 1024;
    bool analytic = false;
    std::size_t maxiter = 60;
    double lr = 0.1;
    std::string policy = "eager";
    std::size_t batch_size = 1;
    double inter_batch_delay = 0.0;
    std::string ordering = "fifo";
    double straggler_p = 0.0;
    double straggler_delay = 0.0;
    std::uint64_t seed = 0;
    int feature_reps = 1;
    int ansatz_reps = 1;
    bool robustness = true;
    std::vector<double> magnitudes{0.0, 0.05, 0.1, 0.2};
    std::vector<std::string> attacks{"gaussian", "fgsm"};
    std::size_t trials = 5;
    std::filesystem::path out_dir = ".";

    // Throws ConfigError naming the offending flag.
    void validate() const;
    std::uint32_t effective_shots() const { return analytic ? 0 : shots; }
};

// Sorted `key=value` lines of every field except the output directory.
std::string canonical_config(const RunConfig& cfg);

// First 12 hex digits of a 64-bit FNV-1a hash of the canonical config.
std::string make_run_id(const RunConfig& cfg);

std::filesystem::path default_output_dir();

struct RunOutcome {
    RunSummary summary;
    std::filesystem::path log_path;
    std::filesystem::path summary_path;
};

// Config problems throw ConfigError; runtime failures are reported through
// summary.status == "failed" (files are still written).
RunOutcome run_training(const RunConfig& cfg);

// Grid axes: workers, cuts, seeds, straggler_p. Values are whitespace
// separated, one `key = value` line per axis.
struct SweepGrid {
    std::vector<int> workers;
    std::vector<std::string> cuts;
    std::vector<std::uint64_t> seeds;
    std::vector<double> straggler_p;
};

SweepGrid parse_grid(const std::string& text);
SweepGrid read_grid(const std::filesystem::path& path);

std::vector<RunConfig> expand_grid(const RunConfig& base, const SweepGrid& grid);

struct SweepOutcome {
    std::size_t executed = 0;
    std::size_t skipped = 0;
    std::size_t failed = 0;
    std::vector<std::string> run_ids;
};

// Sequential; runs whose summary already exists with status "ok" are skipped.
SweepOutcome run_sweep(const RunConfig& base, const SweepGrid& grid, std::ostream* progress = nullptr);

struct AnalyzeOptions {
    std::vector<std::filesystem::path> inputs;
    std::filesystem::path out_dir = ".";
    bool clean_only = true;
    std::optional<std::string> phase;
    int w_lo = 1;
    int w_hi = 16;
    double p_hi = 0.2;
};

struct AnalyzeOutcome {
    std::size_t records = 0;
    std::size_t summaries = 0;
    std::size_t rejections = 0;
    std::vector<std::string> warnings;
};

// Writes rec_share.csv, speedup.csv, straggler.csv, stage_share.csv and
// unmatched.csv into out_dir.
AnalyzeOutcome run_analysis(const AnalyzeOptions& opts);

}  // namespace cutpipe
