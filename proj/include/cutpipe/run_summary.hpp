#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cutpipe/training.hpp"

namespace cutpipe {

// One training/evaluation run, written as `<run_id>.summary.json`.
// `workers` is the single worker-count field (the subexperiment pool size).
struct RunSummary {
    std::string run_id;
    std::string status = "ok";  // "ok" or "failed"
    std::string error;

    // config echo
    std::string dataset;
    std::uint64_t seed = 0;
    int n_qubits = 0;
    std::string cut_label = "cut0";
    std::uint32_t shots = 0;  // 0 = analytic
    int workers = 1;
    std::size_t maxiter = 0;
    double learning_rate = 0.0;
    std::string policy_mode = "eager";
    std::size_t batch_size = 1;
    double inter_batch_delay_s = 0.0;
    std::string ordering = "fifo";
    double straggler_p = 0.0;
    double straggler_delay_s = 0.0;
    int feature_map_reps = 1;
    int ansatz_reps = 1;
    std::string entanglement = "linear";
    std::vector<double> robust_magnitudes;
    std::vector<std::string> attacks;
    std::size_t robust_trials = 0;

    // results
    std::vector<double> loss_trace;
    std::vector<double> final_params;
    double train_time_s = 0.0;
    double eval_time_s = 0.0;
    double test_accuracy = 0.0;
    std::vector<AttackTrace> robustness;
    double robustness_summary = 0.0;
    std::uint64_t n_queries = 0;
};

std::string to_json(const RunSummary& summary);
RunSummary parse_run_summary(const std::string& text);
RunSummary read_run_summary(const std::filesystem::path& path);
void write_run_summary(const RunSummary& summary, const std::filesystem::path& path);

// Same document with wall-clock fields removed, for reproducibility checks.
std::string to_json_without_timing(const RunSummary& summary);

}  // namespace cutpipe
