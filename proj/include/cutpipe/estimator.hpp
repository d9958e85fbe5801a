#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "cutpipe/circuit.hpp"
#include "cutpipe/cutting.hpp"
#include "cutpipe/executor.hpp"
#include "cutpipe/records.hpp"

namespace cutpipe {

enum class Phase { Train, Grad, Eval, Robust };

std::string_view to_string(Phase phase);

// splitmix64-style combination used for every derived seed.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

struct EstimatorQuery {
    ParamCircuit circuit;  // fully bound
    PauliObservable observable;
    std::string cut_label = "cut0";
    // Explicit cut points; when empty the label is resolved against the circuit.
    std::vector<CutPoint> cuts;
    std::uint32_t shots = 0;  // 0 = analytic
    std::size_t workers = 1;
    DispatchPolicy policy;
    StragglerConfig straggler;
    std::string run_id;
    std::string dataset;
    std::uint64_t query_idx = 0;
    std::uint64_t seed = 0;
    Phase phase = Phase::Eval;
};

struct EstimateHooks {
    const CutTermTable* term_table = nullptr;  // defaults to the canonical table
    std::function<void(std::span<const TaskResult>, const ExecSummary&)> on_execution;
};

// Partition, generate, execute and reconstruct one query. Emits exactly one
// record to `sink`, including on failure (with `error` set), then rethrows.
double estimate(const EstimatorQuery& query, RecordSink& sink, WorkerPool& pool,
                const EstimateHooks& hooks = {});

double estimate(const EstimatorQuery& query, RecordSink& sink);

struct EstimatorConfig {
    std::string run_id;
    std::string dataset;
    std::string cut_label = "cut0";
    std::uint32_t shots = 0;
    std::size_t workers = 1;
    DispatchPolicy policy;
    StragglerConfig straggler;
    std::uint64_t seed = 0;
};

// Run-scoped estimator: owns the worker pool and numbers queries.
class Estimator {
public:
    Estimator(EstimatorConfig config, RecordSink& sink);

    double operator()(const ParamCircuit& circuit, const PauliObservable& observable, Phase phase);

    struct Item {
        ParamCircuit circuit;
        PauliObservable observable;
    };
    // Sequential issue; the first failure aborts the batch.
    std::vector<double> estimate_batch(std::span<const Item> items, Phase phase);

    const EstimatorConfig& config() const { return config_; }
    std::uint64_t queries_issued() const { return next_query_; }
    EstimateHooks& hooks() { return hooks_; }

private:
    EstimatorConfig config_;
    RecordSink& sink_;
    std::unique_ptr<WorkerPool> pool_;
    EstimateHooks hooks_;
    std::uint64_t next_query_ = 0;
};

}  // namespace cutpipe
