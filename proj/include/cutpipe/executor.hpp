#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <mutex>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "cutpipe/circuit.hpp"

namespace cutpipe {

// Seconds on the process-wide monotonic clock.
double monotonic_seconds();

struct Task {
    std::size_t task_id = 0;
    std::size_t term_id = 0;
    std::size_t fragment_id = 0;
    ParamCircuit circuit;
    std::string word;
    std::uint32_t shots = 0;  // 0 = exact distribution
    std::string group_label;
    std::uint64_t seed = 0;   // sampling stream
};

enum class DispatchMode { Eager, Staggered };
enum class TaskOrdering { Fifo, GroupByLabel };

std::string_view to_string(DispatchMode mode);
std::string_view to_string(TaskOrdering ordering);
DispatchMode parse_dispatch_mode(std::string_view text);
TaskOrdering parse_task_ordering(std::string_view text);

struct DispatchPolicy {
    DispatchMode mode = DispatchMode::Eager;
    std::size_t batch_size = 1;
    double inter_batch_delay_s = 0.0;
    TaskOrdering ordering = TaskOrdering::Fifo;

    void validate() const;
};

// t'_k = t_k + 1{u_k < p} * delay_s, u_k drawn by task index from `seed`.
struct StragglerConfig {
    double p = 0.0;
    double delay_s = 0.0;
    std::uint64_t seed = 0;

    void validate() const;
    std::vector<double> draw_delays(std::size_t n_tasks) const;
};

// Classical summary of one executed task, in the rotated measurement basis.
// Exactly one of the two members is populated.
struct Outcomes {
    std::vector<double> probabilities;
    std::vector<std::uint32_t> samples;
};

// Eigenvalue accumulation over the non-identity positions of `word`.
double outcome_expectation(const Outcomes& outcomes, std::string_view word);

struct TaskResult {
    std::size_t task_id = 0;
    std::size_t worker_id = 0;
    double submit_ts = 0.0;
    double start_ts = 0.0;
    double end_ts = 0.0;
    double injected_delay_s = 0.0;
    double service_time_s = 0.0;
    double delayed_time_s = 0.0;
    Outcomes outcomes;
};

// Batches of indices into `tasks`.
std::vector<std::vector<std::size_t>> order_and_batch(std::span<const Task> tasks, const DispatchPolicy& policy);

// Fixed-size pool; jobs receive the id of the worker running them.
class WorkerPool {
public:
    explicit WorkerPool(std::size_t workers);
    ~WorkerPool();

    WorkerPool(const WorkerPool&) = delete;
    WorkerPool& operator=(const WorkerPool&) = delete;

    std::size_t size() const { return threads_.size(); }
    void submit(std::function<void(std::size_t)> job);

private:
    void run(std::size_t worker_id);

    std::mutex mutex_;
    std::condition_variable ready_;
    std::deque<std::function<void(std::size_t)>> queue_;
    bool stopping_ = false;
    std::vector<std::thread> threads_;
};

// Runs every task to completion and returns results in input order. The
// first task failure is rethrown after the barrier; no partial results.
std::vector<TaskResult> execute_tasks(WorkerPool& pool, std::span<const Task> tasks,
                                      const DispatchPolicy& policy, const StragglerConfig& straggler);

std::vector<TaskResult> execute_tasks(std::span<const Task> tasks, std::size_t workers,
                                      const DispatchPolicy& policy, const StragglerConfig& straggler);

struct ExecSummary {
    std::vector<double> busy_s;  // per worker, sum of t'_k
    double max_busy_s = 0.0;
    double work_bound_s = 0.0;   // sum t'_k / w
    double makespan_s = 0.0;     // max end - min submit
    double max_task_s = 0.0;     // max t'_k
    double total_injected_s = 0.0;
};

ExecSummary exec_summary(std::span<const TaskResult> results, std::size_t workers);

}  // namespace cutpipe
