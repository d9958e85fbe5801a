#include "cutpipe/executor.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <latch>
#include <numeric>
#include <random>
#include <stdexcept>

namespace cutpipe {

double monotonic_seconds() {
    using clock = std::chrono::steady_clock;
    static const clock::time_point epoch = clock::now();
    return std::chrono::duration<double>(clock::now() - epoch).count();
}

std::string_view to_string(DispatchMode mode) {
    return mode == DispatchMode::Eager ? "eager" : "staggered";
}

std::string_view to_string(TaskOrdering ordering) {
    return ordering == TaskOrdering::Fifo ? "fifo" : "group_by_label";
}

DispatchMode parse_dispatch_mode(std::string_view text) {
    if (text == "eager") return DispatchMode::Eager;
    if (text == "staggered") return DispatchMode::Staggered;
    throw std::invalid_argument("unknown dispatch mode '" + std::string(text) + "'");
}

TaskOrdering parse_task_ordering(std::string_view text) {
    if (text == "fifo") return TaskOrdering::Fifo;
    if (text == "group_by_label") return TaskOrdering::GroupByLabel;
    throw std::invalid_argument("unknown task ordering '" + std::string(text) + "'");
}

void DispatchPolicy::validate() const {
    if (batch_size == 0) throw std::invalid_argument("batch size must be positive");
    if (!(inter_batch_delay_s >= 0.0) || !std::isfinite(inter_batch_delay_s)) {
        throw std::invalid_argument("inter-batch delay must be a non-negative number of seconds");
    }
}

void StragglerConfig::validate() const {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("straggler probability must be in [0, 1]");
    if (!(delay_s >= 0.0) || !std::isfinite(delay_s)) {
        throw std::invalid_argument("straggler delay must be non-negative");
    }
}

std::vector<double> StragglerConfig::draw_delays(std::size_t n_tasks) const {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    std::vector<double> delays(n_tasks);
    for (double& d : delays) d = uniform(rng) < p ? delay_s : 0.0;
    return delays;
}

double outcome_expectation(const Outcomes& outcomes, std::string_view word) {
    const std::uint32_t mask = word_mask(word);
    double acc = 0.0;
    if (!outcomes.samples.empty()) {
        for (std::uint32_t o : outcomes.samples) acc += parity_eigenvalue(o, mask);
        return acc / static_cast<double>(outcomes.samples.size());
    }
    for (std::size_t b = 0; b < outcomes.probabilities.size(); ++b) {
        acc += outcomes.probabilities[b] * parity_eigenvalue(static_cast<std::uint32_t>(b), mask);
    }
    return acc;
}

std::vector<std::vector<std::size_t>> order_and_batch(std::span<const Task> tasks, const DispatchPolicy& policy) {
    policy.validate();
    if (tasks.empty()) throw std::invalid_argument("no tasks to dispatch");
    std::vector<std::size_t> order(tasks.size());
    std::iota(order.begin(), order.end(), 0);
    if (policy.ordering == TaskOrdering::GroupByLabel) {
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return tasks[a].group_label < tasks[b].group_label;
        });
    }
    std::vector<std::vector<std::size_t>> batches;
    if (policy.mode == DispatchMode::Eager) {
        batches.push_back(std::move(order));
        return batches;
    }
    for (std::size_t i = 0; i < order.size(); i += policy.batch_size) {
        const auto end = std::min(order.size(), i + policy.batch_size);
        batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(i),
                             order.begin() + static_cast<std::ptrdiff_t>(end));
    }
    return batches;
}

// ---------------------------------------------------------------------------

WorkerPool::WorkerPool(std::size_t workers) {
    if (workers == 0) throw std::invalid_argument("worker count must be positive");
    threads_.reserve(workers);
    for (std::size_t i = 0; i < workers; ++i) threads_.emplace_back([this, i] { run(i); });
}

WorkerPool::~WorkerPool() {
    {
        std::lock_guard lock(mutex_);
        stopping_ = true;
    }
    ready_.notify_all();
    for (auto& t : threads_) t.join();
}

void WorkerPool::submit(std::function<void(std::size_t)> job) {
    {
        std::lock_guard lock(mutex_);
        queue_.push_back(std::move(job));
    }
    ready_.notify_one();
}

void WorkerPool::run(std::size_t worker_id) {
    for (;;) {
        std::function<void(std::size_t)> job;
        {
            std::unique_lock lock(mutex_);
            ready_.wait(lock, [&] { return stopping_ || !queue_.empty(); });
            if (queue_.empty()) return;
            job = std::move(queue_.front());
            queue_.pop_front();
        }
        job(worker_id);
    }
}

// ---------------------------------------------------------------------------

namespace {

Outcomes run_task(const Task& task) {
    Statevector state = simulate(task.circuit);
    validate_word(task.word, state.n_qubits());
    rotate_to_measurement_basis(state, task.word);
    Outcomes out;
    if (task.shots == 0) {
        out.probabilities = state.probabilities();
    } else {
        std::mt19937_64 rng(task.seed);
        out.samples = sample_outcomes(state.probabilities(), task.shots, rng);
    }
    return out;
}

void sleep_seconds(double s) {
    if (s > 0.0) std::this_thread::sleep_for(std::chrono::duration<double>(s));
}

}  // namespace

std::vector<TaskResult> execute_tasks(WorkerPool& pool, std::span<const Task> tasks,
                                      const DispatchPolicy& policy, const StragglerConfig& straggler) {
    straggler.validate();
    const auto batches = order_and_batch(tasks, policy);
    const auto delays = straggler.draw_delays(tasks.size());

    std::vector<TaskResult> results(tasks.size());
    std::latch done(static_cast<std::ptrdiff_t>(tasks.size()));
    std::mutex error_mutex;
    std::exception_ptr first_error;

    for (std::size_t b = 0; b < batches.size(); ++b) {
        const double batch_ts = monotonic_seconds();
        for (std::size_t idx : batches[b]) {
            results[idx].submit_ts = batch_ts;
            pool.submit([&, idx](std::size_t worker) {
                TaskResult& r = results[idx];
                r.task_id = tasks[idx].task_id;
                r.worker_id = worker;
                r.start_ts = monotonic_seconds();
                try {
                    r.outcomes = run_task(tasks[idx]);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                }
                const double service_end = monotonic_seconds();
                sleep_seconds(delays[idx]);
                r.end_ts = monotonic_seconds();
                r.injected_delay_s = delays[idx];
                r.service_time_s = service_end - r.start_ts;
                r.delayed_time_s = r.service_time_s + r.injected_delay_s;
                done.count_down();
            });
        }
        if (policy.mode == DispatchMode::Staggered && policy.inter_batch_delay_s > 0.0 &&
            b + 1 < batches.size()) {
            sleep_seconds(batch_ts + policy.inter_batch_delay_s - monotonic_seconds());
        }
    }
    done.wait();
    if (first_error) std::rethrow_exception(first_error);
    return results;
}

std::vector<TaskResult> execute_tasks(std::span<const Task> tasks, std::size_t workers,
                                      const DispatchPolicy& policy, const StragglerConfig& straggler) {
    WorkerPool pool(workers);
    return execute_tasks(pool, tasks, policy, straggler);
}

ExecSummary exec_summary(std::span<const TaskResult> results, std::size_t workers) {
    if (results.empty()) throw std::invalid_argument("exec summary of an empty result set");
    if (workers == 0) throw std::invalid_argument("worker count must be positive");
    ExecSummary s;
    s.busy_s.assign(workers, 0.0);
    double first_submit = results.front().submit_ts;
    double last_end = results.front().end_ts;
    double total = 0.0;
    for (const TaskResult& r : results) {
        if (r.worker_id >= workers) throw std::invalid_argument("result worker id exceeds worker count");
        s.busy_s[r.worker_id] += r.delayed_time_s;
        total += r.delayed_time_s;
        s.total_injected_s += r.injected_delay_s;
        s.max_task_s = std::max(s.max_task_s, r.delayed_time_s);
        first_submit = std::min(first_submit, r.submit_ts);
        last_end = std::max(last_end, r.end_ts);
    }
    s.max_busy_s = *std::max_element(s.busy_s.begin(), s.busy_s.end());
    s.work_bound_s = total / static_cast<double>(workers);
    s.makespan_s = last_end - first_submit;
    return s;
}

}  // namespace cutpipe
