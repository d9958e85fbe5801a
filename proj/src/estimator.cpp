#include "cutpipe/estimator.hpp"

#include <cmath>
#include <stdexcept>

namespace cutpipe {

std::string_view to_string(Phase phase) {
    switch (phase) {
        case Phase::Train: return "train";
        case Phase::Grad: return "grad";
        case Phase::Eval: return "eval";
        case Phase::Robust: return "robust";
    }
    return "?";
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

namespace {

QueryRecord make_record(const EstimatorQuery& q) {
    QueryRecord r;
    r.run_id = q.run_id;
    r.query_idx = q.query_idx;
    r.phase = std::string(to_string(q.phase));
    r.dataset = q.dataset;
    r.n_qubits = q.circuit.n_qubits;
    r.cut_label = q.cut_label;
    r.shots = q.shots;
    r.workers = static_cast<int>(q.workers);
    r.policy_mode = std::string(to_string(q.policy.mode));
    r.batch_size = q.policy.batch_size;
    r.inter_batch_delay_s = q.policy.inter_batch_delay_s;
    r.straggler_p = q.straggler.p;
    r.straggler_delay_s = q.straggler.delay_s;
    r.seed = q.seed;
    return r;
}

}  // namespace

double estimate(const EstimatorQuery& q, RecordSink& sink, WorkerPool& pool, const EstimateHooks& hooks) {
    const double t_start = monotonic_seconds();
    QueryRecord record = make_record(q);
    const CutTermTable& table = hooks.term_table ? *hooks.term_table : canonical_cut_terms();
    double value = 0.0;
    try {
        q.observable.validate();
        if (q.observable.width() != q.circuit.n_qubits) {
            throw std::invalid_argument("observable width does not match circuit width");
        }
        if (q.workers != pool.size()) throw std::invalid_argument("worker pool size does not match query workers");
        q.policy.validate();
        q.straggler.validate();

        for (std::size_t w = 0; w < q.observable.terms.size(); ++w) {
            const PauliTerm& term = q.observable.terms[w];
            const std::uint64_t word_seed = mix_seed(mix_seed(q.seed, q.query_idx), w);

            double t0 = monotonic_seconds();
            const CutPlan plan = q.cuts.empty() ? resolve_cut_label(q.cut_label, q.circuit)
                                                : CutPlan{q.cut_label, q.cuts};
            const auto fragments = partition_problem(q.circuit, term.word, plan);
            double t1 = monotonic_seconds();
            record.t_part_s += t1 - t0;
            record.n_cuts = static_cast<int>(plan.cuts.size());

            t0 = monotonic_seconds();
            auto generated = generate_subexperiments(fragments, table);
            std::vector<Task> tasks;
            tasks.reserve(generated.plan.n_tasks());
            for (auto& sub : generated.subexperiments) {
                for (std::size_t f = 0; f < sub.executables.size(); ++f) {
                    Task t;
                    t.task_id = tasks.size();
                    t.term_id = sub.term_id;
                    t.fragment_id = f;
                    t.circuit = std::move(sub.executables[f].circuit);
                    t.word = std::move(sub.executables[f].word);
                    t.shots = q.shots;
                    t.group_label = "f" + std::to_string(f);
                    t.seed = mix_seed(word_seed, t.task_id);
                    tasks.push_back(std::move(t));
                }
            }
            t1 = monotonic_seconds();
            record.t_gen_s += t1 - t0;
            record.n_subexperiments += generated.plan.n_terms();
            record.n_tasks += tasks.size();

            StragglerConfig straggler = q.straggler;
            straggler.seed = mix_seed(mix_seed(q.straggler.seed, q.query_idx), w);
            t0 = monotonic_seconds();
            const auto results = execute_tasks(pool, tasks, q.policy, straggler);
            t1 = monotonic_seconds();
            record.t_exec_s += t1 - t0;
            if (hooks.on_execution) hooks.on_execution(results, exec_summary(results, q.workers));

            t0 = monotonic_seconds();
            std::vector<double> task_values(results.size());
            for (std::size_t i = 0; i < results.size(); ++i) {
                task_values[i] = outcome_expectation(results[i].outcomes, tasks[i].word);
            }
            value += term.coefficient * reconstruct(task_values, generated.plan);
            t1 = monotonic_seconds();
            record.t_rec_s += t1 - t0;
        }
    } catch (const std::exception& e) {
        record.t_total_s = monotonic_seconds() - t_start;
        record.t_other_s = record.t_total_s -
                           (record.t_part_s + record.t_gen_s + record.t_exec_s + record.t_rec_s);
        record.value = std::nan("");
        record.error = e.what();
        sink.append(record);
        throw;
    }
    record.t_total_s = monotonic_seconds() - t_start;
    record.t_other_s = record.t_total_s - (record.t_part_s + record.t_gen_s + record.t_exec_s + record.t_rec_s);
    record.value = value;
    sink.append(record);
    return value;
}

double estimate(const EstimatorQuery& query, RecordSink& sink) {
    WorkerPool pool(query.workers);
    return estimate(query, sink, pool);
}

Estimator::Estimator(EstimatorConfig config, RecordSink& sink)
    : config_(std::move(config)), sink_(sink), pool_(std::make_unique<WorkerPool>(config_.workers)) {
    config_.policy.validate();
    config_.straggler.validate();
    parse_cut_label(config_.cut_label);
}

double Estimator::operator()(const ParamCircuit& circuit, const PauliObservable& observable, Phase phase) {
    EstimatorQuery q;
    q.circuit = circuit;
    q.observable = observable;
    q.cut_label = config_.cut_label;
    q.shots = config_.shots;
    q.workers = config_.workers;
    q.policy = config_.policy;
    q.straggler = config_.straggler;
    q.run_id = config_.run_id;
    q.dataset = config_.dataset;
    q.query_idx = next_query_++;
    q.seed = config_.seed;
    q.phase = phase;
    return estimate(q, sink_, *pool_, hooks_);
}

std::vector<double> Estimator::estimate_batch(std::span<const Item> items, Phase phase) {
    std::vector<double> values;
    values.reserve(items.size());
    for (const Item& item : items) values.push_back((*this)(item.circuit, item.observable, phase));
    return values;
}

}  // namespace cutpipe
