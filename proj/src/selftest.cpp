#include "cutpipe/selftest.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "cutpipe/estimator.hpp"
#include "cutpipe/records.hpp"
#include "cutpipe/training.hpp"

namespace cutpipe {

namespace {

constexpr GateKind kOneQubit[] = {GateKind::H, GateKind::X, GateKind::S, GateKind::Sdg,
                                  GateKind::RX, GateKind::RY, GateKind::RZ, GateKind::P};

Gate random_1q(int wire, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> pick(0, 7);
    std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
    const GateKind k = kOneQubit[pick(rng)];
    return is_parametric(k) ? Gate::rotation(k, wire, angle(rng)) : Gate::fixed(k, wire);
}

Gate random_cx(int lo, int hi, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> w(lo, hi);
    const int a = w(rng);
    int b = w(rng);
    while (b == a) b = w(rng);
    return Gate::cx(a, b);
}

std::string random_word(int n, std::mt19937_64& rng) {
    static constexpr char kLetters[] = {'I', 'X', 'Y', 'Z'};
    std::uniform_int_distribution<int> pick(0, 3);
    std::string word(static_cast<std::size_t>(n), 'I');
    for (auto& ch : word) ch = kLetters[pick(rng)];
    return word;
}

CheckResult fail(std::string name, std::string detail) { return {std::move(name), false, std::move(detail)}; }

QueryRecord random_record(std::size_t i, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> small(0, 3);
    static const char* kPhases[] = {"train", "grad", "eval", "robust"};
    QueryRecord r;
    r.run_id = "abcdef" + std::to_string(100000 + i % 900000).substr(0, 6);
    r.query_idx = i;
    r.phase = kPhases[small(rng)];
    r.dataset = i % 7 == 0 ? "data \"quoted\", with comma" : "iris";
    r.n_qubits = 1 + small(rng);
    r.n_cuts = small(rng);
    r.cut_label = r.n_cuts == 0 ? "cut0" : "cut" + std::to_string(r.n_cuts) + "@1";
    r.n_subexperiments = 1ULL << (3 * r.n_cuts);
    r.n_tasks = r.n_subexperiments * static_cast<std::uint64_t>(r.n_cuts + 1);
    r.shots = i % 3 == 0 ? 0 : 1024;
    r.workers = 1 + small(rng) * 5;
    r.policy_mode = i % 2 ? "eager" : "staggered";
    r.batch_size = 1 + i % 9;
    r.inter_batch_delay_s = u(rng) * 0.01;
    r.straggler_p = u(rng);
    r.straggler_delay_s = u(rng) * 0.1;
    r.seed = rng();
    r.t_part_s = u(rng) * 1e-3;
    r.t_gen_s = u(rng) * 1e-3;
    r.t_exec_s = u(rng);
    r.t_rec_s = u(rng) * 1e-2;
    r.t_total_s = r.t_part_s + r.t_gen_s + r.t_exec_s + r.t_rec_s + u(rng) * 1e-4;
    r.t_other_s = r.t_total_s - (r.t_part_s + r.t_gen_s + r.t_exec_s + r.t_rec_s);
    r.value = 2.0 * u(rng) - 1.0;
    if (i % 97 == 0) {
        r.value = std::numeric_limits<double>::quiet_NaN();
        r.error = "simulated failure #" + std::to_string(i);
    }
    return r;
}

}  // namespace

ParamCircuit random_circuit(int n_qubits, std::size_t n_gates, std::mt19937_64& rng) {
    ParamCircuit c;
    c.n_qubits = n_qubits;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> wire(0, n_qubits - 1);
    for (std::size_t i = 0; i < n_gates; ++i) {
        if (n_qubits > 1 && u(rng) < 0.3) {
            c.gates.push_back(random_cx(0, n_qubits - 1, rng));
        } else {
            c.gates.push_back(random_1q(wire(rng), rng));
        }
    }
    return c;
}

CutCase random_cut_case(int n_qubits, int n_cuts, std::mt19937_64& rng) {
    CutCase cc;
    cc.circuit.n_qubits = n_qubits;
    cc.plan.label = "cut" + std::to_string(n_cuts);

    // Block k spans wires [bounds[k], bounds[k + 1]].
    std::vector<int> bounds{0};
    std::uniform_int_distribution<int> wire(0, n_qubits - 1);
    std::vector<int> shared(static_cast<std::size_t>(n_cuts));
    for (auto& s : shared) s = wire(rng);
    std::sort(shared.begin(), shared.end());
    bounds.insert(bounds.end(), shared.begin(), shared.end());
    bounds.push_back(n_qubits - 1);

    std::uniform_int_distribution<int> extra(0, 6);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k <= n_cuts; ++k) {
        const int lo = bounds[static_cast<std::size_t>(k)];
        const int hi = bounds[static_cast<std::size_t>(k) + 1];
        const std::size_t start = cc.circuit.gates.size();
        if (k > 0) cc.plan.cuts.push_back({lo, start});
        auto& g = cc.circuit.gates;
        // Starts on the shared wire so the cut lands right before this block.
        g.push_back(random_1q(lo, rng));
        for (int q = lo + 1; q <= hi; ++q) g.push_back(random_1q(q, rng));
        for (int q = lo; q < hi; ++q) g.push_back(u(rng) < 0.5 ? Gate::cx(q, q + 1) : Gate::cx(q + 1, q));
        std::uniform_int_distribution<int> in_block(lo, hi);
        for (int e = extra(rng); e > 0; --e) {
            if (hi > lo && u(rng) < 0.4) {
                g.push_back(random_cx(lo, hi, rng));
            } else {
                g.push_back(random_1q(in_block(rng), rng));
            }
        }
    }
    cc.word = random_word(n_qubits, rng);
    return cc;
}

double exact_cut_expectation(const ParamCircuit& circuit, const std::string& word, const CutPlan& plan,
                             const CutTermTable& table) {
    const auto fragments = partition_problem(circuit, word, plan);
    const auto gen = generate_subexperiments(fragments, table);
    std::vector<double> values;
    values.reserve(gen.plan.n_tasks());
    for (const auto& sub : gen.subexperiments) {
        for (const auto& exe : sub.executables) {
            values.push_back(expectation(simulate(exe.circuit), exe.word));
        }
    }
    return reconstruct(values, gen.plan);
}

double uncut_expectation(const ParamCircuit& circuit, const std::string& word) {
    return expectation(simulate(circuit), word);
}

CheckResult check_oracle_equality(std::size_t n_circuits, std::uint64_t seed, const CutTermTable& table) {
    const std::string name = "oracle-equality";
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> width(1, 6);
    std::uniform_int_distribution<int> cuts(0, 2);
    double worst = 0.0;
    std::size_t checked = 0;
    try {
        for (std::size_t i = 0; i < n_circuits; ++i) {
            const int n = width(rng);
            const int c = cuts(rng);
            CutCase cc;
            if (i % 4 == 3 && n >= 2 && c <= n - 1) {
                // Model circuits with label-resolved cuts.
                std::uniform_real_distribution<double> a(-std::numbers::pi, std::numbers::pi);
                std::vector<double> x(static_cast<std::size_t>(n)), theta(parameter_count(n, {}));
                for (auto& v : x) v = a(rng);
                for (auto& v : theta) v = a(rng);
                cc.circuit = model_circuit(x, theta, {});
                std::string label = "cut" + std::to_string(c);
                if (c > 0) {
                    label += "@";
                    for (int k = 0; k < c; ++k) label += (k ? "," : "") + std::to_string(k + (n - 1 - c) / 2);
                }
                cc.plan = resolve_cut_label(label, cc.circuit);
                cc.word = random_word(n, rng);
            } else {
                cc = random_cut_case(n, c, rng);
            }
            const double want = uncut_expectation(cc.circuit, cc.word);
            const double got = exact_cut_expectation(cc.circuit, cc.word, cc.plan, table);
            const double err = std::abs(want - got);
            worst = std::max(worst, err);
            ++checked;
            if (!(err <= 1e-9)) {
                std::ostringstream msg;
                msg << "circuit " << i << " (n=" << n << ", c=" << c << ", word=" << cc.word << "): uncut " << want
                    << " vs reconstructed " << got;
                return fail(name, msg.str());
            }
        }
    } catch (const std::exception& e) {
        return fail(name, std::string("circuit ") + std::to_string(checked) + ": " + e.what());
    }
    std::ostringstream msg;
    msg << checked << " circuits, max abs error " << worst;
    return {name, true, msg.str()};
}

CheckResult check_count_laws(int max_cuts) {
    const std::string name = "count-law";
    std::mt19937_64 rng(17);
    try {
        for (int c = 0; c <= max_cuts; ++c) {
            const auto cc = random_cut_case(std::max(2, c + 1), c, rng);
            const auto fragments = partition_problem(cc.circuit, cc.word, cc.plan);
            const auto gen = generate_subexperiments(fragments, canonical_cut_terms());
            const std::size_t k = std::size_t{1} << (3 * c);
            double l1 = 0.0;
            for (double a : gen.plan.alpha) l1 += std::abs(a);
            const double want_l1 = std::ldexp(1.0, 2 * c);
            if (cut_count(fragments) != static_cast<std::size_t>(c) || fragments.size() != static_cast<std::size_t>(c + 1) ||
                gen.subexperiments.size() != k || gen.plan.n_terms() != k ||
                gen.plan.n_tasks() != k * static_cast<std::size_t>(c + 1) || l1 != want_l1) {
                std::ostringstream msg;
                msg << "c=" << c << ": K=" << gen.plan.n_terms() << " tasks=" << gen.plan.n_tasks()
                    << " sum|alpha|=" << l1;
                return fail(name, msg.str());
            }
        }
    } catch (const std::exception& e) {
        return fail(name, e.what());
    }
    return {name, true, "c=0.." + std::to_string(max_cuts)};
}

CheckResult check_gradient(std::size_t n_instances, std::uint64_t seed) {
    const std::string name = "gradient";
    constexpr double h = 1e-5;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> width(1, 4);
    std::uniform_int_distribution<int> reps(1, 2);
    std::uniform_real_distribution<double> a(-std::numbers::pi, std::numbers::pi);
    NullSink sink;
    double worst = 0.0;
    try {
        for (std::size_t i = 0; i < n_instances; ++i) {
            const int n = width(rng);
            const ModelConfig model{reps(rng), reps(rng)};
            std::vector<double> x(static_cast<std::size_t>(n)), theta(parameter_count(n, model));
            for (auto& v : x) v = a(rng);
            for (auto& v : theta) v = a(rng);
            EstimatorConfig cfg;
            cfg.cut_label = (n >= 2 && model.ansatz_reps == 1 && i % 2) ? "cut1@" + std::to_string(n / 2 - 1) : "cut0";
            Estimator est(cfg, sink);
            const std::string word(static_cast<std::size_t>(n), 'Z');
            auto f = [&](std::vector<double> xs, std::vector<double> ts) {
                return uncut_expectation(model_circuit(xs, ts, model), word);
            };
            for (ParamRole role : {ParamRole::Weight, ParamRole::Feature}) {
                const auto grad = shift_rule_gradient(x, theta, role, est, model, Phase::Grad);
                auto& vec = role == ParamRole::Weight ? theta : x;
                for (std::size_t k = 0; k < vec.size(); ++k) {
                    auto plus = vec, minus = vec;
                    plus[k] += h;
                    minus[k] -= h;
                    const double fd = role == ParamRole::Weight ? (f(x, plus) - f(x, minus)) / (2 * h)
                                                                : (f(plus, theta) - f(minus, theta)) / (2 * h);
                    const double err = std::abs(fd - grad[k]);
                    worst = std::max(worst, err);
                    if (!(err < 1e-6)) {
                        std::ostringstream msg;
                        msg << "instance " << i << " param " << k << ": shift " << grad[k] << " vs fd " << fd;
                        return fail(name, msg.str());
                    }
                }
            }
        }
    } catch (const std::exception& e) {
        return fail(name, e.what());
    }
    std::ostringstream msg;
    msg << n_instances << " instances, max abs error " << worst;
    return {name, true, msg.str()};
}

CheckResult check_schema_round_trip(std::size_t n_records, std::uint64_t seed) {
    const std::string name = "schema-round-trip";
    std::mt19937_64 rng(seed);
    std::vector<QueryRecord> written;
    written.reserve(n_records);
    std::ostringstream out;
    std::vector<std::size_t> bad_lines;
    std::size_t line = 0;
    for (std::size_t i = 0; i < n_records; ++i) {
        if (i % 1000 == 500) {
            out << (i % 2000 == 500 ? "{\"run_id\": 3}" : "not json at all") << '\n';
            bad_lines.push_back(++line);
        }
        written.push_back(random_record(i, rng));
        out << to_jsonl(written.back()) << '\n';
        ++line;
    }
    std::istringstream in(out.str());
    const auto load = read_records(in);
    if (load.records.size() != written.size()) {
        return fail(name, "parsed " + std::to_string(load.records.size()) + " of " + std::to_string(written.size()));
    }
    for (std::size_t i = 0; i < written.size(); ++i) {
        if (!(load.records[i] == written[i])) return fail(name, "record " + std::to_string(i) + " changed");
    }
    if (load.rejections.size() != bad_lines.size()) {
        return fail(name, std::to_string(load.rejections.size()) + " rejections, expected " +
                              std::to_string(bad_lines.size()));
    }
    for (std::size_t i = 0; i < bad_lines.size(); ++i) {
        if (load.rejections[i].line != bad_lines[i]) {
            return fail(name, "rejection reported at line " + std::to_string(load.rejections[i].line) +
                                  ", expected " + std::to_string(bad_lines[i]));
        }
    }
    return {name, true, std::to_string(n_records) + " records, " + std::to_string(bad_lines.size()) + " rejections"};
}

std::vector<CheckResult> run_selftest(const SelftestOptions& opts) {
    const CutTermTable& table = opts.table ? *opts.table : canonical_cut_terms();
    std::vector<CheckResult> out;
    out.push_back(check_oracle_equality(opts.quick ? 60 : 240, opts.seed, table));
    out.push_back(check_count_laws(3));
    out.push_back(check_gradient(opts.quick ? 10 : 50, mix_seed(opts.seed, 1)));
    out.push_back(check_schema_round_trip(opts.quick ? 1000 : 10000, mix_seed(opts.seed, 2)));
    return out;
}

}  // namespace cutpipe
