#include "cutpipe/cutting.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

namespace cutpipe {

namespace {

struct DisjointSet {
    std::vector<std::size_t> parent;

    explicit DisjointSet(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }

    std::size_t find(std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
};

void append_prep(std::vector<Gate>& gates, PrepState s, int wire) {
    switch (s) {
        case PrepState::Zero: break;
        case PrepState::One: gates.push_back(Gate::fixed(GateKind::X, wire)); break;
        case PrepState::Plus: gates.push_back(Gate::fixed(GateKind::H, wire)); break;
        case PrepState::Minus:
            gates.push_back(Gate::fixed(GateKind::X, wire));
            gates.push_back(Gate::fixed(GateKind::H, wire));
            break;
        case PrepState::PlusI:
            gates.push_back(Gate::fixed(GateKind::H, wire));
            gates.push_back(Gate::fixed(GateKind::S, wire));
            break;
        case PrepState::MinusI:
            gates.push_back(Gate::fixed(GateKind::H, wire));
            gates.push_back(Gate::fixed(GateKind::Sdg, wire));
            break;
    }
}

}  // namespace

std::vector<int> parse_cut_label(const std::string& label) {
    auto bad = [&] { return std::invalid_argument("malformed cut label '" + label + "'"); };
    if (label.rfind("cut", 0) != 0) throw bad();
    const auto at = label.find('@');
    const std::string count_text = label.substr(3, at == std::string::npos ? std::string::npos : at - 3);
    if (count_text.empty() || !std::all_of(count_text.begin(), count_text.end(), ::isdigit)) throw bad();
    const int count = std::stoi(count_text);
    std::vector<int> wires;
    if (at != std::string::npos) {
        std::string rest = label.substr(at + 1);
        std::size_t start = 0;
        while (start <= rest.size()) {
            const auto comma = rest.find(',', start);
            const std::string item = rest.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
            if (item.empty() || !std::all_of(item.begin(), item.end(), ::isdigit)) throw bad();
            wires.push_back(std::stoi(item));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
    }
    if (static_cast<int>(wires.size()) != count) {
        throw std::invalid_argument("cut label '" + label + "' names " + std::to_string(wires.size()) +
                                    " wires but declares " + std::to_string(count) + " cuts");
    }
    if (std::set<int>(wires.begin(), wires.end()).size() != wires.size()) {
        throw std::invalid_argument("cut label '" + label + "' repeats a wire");
    }
    return wires;
}

CutPlan resolve_cut_label(const std::string& label, const ParamCircuit& circuit) {
    CutPlan plan{label, {}};
    for (int q : parse_cut_label(label)) {
        if (q < 0 || q >= circuit.n_qubits) {
            throw std::invalid_argument("cut wire " + std::to_string(q) + " outside circuit width");
        }
        std::optional<std::size_t> pos;
        for (std::size_t i = 0; i < circuit.gates.size() && !pos; ++i) {
            const Gate& g = circuit.gates[i];
            if (g.kind == GateKind::CX && g.wires[0] == q && g.wires[1] == q + 1) pos = i;
        }
        if (!pos) {
            for (std::size_t i = circuit.gates.size(); i-- > 0;) {
                if (circuit.gates[i].touches(q)) {
                    pos = i;
                    break;
                }
            }
        }
        if (!pos) throw std::invalid_argument("cut wire " + std::to_string(q) + " has no gates");
        plan.cuts.push_back({q, *pos});
    }
    return plan;
}

std::vector<Fragment> partition_problem(const ParamCircuit& circuit, const std::string& word,
                                        const CutPlan& plan) {
    circuit.validate();
    validate_word(word, circuit.n_qubits);
    const int n = circuit.n_qubits;
    const std::size_t n_cuts = plan.cuts.size();

    // Gate indices touching each wire.
    std::vector<std::vector<std::size_t>> ops(n);
    for (std::size_t i = 0; i < circuit.gates.size(); ++i) {
        for (int w : circuit.gates[i].wires) ops[w].push_back(i);
    }

    // Per cut: (wire, number of wire gates before the cut).
    std::vector<std::size_t> cut_ordinal(n_cuts);
    std::vector<std::vector<std::size_t>> boundaries(n);
    for (std::size_t c = 0; c < n_cuts; ++c) {
        const CutPoint& cp = plan.cuts[c];
        if (cp.wire < 0 || cp.wire >= n || cp.position > circuit.gates.size()) {
            throw std::invalid_argument("cut " + std::to_string(c) + " out of range");
        }
        const auto& wops = ops[cp.wire];
        const auto k = static_cast<std::size_t>(
            std::lower_bound(wops.begin(), wops.end(), cp.position) - wops.begin());
        if (k == 0 || k == wops.size()) {
            throw std::invalid_argument("cut " + std::to_string(c) + " on wire " + std::to_string(cp.wire) +
                                        " is not interior");
        }
        cut_ordinal[c] = k;
        boundaries[cp.wire].push_back(k);
    }
    std::vector<std::size_t> seg_base(n + 1, 0);
    for (int q = 0; q < n; ++q) {
        auto& b = boundaries[q];
        std::sort(b.begin(), b.end());
        if (std::adjacent_find(b.begin(), b.end()) != b.end()) {
            throw std::invalid_argument("duplicate cut on wire " + std::to_string(q));
        }
        seg_base[q + 1] = seg_base[q] + b.size() + 1;
    }
    const std::size_t n_segments = seg_base[n];
    auto segment_of = [&](int q, std::size_t ordinal) {
        const auto& b = boundaries[q];
        return seg_base[q] + static_cast<std::size_t>(std::upper_bound(b.begin(), b.end(), ordinal) - b.begin());
    };

    // Segment of every (gate, wire) incidence.
    std::vector<std::vector<std::size_t>> gate_segments(circuit.gates.size());
    for (std::size_t i = 0; i < circuit.gates.size(); ++i) {
        for (int q : circuit.gates[i].wires) {
            const auto t = static_cast<std::size_t>(std::lower_bound(ops[q].begin(), ops[q].end(), i) - ops[q].begin());
            gate_segments[i].push_back(segment_of(q, t));
        }
    }

    DisjointSet dsu(n_segments);
    if (n_cuts == 0) {
        for (std::size_t s = 1; s < n_segments; ++s) dsu.unite(0, s);
    }
    for (const auto& segs : gate_segments) {
        for (std::size_t s : segs) dsu.unite(segs.front(), s);
    }

    // Fragment order: by earliest gate, gate-less segments last by wire.
    std::vector<std::size_t> first_gate(n_segments, circuit.gates.size());
    for (std::size_t i = 0; i < circuit.gates.size(); ++i) {
        for (std::size_t s : gate_segments[i]) first_gate[s] = std::min(first_gate[s], i);
    }
    std::map<std::size_t, std::pair<std::size_t, std::size_t>> roots;  // root -> (min gate, min segment)
    for (std::size_t s = 0; s < n_segments; ++s) {
        auto [it, inserted] = roots.try_emplace(dsu.find(s), first_gate[s], s);
        if (!inserted) {
            it->second = std::min(it->second, std::make_pair(first_gate[s], s));
        }
    }
    std::vector<std::pair<std::pair<std::size_t, std::size_t>, std::size_t>> order;
    for (const auto& [root, key] : roots) order.push_back({key, root});
    std::sort(order.begin(), order.end());
    std::map<std::size_t, std::size_t> fragment_of_root;
    for (std::size_t f = 0; f < order.size(); ++f) fragment_of_root[order[f].second] = f;
    const std::size_t n_fragments = order.size();
    auto fragment_of_segment = [&](std::size_t s) { return fragment_of_root.at(dsu.find(s)); };

    // Dependency checks: each cut links upstream -> downstream fragment.
    std::vector<std::size_t> upstream(n_cuts), downstream(n_cuts);
    std::vector<std::set<std::size_t>> succ(n_fragments), neighbours(n_fragments);
    for (std::size_t c = 0; c < n_cuts; ++c) {
        const int q = plan.cuts[c].wire;
        const auto& b = boundaries[q];
        const auto r = static_cast<std::size_t>(std::lower_bound(b.begin(), b.end(), cut_ordinal[c]) - b.begin());
        upstream[c] = fragment_of_segment(seg_base[q] + r);
        downstream[c] = fragment_of_segment(seg_base[q] + r + 1);
        if (upstream[c] == downstream[c]) {
            throw std::invalid_argument("cut plan '" + plan.label + "' induces a cyclic fragment dependency");
        }
        succ[upstream[c]].insert(downstream[c]);
        neighbours[upstream[c]].insert(downstream[c]);
        neighbours[downstream[c]].insert(upstream[c]);
    }
    {
        std::vector<std::size_t> indegree(n_fragments, 0);
        for (const auto& s : succ) {
            for (std::size_t d : s) ++indegree[d];
        }
        std::vector<std::size_t> ready;
        for (std::size_t f = 0; f < n_fragments; ++f) {
            if (indegree[f] == 0) ready.push_back(f);
        }
        std::size_t visited = 0;
        while (!ready.empty()) {
            const std::size_t f = ready.back();
            ready.pop_back();
            ++visited;
            for (std::size_t d : succ[f]) {
                if (--indegree[d] == 0) ready.push_back(d);
            }
        }
        if (visited != n_fragments) {
            throw std::invalid_argument("cut plan '" + plan.label + "' induces a cyclic fragment dependency");
        }
    }
    for (const auto& nb : neighbours) {
        if (nb.size() > 2) {
            throw std::invalid_argument("cut plan '" + plan.label + "' does not form a fragment chain");
        }
    }

    // Materialise fragments.
    std::vector<Fragment> fragments(n_fragments);
    std::vector<int> segment_wire(n_segments);  // fragment wire per segment
    std::vector<int> segment_qubit(n_segments);
    for (int q = 0; q < n; ++q) {
        for (std::size_t s = seg_base[q]; s < seg_base[q + 1]; ++s) segment_qubit[s] = q;
    }
    for (std::size_t s = 0; s < n_segments; ++s) {
        Fragment& f = fragments[fragment_of_segment(s)];
        if (f.wire_map.empty()) f.wire_map.assign(n, -1);
        const int q = segment_qubit[s];
        if (f.wire_map[q] != -1) {
            throw std::invalid_argument("cut plan '" + plan.label + "' induces a cyclic fragment dependency");
        }
        f.wire_map[q] = f.subcircuit.n_qubits++;
        segment_wire[s] = f.wire_map[q];
        const bool last_segment = (s + 1 == seg_base[q + 1]);
        f.local_word.push_back(last_segment ? word[q] : 'I');
    }
    std::vector<std::vector<std::size_t>> gate_index_map(n_fragments);
    std::vector<std::size_t> new_index(circuit.gates.size());
    std::vector<std::size_t> gate_fragment(circuit.gates.size());
    for (std::size_t i = 0; i < circuit.gates.size(); ++i) {
        const auto& segs = gate_segments[i];
        const std::size_t fid = fragment_of_segment(segs.front());
        Fragment& f = fragments[fid];
        Gate g = circuit.gates[i];
        for (std::size_t k = 0; k < g.wires.size(); ++k) g.wires[k] = segment_wire[segs[k]];
        new_index[i] = f.subcircuit.gates.size();
        gate_fragment[i] = fid;
        f.subcircuit.gates.push_back(std::move(g));
    }
    for (const ParamSlot& slot : circuit.param_slots) {
        ParamSlot moved = slot;
        moved.gate_index = new_index[slot.gate_index];
        fragments[gate_fragment[slot.gate_index]].subcircuit.param_slots.push_back(moved);
    }
    for (std::size_t c = 0; c < n_cuts; ++c) {
        const int q = plan.cuts[c].wire;
        const auto& b = boundaries[q];
        const auto r = static_cast<std::size_t>(std::lower_bound(b.begin(), b.end(), cut_ordinal[c]) - b.begin());
        fragments[upstream[c]].out_stubs.push_back({segment_wire[seg_base[q] + r], c});
        fragments[downstream[c]].in_stubs.push_back({segment_wire[seg_base[q] + r + 1], c});
    }
    return fragments;
}

std::string_view prep_name(PrepState s) {
    switch (s) {
        case PrepState::Zero: return "0";
        case PrepState::One: return "1";
        case PrepState::Plus: return "+";
        case PrepState::Minus: return "-";
        case PrepState::PlusI: return "+i";
        case PrepState::MinusI: return "-i";
    }
    return "?";
}

const CutTermTable& canonical_cut_terms() {
    static const CutTermTable table = {{
        {'I', PrepState::Zero, 0.5},
        {'I', PrepState::One, 0.5},
        {'Z', PrepState::Zero, 0.5},
        {'Z', PrepState::One, -0.5},
        {'X', PrepState::Plus, 0.5},
        {'X', PrepState::Minus, -0.5},
        {'Y', PrepState::PlusI, 0.5},
        {'Y', PrepState::MinusI, -0.5},
    }};
    return table;
}

std::size_t cut_count(const std::vector<Fragment>& fragments) {
    std::size_t c = 0;
    for (const Fragment& f : fragments) c += f.out_stubs.size();
    return c;
}

GeneratedSubexperiments generate_subexperiments(const std::vector<Fragment>& fragments,
                                                const CutTermTable& table) {
    if (fragments.empty()) throw std::invalid_argument("no fragments to expand");
    const std::size_t n_cuts = cut_count(fragments);
    const std::size_t n_fragments = fragments.size();
    std::size_t n_terms = 1;
    for (std::size_t c = 0; c < n_cuts; ++c) n_terms *= table.size();

    GeneratedSubexperiments out;
    out.plan.n_fragments = n_fragments;
    out.plan.alpha.resize(n_terms);
    out.plan.task_index.resize(n_terms);
    out.subexperiments.reserve(n_terms);

    for (std::size_t j = 0; j < n_terms; ++j) {
        Subexperiment sub;
        sub.term_id = j;
        double alpha = 1.0;
        std::size_t rest = j;
        for (std::size_t c = 0; c < n_cuts; ++c) {
            sub.assignment.push_back(table[rest % table.size()]);
            alpha *= sub.assignment.back().coefficient;
            rest /= table.size();
        }
        out.plan.alpha[j] = alpha;

        for (std::size_t f = 0; f < n_fragments; ++f) {
            const Fragment& frag = fragments[f];
            Executable exe;
            exe.circuit.n_qubits = frag.subcircuit.n_qubits;
            for (const Stub& stub : frag.in_stubs) {
                append_prep(exe.circuit.gates, sub.assignment[stub.cut_id].prep, stub.fragment_wire);
            }
            const std::size_t offset = exe.circuit.gates.size();
            exe.circuit.gates.insert(exe.circuit.gates.end(), frag.subcircuit.gates.begin(),
                                     frag.subcircuit.gates.end());
            for (ParamSlot slot : frag.subcircuit.param_slots) {
                slot.gate_index += offset;
                exe.circuit.param_slots.push_back(slot);
            }
            exe.word = frag.local_word;
            for (const Stub& stub : frag.out_stubs) {
                exe.word[stub.fragment_wire] = sub.assignment[stub.cut_id].basis;
            }
            sub.executables.push_back(std::move(exe));
            out.plan.task_index[j].push_back(j * n_fragments + f);
        }
        out.subexperiments.push_back(std::move(sub));
    }
    return out;
}

double reconstruct(std::span<const double> task_values, const ReconstructionPlan& plan) {
    if (task_values.size() != plan.n_tasks()) {
        throw std::logic_error("reconstruction expected " + std::to_string(plan.n_tasks()) +
                               " task results, got " + std::to_string(task_values.size()));
    }
    double total = 0.0;
    for (std::size_t j = 0; j < plan.alpha.size(); ++j) {
        double product = plan.alpha[j];
        for (std::size_t t : plan.task_index[j]) product *= task_values[t];
        total += product;
    }
    return total;
}

}  // namespace cutpipe
