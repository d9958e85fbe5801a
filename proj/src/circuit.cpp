#include "cutpipe/circuit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace cutpipe {

namespace {

using cd = std::complex<double>;
constexpr double kInvSqrt2 = 0.70710678118654752440;

std::string wire_error(std::size_t gate_index, const char* what) {
    return "gate " + std::to_string(gate_index) + ": " + what;
}

}  // namespace

std::string_view gate_name(GateKind kind) {
    switch (kind) {
        case GateKind::H: return "H";
        case GateKind::X: return "X";
        case GateKind::S: return "S";
        case GateKind::Sdg: return "Sdg";
        case GateKind::RX: return "RX";
        case GateKind::RY: return "RY";
        case GateKind::RZ: return "RZ";
        case GateKind::P: return "P";
        case GateKind::CX: return "CX";
    }
    return "?";
}

bool is_parametric(GateKind kind) {
    return kind == GateKind::RX || kind == GateKind::RY || kind == GateKind::RZ ||
           kind == GateKind::P;
}

Gate Gate::fixed(GateKind kind, int wire) { return Gate{kind, {wire}, std::nullopt}; }

Gate Gate::rotation(GateKind kind, int wire, double angle) { return Gate{kind, {wire}, angle}; }

Gate Gate::cx(int control, int target) { return Gate{GateKind::CX, {control, target}, std::nullopt}; }

bool Gate::touches(int wire) const {
    return std::find(wires.begin(), wires.end(), wire) != wires.end();
}

void ParamCircuit::validate() const {
    if (n_qubits < 1 || n_qubits > kMaxQubits) {
        throw std::invalid_argument("circuit width must be in [1, " + std::to_string(kMaxQubits) +
                                    "], got " + std::to_string(n_qubits));
    }
    for (std::size_t i = 0; i < gates.size(); ++i) {
        const Gate& g = gates[i];
        const std::size_t arity = g.kind == GateKind::CX ? 2 : 1;
        if (g.wires.size() != arity) throw std::invalid_argument(wire_error(i, "wrong arity"));
        for (int w : g.wires) {
            if (w < 0 || w >= n_qubits) throw std::invalid_argument(wire_error(i, "wire out of range"));
        }
        if (arity == 2 && g.wires[0] == g.wires[1]) {
            throw std::invalid_argument(wire_error(i, "repeated wire"));
        }
        if (is_parametric(g.kind)) {
            if (g.angle && !std::isfinite(*g.angle)) {
                throw std::invalid_argument(wire_error(i, "non-finite angle"));
            }
        } else if (g.angle) {
            throw std::invalid_argument(wire_error(i, "angle on a fixed gate"));
        }
    }
    for (const ParamSlot& slot : param_slots) {
        if (slot.gate_index >= gates.size() || !is_parametric(gates[slot.gate_index].kind)) {
            throw std::invalid_argument("parameter slot does not reference a rotation gate");
        }
    }
}

bool ParamCircuit::is_bound() const {
    return std::all_of(gates.begin(), gates.end(),
                       [](const Gate& g) { return !is_parametric(g.kind) || g.angle.has_value(); });
}

PauliObservable PauliObservable::single(std::string word, double coefficient) {
    return PauliObservable{{PauliTerm{coefficient, std::move(word)}}};
}

PauliObservable PauliObservable::z_all(int n_qubits) {
    return single(std::string(static_cast<std::size_t>(n_qubits), 'Z'));
}

int PauliObservable::width() const {
    return terms.empty() ? 0 : static_cast<int>(terms.front().word.size());
}

void PauliObservable::validate() const {
    if (terms.empty()) throw std::invalid_argument("observable has no terms");
    const int n = width();
    for (const PauliTerm& t : terms) {
        if (!std::isfinite(t.coefficient)) throw std::invalid_argument("non-finite coefficient");
        validate_word(t.word, n);
    }
}

void validate_word(std::string_view word, int n_qubits) {
    if (static_cast<int>(word.size()) != n_qubits) {
        throw std::invalid_argument("Pauli word '" + std::string(word) + "' has length " +
                                    std::to_string(word.size()) + ", expected " +
                                    std::to_string(n_qubits));
    }
    for (char c : word) {
        if (c != 'I' && c != 'X' && c != 'Y' && c != 'Z') {
            throw std::invalid_argument("invalid Pauli letter '" + std::string(1, c) + "'");
        }
    }
}

std::uint32_t word_mask(std::string_view word) {
    std::uint32_t mask = 0;
    for (std::size_t i = 0; i < word.size(); ++i) {
        if (word[i] != 'I') mask |= 1U << i;
    }
    return mask;
}

// ---------------------------------------------------------------------------

Statevector::Statevector(int n_qubits) : n_qubits_(n_qubits) {
    if (n_qubits < 1 || n_qubits > kMaxQubits) {
        throw std::invalid_argument("statevector width out of range");
    }
    amps_.assign(std::size_t{1} << n_qubits, cd{0.0, 0.0});
    amps_[0] = 1.0;
}

void Statevector::apply_1q(int wire, const cd (&m)[2][2]) {
    const std::size_t stride = std::size_t{1} << wire;
    const std::size_t dim = amps_.size();
    for (std::size_t base = 0; base < dim; base += 2 * stride) {
        for (std::size_t i = base; i < base + stride; ++i) {
            const cd a0 = amps_[i];
            const cd a1 = amps_[i + stride];
            amps_[i] = m[0][0] * a0 + m[0][1] * a1;
            amps_[i + stride] = m[1][0] * a0 + m[1][1] * a1;
        }
    }
}

void Statevector::apply_cx(int control, int target) {
    const std::size_t cbit = std::size_t{1} << control;
    const std::size_t tbit = std::size_t{1} << target;
    for (std::size_t i = 0; i < amps_.size(); ++i) {
        if ((i & cbit) && !(i & tbit)) std::swap(amps_[i], amps_[i | tbit]);
    }
}

void Statevector::apply(const Gate& gate) {
    const cd I{0.0, 1.0};
    auto angle = [&] {
        if (!gate.angle) throw std::invalid_argument("unbound parameter on " + std::string(gate_name(gate.kind)));
        return *gate.angle;
    };
    switch (gate.kind) {
        case GateKind::H: {
            const cd m[2][2] = {{kInvSqrt2, kInvSqrt2}, {kInvSqrt2, -kInvSqrt2}};
            apply_1q(gate.wires[0], m);
            break;
        }
        case GateKind::X: {
            const cd m[2][2] = {{0.0, 1.0}, {1.0, 0.0}};
            apply_1q(gate.wires[0], m);
            break;
        }
        case GateKind::S: {
            const cd m[2][2] = {{1.0, 0.0}, {0.0, I}};
            apply_1q(gate.wires[0], m);
            break;
        }
        case GateKind::Sdg: {
            const cd m[2][2] = {{1.0, 0.0}, {0.0, -I}};
            apply_1q(gate.wires[0], m);
            break;
        }
        case GateKind::RX: {
            const double t = angle() / 2;
            const cd m[2][2] = {{std::cos(t), -I * std::sin(t)}, {-I * std::sin(t), std::cos(t)}};
            apply_1q(gate.wires[0], m);
            break;
        }
        case GateKind::RY: {
            const double t = angle() / 2;
            const cd m[2][2] = {{std::cos(t), -std::sin(t)}, {std::sin(t), std::cos(t)}};
            apply_1q(gate.wires[0], m);
            break;
        }
        case GateKind::RZ: {
            const double t = angle() / 2;
            const cd m[2][2] = {{std::polar(1.0, -t), 0.0}, {0.0, std::polar(1.0, t)}};
            apply_1q(gate.wires[0], m);
            break;
        }
        case GateKind::P: {
            const cd m[2][2] = {{1.0, 0.0}, {0.0, std::polar(1.0, angle())}};
            apply_1q(gate.wires[0], m);
            break;
        }
        case GateKind::CX:
            apply_cx(gate.wires[0], gate.wires[1]);
            break;
        default:
            throw std::invalid_argument("unsupported gate kind");
    }
}

double Statevector::norm_squared() const {
    double sum = 0.0;
    for (const cd& a : amps_) sum += std::norm(a);
    return sum;
}

std::vector<double> Statevector::probabilities() const {
    std::vector<double> p(amps_.size());
    std::transform(amps_.begin(), amps_.end(), p.begin(), [](const cd& a) { return std::norm(a); });
    return p;
}

// ---------------------------------------------------------------------------

ParamCircuit build_zfeaturemap(int n_qubits, std::span<const double> x, int reps) {
    if (n_qubits < 1) throw std::invalid_argument("feature map needs at least one qubit");
    if (reps < 1) throw std::invalid_argument("feature map reps must be positive");
    if (x.size() != static_cast<std::size_t>(n_qubits)) {
        throw std::invalid_argument("feature vector length " + std::to_string(x.size()) +
                                    " does not match " + std::to_string(n_qubits) + " qubits");
    }
    ParamCircuit c;
    c.n_qubits = n_qubits;
    for (int r = 0; r < reps; ++r) {
        for (int q = 0; q < n_qubits; ++q) c.gates.push_back(Gate::fixed(GateKind::H, q));
        for (int q = 0; q < n_qubits; ++q) {
            if (!std::isfinite(x[q])) throw std::invalid_argument("non-finite feature value");
            c.param_slots.push_back({c.gates.size(), ParamRole::Feature, static_cast<std::size_t>(q), 2.0});
            c.gates.push_back(Gate::rotation(GateKind::P, q, 2.0 * x[q]));
        }
    }
    return c;
}

ParamCircuit build_realamplitudes(int n_qubits, std::span<const double> theta, int reps) {
    if (n_qubits < 1) throw std::invalid_argument("ansatz needs at least one qubit");
    if (reps < 1) throw std::invalid_argument("ansatz reps must be positive");
    const auto expected = static_cast<std::size_t>(n_qubits) * static_cast<std::size_t>(reps + 1);
    if (theta.size() != expected) {
        throw std::invalid_argument("ansatz expects " + std::to_string(expected) +
                                    " parameters, got " + std::to_string(theta.size()));
    }
    ParamCircuit c;
    c.n_qubits = n_qubits;
    std::size_t k = 0;
    auto ry_layer = [&] {
        for (int q = 0; q < n_qubits; ++q, ++k) {
            c.param_slots.push_back({c.gates.size(), ParamRole::Weight, k, 1.0});
            c.gates.push_back(Gate::rotation(GateKind::RY, q, theta[k]));
        }
    };
    for (int r = 0; r < reps; ++r) {
        ry_layer();
        for (int q = 0; q + 1 < n_qubits; ++q) c.gates.push_back(Gate::cx(q, q + 1));
    }
    ry_layer();
    return c;
}

ParamCircuit compose(const ParamCircuit& first, const ParamCircuit& second) {
    if (first.n_qubits != second.n_qubits) throw std::invalid_argument("compose: width mismatch");
    ParamCircuit out = first;
    const std::size_t offset = first.gates.size();
    out.gates.insert(out.gates.end(), second.gates.begin(), second.gates.end());
    for (ParamSlot slot : second.param_slots) {
        slot.gate_index += offset;
        out.param_slots.push_back(slot);
    }
    return out;
}

void bind(ParamCircuit& circuit, ParamRole role, std::span<const double> values) {
    for (const ParamSlot& slot : circuit.param_slots) {
        if (slot.role != role) continue;
        if (slot.index >= values.size()) throw std::invalid_argument("bind: too few values");
        circuit.gates.at(slot.gate_index).angle = slot.scale * values[slot.index];
    }
}

Statevector simulate(const ParamCircuit& circuit) {
    circuit.validate();
    if (!circuit.is_bound()) throw std::invalid_argument("cannot simulate a circuit with unbound parameters");
    Statevector state(circuit.n_qubits);
    for (const Gate& g : circuit.gates) state.apply(g);
    return state;
}

double expectation(const Statevector& state, std::string_view word) {
    validate_word(word, state.n_qubits());
    std::size_t xmask = 0;
    std::size_t zmask = 0;
    int y_count = 0;
    for (std::size_t q = 0; q < word.size(); ++q) {
        switch (word[q]) {
            case 'X': xmask |= std::size_t{1} << q; break;
            case 'Y': xmask |= std::size_t{1} << q; zmask |= std::size_t{1} << q; ++y_count; break;
            case 'Z': zmask |= std::size_t{1} << q; break;
            default: break;
        }
    }
    // P|b> = i^{#Y} (-1)^{popcount(b & zmask)} |b ^ xmask>
    static const std::complex<double> kIPow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    const std::complex<double> global = kIPow[y_count % 4];
    const auto amps = state.amplitudes();
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t b = 0; b < amps.size(); ++b) {
        const double sign = (__builtin_popcountll(b & zmask) & 1) ? -1.0 : 1.0;
        acc += std::conj(amps[b ^ xmask]) * sign * amps[b];
    }
    return (global * acc).real();
}

double expectation(const Statevector& state, const PauliObservable& observable) {
    observable.validate();
    double total = 0.0;
    for (const PauliTerm& t : observable.terms) total += t.coefficient * expectation(state, t.word);
    return total;
}

void rotate_to_measurement_basis(Statevector& state, std::string_view word) {
    for (std::size_t q = 0; q < word.size(); ++q) {
        const int wire = static_cast<int>(q);
        if (word[q] == 'X') {
            state.apply(Gate::fixed(GateKind::H, wire));
        } else if (word[q] == 'Y') {
            state.apply(Gate::fixed(GateKind::Sdg, wire));
            state.apply(Gate::fixed(GateKind::H, wire));
        }
    }
}

std::vector<std::uint32_t> sample_outcomes(std::span<const double> probabilities,
                                           std::uint32_t shots, std::mt19937_64& rng) {
    if (shots == 0) throw std::invalid_argument("shots must be positive");
    std::vector<double> cdf(probabilities.size());
    std::partial_sum(probabilities.begin(), probabilities.end(), cdf.begin());
    const double total = cdf.back();
    std::uniform_real_distribution<double> uniform(0.0, total);
    std::vector<std::uint32_t> outcomes(shots);
    for (auto& o : outcomes) {
        const auto it = std::upper_bound(cdf.begin(), cdf.end(), uniform(rng));
        o = static_cast<std::uint32_t>(std::min<std::ptrdiff_t>(it - cdf.begin(),
                                                                static_cast<std::ptrdiff_t>(cdf.size()) - 1));
    }
    return outcomes;
}

double sample_estimate(const Statevector& state, std::string_view word, std::uint32_t shots,
                       std::mt19937_64& rng) {
    validate_word(word, state.n_qubits());
    if (shots == 0) throw std::invalid_argument("shots must be positive");
    const std::uint32_t mask = word_mask(word);
    if (mask == 0) return 1.0;
    Statevector rotated = state;
    rotate_to_measurement_basis(rotated, word);
    const auto probs = rotated.probabilities();
    double sum = 0.0;
    for (std::uint32_t o : sample_outcomes(probs, shots, rng)) sum += parity_eigenvalue(o, mask);
    return sum / shots;
}

}  // namespace cutpipe
