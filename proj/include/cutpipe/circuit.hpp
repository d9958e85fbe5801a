#pragma once

// Gate-level circuits, exact statevector simulation and Pauli estimation.
//
// Conventions used throughout the project:
//  - little-endian qubit order: qubit 0 is the least significant bit of the
//    amplitude index;
//  - a Pauli word is a string whose i-th character acts on qubit i;
//  - P(l) = diag(1, e^{il}), RY(t) = exp(-i t Y / 2), RX/RZ likewise.

#include <complex>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cutpipe {

inline constexpr int kMaxQubits = 14;

enum class GateKind { H, X, S, Sdg, RX, RY, RZ, P, CX };

std::string_view gate_name(GateKind kind);
bool is_parametric(GateKind kind);

struct Gate {
    GateKind kind = GateKind::H;
    std::vector<int> wires;
    std::optional<double> angle;

    static Gate fixed(GateKind kind, int wire);
    static Gate rotation(GateKind kind, int wire, double angle);
    static Gate cx(int control, int target);

    bool touches(int wire) const;
};

enum class ParamRole { Feature, Weight };

// A symbolic parameter: gates[gate_index].angle = scale * values[index].
struct ParamSlot {
    std::size_t gate_index = 0;
    ParamRole role = ParamRole::Weight;
    std::size_t index = 0;
    double scale = 1.0;
};

struct ParamCircuit {
    int n_qubits = 0;
    std::vector<Gate> gates;
    std::vector<ParamSlot> param_slots;

    // Throws std::invalid_argument on any structural violation.
    void validate() const;
    bool is_bound() const;
};

struct PauliTerm {
    double coefficient = 1.0;
    std::string word;
};

struct PauliObservable {
    std::vector<PauliTerm> terms;

    static PauliObservable single(std::string word, double coefficient = 1.0);
    // Z on every qubit.
    static PauliObservable z_all(int n_qubits);

    int width() const;
    void validate() const;
};

class Statevector {
public:
    explicit Statevector(int n_qubits);

    int n_qubits() const { return n_qubits_; }
    std::span<const std::complex<double>> amplitudes() const { return amps_; }
    std::complex<double> operator[](std::size_t i) const { return amps_[i]; }

    void apply(const Gate& gate);
    double norm_squared() const;
    std::vector<double> probabilities() const;

private:
    void apply_1q(int wire, const std::complex<double> (&m)[2][2]);
    void apply_cx(int control, int target);

    int n_qubits_;
    std::vector<std::complex<double>> amps_;
};

void validate_word(std::string_view word, int n_qubits);

// Bitmask of the non-identity positions of a word.
std::uint32_t word_mask(std::string_view word);

// +1 or -1 depending on the parity of `outcome` restricted to `mask`.
inline double parity_eigenvalue(std::uint32_t outcome, std::uint32_t mask) {
    return (__builtin_popcount(outcome & mask) & 1U) ? -1.0 : 1.0;
}

// Per repetition: H on every qubit, then P(2 x_i) on qubit i.
ParamCircuit build_zfeaturemap(int n_qubits, std::span<const double> x, int reps = 1);

// Per repetition: RY layer then CX(0,1), ..., CX(n-2,n-1); one final RY layer.
ParamCircuit build_realamplitudes(int n_qubits, std::span<const double> theta, int reps = 1);

// Gates of `first` followed by gates of `second`; slots of both are kept.
ParamCircuit compose(const ParamCircuit& first, const ParamCircuit& second);

// Rewrites the angles of every slot with the given role.
void bind(ParamCircuit& circuit, ParamRole role, std::span<const double> values);

Statevector simulate(const ParamCircuit& circuit);

double expectation(const Statevector& state, std::string_view word);
double expectation(const Statevector& state, const PauliObservable& observable);

// Applies the single-qubit rotations that map the eigenbasis of `word` onto
// the computational basis (X: H, Y: Sdg then H).
void rotate_to_measurement_basis(Statevector& state, std::string_view word);

// Draws `shots` computational-basis outcomes from `probabilities`.
std::vector<std::uint32_t> sample_outcomes(std::span<const double> probabilities,
                                           std::uint32_t shots, std::mt19937_64& rng);

double sample_estimate(const Statevector& state, std::string_view word,
                       std::uint32_t shots, std::mt19937_64& rng);

}  // namespace cutpipe
