#pragma once

// Wire cutting with the measure-and-prepare decomposition of the identity
// channel:
//
//   Id(rho) = 1/2 * sum_{P in {I,Z,X,Y}} Tr(P rho) P
//
// with each P expanded into its two eigenprojectors. One cut therefore
// contributes 8 (basis, preparation, coefficient) terms, c cuts contribute
// 8^c subexperiments with |alpha_j| = 2^-c.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "cutpipe/circuit.hpp"

namespace cutpipe {

// Cut on `wire` between gates[position - 1] and gates[position].
struct CutPoint {
    int wire = 0;
    std::size_t position = 0;

    bool operator==(const CutPoint&) const = default;
};

struct CutPlan {
    std::string label = "cut0";
    std::vector<CutPoint> cuts;
};

// "cut0" or "cutN@q1,...,qN". Each wire is cut immediately before its first
// CX(q, q+1); a wire without such a gate is cut before its last gate.
CutPlan resolve_cut_label(const std::string& label, const ParamCircuit& circuit);

// Parses only the wire list of a label; throws on malformed labels.
std::vector<int> parse_cut_label(const std::string& label);

struct Stub {
    int fragment_wire = 0;
    std::size_t cut_id = 0;
};

struct Fragment {
    ParamCircuit subcircuit;
    // original wire -> fragment wire, -1 when the wire is not present
    std::vector<int> wire_map;
    std::vector<Stub> in_stubs;
    std::vector<Stub> out_stubs;
    // Target word restricted to this fragment; out-stub positions hold 'I'.
    std::string local_word;
};

// Throws std::invalid_argument for malformed plans, including cyclic or
// non-chain fragment dependencies.
std::vector<Fragment> partition_problem(const ParamCircuit& circuit, const std::string& word,
                                        const CutPlan& plan);

enum class PrepState : std::uint8_t { Zero, One, Plus, Minus, PlusI, MinusI };

std::string_view prep_name(PrepState s);

struct CutTerm {
    char basis = 'I';  // one of I, Z, X, Y
    PrepState prep = PrepState::Zero;
    double coefficient = 0.5;
};

using CutTermTable = std::array<CutTerm, 8>;

const CutTermTable& canonical_cut_terms();

struct Executable {
    ParamCircuit circuit;
    std::string word;
};

struct Subexperiment {
    std::size_t term_id = 0;
    // One (basis, preparation) pair per cut.
    std::vector<CutTerm> assignment;
    // One executable per fragment.
    std::vector<Executable> executables;
};

struct ReconstructionPlan {
    std::vector<double> alpha;
    std::size_t n_fragments = 0;
    // term -> indices into the flat task list
    std::vector<std::vector<std::size_t>> task_index;

    std::size_t n_terms() const { return alpha.size(); }
    std::size_t n_tasks() const { return alpha.size() * n_fragments; }
};

struct GeneratedSubexperiments {
    std::vector<Subexperiment> subexperiments;
    ReconstructionPlan plan;
};

std::size_t cut_count(const std::vector<Fragment>& fragments);

// Full Cartesian enumeration over the per-cut term table. Tasks are laid out
// term-major: task = term * n_fragments + fragment.
GeneratedSubexperiments generate_subexperiments(const std::vector<Fragment>& fragments,
                                                const CutTermTable& table = canonical_cut_terms());

// sum_j alpha_j * prod_f values[task_index[j][f]]
double reconstruct(std::span<const double> task_values, const ReconstructionPlan& plan);

}  // namespace cutpipe
