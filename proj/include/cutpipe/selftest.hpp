#pragma once

// Property suites shared by `cutpipe selftest` and the test binaries.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "cutpipe/circuit.hpp"
#include "cutpipe/cutting.hpp"

namespace cutpipe {

// Bound circuit of `n_gates` gates drawn from every gate kind.
ParamCircuit random_circuit(int n_qubits, std::size_t n_gates, std::mt19937_64& rng);

struct CutCase {
    ParamCircuit circuit;
    std::string word;
    CutPlan plan;
};

// Chain of n_cuts + 1 connected blocks; consecutive blocks share one wire and
// each cut sits where the next block starts on that wire.
CutCase random_cut_case(int n_qubits, int n_cuts, std::mt19937_64& rng);

// Reconstructed expectation with every executable evaluated exactly.
double exact_cut_expectation(const ParamCircuit& circuit, const std::string& word, const CutPlan& plan,
                             const CutTermTable& table = canonical_cut_terms());

double uncut_expectation(const ParamCircuit& circuit, const std::string& word);

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct SelftestOptions {
    bool quick = false;
    std::uint64_t seed = 2024;
    const CutTermTable* table = nullptr;
};

CheckResult check_oracle_equality(std::size_t n_circuits, std::uint64_t seed,
                                  const CutTermTable& table = canonical_cut_terms());
CheckResult check_count_laws(int max_cuts);
CheckResult check_gradient(std::size_t n_instances, std::uint64_t seed);
CheckResult check_schema_round_trip(std::size_t n_records, std::uint64_t seed);

std::vector<CheckResult> run_selftest(const SelftestOptions& opts);

}  // namespace cutpipe
