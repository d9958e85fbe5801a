#include <doctest.h>

#include <cmath>
#include <numbers>

#include "cutpipe/circuit.hpp"
#include "cutpipe/selftest.hpp"

using namespace cutpipe;

namespace {

constexpr double kPi = std::numbers::pi;
const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

ParamCircuit make(int n, std::vector<Gate> gates) {
    ParamCircuit c;
    c.n_qubits = n;
    c.gates = std::move(gates);
    return c;
}

}  // namespace

TEST_CASE("zfeaturemap layout") {
    const std::vector<double> x{kPi / 2};
    const auto c = build_zfeaturemap(1, x);
    REQUIRE(c.gates.size() == 2);
    CHECK(c.gates[0].kind == GateKind::H);
    CHECK(c.gates[1].kind == GateKind::P);
    CHECK(*c.gates[1].angle == doctest::Approx(kPi));
    REQUIRE(c.param_slots.size() == 1);
    CHECK(c.param_slots[0].role == ParamRole::Feature);
    CHECK(c.param_slots[0].scale == 2.0);

    const std::vector<double> zeros{0.0, 0.0};
    const auto s = simulate(build_zfeaturemap(2, zeros));
    for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(s[i] - std::complex<double>(0.5, 0.0)) < 1e-12);

    const std::vector<double> four{0.1, -0.2, 0.3, 1.4};
    const auto c4 = build_zfeaturemap(4, four);
    CHECK(c4.gates.size() == 8);
    CHECK(c4.param_slots.size() == 4);

    const auto c2 = build_zfeaturemap(4, four, 2);
    CHECK(c2.gates.size() == 16);
    CHECK(c2.param_slots.size() == 8);

    CHECK_THROWS_AS(build_zfeaturemap(3, four), std::invalid_argument);
}

TEST_CASE("realamplitudes layout") {
    const std::vector<double> z4(4, 0.0);
    const auto s = simulate(build_realamplitudes(2, z4));
    CHECK(std::abs(s[0] - 1.0) < 1e-12);

    const std::vector<double> z6(6, 0.0);
    const auto c3 = build_realamplitudes(3, z6);
    CHECK(c3.gates.size() == 8);
    CHECK(c3.param_slots.size() == 6);
    CHECK(c3.gates[3].kind == GateKind::CX);
    CHECK(c3.gates[3].wires == std::vector<int>{0, 1});
    CHECK(c3.gates[4].wires == std::vector<int>{1, 2});

    const std::vector<double> z2(2, 0.0);
    const auto c1 = build_realamplitudes(1, z2);
    REQUIRE(c1.gates.size() == 2);
    CHECK(c1.gates[0].kind == GateKind::RY);
    CHECK(c1.gates[1].kind == GateKind::RY);

    CHECK_THROWS_AS(build_realamplitudes(3, z4), std::invalid_argument);
}

TEST_CASE("simulate basic states") {
    auto h = simulate(make(1, {Gate::fixed(GateKind::H, 0)}));
    CHECK(h[0].real() == doctest::Approx(kInvSqrt2));
    CHECK(h[1].real() == doctest::Approx(kInvSqrt2));

    auto bell = simulate(make(2, {Gate::fixed(GateKind::H, 0), Gate::cx(0, 1)}));
    CHECK(bell[0].real() == doctest::Approx(kInvSqrt2));
    CHECK(std::abs(bell[1]) < 1e-12);
    CHECK(std::abs(bell[2]) < 1e-12);
    CHECK(bell[3].real() == doctest::Approx(kInvSqrt2));

    auto ry = simulate(make(1, {Gate::rotation(GateKind::RY, 0, kPi)}));
    CHECK(std::abs(ry[0]) < 1e-12);
    CHECK(ry[1].real() == doctest::Approx(1.0));

    // little-endian: X on qubit 1 sets amplitude index 2
    auto x1 = simulate(make(2, {Gate::fixed(GateKind::X, 1)}));
    CHECK(std::abs(x1[2] - 1.0) < 1e-12);

    // P(l) = diag(1, e^{il})
    auto p = simulate(make(1, {Gate::fixed(GateKind::X, 0), Gate::rotation(GateKind::P, 0, 0.7)}));
    CHECK(std::abs(p[1] - std::polar(1.0, 0.7)) < 1e-12);
}

TEST_CASE("simulate rejects bad circuits") {
    ParamCircuit unbound = build_realamplitudes(2, std::vector<double>(4, 0.0));
    unbound.gates[0].angle.reset();
    CHECK_THROWS(simulate(unbound));
    CHECK_THROWS(simulate(make(2, {Gate::cx(0, 0)})));
    CHECK_THROWS(simulate(make(2, {Gate::fixed(GateKind::H, 2)})));
    CHECK_THROWS(simulate(make(15, {})));
    CHECK_THROWS(simulate(make(1, {Gate::rotation(GateKind::RX, 0, std::nan(""))})));
}

TEST_CASE("expectation examples") {
    auto zero = simulate(make(1, {}));
    CHECK(expectation(zero, "Z") == doctest::Approx(1.0));
    auto bell = simulate(make(2, {Gate::fixed(GateKind::H, 0), Gate::cx(0, 1)}));
    CHECK(expectation(bell, "ZZ") == doctest::Approx(1.0));
    CHECK(expectation(bell, "XX") == doctest::Approx(1.0));
    CHECK(expectation(bell, "YY") == doctest::Approx(-1.0));
    CHECK(std::abs(expectation(bell, "IX")) < 1e-12);
    auto plus = simulate(make(1, {Gate::fixed(GateKind::H, 0)}));
    CHECK(std::abs(expectation(plus, "Z")) < 1e-12);
    auto plus_i = simulate(make(1, {Gate::fixed(GateKind::H, 0), Gate::fixed(GateKind::S, 0)}));
    CHECK(expectation(plus_i, "Y") == doctest::Approx(1.0));
    CHECK_THROWS(expectation(bell, "Z"));
    CHECK_THROWS(expectation(bell, "ZQ"));
}

TEST_CASE("normalization and linearity on random circuits") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 1 + trial % 5;
        const auto s = simulate(random_circuit(n, 25, rng));
        CHECK(std::abs(s.norm_squared() - 1.0) < 1e-10);
    }
    for (int trial = 0; trial < 20; ++trial) {
        const auto s = simulate(random_circuit(3, 20, rng));
        PauliObservable obs{{{0.5, "XYZ"}, {-1.25, "ZZI"}, {2.0, "IIY"}}};
        const double want = 0.5 * expectation(s, "XYZ") - 1.25 * expectation(s, "ZZI") + 2.0 * expectation(s, "IIY");
        CHECK(expectation(s, obs) == doctest::Approx(want).epsilon(1e-12));
    }
}

TEST_CASE("sample_estimate") {
    std::mt19937_64 rng(11);
    auto zero = simulate(make(1, {}));
    CHECK(sample_estimate(zero, "Z", 1024, rng) == 1.0);

    auto plus = simulate(make(1, {Gate::fixed(GateKind::H, 0)}));
    const double v = sample_estimate(plus, "Z", 1024, rng);
    CHECK(v >= -0.125);
    CHECK(v <= 0.125);

    std::mt19937_64 any(3);
    auto s = simulate(random_circuit(3, 15, any));
    CHECK(sample_estimate(s, "III", 17, rng) == 1.0);
    CHECK_THROWS(sample_estimate(s, "ZZZ", 0, rng));

    std::mt19937_64 a(99), b(99);
    CHECK(sample_estimate(s, "XYZ", 4096, a) == sample_estimate(s, "XYZ", 4096, b));
}

TEST_CASE("sampling converges with shots") {
    std::mt19937_64 gen(21);
    double err_small = 0.0, err_large = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
        auto s = simulate(random_circuit(3, 20, gen));
        const double exact = expectation(s, "ZXY");
        std::mt19937_64 rng(1000 + trial);
        err_small += std::abs(sample_estimate(s, "ZXY", 1000, rng) - exact);
        const double big = std::abs(sample_estimate(s, "ZXY", 100000, rng) - exact);
        CHECK(big < 0.02);
        err_large += big;
    }
    CHECK(err_large < err_small);
}

TEST_CASE("bind fills slots by role") {
    const std::vector<double> x{0.3, 0.4};
    const std::vector<double> theta(4, 0.0);
    auto c = compose(build_zfeaturemap(2, x), build_realamplitudes(2, theta));
    const std::vector<double> t2{1.0, 2.0, 3.0, 4.0};
    bind(c, ParamRole::Weight, t2);
    int seen = 0;
    for (const auto& slot : c.param_slots) {
        if (slot.role == ParamRole::Weight) {
            CHECK(*c.gates[slot.gate_index].angle == doctest::Approx(t2[slot.index]));
            ++seen;
        } else {
            CHECK(*c.gates[slot.gate_index].angle == doctest::Approx(2.0 * x[slot.index]));
        }
    }
    CHECK(seen == 4);
}
