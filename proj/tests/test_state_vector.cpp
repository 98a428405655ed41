#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "bplab/error.hpp"
#include "bplab/state_vector.hpp"
#include "oracles.hpp"

using namespace bplab;
using namespace bplab::sim;

namespace {

oracle::Matrix dense(const GateOp& g, int n) {
    switch (g.kind) {
        case GateKind::RX: return oracle::embed(oracle::rx(g.angle), g.target, n);
        case GateKind::RY: return oracle::embed(oracle::ry(g.angle), g.target, n);
        case GateKind::RZ: return oracle::embed(oracle::rz(g.angle), g.target, n);
        case GateKind::CNOT: return oracle::cnot(*g.control, g.target, n);
    }
    return oracle::Matrix::identity(std::size_t{1} << n);
}

GateOp random_gate(int n, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> kind(0, n > 1 ? 3 : 2), qubit(0, n - 1);
    std::uniform_real_distribution<double> angle(-4 * std::numbers::pi, 4 * std::numbers::pi);
    switch (kind(rng)) {
        case 0: return GateOp::rx(qubit(rng), angle(rng));
        case 1: return GateOp::ry(qubit(rng), angle(rng));
        case 2: return GateOp::rz(qubit(rng), angle(rng));
        default: {
            int c = qubit(rng), t = qubit(rng);
            while (t == c) t = qubit(rng);
            return GateOp::cnot(c, t);
        }
    }
}

double max_diff(std::span<const Complex> a, const std::vector<oracle::C>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

TEST_CASE("zero state and basic expectations") {
    auto s = init_zero_state(3);
    CHECK(s.dimension() == 8);
    CHECK(s.amplitudes()[0] == Complex(1.0));
    for (int q = 0; q < 3; ++q) CHECK(s.expect_z(q) == doctest::Approx(1.0));

    s.apply_rx(0, std::numbers::pi);  // RX(pi)|0> = -i|1> on the most significant bit
    CHECK(std::abs(s.amplitudes()[4] - Complex(0, -1)) < 1e-15);
    CHECK(s.expect_z(0) == doctest::Approx(-1.0));
    CHECK(s.expect_z(1) == doctest::Approx(1.0));

    s.apply_cnot(0, 2);
    CHECK(std::abs(s.amplitudes()[5] - Complex(0, -1)) < 1e-15);
    CHECK(s.expect_z(2) == doctest::Approx(-1.0));
}

TEST_CASE("RY rotation gives cos theta expectation") {
    for (double t : {0.0, 0.3, 1.2, std::numbers::pi / 2, 2.9}) {
        auto s = init_zero_state(1);
        s.apply_ry(0, t);
        CHECK(s.expect_z(0) == doctest::Approx(std::cos(t)).epsilon(1e-14));
    }
}

TEST_CASE("random circuits match dense unitary multiplication") {
    std::mt19937_64 rng(11);
    for (int n = 1; n <= 3; ++n) {
        for (int trial = 0; trial < 25; ++trial) {
            auto s = init_zero_state(n);
            auto ref = oracle::zero_state(n);
            for (int g = 0; g < 20; ++g) {
                const auto op = random_gate(n, rng);
                s.apply(op);
                ref = oracle::matvec(dense(op, n), ref);
            }
            CHECK(max_diff(s.amplitudes(), ref) < 1e-10);
            for (int q = 0; q < n; ++q) CHECK(std::abs(s.expect_z(q) - oracle::expect_z(ref, q, n)) < 1e-10);
        }
    }
}

TEST_CASE("norm drift stays below 1e-9 over 1e4 gates") {
    std::mt19937_64 rng(5);
    auto s = init_zero_state(4);
    for (int g = 0; g < 10000; ++g) s.apply(random_gate(4, rng));
    CHECK(std::abs(s.norm_squared() - 1.0) < 1e-9);
}

TEST_CASE("apply_gate leaves its input untouched") {
    const auto s = init_zero_state(2);
    const auto t = apply_gate(s, GateOp::rx(1, 0.7));
    CHECK(s.amplitudes()[0] == Complex(1.0));
    CHECK(t.amplitudes()[0] != Complex(1.0));
}

TEST_CASE("angle encoding is RX per feature") {
    const std::vector<double> x = {0.4, 2.0};
    const auto s = angle_encode(init_zero_state(3), x);
    CHECK(expect_pauli_z(s, 0) == doctest::Approx(std::cos(0.4)));
    CHECK(expect_pauli_z(s, 1) == doctest::Approx(std::cos(2.0)));
    CHECK(expect_pauli_z(s, 2) == doctest::Approx(1.0));
    const std::vector<double> too_many = {0.1, 0.2, 0.3, 0.4};
    CHECK_THROWS_AS(angle_encode(init_zero_state(3), too_many), InvalidArgument);
}

TEST_CASE("capacity, index and argument errors") {
    CHECK_THROWS_AS(StateVector::zero(kDefaultMaxQubits + 1), CapacityError);
    CHECK_THROWS_AS(StateVector::zero(3, 2), CapacityError);
    auto s = init_zero_state(2);
    CHECK_THROWS_AS(s.apply_rx(2, 0.1), IndexError);
    CHECK_THROWS_AS(s.apply_rx(-1, 0.1), IndexError);
    CHECK_THROWS_AS(s.apply_cnot(1, 1), InvalidArgument);
    CHECK_THROWS_AS(s.apply_rz(0, std::nan("")), InvalidArgument);
    CHECK_THROWS_AS(s.expect_z(5), IndexError);
}
