#include "bplab/state_vector.hpp"

#include <bit>
#include <cmath>
#include <string>

#include "bplab/error.hpp"

namespace bplab::sim {

StateVector StateVector::zero(int num_qubits, int max_qubits) {
    if (num_qubits < 1) throw InvalidArgument("num_qubits must be >= 1");
    if (num_qubits > max_qubits) {
        throw CapacityError("num_qubits " + std::to_string(num_qubits) + " exceeds maximum " +
                            std::to_string(max_qubits));
    }
    StateVector s;
    s.num_qubits_ = num_qubits;
    s.amps_.assign(std::size_t{1} << num_qubits, Complex{0.0, 0.0});
    s.amps_[0] = Complex{1.0, 0.0};
    return s;
}

StateVector StateVector::from_amplitudes(std::vector<Complex> amplitudes) {
    const std::size_t n = amplitudes.size();
    if (n < 2 || (n & (n - 1)) != 0) throw InvalidArgument("amplitude count must be a power of two >= 2");
    StateVector s;
    s.num_qubits_ = static_cast<int>(std::countr_zero(n));
    s.amps_ = std::move(amplitudes);
    return s;
}

void StateVector::check_qubit(int q) const {
    if (q < 0 || q >= num_qubits_) {
        throw IndexError("qubit " + std::to_string(q) + " out of range for " +
                         std::to_string(num_qubits_) + "-qubit register");
    }
}

namespace {

void check_angle(double theta) {
    if (!std::isfinite(theta)) throw InvalidArgument("rotation angle must be finite");
}

}  // namespace

void StateVector::apply(const GateOp& gate) {
    switch (gate.kind) {
        case GateKind::RX: apply_rx(gate.target, gate.angle); break;
        case GateKind::RY: apply_ry(gate.target, gate.angle); break;
        case GateKind::RZ: apply_rz(gate.target, gate.angle); break;
        case GateKind::CNOT:
            if (!gate.control) throw InvalidArgument("CNOT requires a control qubit");
            apply_cnot(*gate.control, gate.target);
            break;
    }
}

// Each 2x2 kernel walks pairs (i, i|m) where bit m of i is clear.

void StateVector::apply_rx(int q, double theta) {
    check_qubit(q);
    check_angle(theta);
    const double c = std::cos(theta / 2), s = std::sin(theta / 2);
    const std::size_t m = mask(q), n = amps_.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (i & m) continue;
        const Complex a = amps_[i], b = amps_[i | m];
        // [[c, -is], [-is, c]]
        amps_[i] = Complex{c * a.real() + s * b.imag(), c * a.imag() - s * b.real()};
        amps_[i | m] = Complex{c * b.real() + s * a.imag(), c * b.imag() - s * a.real()};
    }
}

void StateVector::apply_ry(int q, double theta) {
    check_qubit(q);
    check_angle(theta);
    const double c = std::cos(theta / 2), s = std::sin(theta / 2);
    const std::size_t m = mask(q), n = amps_.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (i & m) continue;
        const Complex a = amps_[i], b = amps_[i | m];
        amps_[i] = c * a - s * b;
        amps_[i | m] = s * a + c * b;
    }
}

void StateVector::apply_rz(int q, double theta) {
    check_qubit(q);
    check_angle(theta);
    const Complex lo = std::polar(1.0, -theta / 2), hi = std::polar(1.0, theta / 2);
    const std::size_t m = mask(q), n = amps_.size();
    for (std::size_t i = 0; i < n; ++i) amps_[i] *= (i & m) ? hi : lo;
}

void StateVector::apply_cnot(int control, int target) {
    check_qubit(control);
    check_qubit(target);
    if (control == target) throw InvalidArgument("CNOT control and target must differ");
    const std::size_t cm = mask(control), tm = mask(target), n = amps_.size();
    for (std::size_t i = 0; i < n; ++i) {
        if ((i & cm) && !(i & tm)) std::swap(amps_[i], amps_[i | tm]);
    }
}

double StateVector::expect_z(int qubit) const {
    check_qubit(qubit);
    const std::size_t m = mask(qubit);
    double acc = 0.0;
    for (std::size_t i = 0; i < amps_.size(); ++i) {
        const double p = std::norm(amps_[i]);
        acc += (i & m) ? -p : p;
    }
    return acc;
}

std::vector<double> StateVector::expect_z_all() const {
    std::vector<double> z(num_qubits_, 0.0);
    for (std::size_t i = 0; i < amps_.size(); ++i) {
        const double p = std::norm(amps_[i]);
        if (p == 0.0) continue;
        for (int q = 0; q < num_qubits_; ++q) z[q] += (i & mask(q)) ? -p : p;
    }
    return z;
}

double StateVector::norm_squared() const {
    double acc = 0.0;
    for (const auto& a : amps_) acc += std::norm(a);
    return acc;
}

StateVector init_zero_state(int num_qubits, int max_qubits) {
    return StateVector::zero(num_qubits, max_qubits);
}

StateVector apply_gate(StateVector state, const GateOp& gate) {
    state.apply(gate);
    return state;
}

void angle_encode_inplace(StateVector& state, std::span<const double> features) {
    if (features.size() > static_cast<std::size_t>(state.num_qubits())) {
        throw InvalidArgument("more features (" + std::to_string(features.size()) + ") than qubits (" +
                              std::to_string(state.num_qubits()) + ")");
    }
    for (std::size_t j = 0; j < features.size(); ++j) state.apply_rx(static_cast<int>(j), features[j]);
}

StateVector angle_encode(StateVector state, std::span<const double> features) {
    angle_encode_inplace(state, features);
    return state;
}

double expect_pauli_z(const StateVector& state, int qubit) { return state.expect_z(qubit); }

}  // namespace bplab::sim
