#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace bplab::sim {

using Complex = std::complex<double>;

/// Upper bound on register size accepted by the simulator.
inline constexpr int kDefaultMaxQubits = 24;

enum class GateKind { RX, RY, RZ, CNOT };

/// A single gate. Rotations use the half-angle convention
/// R_P(theta) = exp(-i theta P / 2).
struct GateOp {
    GateKind kind = GateKind::RX;
    int target = 0;
    std::optional<int> control;
    double angle = 0.0;

    static GateOp rx(int q, double theta) { return {GateKind::RX, q, std::nullopt, theta}; }
    static GateOp ry(int q, double theta) { return {GateKind::RY, q, std::nullopt, theta}; }
    static GateOp rz(int q, double theta) { return {GateKind::RZ, q, std::nullopt, theta}; }
    static GateOp cnot(int c, int t) { return {GateKind::CNOT, t, c, 0.0}; }
};

/// Dense N-qubit register. Qubit 0 is the most significant bit of the
/// basis index.
class StateVector {
public:
    StateVector() = default;

    static StateVector zero(int num_qubits, int max_qubits = kDefaultMaxQubits);
    /// Wraps explicit amplitudes; the length must be a power of two.
    static StateVector from_amplitudes(std::vector<Complex> amplitudes);

    int num_qubits() const { return num_qubits_; }
    std::size_t dimension() const { return amps_.size(); }
    std::span<const Complex> amplitudes() const { return amps_; }

    void apply(const GateOp& gate);
    void apply_rx(int q, double theta);
    void apply_ry(int q, double theta);
    void apply_rz(int q, double theta);
    void apply_cnot(int control, int target);

    double expect_z(int qubit) const;
    /// <Z_q> for every qubit in one pass.
    std::vector<double> expect_z_all() const;
    double norm_squared() const;

private:
    std::size_t mask(int q) const { return std::size_t{1} << (num_qubits_ - 1 - q); }
    void check_qubit(int q) const;

    int num_qubits_ = 0;
    std::vector<Complex> amps_;
};

StateVector init_zero_state(int num_qubits, int max_qubits = kDefaultMaxQubits);
StateVector apply_gate(StateVector state, const GateOp& gate);
/// RX(features[j]) on qubit j.
StateVector angle_encode(StateVector state, std::span<const double> features);
void angle_encode_inplace(StateVector& state, std::span<const double> features);
double expect_pauli_z(const StateVector& state, int qubit);

}  // namespace bplab::sim
