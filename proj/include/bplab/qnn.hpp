#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace bplab::qnn {

/// Hardware-efficient ansatz shape: per layer RX, RY, RZ on every qubit
/// followed by the CNOT chain j -> j+1.
struct CircuitSpec {
    int num_layers = 1;
    int num_qubits = 1;
    int num_rotations = 3;

    std::size_t theta_size() const {
        return static_cast<std::size_t>(num_layers) * num_qubits * num_rotations;
    }
    void validate() const;
};

/// theta0 is stored flat in (layer, qubit, rotation) row-major order.
struct QnnParams {
    int num_layers = 0;
    int num_qubits = 0;
    int num_rotations = 3;
    int num_classes = 2;
    std::vector<double> theta;         // l0: L x N x R
    std::vector<double> head_weights;  // l1: C x N
    std::vector<double> head_bias;     // l2: C

    static QnnParams zeros(const CircuitSpec& spec, int num_classes);

    std::size_t theta_index(int layer, int qubit, int rot) const {
        return (static_cast<std::size_t>(layer) * num_qubits + qubit) * num_rotations + rot;
    }
    double& theta_at(int layer, int qubit, int rot) { return theta[theta_index(layer, qubit, rot)]; }
    double theta_at(int layer, int qubit, int rot) const { return theta[theta_index(layer, qubit, rot)]; }
    double& weight(int cls, int qubit) { return head_weights[static_cast<std::size_t>(cls) * num_qubits + qubit]; }
    double weight(int cls, int qubit) const { return head_weights[static_cast<std::size_t>(cls) * num_qubits + qubit]; }

    /// Throws ShapeMismatch if shapes disagree with `spec` or any entry is non-finite.
    void check_against(const CircuitSpec& spec) const;

    bool operator==(const QnnParams&) const = default;
};

/// Row-major feature matrix with integer labels.
struct LabeledData {
    std::size_t dim = 0;
    std::vector<double> features;
    std::vector<int> labels;

    std::size_t size() const { return labels.size(); }
    bool empty() const { return labels.empty(); }
    std::span<const double> row(std::size_t i) const { return {features.data() + i * dim, dim}; }
    void push_back(std::span<const double> x, int label);
    LabeledData subset(std::span<const std::size_t> indices) const;
};

/// Pauli-Z expectations of every qubit after encoding + ansatz.
std::vector<double> circuit_expectations(const CircuitSpec& spec, std::span<const double> theta,
                                         std::span<const double> features);

std::vector<double> forward(const CircuitSpec& spec, const QnnParams& params, std::span<const double> features);

/// Softmax cross-entropy, log-sum-exp stabilised.
double loss(std::span<const double> logits, int label);

struct Gradients {
    double loss = 0.0;
    std::vector<double> theta;
    std::vector<double> head_weights;
    std::vector<double> head_bias;
};

/// Mean-batch-loss gradients. Quantum entries use the parameter-shift rule,
/// head entries are analytic.
Gradients batch_gradients(const CircuitSpec& spec, const QnnParams& params, const LabeledData& data,
                          std::span<const std::size_t> indices);
Gradients batch_gradients(const CircuitSpec& spec, const QnnParams& params, const LabeledData& data);

std::vector<double> grad_theta(const CircuitSpec& spec, const QnnParams& params, const LabeledData& batch);

/// d(mean loss)/d theta[probe_index] over the whole data set. Only the two
/// shifted circuits for the probe entry are evaluated.
double probe_gradient(const CircuitSpec& spec, const QnnParams& params, const LabeledData& data,
                      std::size_t probe_index);

double mean_loss(const CircuitSpec& spec, const QnnParams& params, const LabeledData& data);

struct TrainConfig {
    double learning_rate = 0.01;
    int batch_size = 20;
    int epochs = 30;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::uint64_t seed = 0;
    std::size_t probe_index = 0;
    /// Assumption-1 monitor: any |gradient| above this raises the flag.
    double gradient_bound = 1e3;

    void validate() const;
};

struct VarianceReport {
    std::size_t probe_index = 0;
    std::vector<double> per_epoch_gradients;
    double variance = 0.0;
    double grad_min = 0.0;
    double grad_max = 0.0;
    bool gradient_bound_exceeded = false;
    double max_abs_gradient = 0.0;
    double mean_epoch_seconds = 0.0;
    QnnParams final_params;
};

/// Population variance plus extremes of a gradient trace.
VarianceReport summarize_gradients(std::span<const double> gradients, std::size_t probe_index = 0);

/// Adam training for cfg.epochs epochs; after each epoch the probe entry's
/// full-training-set gradient is recorded.
VarianceReport train_and_probe(const CircuitSpec& spec, const QnnParams& params0, const LabeledData& train,
                               const TrainConfig& cfg);

}  // namespace bplab::qnn
