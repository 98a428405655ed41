#include "bplab/qnn.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "bplab/error.hpp"
#include "bplab/random.hpp"
#include "bplab/state_vector.hpp"

namespace bplab::qnn {

using sim::GateOp;
using sim::StateVector;

void CircuitSpec::validate() const {
    if (num_layers < 1 || num_qubits < 1) throw InvalidArgument("circuit needs L >= 1 and N >= 1");
    if (num_rotations != 3) throw InvalidArgument("circuit uses exactly 3 rotations (RX, RY, RZ)");
}

QnnParams QnnParams::zeros(const CircuitSpec& spec, int num_classes) {
    spec.validate();
    if (num_classes < 1) throw InvalidArgument("num_classes must be >= 1");
    QnnParams p;
    p.num_layers = spec.num_layers;
    p.num_qubits = spec.num_qubits;
    p.num_rotations = spec.num_rotations;
    p.num_classes = num_classes;
    p.theta.assign(spec.theta_size(), 0.0);
    p.head_weights.assign(static_cast<std::size_t>(num_classes) * spec.num_qubits, 0.0);
    p.head_bias.assign(num_classes, 0.0);
    return p;
}

void QnnParams::check_against(const CircuitSpec& spec) const {
    auto fail = [](const std::string& what) { throw ShapeMismatch(what); };
    if (num_layers != spec.num_layers || num_qubits != spec.num_qubits || num_rotations != spec.num_rotations) {
        fail("params declared (" + std::to_string(num_layers) + "," + std::to_string(num_qubits) + "," +
             std::to_string(num_rotations) + ") but circuit is (" + std::to_string(spec.num_layers) + "," +
             std::to_string(spec.num_qubits) + "," + std::to_string(spec.num_rotations) + ")");
    }
    if (num_classes < 1) fail("num_classes must be >= 1");
    if (theta.size() != spec.theta_size()) fail("theta has " + std::to_string(theta.size()) + " entries");
    if (head_weights.size() != static_cast<std::size_t>(num_classes) * num_qubits) fail("head weight shape");
    if (head_bias.size() != static_cast<std::size_t>(num_classes)) fail("head bias shape");
    auto finite = [](const std::vector<double>& v) {
        return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
    };
    if (!finite(theta) || !finite(head_weights) || !finite(head_bias)) fail("non-finite parameter entry");
}

void LabeledData::push_back(std::span<const double> x, int label) {
    if (empty() && features.empty()) dim = x.size();
    if (x.size() != dim) throw InvalidArgument("feature dimension mismatch");
    features.insert(features.end(), x.begin(), x.end());
    labels.push_back(label);
}

LabeledData LabeledData::subset(std::span<const std::size_t> indices) const {
    LabeledData out;
    out.dim = dim;
    out.features.reserve(indices.size() * dim);
    out.labels.reserve(indices.size());
    for (auto i : indices) {
        auto r = row(i);
        out.features.insert(out.features.end(), r.begin(), r.end());
        out.labels.push_back(labels[i]);
    }
    return out;
}

namespace {

constexpr double kShift = std::numbers::pi / 2;

/// Ansatz gate list; param_gate[k] is the position of the gate carrying theta[k].
struct Ansatz {
    std::vector<GateOp> gates;
    std::vector<std::size_t> param_gate;
};

Ansatz build_ansatz(const CircuitSpec& spec, std::span<const double> theta) {
    Ansatz a;
    a.param_gate.resize(spec.theta_size());
    std::size_t k = 0;
    for (int l = 0; l < spec.num_layers; ++l) {
        for (int q = 0; q < spec.num_qubits; ++q) {
            a.param_gate[k] = a.gates.size();
            a.gates.push_back(GateOp::rx(q, theta[k++]));
            a.param_gate[k] = a.gates.size();
            a.gates.push_back(GateOp::ry(q, theta[k++]));
            a.param_gate[k] = a.gates.size();
            a.gates.push_back(GateOp::rz(q, theta[k++]));
        }
        for (int q = 0; q + 1 < spec.num_qubits; ++q) a.gates.push_back(GateOp::cnot(q, q + 1));
    }
    return a;
}

StateVector encoded_state(const CircuitSpec& spec, std::span<const double> features) {
    StateVector s = StateVector::zero(spec.num_qubits);
    sim::angle_encode_inplace(s, features);
    return s;
}

std::vector<double> run_suffix(StateVector s, const std::vector<GateOp>& gates, std::size_t from) {
    for (std::size_t g = from; g < gates.size(); ++g) s.apply(gates[g]);
    return s.expect_z_all();
}

std::vector<double> head_logits(const QnnParams& p, std::span<const double> z) {
    std::vector<double> logits(p.head_bias);
    for (int c = 0; c < p.num_classes; ++c) {
        for (int q = 0; q < p.num_qubits; ++q) logits[c] += p.weight(c, q) * z[q];
    }
    return logits;
}

std::vector<double> softmax(std::span<const double> logits) {
    const double mx = *std::max_element(logits.begin(), logits.end());
    std::vector<double> p(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) sum += (p[i] = std::exp(logits[i] - mx));
    for (auto& v : p) v /= sum;
    return p;
}

void check_label(int label, int classes) {
    if (label < 0 || label >= classes) {
        throw IndexError("label " + std::to_string(label) + " out of range for " + std::to_string(classes) +
                         " classes");
    }
}

/// dLoss/dz_q and the residual (softmax - onehot).
struct HeadBackprop {
    double loss;
    std::vector<double> residual;
    std::vector<double> dz;
};

HeadBackprop head_backprop(const QnnParams& p, std::span<const double> z, int label) {
    check_label(label, p.num_classes);
    auto logits = head_logits(p, z);
    HeadBackprop hb;
    hb.loss = loss(logits, label);
    hb.residual = softmax(logits);
    hb.residual[label] -= 1.0;
    hb.dz.assign(p.num_qubits, 0.0);
    for (int c = 0; c < p.num_classes; ++c) {
        for (int q = 0; q < p.num_qubits; ++q) hb.dz[q] += hb.residual[c] * p.weight(c, q);
    }
    return hb;
}

double shifted_directional(const std::vector<double>& dz, const std::vector<double>& zp,
                           const std::vector<double>& zm) {
    double acc = 0.0;
    for (std::size_t q = 0; q < dz.size(); ++q) acc += dz[q] * (zp[q] - zm[q]) * 0.5;
    return acc;
}

void check_features(const CircuitSpec& spec, std::size_t dim) {
    if (dim > static_cast<std::size_t>(spec.num_qubits)) {
        throw InvalidArgument("feature count " + std::to_string(dim) + " exceeds qubit count " +
                              std::to_string(spec.num_qubits));
    }
}

}  // namespace

std::vector<double> circuit_expectations(const CircuitSpec& spec, std::span<const double> theta,
                                         std::span<const double> features) {
    spec.validate();
    if (theta.size() != spec.theta_size()) throw ShapeMismatch("theta size does not match circuit");
    check_features(spec, features.size());
    return run_suffix(encoded_state(spec, features), build_ansatz(spec, theta).gates, 0);
}

std::vector<double> forward(const CircuitSpec& spec, const QnnParams& params, std::span<const double> features) {
    params.check_against(spec);
    auto z = circuit_expectations(spec, params.theta, features);
    return head_logits(params, z);
}

double loss(std::span<const double> logits, int label) {
    if (logits.empty()) throw InvalidArgument("empty logits");
    check_label(label, static_cast<int>(logits.size()));
    const double mx = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double l : logits) sum += std::exp(l - mx);
    return mx + std::log(sum) - logits[label];
}

Gradients batch_gradients(const CircuitSpec& spec, const QnnParams& params, const LabeledData& data,
                          std::span<const std::size_t> indices) {
    params.check_against(spec);
    check_features(spec, data.dim);
    if (indices.empty()) throw InvalidArgument("gradient batch is empty");

    const Ansatz ansatz = build_ansatz(spec, params.theta);
    Gradients g;
    g.theta.assign(params.theta.size(), 0.0);
    g.head_weights.assign(params.head_weights.size(), 0.0);
    g.head_bias.assign(params.head_bias.size(), 0.0);

    std::vector<std::size_t> gate_param(ansatz.gates.size(), SIZE_MAX);
    for (std::size_t k = 0; k < ansatz.param_gate.size(); ++k) gate_param[ansatz.param_gate[k]] = k;

    for (auto idx : indices) {
        const StateVector start = encoded_state(spec, data.row(idx));
        const auto z = run_suffix(start, ansatz.gates, 0);
        const auto hb = head_backprop(params, z, data.labels[idx]);
        g.loss += hb.loss;
        for (int c = 0; c < params.num_classes; ++c) {
            g.head_bias[c] += hb.residual[c];
            for (int q = 0; q < params.num_qubits; ++q) {
                g.head_weights[static_cast<std::size_t>(c) * params.num_qubits + q] += hb.residual[c] * z[q];
            }
        }
        StateVector prefix = start;
        for (std::size_t pos = 0; pos < ansatz.gates.size(); ++pos) {
            const GateOp& gate = ansatz.gates[pos];
            if (gate_param[pos] != SIZE_MAX) {
                GateOp plus = gate, minus = gate;
                plus.angle += kShift;
                minus.angle -= kShift;
                StateVector sp = prefix, sm = prefix;
                sp.apply(plus);
                sm.apply(minus);
                const auto zp = run_suffix(std::move(sp), ansatz.gates, pos + 1);
                const auto zm = run_suffix(std::move(sm), ansatz.gates, pos + 1);
                g.theta[gate_param[pos]] += shifted_directional(hb.dz, zp, zm);
            }
            prefix.apply(gate);
        }
    }
    const double inv = 1.0 / static_cast<double>(indices.size());
    g.loss *= inv;
    for (auto* v : {&g.theta, &g.head_weights, &g.head_bias}) {
        for (auto& x : *v) x *= inv;
    }
    return g;
}

Gradients batch_gradients(const CircuitSpec& spec, const QnnParams& params, const LabeledData& data) {
    std::vector<std::size_t> all(data.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    return batch_gradients(spec, params, data, all);
}

std::vector<double> grad_theta(const CircuitSpec& spec, const QnnParams& params, const LabeledData& batch) {
    return batch_gradients(spec, params, batch).theta;
}

double probe_gradient(const CircuitSpec& spec, const QnnParams& params, const LabeledData& data,
                      std::size_t probe_index) {
    params.check_against(spec);
    check_features(spec, data.dim);
    if (data.empty()) throw InvalidArgument("probe data set is empty");
    if (probe_index >= params.theta.size()) throw IndexError("probe index out of range");

    const Ansatz ansatz = build_ansatz(spec, params.theta);
    const std::size_t pos = ansatz.param_gate[probe_index];
    GateOp plus = ansatz.gates[pos], minus = ansatz.gates[pos];
    plus.angle += kShift;
    minus.angle -= kShift;

    double acc = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        StateVector prefix = encoded_state(spec, data.row(i));
        for (std::size_t g = 0; g < pos; ++g) prefix.apply(ansatz.gates[g]);
        StateVector sp = prefix, sm = prefix;
        sp.apply(plus);
        sm.apply(minus);
        const auto z = run_suffix(std::move(prefix), ansatz.gates, pos);
        const auto zp = run_suffix(std::move(sp), ansatz.gates, pos + 1);
        const auto zm = run_suffix(std::move(sm), ansatz.gates, pos + 1);
        acc += shifted_directional(head_backprop(params, z, data.labels[i]).dz, zp, zm);
    }
    return acc / static_cast<double>(data.size());
}

double mean_loss(const CircuitSpec& spec, const QnnParams& params, const LabeledData& data) {
    if (data.empty()) throw InvalidArgument("data set is empty");
    double acc = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) acc += loss(forward(spec, params, data.row(i)), data.labels[i]);
    return acc / static_cast<double>(data.size());
}

void TrainConfig::validate() const {
    if (epochs < 1) throw InvalidArgument("epochs must be >= 1");
    if (batch_size < 1) throw InvalidArgument("batch_size must be >= 1");
    if (!(learning_rate > 0.0)) throw InvalidArgument("learning_rate must be > 0");
}

VarianceReport summarize_gradients(std::span<const double> gradients, std::size_t probe_index) {
    VarianceReport r;
    r.probe_index = probe_index;
    r.per_epoch_gradients.assign(gradients.begin(), gradients.end());
    if (gradients.empty()) return r;
    const double n = static_cast<double>(gradients.size());
    const double mean = std::accumulate(gradients.begin(), gradients.end(), 0.0) / n;
    double ss = 0.0;
    for (double g : gradients) ss += (g - mean) * (g - mean);
    r.variance = ss / n;
    auto [mn, mx] = std::minmax_element(gradients.begin(), gradients.end());
    r.grad_min = *mn;
    r.grad_max = *mx;
    for (double g : gradients) r.max_abs_gradient = std::max(r.max_abs_gradient, std::abs(g));
    return r;
}

namespace {

class Adam {
public:
    Adam(const TrainConfig& cfg, std::size_t n) : cfg_(cfg), m_(n, 0.0), v_(n, 0.0) {}

    void step(std::span<double> params, std::span<const double> grad) {
        ++t_;
        const double c1 = 1.0 - std::pow(cfg_.beta1, t_);
        const double c2 = 1.0 - std::pow(cfg_.beta2, t_);
        for (std::size_t i = 0; i < params.size(); ++i) {
            m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * grad[i];
            v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * grad[i] * grad[i];
            params[i] -= cfg_.learning_rate * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + cfg_.epsilon);
        }
    }

private:
    TrainConfig cfg_;
    std::vector<double> m_, v_;
    int t_ = 0;
};

}  // namespace

VarianceReport train_and_probe(const CircuitSpec& spec, const QnnParams& params0, const LabeledData& train,
                               const TrainConfig& cfg) {
    cfg.validate();
    spec.validate();
    params0.check_against(spec);
    if (train.empty()) throw InvalidArgument("training set is empty");
    if (cfg.probe_index >= params0.theta.size()) throw IndexError("probe index out of range");

    QnnParams params = params0;
    const std::size_t nt = params.theta.size(), nw = params.head_weights.size(), nb = params.head_bias.size();
    std::vector<double> flat(nt + nw + nb), grad(nt + nw + nb);
    Adam adam(cfg, flat.size());
    Rng rng(cfg.seed);
    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    std::vector<double> trace;
    double max_abs = 0.0;
    double seconds = 0.0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
            const auto g = batch_gradients(spec, params, train,
                                           std::span<const std::size_t>(order.data() + start, stop - start));
            if (!std::isfinite(g.loss)) {
                throw DivergenceError("non-finite loss at epoch " + std::to_string(epoch + 1));
            }
            std::copy(params.theta.begin(), params.theta.end(), flat.begin());
            std::copy(params.head_weights.begin(), params.head_weights.end(), flat.begin() + nt);
            std::copy(params.head_bias.begin(), params.head_bias.end(), flat.begin() + nt + nw);
            std::copy(g.theta.begin(), g.theta.end(), grad.begin());
            std::copy(g.head_weights.begin(), g.head_weights.end(), grad.begin() + nt);
            std::copy(g.head_bias.begin(), g.head_bias.end(), grad.begin() + nt + nw);
            for (double x : grad) max_abs = std::max(max_abs, std::abs(x));
            adam.step(flat, grad);
            std::copy(flat.begin(), flat.begin() + nt, params.theta.begin());
            std::copy(flat.begin() + nt, flat.begin() + nt + nw, params.head_weights.begin());
            std::copy(flat.begin() + nt + nw, flat.end(), params.head_bias.begin());
        }
        seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const double probe = probe_gradient(spec, params, train, cfg.probe_index);
        if (!std::isfinite(probe)) throw DivergenceError("non-finite probe gradient at epoch " + std::to_string(epoch + 1));
        trace.push_back(probe);
    }

    VarianceReport report = summarize_gradients(trace, cfg.probe_index);
    report.max_abs_gradient = std::max(report.max_abs_gradient, max_abs);
    report.gradient_bound_exceeded = report.max_abs_gradient > cfg.gradient_bound;
    report.mean_epoch_seconds = seconds / cfg.epochs;
    report.final_params = std::move(params);
    return report;
}

}  // namespace bplab::qnn
