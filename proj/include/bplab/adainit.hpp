#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bplab/generator.hpp"
#include "bplab/qnn.hpp"

namespace bplab::adainit {

enum class PolyKind { N6, N3L3 };

/// Acceptance threshold 1 / (poly(N, L) * K).
struct ThresholdSpec {
    int K = 50;
    PolyKind poly = PolyKind::N6;
    /// Explicit alpha, bypassing the polynomial (scripted replays).
    std::optional<double> fixed;

    double poly_value(int num_qubits, int num_layers) const;
    double value(const qnn::CircuitSpec& spec) const;
};

/// max(var_t - s_prev, 0). Inputs must be finite and non-negative.
double expected_improvement(double var_t, double s_prev);

/// 1 / (K * poly(N, L)); throws when the result underflows to a subnormal.
double threshold(const qnn::CircuitSpec& spec, int K, PolyKind poly = PolyKind::N6);

struct IterationRecord {
    int t = 0;
    double variance = 0.0;
    double delta = 0.0;
    double threshold = 0.0;
    bool accepted = false;
    double S = 0.0;
    std::string provenance;
    double grad_min = 0.0;
    double grad_max = 0.0;
    /// Empty unless the iteration was skipped (divergence, rejected reply).
    std::string note;
};

struct EIState {
    int t = 0;
    double S = 0.0;
    std::vector<qnn::QnnParams> candidates;
    std::vector<IterationRecord> history;
};

/// g(theta0): trains/probes a candidate and reports its gradient variance.
using Evaluator = std::function<qnn::VarianceReport(const qnn::QnnParams& theta0, int t)>;

Evaluator training_evaluator(qnn::CircuitSpec spec, qnn::LabeledData train, qnn::TrainConfig cfg);

enum class FeedbackDepth { LastAccepted, FullTrace };

struct AdaInitConfig {
    int iterations = 50;
    ThresholdSpec threshold;
    gen::PromptContext prompt;
    std::uint64_t seed = 0;
    bool use_feedback = true;
    bool use_description = true;
    FeedbackDepth feedback_depth = FeedbackDepth::LastAccepted;
};

struct AdaInitResult {
    EIState state;
    bool aborted = false;
    std::string abort_reason;

    /// The last accepted candidate, i.e. the most effective one.
    const qnn::QnnParams* best() const { return state.candidates.empty() ? nullptr : &state.candidates.back(); }
    /// Iteration of the final acceptance (0 when nothing was accepted).
    int iterations_used() const;
};

/// EI-gated search. A rejected iteration advances t but leaves the prompt
/// feedback untouched; a diverged evaluation counts as delta = 0. A
/// generator transport failure stops the loop with the history so far.
AdaInitResult run_adainit(const qnn::CircuitSpec& spec, gen::ParamGenerator& generator, const Evaluator& evaluate,
                          const AdaInitConfig& cfg);

/// Feedback line injected into the next prompt after an acceptance.
std::string feedback_text(int t, const qnn::QnnParams& theta0, double variance, double s_prev);

struct CostPoint {
    double iterations_fraction;
    double variance_fraction;
};

/// Best-so-far variance (normalized by the final S) against t / T.
std::vector<CostPoint> cumulative_cost_curve(const std::vector<IterationRecord>& history);

/// One JSON object per line: t, var, delta, threshold, accepted, S, generator_provenance.
void write_history(std::ostream& out, const std::vector<IterationRecord>& history);
std::vector<IterationRecord> read_history(std::istream& in);

/// {"l0": ..., "l1": ..., "l2": ...} as JSON.
std::string params_to_json(const qnn::QnnParams& params);
qnn::QnnParams params_from_json(const std::string& text);

}  // namespace bplab::adainit
