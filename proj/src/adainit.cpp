#include "bplab/adainit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>

#include <json.hpp>

#include "bplab/error.hpp"
#include "bplab/chat_client.hpp"
#include "bplab/log.hpp"
#include "bplab/random.hpp"

namespace bplab::adainit {

double ThresholdSpec::poly_value(int n, int l) const {
    const double N = n, L = l;
    switch (poly) {
        case PolyKind::N6: return std::pow(N, 6);
        case PolyKind::N3L3: return std::pow(N, 3) * std::pow(L, 3);
    }
    return 1.0;
}

double ThresholdSpec::value(const qnn::CircuitSpec& spec) const {
    if (fixed) {
        if (!(*fixed > 0.0) || !std::isfinite(*fixed)) throw InvalidArgument("fixed threshold must be positive");
        return *fixed;
    }
    return threshold(spec, K, poly);
}

double expected_improvement(double var_t, double s_prev) {
    if (!std::isfinite(var_t) || !std::isfinite(s_prev) || var_t < 0.0 || s_prev < 0.0) {
        throw InvalidArgument("expected_improvement needs finite non-negative inputs");
    }
    return std::max(var_t - s_prev, 0.0);
}

double threshold(const qnn::CircuitSpec& spec, int K, PolyKind poly) {
    if (spec.num_qubits < 1 || spec.num_layers < 1 || K < 1) throw InvalidArgument("threshold needs N, L, K >= 1");
    const double denom = static_cast<double>(K) * ThresholdSpec{K, poly, {}}.poly_value(spec.num_qubits, spec.num_layers);
    const double value = 1.0 / denom;
    if (!std::isnormal(value)) throw InvalidArgument("threshold underflows for N*K this large");
    return value;
}

Evaluator training_evaluator(qnn::CircuitSpec spec, qnn::LabeledData train, qnn::TrainConfig cfg) {
    return [spec, train = std::move(train), cfg](const qnn::QnnParams& theta0, int) {
        return qnn::train_and_probe(spec, theta0, train, cfg);
    };
}

int AdaInitResult::iterations_used() const {
    for (auto it = state.history.rbegin(); it != state.history.rend(); ++it) {
        if (it->accepted) return it->t;
    }
    return 0;
}

namespace {

std::string fmt(double x) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

}  // namespace

std::string feedback_text(int t, const qnn::QnnParams& theta0, double variance, double s_prev) {
    const auto& v = theta0.theta;
    const double n = static_cast<double>(v.size());
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    const auto [mn, mx] = std::minmax_element(v.begin(), v.end());
    return "iteration " + std::to_string(t) + ": 'l0' had mean " + fmt(mean) + ", std " + fmt(std::sqrt(ss / n)) +
           ", min " + fmt(*mn) + ", max " + fmt(*mx) + "; gradient variance " + fmt(variance) +
           " (previous best " + fmt(s_prev) + "). Sample parameters that raise the gradient variance further.";
}

AdaInitResult run_adainit(const qnn::CircuitSpec& spec, gen::ParamGenerator& generator, const Evaluator& evaluate,
                          const AdaInitConfig& cfg) {
    spec.validate();
    AdaInitResult result;
    EIState& st = result.state;
    const double alpha = cfg.threshold.value(spec);

    gen::PromptContext ctx = cfg.prompt;
    ctx.nlayers = spec.num_layers;
    ctx.nqubits = spec.num_qubits;
    ctx.nrot = spec.num_rotations;
    if (!cfg.use_description) ctx.data_desc.clear();
    ctx.feedback.clear();
    std::string trace;

    for (int t = 1; t <= cfg.iterations; ++t) {
        st.t = t;
        IterationRecord rec;
        rec.t = t;
        rec.threshold = alpha;
        rec.provenance = generator.name();

        const qnn::QnnParams* prev = (cfg.use_feedback && !st.candidates.empty()) ? &st.candidates.back() : nullptr;
        gen::ParseResult generated;
        try {
            generated = generator.generate(ctx, derive_seed(cfg.seed, static_cast<std::uint64_t>(t)), prev);
        } catch (const gen::GenerationError& e) {
            result.aborted = true;
            result.abort_reason = e.what();
            log::error("generator failed at iteration " + std::to_string(t) + ": " + e.what());
            break;
        }

        if (const auto* bad = std::get_if<gen::ParseError>(&generated)) {
            rec.note = "generation rejected: " + bad->message;
            log::warn("iteration " + std::to_string(t) + ": " + rec.note);
        } else {
            const auto& candidate = std::get<gen::GeneratedParams>(generated);
            rec.provenance = candidate.provenance;
            try {
                const auto report = evaluate(candidate.params, t);
                rec.variance = report.variance;
                rec.grad_min = report.grad_min;
                rec.grad_max = report.grad_max;
                rec.delta = expected_improvement(report.variance, st.S);
            } catch (const DivergenceError& e) {
                rec.note = std::string("training diverged: ") + e.what();
                log::warn("iteration " + std::to_string(t) + ": " + rec.note);
            }
            if (rec.note.empty() && rec.delta >= alpha) {
                rec.accepted = true;
                if (cfg.use_feedback) {
                    const std::string line = feedback_text(t, candidate.params, rec.variance, st.S);
                    trace = cfg.feedback_depth == FeedbackDepth::FullTrace && !trace.empty() ? trace + " | " + line
                                                                                             : line;
                    ctx.feedback = trace;
                }
                // S^(t) = S^(t-1) + delta = Var^(t)
                st.S += rec.delta;
                st.candidates.push_back(candidate.params);
            }
        }
        rec.S = st.S;
        st.history.push_back(std::move(rec));
    }
    return result;
}

std::vector<CostPoint> cumulative_cost_curve(const std::vector<IterationRecord>& history) {
    if (history.empty()) throw InvalidArgument("cost curve needs a non-empty history");
    const double T = static_cast<double>(history.size());
    const double final_s = history.back().S;
    std::vector<CostPoint> curve;
    curve.reserve(history.size());
    for (std::size_t i = 0; i < history.size(); ++i) {
        curve.push_back({static_cast<double>(i + 1) / T, final_s > 0.0 ? history[i].S / final_s : 0.0});
    }
    return curve;
}

void write_history(std::ostream& out, const std::vector<IterationRecord>& history) {
    for (const auto& r : history) {
        nlohmann::json j = {{"t", r.t},
                            {"var", r.variance},
                            {"delta", r.delta},
                            {"threshold", r.threshold},
                            {"accepted", r.accepted},
                            {"S", r.S},
                            {"generator_provenance", r.provenance},
                            {"grad_min", r.grad_min},
                            {"grad_max", r.grad_max}};
        if (!r.note.empty()) j["note"] = r.note;
        out << j.dump() << '\n';
    }
}

std::vector<IterationRecord> read_history(std::istream& in) {
    std::vector<IterationRecord> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto j = nlohmann::json::parse(line);
        IterationRecord r;
        r.t = j.at("t");
        r.variance = j.at("var");
        r.delta = j.at("delta");
        r.threshold = j.at("threshold");
        r.accepted = j.at("accepted");
        r.S = j.at("S");
        r.provenance = j.at("generator_provenance");
        r.grad_min = j.value("grad_min", 0.0);
        r.grad_max = j.value("grad_max", 0.0);
        r.note = j.value("note", std::string{});
        out.push_back(std::move(r));
    }
    return out;
}

std::string params_to_json(const qnn::QnnParams& p) {
    nlohmann::json l0 = nlohmann::json::array();
    for (int l = 0; l < p.num_layers; ++l) {
        nlohmann::json layer = nlohmann::json::array();
        for (int q = 0; q < p.num_qubits; ++q) {
            nlohmann::json rots = nlohmann::json::array();
            for (int r = 0; r < p.num_rotations; ++r) rots.push_back(p.theta_at(l, q, r));
            layer.push_back(rots);
        }
        l0.push_back(layer);
    }
    nlohmann::json l1 = nlohmann::json::array();
    for (int c = 0; c < p.num_classes; ++c) {
        nlohmann::json row = nlohmann::json::array();
        for (int q = 0; q < p.num_qubits; ++q) row.push_back(p.weight(c, q));
        l1.push_back(row);
    }
    return nlohmann::json{{"l0", l0}, {"l1", l1}, {"l2", p.head_bias}}.dump();
}

qnn::QnnParams params_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    const auto& l0 = j.at("l0");
    const auto& l1 = j.at("l1");
    if (l0.empty() || l0[0].empty() || l1.empty()) throw ShapeMismatch("parameter file has empty lists");
    qnn::CircuitSpec spec{static_cast<int>(l0.size()), static_cast<int>(l0[0].size()),
                          static_cast<int>(l0[0][0].size())};
    const int classes = static_cast<int>(l1.size());
    auto result = gen::parse_and_validate(text, spec, classes);
    if (auto* err = std::get_if<gen::ParseError>(&result)) throw ShapeMismatch(err->message);
    return std::get<gen::GeneratedParams>(result).params;
}

}  // namespace bplab::adainit
