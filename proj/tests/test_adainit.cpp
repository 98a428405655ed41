#include <doctest.h>

#include <random>
#include <sstream>

#include "bplab/adainit.hpp"
#include "bplab/chat_client.hpp"
#include "bplab/error.hpp"

using namespace bplab;
using namespace bplab::adainit;

namespace {

// Hands out zero parameters and remembers what the loop showed it.
class ScriptedGenerator final : public gen::ParamGenerator {
public:
    std::vector<std::string> feedback_seen, desc_seen;
    std::vector<bool> had_previous;
    std::vector<int> fail_at;       // iterations that produce a shape error
    int throw_at = 0;               // iteration that raises a transport error

    gen::ParseResult generate(const gen::PromptContext& ctx, std::uint64_t, const qnn::QnnParams* prev) override {
        const int t = static_cast<int>(feedback_seen.size()) + 1;
        feedback_seen.push_back(ctx.feedback);
        desc_seen.push_back(ctx.data_desc);
        had_previous.push_back(prev != nullptr);
        if (t == throw_at) throw gen::NetworkError("connection reset");
        if (std::find(fail_at.begin(), fail_at.end(), t) != fail_at.end()) {
            return gen::ParseError{gen::ParseErrorKind::ShapeMismatch, "l0: expected (1,1,3) actual (1,3)"};
        }
        gen::GeneratedParams g;
        g.params = qnn::QnnParams::zeros(ctx.circuit(), ctx.nclasses);
        g.params.theta[0] = t;  // tag the candidate with its iteration
        g.provenance = "scripted";
        return g;
    }
    std::string name() const override { return "scripted"; }
};

Evaluator scripted(std::vector<double> vars, int diverge_at = 0) {
    return [vars, diverge_at](const qnn::QnnParams&, int t) {
        if (t == diverge_at) throw DivergenceError("loss is nan");
        qnn::VarianceReport r;
        r.variance = vars.at(static_cast<std::size_t>(t - 1));
        return r;
    };
}

AdaInitConfig replay_config(int iterations) {
    AdaInitConfig cfg;
    cfg.iterations = iterations;
    cfg.threshold.fixed = 1e-3;
    cfg.prompt.data_desc = "toy data";
    return cfg;
}

const qnn::CircuitSpec kSpec{1, 1, 3};

}  // namespace

TEST_CASE("scripted replay: accept iterations 1 and 3") {
    ScriptedGenerator g;
    const auto res = run_adainit(kSpec, g, scripted({0.1, 0.05, 0.2}), replay_config(3));
    REQUIRE(res.state.history.size() == 3);
    std::vector<int> accepted;
    std::vector<double> S, delta;
    for (const auto& r : res.state.history) {
        if (r.accepted) accepted.push_back(r.t);
        S.push_back(r.S);
        delta.push_back(r.delta);
    }
    CHECK(accepted == std::vector<int>{1, 3});
    CHECK(S == std::vector<double>{0.1, 0.1, 0.2});
    CHECK(delta[0] == 0.1);
    CHECK(delta[1] == 0.0);
    CHECK(delta[2] == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(res.state.candidates.size() == 2);
    CHECK(res.best()->theta[0] == 3.0);
    CHECK(res.iterations_used() == 3);
    CHECK_FALSE(res.aborted);

    // Feedback appears after the first acceptance and is untouched by the rejection.
    CHECK(g.feedback_seen[0].empty());
    CHECK_FALSE(g.feedback_seen[1].empty());
    CHECK(g.feedback_seen[2] == g.feedback_seen[1]);
    CHECK(g.feedback_seen[1].find("iteration 1") != std::string::npos);
    CHECK(g.had_previous == std::vector<bool>{false, true, true});
    CHECK(g.desc_seen[0] == "toy data");
}

TEST_CASE("cost curve of the replay") {
    ScriptedGenerator g;
    const auto res = run_adainit(kSpec, g, scripted({0.1, 0.05, 0.2}), replay_config(3));
    const auto c = cumulative_cost_curve(res.state.history);
    REQUIRE(c.size() == 3);
    CHECK(c[0].iterations_fraction == doctest::Approx(1.0 / 3));
    CHECK(c[0].variance_fraction == doctest::Approx(0.5));
    CHECK(c[1].iterations_fraction == doctest::Approx(2.0 / 3));
    CHECK(c[1].variance_fraction == doctest::Approx(0.5));
    CHECK(c[2].iterations_fraction == 1.0);
    CHECK(c[2].variance_fraction == 1.0);
    CHECK_THROWS_AS(cumulative_cost_curve({}), InvalidArgument);
}

TEST_CASE("ablation switches withhold feedback and description") {
    ScriptedGenerator g;
    auto cfg = replay_config(3);
    cfg.use_feedback = false;
    cfg.use_description = false;
    run_adainit(kSpec, g, scripted({0.1, 0.05, 0.2}), cfg);
    for (int i = 0; i < 3; ++i) {
        CHECK(g.feedback_seen[i].empty());
        CHECK(g.desc_seen[i].empty());
        CHECK_FALSE(g.had_previous[i]);
    }
}

TEST_CASE("full-trace feedback keeps every accepted line") {
    ScriptedGenerator g;
    auto cfg = replay_config(4);
    cfg.feedback_depth = FeedbackDepth::FullTrace;
    run_adainit(kSpec, g, scripted({0.1, 0.05, 0.2, 0.0}), cfg);
    CHECK(g.feedback_seen[3].find("iteration 1") != std::string::npos);
    CHECK(g.feedback_seen[3].find("iteration 3") != std::string::npos);
}

TEST_CASE("shape errors and divergence are rejected iterations") {
    ScriptedGenerator g;
    g.fail_at = {2};
    const auto res = run_adainit(kSpec, g, scripted({0.1, 9.0, 0.3, 0.5}, 3), replay_config(4));
    REQUIRE(res.state.history.size() == 4);
    const auto& h = res.state.history;
    CHECK_FALSE(h[1].accepted);
    CHECK(h[1].note.find("expected (1,1,3)") != std::string::npos);
    CHECK_FALSE(h[2].accepted);
    CHECK(h[2].delta == 0.0);
    CHECK(h[2].note.find("diverged") != std::string::npos);
    CHECK(h[3].accepted);
    CHECK(h[3].S == doctest::Approx(0.5));
}

TEST_CASE("transport failure aborts with the partial history") {
    ScriptedGenerator g;
    g.throw_at = 3;
    const auto res = run_adainit(kSpec, g, scripted({0.1, 0.2, 0.3, 0.4}), replay_config(4));
    CHECK(res.aborted);
    CHECK(res.abort_reason.find("connection reset") != std::string::npos);
    CHECK(res.state.history.size() == 2);
    CHECK(res.state.S == doctest::Approx(0.2));
}

TEST_CASE("random scripts keep the submartingale bookkeeping") {
    std::mt19937_64 rng(17);
    std::exponential_distribution<double> law(10.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> vars(30);
        for (auto& v : vars) v = law(rng);
        ScriptedGenerator g;
        auto cfg = replay_config(30);
        cfg.threshold.fixed = 0.01;
        const auto res = run_adainit(kSpec, g, scripted(vars), cfg);
        double S = 0.0, best = 0.0;
        for (const auto& r : res.state.history) {
            CHECK(r.accepted == (r.delta >= 0.01));
            CHECK(r.S >= S);
            S += r.accepted ? r.delta : 0.0;
            CHECK(r.S == doctest::Approx(S));
            if (r.accepted) best = r.variance;
        }
        // Telescoping: S is the variance of the last accepted candidate.
        CHECK(res.state.S == doctest::Approx(best));
    }
}

TEST_CASE("threshold arithmetic") {
    CHECK(threshold({2, 2, 3}, 50) == 3.125e-4);
    CHECK(threshold({2, 4, 3}, 50) == 4.8828125e-6);
    CHECK(threshold({2, 2, 3}, 50, PolyKind::N3L3) == 1.0 / (50 * 64.0));
    CHECK(threshold({3, 2, 3}, 10, PolyKind::N3L3) == doctest::Approx(1.0 / (10 * 8 * 27.0)));
    CHECK_THROWS_AS(threshold({2, 2, 3}, 0), InvalidArgument);
    CHECK(expected_improvement(0.3, 0.1) == doctest::Approx(0.2));
    CHECK(expected_improvement(0.1, 0.3) == 0.0);
    CHECK_THROWS_AS(expected_improvement(-0.1, 0.0), InvalidArgument);
    CHECK_THROWS_AS(expected_improvement(std::nan(""), 0.0), InvalidArgument);
}

TEST_CASE("history and parameter serialization round trip") {
    ScriptedGenerator g;
    g.fail_at = {2};
    const auto res = run_adainit(kSpec, g, scripted({0.1, 0.05, 0.2}), replay_config(3));
    std::stringstream ss;
    write_history(ss, res.state.history);
    const auto back = read_history(ss);
    REQUIRE(back.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(back[i].t == res.state.history[i].t);
        CHECK(back[i].S == res.state.history[i].S);
        CHECK(back[i].accepted == res.state.history[i].accepted);
        CHECK(back[i].note == res.state.history[i].note);
        CHECK(back[i].provenance == res.state.history[i].provenance);
    }
    auto p = qnn::QnnParams::zeros({2, 3, 3}, 2);
    for (std::size_t i = 0; i < p.theta.size(); ++i) p.theta[i] = 0.1 * i - 1.0 / 3;
    CHECK(params_from_json(params_to_json(p)) == p);
}

TEST_CASE("surrogate search on a real training evaluator is reproducible") {
    qnn::LabeledData d;
    d.dim = 2;
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> x(0.0, 3.14);
    for (int i = 0; i < 20; ++i) {
        const std::vector<double> row = {x(rng), x(rng)};
        d.push_back(row, row[0] > 1.57 ? 1 : 0);
    }
    qnn::TrainConfig tc;
    tc.epochs = 15;
    const qnn::CircuitSpec spec{1, 2, 3};
    AdaInitConfig cfg;
    cfg.iterations = 4;
    cfg.seed = 3;
    gen::SurrogateGenerator g1, g2;
    const auto a = run_adainit(spec, g1, training_evaluator(spec, d, tc), cfg);
    const auto b = run_adainit(spec, g2, training_evaluator(spec, d, tc), cfg);
    REQUIRE(a.state.history.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) CHECK(a.state.history[i].variance == b.state.history[i].variance);
    CHECK(a.state.S == b.state.S);
    CHECK(a.state.S > 0.0);
}
