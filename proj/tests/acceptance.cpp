// Acceptance checks 1-10. Prints one PASS/FAIL line per criterion; exit
// status is non-zero when any selected criterion fails.
//
//   bplab_acceptance            run all
//   bplab_acceptance --only 3   run one

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "bplab/adainit.hpp"
#include "bplab/dataset.hpp"
#include "bplab/experiment.hpp"
#include "bplab/generator.hpp"
#include "bplab/initializers.hpp"
#include "bplab/log.hpp"
#include "bplab/qnn.hpp"
#include "bplab/state_vector.hpp"
#include "bplab/submartingale.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace bplab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

struct Criterion {
    int id;
    const char* name;
    double limit_seconds;  // 0 = no runtime limit
    std::function<Outcome()> run;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

fs::path scratch(const std::string& name) {
    const auto d = fs::temp_directory_path() / ("bplab_acceptance_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

// 1. Parameter-shift gradients against central differences of the dense oracle.
Outcome gradient_oracle() {
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> ang(0.0, 2 * std::numbers::pi), w(-1.5, 1.5), x(0.0, std::numbers::pi);
    const double h = 1e-5;
    double worst = 0.0;
    for (int cfg = 0; cfg < 20; ++cfg) {
        const qnn::CircuitSpec spec{1 + static_cast<int>(rng() % 3), 1 + static_cast<int>(rng() % 4), 3};
        auto p = qnn::QnnParams::zeros(spec, 2);
        for (auto& v : p.theta) v = ang(rng);
        for (auto& v : p.head_weights) v = w(rng);
        for (auto& v : p.head_bias) v = w(rng);
        qnn::LabeledData d;
        d.dim = static_cast<std::size_t>(spec.num_qubits);
        for (int i = 0; i < 3; ++i) {
            std::vector<double> row(d.dim);
            for (auto& v : row) v = x(rng);
            d.push_back(row, static_cast<int>(rng() % 2));
        }
        auto loss = [&](const std::vector<double>& theta) {
            double total = 0.0;
            for (std::size_t i = 0; i < d.size(); ++i) {
                const auto r = d.row(i);
                total += oracle::sample_loss(spec.num_layers, spec.num_qubits, 2, theta, p.head_weights, p.head_bias,
                                             std::vector<double>(r.begin(), r.end()), d.labels[i]);
            }
            return total / static_cast<double>(d.size());
        };
        const auto g = qnn::batch_gradients(spec, p, d);
        for (std::size_t k = 0; k < p.theta.size(); ++k) {
            auto up = p.theta, dn = p.theta;
            up[k] += h;
            dn[k] -= h;
            worst = std::max(worst, std::abs(g.theta[k] - (loss(up) - loss(dn)) / (2 * h)));
        }
    }
    return {worst < 1e-6, fmt("20 configs, max |shift - fd| = %.2e (tol 1e-6)", worst)};
}

// 2. Kernels against dense unitaries, and norm drift.
Outcome simulator_oracle() {
    std::mt19937_64 rng(202);
    std::uniform_real_distribution<double> ang(-10.0, 10.0);
    auto random_gate = [&](int n) {
        const int q = static_cast<int>(rng() % n);
        switch (rng() % (n > 1 ? 4 : 3)) {
            case 0: return sim::GateOp::rx(q, ang(rng));
            case 1: return sim::GateOp::ry(q, ang(rng));
            case 2: return sim::GateOp::rz(q, ang(rng));
            default: return sim::GateOp::cnot(q, (q + 1 + static_cast<int>(rng() % (n - 1))) % n);
        }
    };
    double worst = 0.0;
    for (int n = 1; n <= 3; ++n) {
        for (int trial = 0; trial < 50; ++trial) {
            auto s = sim::init_zero_state(n);
            auto ref = oracle::zero_state(n);
            for (int k = 0; k < 30; ++k) {
                const auto g = random_gate(n);
                s.apply(g);
                oracle::Matrix m;
                switch (g.kind) {
                    case sim::GateKind::RX: m = oracle::embed(oracle::rx(g.angle), g.target, n); break;
                    case sim::GateKind::RY: m = oracle::embed(oracle::ry(g.angle), g.target, n); break;
                    case sim::GateKind::RZ: m = oracle::embed(oracle::rz(g.angle), g.target, n); break;
                    case sim::GateKind::CNOT: m = oracle::cnot(*g.control, g.target, n); break;
                }
                ref = oracle::matvec(m, ref);
            }
            for (std::size_t i = 0; i < ref.size(); ++i) worst = std::max(worst, std::abs(s.amplitudes()[i] - ref[i]));
        }
    }
    auto s = sim::init_zero_state(5);
    for (int k = 0; k < 10000; ++k) s.apply(random_gate(5));
    const double drift = std::abs(s.norm_squared() - 1.0);
    return {worst < 1e-10 && drift < 1e-9,
            fmt("max amplitude error %.2e (tol 1e-10), norm drift after 1e4 gates %.2e (tol 1e-9)", worst, drift)};
}

// 3. Gradient variance across restarts as the qubit count grows.
Outcome bp_decay() {
    const auto spec = data::DatasetSpec::standard(data::DatasetName::Iris);
    const auto raw = data::load_raw(spec);
    const auto init = init::InitSpec::uniform(0.0, 2 * std::numbers::pi);
    const std::vector<int> Ns = {2, 4, 6, 8, 10, 12};
    std::vector<double> medians;
    std::string detail = "median Var over 5 seed groups x 200 restarts:";
    for (int N : Ns) {
        std::vector<double> v;
        for (std::uint64_t group = 0; group < 5; ++group) {
            const auto ds = data::prepare(raw, spec, N, derive_seed(3, group));
            v.push_back(exp::restart_variance({2, N, 3}, init, ds.train, 200, derive_seed(33, group, N)));
        }
        std::sort(v.begin(), v.end());
        medians.push_back(v[2]);
        detail += fmt(" N=%d %.4g", N, v[2]);
    }
    bool monotone = true;
    for (std::size_t i = 1; i < medians.size(); ++i) monotone = monotone && medians[i] <= medians[i - 1];
    const double ratio = medians.back() / medians.front();
    detail += fmt("; non-increasing %s, Var(12)/Var(2) = %.3g (need <= 1e-2)", monotone ? "yes" : "no", ratio);
    return {monotone && ratio <= 1e-2, detail};
}

// 4. Hitting-time grid and the deterministic staircase.
Outcome hitting_grid() {
    int ok = 0, cells = 0;
    std::string bad;
    for (const auto& c : mart::theorem_grid(1000, 404)) {
        ++cells;
        if (c.report.bound_satisfied) ++ok;
        else bad += fmt(" [alpha=%g p=%g b=%g mean=%g bound=%g censored=%d]", c.alpha, c.p, c.b,
                        c.report.empirical_mean, c.report.theorem_bound, c.report.censored);
    }
    mart::IncrementProcess tight{0.1, mart::DeltaLaw::constant(0.1), 7};
    const auto t = mart::hitting_time(tight, 1.0, 1000, 1000);
    const bool all_ten = t.censored == 0 &&
                         std::all_of(t.hitting_times.begin(), t.hitting_times.end(), [](long v) { return v == 10; });
    return {ok == cells && all_ten,
            fmt("%d/%d grid cells within b/(alpha p) at 99%% one-sided; tight case T_b = 10 in %s trials", ok, cells,
                all_ten ? "all" : "NOT all") +
                bad};
}

// 5. Drift lower bound for five increment laws.
Outcome drift_bound() {
    int ok = 0;
    std::string detail;
    const auto laws = mart::drift_laws(505);
    for (const auto& [name, p] : laws) {
        const auto d = mart::drift_lower_bound_check(p, 100000);
        ok += d.passed ? 1 : 0;
        detail += fmt("%s%s: %.5f vs %.5f", detail.empty() ? "" : "; ", name.c_str(), d.mean, d.bound);
    }
    return {ok == static_cast<int>(laws.size()), fmt("%d/%zu laws pass; ", ok, laws.size()) + detail};
}

// 6. Scripted replay of the search loop.
Outcome replay() {
    struct Fixed final : gen::ParamGenerator {
        gen::ParseResult generate(const gen::PromptContext& ctx, std::uint64_t, const qnn::QnnParams*) override {
            return gen::GeneratedParams{qnn::QnnParams::zeros(ctx.circuit(), ctx.nclasses), "", "scripted"};
        }
        std::string name() const override { return "scripted"; }
    } g;
    const std::vector<double> vars = {0.1, 0.05, 0.2};
    adainit::AdaInitConfig cfg;
    cfg.iterations = 3;
    cfg.threshold.fixed = 1e-3;
    const auto res = adainit::run_adainit({1, 1, 3}, g,
                                          [&](const qnn::QnnParams&, int t) {
                                              qnn::VarianceReport r;
                                              r.variance = vars[static_cast<std::size_t>(t - 1)];
                                              return r;
                                          },
                                          cfg);
    std::vector<int> acc;
    std::vector<double> S;
    for (const auto& r : res.state.history) {
        if (r.accepted) acc.push_back(r.t);
        S.push_back(r.S);
    }
    const bool pass = acc == std::vector<int>{1, 3} && S == std::vector<double>{0.1, 0.1, 0.2} &&
                      res.state.candidates.size() == 2;
    std::ostringstream os;
    os << "accepted {";
    for (std::size_t i = 0; i < acc.size(); ++i) os << (i ? "," : "") << acc[i];
    os << "}, S [";
    for (std::size_t i = 0; i < S.size(); ++i) os << (i ? ", " : "") << S[i];
    os << "], candidates " << res.state.candidates.size();
    return {pass, os.str()};
}

// 7. Shape validation diagnostics and the accuracy harness.
Outcome shape_validation() {
    const auto r1 = gen::parse_and_validate(
        "{'l0': [[0.1, 0.2, 0.3], [0.4, 0.5, 0.6]], 'l1': [[1,1,1,1],[1,1,1,1]], 'l2': [0, 0]}", {2, 4, 3}, 2);
    const auto r2 = gen::parse_and_validate(
        "{'l0': [[[0,0,0],[0,0,0]],[[0,0,0],[0,0,0]]], 'l1': [[[1,1],[1,1]],[[1,1],[1,1]]], 'l2': [0, 0]}", {2, 2, 3},
        2);
    auto diag = [](const gen::ParseResult& r) {
        const auto* e = std::get_if<gen::ParseError>(&r);
        return e ? e->message : std::string("(accepted)");
    };
    const bool d1 = diag(r1).find("expected (2,4,3) actual (2,3)") != std::string::npos;
    const bool d2 = diag(r2).find("expected (2,2) actual (2,2,2)") != std::string::npos;
    const double good = gen::shape_accuracy(gen::conforming_mock(707)).accuracy;
    const double bad = gen::shape_accuracy(gen::shape_mutating_mock(707)).accuracy;
    return {d1 && d2 && good == 1.0 && bad == 0.0,
            fmt("case 1 \"%s\", case 2 \"%s\"; conforming %.0f%%, mutating %.0f%%", diag(r1).c_str(),
                diag(r2).c_str(), 100 * good, 100 * bad)};
}

// 8. Surrogate search against classic uniform initialisation on paired seeds.
Outcome adainit_vs_classic() {
    exp::ExperimentConfig base;
    base.dataset = data::DatasetName::Iris;
    base.axis = exp::SweepAxis::Qubits;
    base.points = {2, 4, 6};
    base.fixed_layers = 2;
    base.repeats = 5;
    base.iterations = 50;
    base.seed = 808;
    base.init = init::InitSpec::uniform(0.0, 2 * std::numbers::pi);

    auto classic = base;
    classic.method = exp::Method::Classic;
    classic.output_dir = scratch("c8_classic");
    auto ada = base;
    ada.method = exp::Method::AdaInit;
    ada.generator = exp::GeneratorKind::Surrogate;
    ada.output_dir = scratch("c8_adainit");

    const auto rc = exp::run_sweep(classic);
    const auto ra = exp::run_sweep(ada);
    std::map<int, std::vector<double>> cv, av;
    int failures = 0;
    for (const auto& r : rc.records) r.error.empty() ? cv[r.point].push_back(r.variance) : void(++failures);
    for (const auto& r : ra.records) r.error.empty() ? av[r.point].push_back(r.variance) : void(++failures);
    auto mean = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += x;
        return v.empty() ? 0.0 : s / static_cast<double>(v.size());
    };
    bool pass = failures == 0;
    std::string detail;
    for (int N : base.points) {
        const double c = mean(cv[N]), a = mean(av[N]);
        pass = pass && a > c;
        detail += fmt("%sN=%d classic %.4g vs adainit S %.4g", detail.empty() ? "" : "; ", N, c, a);
    }
    if (failures) detail += fmt("; %d failed cells", failures);
    return {pass, detail};
}

// 9. Threshold arithmetic.
Outcome threshold_values() {
    const double t2 = adainit::threshold({2, 2, 3}, 50);
    const double t4 = adainit::threshold({2, 4, 3}, 50);
    return {t2 == 1.0 / (50 * std::pow(2.0, 6)) && t2 == 3.125e-4 && t4 == 1.0 / (50 * std::pow(4.0, 6)) &&
                std::abs(t4 - 4.8828e-6) < 1e-10,
            fmt("threshold(N=2,K=50) = %.10g, threshold(N=4,K=50) = %.10g", t2, t4)};
}

// 10. Prepared split counts and hash stability.
Outcome data_counts() {
    const auto dir = scratch("c10");
    fs::path titanic, mnist;
    std::string notes;
    if (const char* p = std::getenv("BPLAB_TITANIC_CSV")) {
        titanic = p;
    } else {
        titanic = dir / "titanic.csv";
        fixtures::write_titanic_csv(titanic);
        notes += " titanic=synthetic";
    }
    if (const char* p = std::getenv("BPLAB_MNIST_DIR")) {
        mnist = p;
    } else {
        mnist = dir / "mnist";
        fixtures::write_mnist_idx(mnist);
        notes += " mnist=synthetic";
    }
    const std::vector<std::pair<data::DatasetName, fs::path>> sets = {{data::DatasetName::Iris, {}},
                                                                      {data::DatasetName::Wine, {}},
                                                                      {data::DatasetName::Titanic, titanic},
                                                                      {data::DatasetName::Mnist, mnist}};
    bool pass = true;
    std::string detail;
    for (const auto& [name, path] : sets) {
        const auto spec = data::DatasetSpec::standard(name, path);
        const auto a = data::prepare(data::load_raw(spec), spec, 4, 1010);
        const auto b = data::prepare(data::load_raw(spec), spec, 4, 1010);
        const auto c = a.counts();
        const bool ok = c == spec.splits && a.hash() == b.hash();
        pass = pass && ok;
        detail += fmt("%s%s %zu/%zu/%zu%s", detail.empty() ? "" : "; ", data::to_string(name).c_str(), c.train, c.val,
                      c.test, a.hash() == b.hash() ? "" : " HASH UNSTABLE");
    }
    if (!notes.empty()) detail += " (" + notes.substr(1) + ")";
    return {pass, detail};
}

}  // namespace

int main(int argc, char** argv) {
    int only = 0;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) only = std::atoi(argv[++i]);
    }
    log::set_min_level(log::Level::Error);

    const std::vector<Criterion> all = {
        {1, "gradient oracle", 60, gradient_oracle},
        {2, "simulator oracle", 60, simulator_oracle},
        {3, "gradient variance decay", 1800, bp_decay},
        {4, "hitting-time grid", 300, hitting_grid},
        {5, "drift bound", 60, drift_bound},
        {6, "search-loop replay", 0, replay},
        {7, "shape validation", 0, shape_validation},
        {8, "adainit vs classic", 3600, adainit_vs_classic},
        {9, "threshold arithmetic", 0, threshold_values},
        {10, "data-pipeline counts", 0, data_counts},
    };

    int failed = 0;
    for (const auto& c : all) {
        if (only && c.id != only) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (c.limit_seconds > 0 && secs > c.limit_seconds) {
            o.pass = false;
            o.detail += fmt(" (runtime %.1fs over the %.0fs limit)", secs, c.limit_seconds);
        }
        failed += o.pass ? 0 : 1;
        std::printf("criterion %2d %-24s %s  %s  [%.1fs]\n", c.id, c.name, o.pass ? "PASS" : "FAIL", o.detail.c_str(),
                    secs);
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
