#include "bplab/submartingale.hpp"

#include <cmath>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>

#include <json.hpp>

#include "bplab/adainit.hpp"
#include "bplab/error.hpp"

namespace bplab::mart {
namespace {

/// Neumaier compensated running sum.
class CompensatedSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        comp_ += std::abs(sum_) >= std::abs(x) ? (sum_ - t) + x : (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

constexpr double kHitTolerance = 1e-12;

}  // namespace

DeltaLaw DeltaLaw::constant(double v) {
    DeltaLaw d;
    d.kind = Kind::Constant;
    d.value = v;
    return d;
}

DeltaLaw DeltaLaw::uniform(double low, double high) {
    DeltaLaw d;
    d.kind = Kind::Uniform;
    d.low = low;
    d.high = high;
    return d;
}

DeltaLaw DeltaLaw::mixture(double p, double accept_low, double accept_high) {
    DeltaLaw d;
    d.kind = Kind::Mixture;
    d.accept_prob = p;
    d.accept_low = accept_low;
    d.accept_high = accept_high;
    return d;
}

double DeltaLaw::sample(double alpha, Rng& rng) const {
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    switch (kind) {
        case Kind::Constant: return value;
        case Kind::Uniform: return low + (high - low) * u01(rng);
        case Kind::Mixture:
            if (accept_prob >= 1.0 || u01(rng) < accept_prob) {
                return accept_low + (accept_high - accept_low) * u01(rng);
            }
            // U[0, alpha): u01 never returns 1.
            return alpha * u01(rng);
    }
    return 0.0;
}

double DeltaLaw::prob_at_least(double alpha) const {
    switch (kind) {
        case Kind::Constant: return value >= alpha ? 1.0 : 0.0;
        case Kind::Uniform:
            if (alpha <= low) return 1.0;
            if (alpha > high) return 0.0;
            return (high - alpha) / (high - low);
        case Kind::Mixture: return accept_prob;
    }
    return 0.0;
}

std::string DeltaLaw::describe() const {
    std::ostringstream os;
    switch (kind) {
        case Kind::Constant: os << "constant(" << value << ")"; break;
        case Kind::Uniform: os << "uniform[" << low << "," << high << "]"; break;
        case Kind::Mixture:
            os << "mixture(p=" << accept_prob << ", accept=[" << accept_low << "," << accept_high << "])";
            break;
    }
    return os.str();
}

void IncrementProcess::validate() const {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw InvalidArgument("alpha must be positive and finite");
    switch (law.kind) {
        case DeltaLaw::Kind::Constant:
            if (!(law.value >= 0.0)) throw InvalidArgument("constant delta must be >= 0");
            break;
        case DeltaLaw::Kind::Uniform:
            if (!(law.low >= 0.0 && law.low < law.high)) throw InvalidArgument("uniform delta needs 0 <= low < high");
            break;
        case DeltaLaw::Kind::Mixture:
            if (!(law.accept_prob > 0.0 && law.accept_prob <= 1.0)) throw InvalidArgument("mixture p must be in (0,1]");
            if (!(law.accept_low >= alpha && law.accept_high >= law.accept_low)) {
                throw InvalidArgument("mixture accept range must lie at or above alpha");
            }
            break;
    }
}

std::vector<Step> simulate_S(const IncrementProcess& process, int steps) {
    process.validate();
    if (steps < 1) throw InvalidArgument("simulate_S needs steps >= 1");
    Rng rng(process.seed);
    CompensatedSum s;
    std::vector<Step> out;
    out.reserve(steps);
    for (int t = 0; t < steps; ++t) {
        const double d = process.law.sample(process.alpha, rng);
        const bool ind = d >= process.alpha;
        if (ind) s.add(d);
        out.push_back({d, ind, s.value()});
    }
    return out;
}

DriftCheck drift_lower_bound_check(const IncrementProcess& process, std::size_t n) {
    process.validate();
    if (n < 10000) throw InvalidArgument("drift check needs at least 1e4 samples");
    Rng rng(process.seed);
    CompensatedSum sum;
    std::vector<double> w(n);
    for (auto& x : w) {
        const double d = process.law.sample(process.alpha, rng);
        x = d >= process.alpha ? d : 0.0;
        sum.add(x);
    }
    DriftCheck c;
    c.mean = sum.value() / static_cast<double>(n);
    CompensatedSum ss;
    for (double x : w) ss.add((x - c.mean) * (x - c.mean));
    c.stddev = std::sqrt(ss.value() / static_cast<double>(n - 1));
    c.std_error = c.stddev / std::sqrt(static_cast<double>(n));
    c.bound = process.alpha * process.p();
    c.margin = c.mean - (c.bound - 3.0 * c.std_error);
    c.passed = c.margin >= 0.0;
    return c;
}

double t_quantile(double prob, double dof) {
    boost::math::students_t dist(dof);
    return boost::math::quantile(dist, prob);
}

HittingTimeReport hitting_time(const IncrementProcess& process, double b, long max_steps, int trials) {
    process.validate();
    if (!(b > 0.0)) throw InvalidArgument("hitting threshold b must be > 0");
    if (trials < 1 || max_steps < 1) throw InvalidArgument("hitting_time needs trials >= 1 and max_steps >= 1");

    HittingTimeReport r;
    r.b = b;
    r.alpha = process.alpha;
    r.p = process.p();
    r.trials = trials;
    r.theorem_bound = r.p > 0.0 ? b / (process.alpha * r.p) : INFINITY;
    const double target = b * (1.0 - kHitTolerance);

    for (int i = 0; i < trials; ++i) {
        Rng rng(derive_seed(process.seed, static_cast<std::uint64_t>(i)));
        CompensatedSum s;
        long hit = 0;
        for (long t = 1; t <= max_steps; ++t) {
            const double d = process.law.sample(process.alpha, rng);
            if (d >= process.alpha) {
                s.add(d);
                if (s.value() >= target) {
                    hit = t;
                    break;
                }
            }
        }
        if (hit == 0) {
            ++r.censored;
        } else {
            r.hitting_times.push_back(hit);
        }
    }

    const std::size_t n = r.hitting_times.size();
    r.conclusive = static_cast<double>(r.censored) < 0.01 * trials && n > 1;
    if (n == 0) return r;
    CompensatedSum sum;
    for (long t : r.hitting_times) sum.add(static_cast<double>(t));
    r.empirical_mean = sum.value() / static_cast<double>(n);
    if (n > 1) {
        double ss = 0.0;
        for (long t : r.hitting_times) ss += (t - r.empirical_mean) * (t - r.empirical_mean);
        r.stddev = std::sqrt(ss / static_cast<double>(n - 1));
        r.lower_confidence = r.empirical_mean - t_quantile(0.99, static_cast<double>(n - 1)) * r.stddev /
                                                    std::sqrt(static_cast<double>(n));
    } else {
        r.lower_confidence = r.empirical_mean;
    }
    // Violation only when the whole one-sided interval sits above the bound.
    r.bound_satisfied = r.conclusive && r.lower_confidence <= r.theorem_bound;
    return r;
}

CorollaryReports corollary_cases(const qnn::CircuitSpec& spec, const CorollaryConfig& cfg) {
    const double alpha = adainit::threshold(spec, cfg.K);
    const double poly = adainit::ThresholdSpec{cfg.K, adainit::PolyKind::N6, {}}.poly_value(spec.num_qubits, spec.num_layers);
    if (!(cfg.accept_scale >= 1.0)) throw InvalidArgument("accept_scale must be >= 1");

    IncrementProcess process;
    process.alpha = alpha;
    process.law = DeltaLaw::mixture(cfg.p, alpha, cfg.accept_scale * alpha);
    process.seed = cfg.seed;

    CorollaryReports out;
    out.small_target = hitting_time(process, 1.0 / poly, cfg.max_steps, cfg.trials);

    IncrementProcess pilot = process;
    pilot.seed = derive_seed(cfg.seed, 0xB5);
    out.pilot_supremum = simulate_S(pilot, cfg.pilot_steps).back().S;
    if (out.pilot_supremum > 0.0) {
        out.supremum = hitting_time(process, out.pilot_supremum, cfg.max_steps, cfg.trials);
    }
    return out;
}

std::vector<GridCell> theorem_grid(int trials, std::uint64_t seed, long max_steps) {
    std::vector<GridCell> out;
    std::uint64_t k = 0;
    for (double alpha : {1e-3, 1e-2, 1e-1}) {
        for (double p : {0.1, 0.5, 1.0}) {
            for (double mult : {10.0, 100.0}) {
                IncrementProcess proc;
                proc.alpha = alpha;
                proc.law = DeltaLaw::mixture(p, alpha, 2 * alpha);
                proc.seed = derive_seed(seed, k++);
                GridCell c;
                c.alpha = alpha;
                c.p = p;
                c.b = mult * alpha;
                c.report = hitting_time(proc, c.b, max_steps, trials);
                out.push_back(std::move(c));
            }
        }
    }
    return out;
}

std::vector<NamedProcess> drift_laws(std::uint64_t seed) {
    const double a = 0.1;
    std::vector<NamedProcess> v = {
        {"uniform[0,2a]", {a, DeltaLaw::uniform(0.0, 2 * a), 0}},
        {"constant a (tight)", {a, DeltaLaw::constant(a), 0}},
        {"point mass 10a, p=0.3", {a, DeltaLaw::mixture(0.3, 10 * a, 10 * a), 0}},
        {"accept U[a,2a], p=0.5", {a, DeltaLaw::mixture(0.5, a, 2 * a), 0}},
        {"uniform[0,10a]", {a, DeltaLaw::uniform(0.0, 10 * a), 0}},
    };
    for (std::size_t i = 0; i < v.size(); ++i) v[i].process.seed = derive_seed(seed, i);
    return v;
}

std::string to_json(const HittingTimeReport& r) {
    nlohmann::json j = {{"type", "hitting_time"}, {"b", r.b},
                        {"alpha", r.alpha}, {"p", r.p},
                        {"trials", r.trials}, {"censored", r.censored},
                        {"empirical_mean", r.empirical_mean}, {"stddev", r.stddev},
                        {"lower_confidence_99", r.lower_confidence}, {"theorem_bound", r.theorem_bound},
                        {"bound_satisfied", r.bound_satisfied}, {"conclusive", r.conclusive}};
    return j.dump();
}

std::string to_json(const DriftCheck& d) {
    nlohmann::json j = {{"type", "drift"},          {"mean", d.mean},     {"stddev", d.stddev},
                        {"std_error", d.std_error}, {"bound", d.bound},   {"margin", d.margin},
                        {"passed", d.passed}};
    return j.dump();
}

}  // namespace bplab::mart
