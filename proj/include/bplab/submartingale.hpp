#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bplab/qnn.hpp"
#include "bplab/random.hpp"

namespace bplab::mart {

/// Law of the per-iteration improvement Delta.
///
///   Constant   Delta = value
///   Uniform    Delta ~ U[low, high]
///   Mixture    with probability accept_prob Delta ~ U[accept_low, accept_high]
///              (accept_low >= alpha; equal bounds give a point mass),
///              otherwise Delta ~ U[0, alpha)
struct DeltaLaw {
    enum class Kind { Constant, Uniform, Mixture };
    Kind kind = Kind::Constant;
    double value = 0.0;
    double low = 0.0;
    double high = 0.0;
    double accept_prob = 1.0;
    double accept_low = 0.0;
    double accept_high = 0.0;

    static DeltaLaw constant(double v);
    static DeltaLaw uniform(double low, double high);
    static DeltaLaw mixture(double p, double accept_low, double accept_high);

    double sample(double alpha, Rng& rng) const;
    /// P(Delta >= alpha), from the law's parameters.
    double prob_at_least(double alpha) const;
    std::string describe() const;
};

struct IncrementProcess {
    double alpha = 0.1;
    DeltaLaw law;
    std::uint64_t seed = 0;

    double p() const { return law.prob_at_least(alpha); }
    void validate() const;
};

struct Step {
    double delta;
    bool indicator;
    double S;
};

/// S^(t) = sum_{i<=t} Delta^(i) * 1{Delta^(i) >= alpha}; compensated summation.
std::vector<Step> simulate_S(const IncrementProcess& process, int steps);

struct DriftCheck {
    double mean = 0.0;      // empirical E[Delta * I]
    double stddev = 0.0;
    double std_error = 0.0;
    double bound = 0.0;     // alpha * p
    double margin = 0.0;    // mean - (bound - 3 * std_error)
    bool passed = false;
};

DriftCheck drift_lower_bound_check(const IncrementProcess& process, std::size_t n_samples);

struct HittingTimeReport {
    double b = 0.0;
    double alpha = 0.0;
    double p = 0.0;
    int trials = 0;
    int censored = 0;
    std::vector<long> hitting_times;  // uncensored trials only
    double empirical_mean = 0.0;
    double stddev = 0.0;
    /// One-sided 99% lower confidence limit of E[T_b].
    double lower_confidence = 0.0;
    double theorem_bound = 0.0;  // b / (alpha * p)
    bool bound_satisfied = false;
    /// Censored fraction below 1%.
    bool conclusive = false;
};

/// Hitting is S^(t) >= b (up to a relative 1e-12 for accumulated rounding).
/// Trial i uses seed derive_seed(process.seed, i).
HittingTimeReport hitting_time(const IncrementProcess& process, double b, long max_steps, int trials);

struct CorollaryReports {
    HittingTimeReport small_target;  // b = 1 / poly(N, L); bound K / p
    HittingTimeReport supremum;      // b = B_S from a pilot run; bound B_S * poly * K / p
    double pilot_supremum = 0.0;
};

struct CorollaryConfig {
    int K = 50;
    double p = 0.5;
    /// Accepted Delta ~ U[alpha, accept_scale * alpha]; 1 gives a point mass at alpha.
    double accept_scale = 2.0;
    int trials = 1000;
    int pilot_steps = 50;
    long max_steps = 1'000'000;
    std::uint64_t seed = 0;
};

CorollaryReports corollary_cases(const qnn::CircuitSpec& spec, const CorollaryConfig& cfg);

struct GridCell {
    double alpha = 0.0;
    double p = 0.0;
    double b = 0.0;
    HittingTimeReport report;
};

/// alpha in {1e-3, 1e-2, 1e-1} x p in {0.1, 0.5, 1} x b in {10 alpha, 100 alpha};
/// accepted Delta ~ U[alpha, 2 alpha].
std::vector<GridCell> theorem_grid(int trials, std::uint64_t seed, long max_steps = 1'000'000);

struct NamedProcess {
    std::string name;
    IncrementProcess process;
};

/// Five increment laws for the drift check, the tight equality case included.
std::vector<NamedProcess> drift_laws(std::uint64_t seed);

/// One JSON object per report, for line-delimited output.
std::string to_json(const HittingTimeReport& r);
std::string to_json(const DriftCheck& d);

/// Student t quantile used for the one-sided confidence limits.
double t_quantile(double prob, double dof);

}  // namespace bplab::mart
