#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "bplab/qnn.hpp"
#include "bplab/random.hpp"

namespace bplab::init {

enum class Family { Uniform, Normal, Beta, GaInit, BeInit };

/// One-shot initialisation distribution.
///
///   Uniform  U[low, high)
///   Normal   N(mean, stddev^2), no clipping (angles are periodic)
///   Beta     Beta(alpha, beta) mapped affinely onto [low, high]
///   GaInit   zero-mean Gaussian; variance defaults to 1/L when unset
///   BeInit   Beta(2, 2) on [0, pi] unless overridden
struct InitSpec {
    Family family = Family::Uniform;
    double low = 0.0;
    double high = 6.283185307179586;
    double mean = 0.0;
    double stddev = 1.0;
    double alpha = 2.0;
    double beta = 2.0;
    /// GaInit variance; empty means 1/L.
    std::optional<double> variance;
    std::uint64_t seed = 0;

    static InitSpec uniform(double low, double high);
    static InitSpec normal(double mean, double stddev);
    static InitSpec beta_dist(double alpha, double beta, double low, double high);
    static InitSpec gainit(std::optional<double> variance = std::nullopt);
    static InitSpec beinit();

    /// Parses strings such as "uniform[0,6.2831853]", "normal(0,1)",
    /// "beta(2,2)[0,3.14159]", "gainit", "gainit(0.1)", "beinit".
    static InitSpec parse(std::string_view text);
    std::string to_string() const;

    void validate() const;
    /// Interval every sample lies in, if the family is bounded.
    std::optional<std::pair<double, double>> support() const;
};

std::string_view family_name(Family f);

/// Draws one value for a circuit with `num_layers` layers.
double draw(const InitSpec& spec, int num_layers, Rng& rng);

/// theta0, head weights and head bias all i.i.d. from `init`, seeded by init.seed.
qnn::QnnParams sample_params(const qnn::CircuitSpec& spec, const InitSpec& init, int num_classes);

}  // namespace bplab::init
