#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

#include "bplab/error.hpp"
#include "bplab/initializers.hpp"

using namespace bplab;
using namespace bplab::init;

namespace {

// Kolmogorov-Smirnov distance between a sample and a CDF.
double ks(std::vector<double> x, const std::function<double(double)>& cdf) {
    std::sort(x.begin(), x.end());
    const double n = static_cast<double>(x.size());
    double d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double f = cdf(x[i]);
        d = std::max({d, std::abs((i + 1) / n - f), std::abs(f - i / n)});
    }
    return d;
}

std::vector<double> sample(const InitSpec& spec, int layers, int n) {
    Rng rng(spec.seed);
    std::vector<double> v(n);
    for (auto& x : v) x = draw(spec, layers, rng);
    return v;
}

double phi(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

}  // namespace

TEST_CASE("families follow their distributions (KS < 0.02)") {
    constexpr int n = 20000;
    const double two_pi = 2 * std::numbers::pi;

    auto u = InitSpec::uniform(0.0, two_pi);
    u.seed = 1;
    CHECK(ks(sample(u, 2, n), [&](double x) { return std::clamp(x / two_pi, 0.0, 1.0); }) < 0.02);

    auto g = InitSpec::normal(0.5, 2.0);
    g.seed = 2;
    CHECK(ks(sample(g, 2, n), [](double x) { return phi((x - 0.5) / 2.0); }) < 0.02);

    auto b = InitSpec::beta_dist(2, 2, 0.0, std::numbers::pi);
    b.seed = 3;
    CHECK(ks(sample(b, 2, n), [](double x) {
              const double t = std::clamp(x / std::numbers::pi, 0.0, 1.0);
              return 3 * t * t - 2 * t * t * t;
          }) < 0.02);

    // Default GaInit variance is 1/L.
    auto ga = InitSpec::gainit();
    ga.seed = 4;
    CHECK(ks(sample(ga, 4, n), [](double x) { return phi(x / 0.5); }) < 0.02);

    auto be = InitSpec::beinit();
    be.seed = 5;
    CHECK(ks(sample(be, 2, n), [](double x) {
              const double t = std::clamp(x / std::numbers::pi, 0.0, 1.0);
              return 3 * t * t - 2 * t * t * t;
          }) < 0.02);
}

TEST_CASE("uniform draws stay in range") {
    auto u = InitSpec::uniform(-1.0, 1.0);
    for (double x : sample(u, 2, 5000)) {
        CHECK(x >= -1.0);
        CHECK(x < 1.0);
    }
}

TEST_CASE("parse and print round trip") {
    for (const char* text : {"uniform[0,6.2831853]", "normal(0,1)", "beta(2,2)[0,3.14]", "gainit", "gainit(0.1)", "beinit"}) {
        const auto s = InitSpec::parse(text);
        CHECK(InitSpec::parse(s.to_string()).to_string() == s.to_string());
    }
    CHECK(InitSpec::parse("uniform").high == doctest::Approx(2 * std::numbers::pi));
    CHECK(InitSpec::parse("Normal( 1 , 0.5 )").stddev == 0.5);
    CHECK(InitSpec::parse("gainit(0.1)").variance.value() == 0.1);
    CHECK_THROWS_AS(InitSpec::parse("cauchy(0,1)"), InvalidArgument);
    CHECK_THROWS_AS(InitSpec::parse("uniform[1,0]"), InvalidArgument);
    CHECK_THROWS_AS(InitSpec::parse("normal(0,-1)"), InvalidArgument);
    CHECK_THROWS_AS(InitSpec::parse("beta(2)"), InvalidArgument);
    CHECK_THROWS_AS(InitSpec::parse("uniform[0,1]x"), InvalidArgument);
}

TEST_CASE("sample_params shapes and determinism") {
    const qnn::CircuitSpec spec{3, 4, 3};
    auto s = InitSpec::uniform(0.0, 1.0);
    s.seed = 42;
    const auto a = sample_params(spec, s, 3);
    const auto b = sample_params(spec, s, 3);
    CHECK(a == b);
    CHECK(a.theta.size() == 36);
    CHECK(a.head_weights.size() == 12);
    CHECK(a.head_bias.size() == 3);
    CHECK_NOTHROW(a.check_against(spec));
    s.seed = 43;
    CHECK_FALSE(sample_params(spec, s, 3) == a);
}
