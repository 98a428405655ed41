#include <cmath>
#include <cstdio>
#include <memory>
#include <numbers>
#include <random>
#include <string>

#include "bplab/error.hpp"
#include "bplab/generator.hpp"
#include "bplab/initializers.hpp"
#include "bplab/random.hpp"

namespace bplab::gen {
namespace {

init::InitSpec family_spec(const std::string& family) {
    if (family == "uniform") return init::InitSpec::uniform(0.0, 2 * std::numbers::pi);
    if (family == "normal") return init::InitSpec::normal(0.0, 1.0);
    if (family == "beta") return init::InitSpec::beta_dist(2.0, 2.0, 0.0, std::numbers::pi);
    return init::InitSpec::parse(family);
}

double round4(double x) { return std::round(x * 1e4) / 1e4; }

}  // namespace

GeneratedParams surrogate_generate(const PromptContext& ctx, std::uint64_t seed, const qnn::QnnParams* previous_best,
                                   const SurrogateConfig& cfg) {
    ctx.validate();
    if (!(cfg.sigma >= 0.0)) throw InvalidArgument("surrogate sigma must be >= 0");
    const auto spec = ctx.circuit();
    GeneratedParams out;
    if (!previous_best) {
        auto init = family_spec(ctx.init_family);
        init.seed = seed;
        out.params = init::sample_params(spec, init, ctx.nclasses);
    } else {
        previous_best->check_against(spec);
        if (previous_best->num_classes != ctx.nclasses) throw ShapeMismatch("previous best has wrong class count");
        out.params = *previous_best;
        if (cfg.sigma > 0.0) {
            Rng rng(seed);
            std::normal_distribution<double> noise(0.0, cfg.sigma);
            for (auto* v : {&out.params.theta, &out.params.head_weights, &out.params.head_bias}) {
                for (auto& x : *v) x += noise(rng);
            }
        }
    }
    out.raw_text = format_params_dict(out.params);
    out.provenance = "surrogate";
    return out;
}

ParseResult SurrogateGenerator::generate(const PromptContext& ctx, std::uint64_t seed,
                                         const qnn::QnnParams* previous_best) {
    return surrogate_generate(ctx, seed, previous_best, cfg_);
}

ParseResult TextGenerator::generate(const PromptContext& ctx, std::uint64_t, const qnn::QnnParams*) {
    const std::string prompt = build_prompt(ctx);
    auto result = parse_and_validate(source_(ctx, prompt), ctx.circuit(), ctx.nclasses);
    if (auto* ok = std::get_if<GeneratedParams>(&result)) ok->provenance = name_;
    return result;
}

namespace {

/// Nested list literal of `values` laid out with shape `dims`.
std::string nested_list(const std::vector<double>& values, const std::vector<std::size_t>& dims,
                        std::size_t axis = 0, std::size_t offset = 0) {
    std::string out = "[";
    std::size_t stride = 1;
    for (std::size_t a = axis + 1; a < dims.size(); ++a) stride *= dims[a];
    for (std::size_t i = 0; i < dims[axis]; ++i) {
        if (i) out += ", ";
        if (axis + 1 == dims.size()) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.4f", values[(offset + i) % values.size()]);
            out += buf;
        } else {
            out += nested_list(values, dims, axis + 1, offset + i * stride);
        }
    }
    return out + "]";
}

/// mutation 0: conforming; 1: l0 loses its qubit axis; 2: l1 gains a trailing axis.
std::string mock_reply(const PromptContext& ctx, Rng& rng, int mutation) {
    std::uniform_real_distribution<double> u(0.0, 2 * std::numbers::pi);
    const std::size_t L = ctx.nlayers, N = ctx.nqubits, R = ctx.nrot, C = ctx.nclasses;
    std::vector<double> values(L * N * R + C * N + C);
    for (auto& x : values) x = round4(u(rng));

    std::vector<std::size_t> l0{L, N, R}, l1{C, N};
    if (mutation == 1) l0 = {L, R};
    if (mutation == 2) l1 = {C, N, 2};
    std::string dict = "{'l0': " + nested_list(values, l0) + ", 'l1': " + nested_list(values, l1) +
                       ", 'l2': " + nested_list(values, {C}) + "}";
    // Replies sometimes arrive fenced despite the instructions.
    return std::uniform_int_distribution<int>(0, 1)(rng) ? "```python\n" + dict + "\n```" : dict;
}

}  // namespace

TextSource conforming_mock(std::uint64_t seed) {
    auto rng = std::make_shared<Rng>(seed);
    return [rng](const PromptContext& ctx, const std::string&) { return mock_reply(ctx, *rng, 0); };
}

TextSource shape_mutating_mock(std::uint64_t seed) {
    auto rng = std::make_shared<Rng>(seed);
    auto counter = std::make_shared<int>(0);
    return [rng, counter](const PromptContext& ctx, const std::string&) {
        return mock_reply(ctx, *rng, 1 + ((*counter)++ % 2));
    };
}

std::vector<qnn::CircuitSpec> accuracy_configs() {
    std::vector<qnn::CircuitSpec> out;
    for (int n = 2; n <= 20; n += 2) out.push_back({2, n, 3});
    for (int l = 4; l <= 40; l += 4) out.push_back({l, 2, 3});
    return out;
}

AccuracyReport shape_accuracy(const TextSource& source, PromptContext base) {
    AccuracyReport report;
    int accepted = 0;
    for (const auto& spec : accuracy_configs()) {
        PromptContext ctx = base;
        ctx.nlayers = spec.num_layers;
        ctx.nqubits = spec.num_qubits;
        ctx.nrot = spec.num_rotations;
        AccuracyCase c{spec.num_layers, spec.num_qubits, false, ""};
        try {
            const auto result = parse_and_validate(source(ctx, build_prompt(ctx)), spec, ctx.nclasses);
            if (const auto* err = std::get_if<ParseError>(&result)) {
                c.diagnostic = err->message;
            } else {
                c.accepted = true;
                ++accepted;
            }
        } catch (const std::exception& e) {
            c.diagnostic = e.what();
        }
        report.cases.push_back(std::move(c));
    }
    report.accuracy = static_cast<double>(accepted) / static_cast<double>(report.cases.size());
    return report;
}

}  // namespace bplab::gen
