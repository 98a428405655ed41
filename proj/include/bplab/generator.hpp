#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "bplab/qnn.hpp"

namespace bplab::gen {

struct PromptContext {
    int nlayers = 2;
    int nqubits = 2;
    int nrot = 3;
    int nclasses = 2;
    std::string init_family = "uniform";
    std::string data_desc;
    std::string feedback;
    double temperature = 0.5;
    double top_p = 0.9;

    void validate() const;
    qnn::CircuitSpec circuit() const { return {nlayers, nqubits, nrot}; }
};

/// The raw template text with {placeholders}.
const std::string& prompt_template();
std::string build_prompt(const PromptContext& ctx);

struct GeneratedParams {
    qnn::QnnParams params;
    std::string raw_text;
    std::string provenance;
};

enum class ParseErrorKind { Unparseable, ShapeMismatch, NonFinite };

struct ParseError {
    ParseErrorKind kind;
    std::string message;
};

using ParseResult = std::variant<GeneratedParams, ParseError>;

/// Strips code fences and surrounding prose, parses the {'l0','l1','l2'}
/// dictionary literal and checks every shape exactly.
ParseResult parse_and_validate(const std::string& raw_text, const qnn::CircuitSpec& expected, int num_classes);

/// Renders params as a dictionary literal. `digits` significant digits;
/// 17 round-trips exactly.
std::string format_params_dict(const qnn::QnnParams& params, int digits = 17);

/// Shape of a nested list, e.g. "(2,3)".
std::string shape_string(const std::vector<std::size_t>& dims);

/// Source of candidate theta0 for the search loop.
class ParamGenerator {
public:
    virtual ~ParamGenerator() = default;
    /// `previous_best` is the last accepted candidate when feedback is enabled.
    /// Throws on transport failure; shape problems come back as ParseError.
    virtual ParseResult generate(const PromptContext& ctx, std::uint64_t seed,
                                 const qnn::QnnParams* previous_best) = 0;
    virtual std::string name() const = 0;
};

struct SurrogateConfig {
    double sigma = 0.3;
};

/// Offline feedback-aware proposer: samples the context's init family when
/// there is no previous best, otherwise perturbs it with N(0, sigma^2) noise.
GeneratedParams surrogate_generate(const PromptContext& ctx, std::uint64_t seed,
                                   const qnn::QnnParams* previous_best, const SurrogateConfig& cfg = {});

class SurrogateGenerator final : public ParamGenerator {
public:
    explicit SurrogateGenerator(SurrogateConfig cfg = {}) : cfg_(cfg) {}
    ParseResult generate(const PromptContext& ctx, std::uint64_t seed, const qnn::QnnParams* previous_best) override;
    std::string name() const override { return "surrogate"; }

private:
    SurrogateConfig cfg_;
};

/// Any prompt -> text function (LLM endpoint, mock, fixture).
using TextSource = std::function<std::string(const PromptContext& ctx, const std::string& prompt)>;

/// Generator that renders the prompt, asks a text source and validates the reply.
class TextGenerator final : public ParamGenerator {
public:
    TextGenerator(TextSource source, std::string name) : source_(std::move(source)), name_(std::move(name)) {}
    ParseResult generate(const PromptContext& ctx, std::uint64_t seed, const qnn::QnnParams* previous_best) override;
    std::string name() const override { return name_; }

private:
    TextSource source_;
    std::string name_;
};

/// Mock text sources for offline runs. `conforming` replies with correctly
/// shaped dictionaries; `mutating` always breaks one shape.
TextSource conforming_mock(std::uint64_t seed);
TextSource shape_mutating_mock(std::uint64_t seed);

struct AccuracyCase {
    int nlayers;
    int nqubits;
    bool accepted;
    std::string diagnostic;
};

struct AccuracyReport {
    std::vector<AccuracyCase> cases;
    double accuracy = 0.0;
};

/// The 20 shape configurations: N = 2..20 step 2 at L = 2, then
/// L = 4..40 step 4 at N = 2.
std::vector<qnn::CircuitSpec> accuracy_configs();

/// accepted / cases over accuracy_configs(), binary classification.
AccuracyReport shape_accuracy(const TextSource& source, PromptContext base = {});

}  // namespace bplab::gen
