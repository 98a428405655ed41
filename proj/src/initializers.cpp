#include "bplab/initializers.hpp"

#include <cctype>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <vector>

#include "bplab/error.hpp"

namespace bplab::init {

InitSpec InitSpec::uniform(double low, double high) {
    InitSpec s;
    s.family = Family::Uniform;
    s.low = low;
    s.high = high;
    return s;
}

InitSpec InitSpec::normal(double mean, double stddev) {
    InitSpec s;
    s.family = Family::Normal;
    s.mean = mean;
    s.stddev = stddev;
    return s;
}

InitSpec InitSpec::beta_dist(double alpha, double beta, double low, double high) {
    InitSpec s;
    s.family = Family::Beta;
    s.alpha = alpha;
    s.beta = beta;
    s.low = low;
    s.high = high;
    return s;
}

InitSpec InitSpec::gainit(std::optional<double> variance) {
    InitSpec s;
    s.family = Family::GaInit;
    s.mean = 0.0;
    s.variance = variance;
    return s;
}

InitSpec InitSpec::beinit() {
    InitSpec s = beta_dist(2.0, 2.0, 0.0, std::numbers::pi);
    s.family = Family::BeInit;
    return s;
}

std::string_view family_name(Family f) {
    switch (f) {
        case Family::Uniform: return "uniform";
        case Family::Normal: return "normal";
        case Family::Beta: return "beta";
        case Family::GaInit: return "gainit";
        case Family::BeInit: return "beinit";
    }
    return "?";
}

void InitSpec::validate() const {
    switch (family) {
        case Family::Uniform:
            if (!(low < high)) throw InvalidArgument("uniform init needs low < high");
            break;
        case Family::Normal:
            if (!(stddev > 0.0)) throw InvalidArgument("normal init needs stddev > 0");
            break;
        case Family::Beta:
        case Family::BeInit:
            if (!(alpha > 0.0) || !(beta > 0.0)) throw InvalidArgument("beta init needs alpha, beta > 0");
            if (!(low < high)) throw InvalidArgument("beta init needs low < high");
            break;
        case Family::GaInit:
            if (variance && !(*variance > 0.0)) throw InvalidArgument("gainit variance must be > 0");
            break;
    }
}

std::optional<std::pair<double, double>> InitSpec::support() const {
    switch (family) {
        case Family::Uniform:
        case Family::Beta:
        case Family::BeInit: return std::pair{low, high};
        default: return std::nullopt;
    }
}

namespace {

std::vector<double> parse_numbers(std::string_view body) {
    std::vector<double> out;
    std::string item;
    std::stringstream ss{std::string(body)};
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            for (std::size_t i = used; i < item.size(); ++i) {
                if (!std::isspace(static_cast<unsigned char>(item[i]))) throw std::invalid_argument(item);
            }
        } catch (const std::exception&) {
            throw InvalidArgument("bad number '" + item + "' in init spec");
        }
    }
    return out;
}

/// Extracts the text between `open` and `close` starting at pos; advances pos.
std::optional<std::string_view> group(std::string_view text, std::size_t& pos, char open, char close) {
    if (pos >= text.size() || text[pos] != open) return std::nullopt;
    const auto end = text.find(close, pos);
    if (end == std::string_view::npos) throw InvalidArgument("unbalanced brackets in init spec");
    auto inner = text.substr(pos + 1, end - pos - 1);
    pos = end + 1;
    return inner;
}

}  // namespace

InitSpec InitSpec::parse(std::string_view raw) {
    std::string text;
    for (char c : raw) {
        if (!std::isspace(static_cast<unsigned char>(c))) text += static_cast<char>(std::tolower(c));
    }
    std::size_t pos = 0;
    while (pos < text.size() && std::isalpha(static_cast<unsigned char>(text[pos]))) ++pos;
    const std::string name = text.substr(0, pos);
    const std::string_view sv = text;

    auto args = group(sv, pos, '(', ')');
    auto range = group(sv, pos, '[', ']');
    if (!range) range = group(sv, pos, '[', ')');
    if (pos != text.size()) throw InvalidArgument("trailing characters in init spec '" + std::string(raw) + "'");

    auto nums = [](std::optional<std::string_view> g) {
        return g ? parse_numbers(*g) : std::vector<double>{};
    };
    const auto a = nums(args), r = nums(range);
    auto want = [&](const std::vector<double>& v, std::size_t n, const char* what) {
        if (v.size() != n) throw InvalidArgument(std::string("init spec expects ") + what);
    };

    InitSpec s;
    if (name == "uniform") {
        if (!a.empty()) throw InvalidArgument("uniform takes a [low,high] range");
        s = r.empty() ? uniform(0.0, 2 * std::numbers::pi) : (want(r, 2, "[low,high]"), uniform(r[0], r[1]));
    } else if (name == "normal" || name == "gaussian") {
        s = a.empty() ? normal(0.0, 1.0) : (want(a, 2, "(mean,stddev)"), normal(a[0], a[1]));
    } else if (name == "beta") {
        if (!a.empty()) want(a, 2, "(alpha,beta)");
        if (!r.empty()) want(r, 2, "[low,high]");
        s = beta_dist(a.empty() ? 2.0 : a[0], a.empty() ? 2.0 : a[1], r.empty() ? 0.0 : r[0],
                      r.empty() ? std::numbers::pi : r[1]);
    } else if (name == "gainit") {
        if (!a.empty()) want(a, 1, "(variance)");
        s = gainit(a.empty() ? std::nullopt : std::optional<double>(a[0]));
    } else if (name == "beinit") {
        s = beinit();
        if (!a.empty()) {
            want(a, 2, "(alpha,beta)");
            s.alpha = a[0];
            s.beta = a[1];
        }
        if (!r.empty()) {
            want(r, 2, "[low,high]");
            s.low = r[0];
            s.high = r[1];
        }
    } else {
        throw InvalidArgument("unknown init family '" + name + "'");
    }
    s.validate();
    return s;
}

std::string InitSpec::to_string() const {
    std::ostringstream os;
    os.precision(17);
    switch (family) {
        case Family::Uniform: os << "uniform[" << low << "," << high << "]"; break;
        case Family::Normal: os << "normal(" << mean << "," << stddev << ")"; break;
        case Family::Beta: os << "beta(" << alpha << "," << beta << ")[" << low << "," << high << "]"; break;
        case Family::GaInit:
            os << "gainit";
            if (variance) os << "(" << *variance << ")";
            break;
        case Family::BeInit: os << "beinit(" << alpha << "," << beta << ")[" << low << "," << high << "]"; break;
    }
    return os.str();
}

double draw(const InitSpec& spec, int num_layers, Rng& rng) {
    switch (spec.family) {
        case Family::Uniform: {
            std::uniform_real_distribution<double> d(spec.low, spec.high);
            return d(rng);
        }
        case Family::Normal: {
            std::normal_distribution<double> d(spec.mean, spec.stddev);
            return d(rng);
        }
        case Family::GaInit: {
            const double var = spec.variance.value_or(1.0 / std::max(1, num_layers));
            std::normal_distribution<double> d(0.0, std::sqrt(var));
            return d(rng);
        }
        case Family::Beta:
        case Family::BeInit: {
            std::gamma_distribution<double> ga(spec.alpha, 1.0), gb(spec.beta, 1.0);
            const double x = ga(rng), y = gb(rng);
            return spec.low + (spec.high - spec.low) * (x / (x + y));
        }
    }
    return 0.0;
}

qnn::QnnParams sample_params(const qnn::CircuitSpec& spec, const InitSpec& init, int num_classes) {
    init.validate();
    auto p = qnn::QnnParams::zeros(spec, num_classes);
    Rng rng(init.seed);
    for (auto* v : {&p.theta, &p.head_weights, &p.head_bias}) {
        for (auto& x : *v) x = draw(init, spec.num_layers, rng);
    }
    return p;
}

}  // namespace bplab::init
