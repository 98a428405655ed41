#include <cctype>
#include <charconv>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "bplab/error.hpp"
#include "bplab/experiment.hpp"

namespace bplab::exp {

namespace {

std::string trim(std::string_view s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return std::string(s.substr(a, b - a));
}

std::string unquote(std::string v) {
    if (v.size() >= 2 && (v.front() == '"' || v.front() == '\'') && v.back() == v.front()) {
        return v.substr(1, v.size() - 2);
    }
    return v;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        double d = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw InvalidArgument("config key '" + key + "': expected a number, got '" + v + "'");
    }
}

long long to_int(const std::string& key, const std::string& v) {
    long long out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size()) {
        throw InvalidArgument("config key '" + key + "': expected an integer, got '" + v + "'");
    }
    return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
    std::uint64_t out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size()) {
        throw InvalidArgument("config key '" + key + "': expected an unsigned integer, got '" + v + "'");
    }
    return out;
}

bool to_bool(const std::string& key, std::string v) {
    for (auto& c : v) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw InvalidArgument("config key '" + key + "': expected a boolean, got '" + v + "'");
}

std::vector<int> to_int_list(const std::string& key, const std::string& v) {
    std::vector<int> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        out.push_back(static_cast<int>(to_int(key, item)));
    }
    return out;
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
    return buf;
}

std::string canonical(const KeyValues& kv) {
    std::string s;
    for (const auto& [k, v] : kv) s += k + "=" + v + "\n";
    return s;
}

}  // namespace

KeyValues parse_key_values(const std::string& text) {
    KeyValues kv;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        // A '#' only starts a comment outside quotes.
        char quote = 0;
        for (std::size_t i = 0; i < line.size(); ++i) {
            char c = line[i];
            if (quote) {
                if (c == quote) quote = 0;
            } else if (c == '"' || c == '\'') {
                quote = c;
            } else if (c == '#') {
                line.resize(i);
                break;
            }
        }
        const std::string t = trim(line);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw InvalidArgument("config line " + std::to_string(lineno) + ": expected key = value");
        }
        std::string key = trim(std::string_view(t).substr(0, eq));
        if (key.empty()) throw InvalidArgument("config line " + std::to_string(lineno) + ": empty key");
        kv[key] = unquote(trim(std::string_view(t).substr(eq + 1)));
    }
    return kv;
}

KeyValues read_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_key_values(ss.str());
}

std::string to_string(SweepAxis a) { return a == SweepAxis::Qubits ? "qubits" : "layers"; }
std::string to_string(Method m) { return m == Method::Classic ? "classic" : "adainit"; }
std::string to_string(GeneratorKind g) {
    switch (g) {
        case GeneratorKind::Surrogate: return "surrogate";
        case GeneratorKind::Llm: return "llm";
        case GeneratorKind::Mock: return "mock";
    }
    return "?";
}
std::string to_string(VarianceMode v) { return v == VarianceMode::Training ? "training" : "restarts"; }

std::vector<PromptArm> ablation_arms() {
    return {{"both", true, true}, {"no_desc", false, true}, {"no_feedback", true, false}, {"neither", false, false}};
}

ExperimentConfig ExperimentConfig::from_key_values(const KeyValues& kv) {
    ExperimentConfig c;
    for (const auto& [key, v] : kv) {
        if (key == "dataset") c.dataset = data::parse_dataset_name(v);
        else if (key == "data_path") c.data_path = v;
        else if (key == "labels_path") c.labels_path = v;
        else if (key == "sweep") {
            if (v == "qubits") c.axis = SweepAxis::Qubits;
            else if (v == "layers") c.axis = SweepAxis::Layers;
            else throw InvalidArgument("sweep must be 'qubits' or 'layers', got '" + v + "'");
        } else if (key == "points") c.points = to_int_list(key, v);
        else if (key == "fixed_layers") c.fixed_layers = static_cast<int>(to_int(key, v));
        else if (key == "fixed_qubits") c.fixed_qubits = static_cast<int>(to_int(key, v));
        else if (key == "repeats") c.repeats = static_cast<int>(to_int(key, v));
        else if (key == "method") {
            if (v == "classic") c.method = Method::Classic;
            else if (v == "adainit") c.method = Method::AdaInit;
            else throw InvalidArgument("method must be 'classic' or 'adainit', got '" + v + "'");
        } else if (key == "init") c.init = init::InitSpec::parse(v);
        else if (key == "generator") {
            if (v == "surrogate") c.generator = GeneratorKind::Surrogate;
            else if (v == "llm") c.generator = GeneratorKind::Llm;
            else if (v == "mock") c.generator = GeneratorKind::Mock;
            else throw InvalidArgument("generator must be surrogate, llm or mock, got '" + v + "'");
        } else if (key == "iterations") c.iterations = static_cast<int>(to_int(key, v));
        else if (key == "K") c.K = static_cast<int>(to_int(key, v));
        else if (key == "poly") {
            if (v == "N6") c.poly = adainit::PolyKind::N6;
            else if (v == "N3L3") c.poly = adainit::PolyKind::N3L3;
            else throw InvalidArgument("poly must be N6 or N3L3, got '" + v + "'");
        } else if (key == "learning_rate") c.train.learning_rate = to_double(key, v);
        else if (key == "batch_size") c.train.batch_size = static_cast<int>(to_int(key, v));
        else if (key == "epochs") c.train.epochs = static_cast<int>(to_int(key, v));
        else if (key == "gradient_bound") c.train.gradient_bound = to_double(key, v);
        else if (key == "temperature") c.temperature = to_double(key, v);
        else if (key == "top_p") c.top_p = to_double(key, v);
        else if (key == "data_desc") c.data_desc = v;
        else if (key == "surrogate_sigma") c.surrogate_sigma = to_double(key, v);
        else if (key == "use_description") c.arm.use_description = to_bool(key, v);
        else if (key == "use_feedback") c.arm.use_feedback = to_bool(key, v);
        else if (key == "variance_mode") {
            if (v == "training") c.variance_mode = VarianceMode::Training;
            else if (v == "restarts") c.variance_mode = VarianceMode::Restarts;
            else throw InvalidArgument("variance_mode must be training or restarts, got '" + v + "'");
        } else if (key == "restarts") c.restarts = static_cast<int>(to_int(key, v));
        else if (key == "seed") c.seed = to_u64(key, v);
        else if (key == "output_dir") c.output_dir = v;
        else if (key == "workers") c.workers = static_cast<int>(to_int(key, v));
        else if (key == "endpoint") c.endpoint.url = v;
        else if (key == "model") c.endpoint.model = v;
        else if (key == "api_key_env") c.endpoint.api_key_env = v;
        else if (key == "timeout_seconds") c.endpoint.timeout_seconds = to_double(key, v);
        else if (key == "max_attempts") c.endpoint.max_attempts = static_cast<int>(to_int(key, v));
        else throw InvalidArgument("unknown config key '" + key + "'");
    }
    return c;
}

KeyValues ExperimentConfig::to_key_values() const {
    KeyValues kv;
    kv["dataset"] = data::to_string(dataset);
    kv["data_path"] = data_path.string();
    kv["labels_path"] = labels_path.string();
    kv["sweep"] = to_string(axis);
    std::string pts;
    for (int p : sweep_points()) pts += (pts.empty() ? "" : ",") + std::to_string(p);
    kv["points"] = pts;
    kv["fixed_layers"] = std::to_string(fixed_layers);
    kv["fixed_qubits"] = std::to_string(fixed_qubits);
    kv["repeats"] = std::to_string(repeats);
    kv["method"] = to_string(method);
    kv["init"] = init.to_string();
    kv["generator"] = to_string(generator);
    kv["iterations"] = std::to_string(iterations);
    kv["K"] = std::to_string(effective_K());
    kv["poly"] = poly == adainit::PolyKind::N6 ? "N6" : "N3L3";
    kv["learning_rate"] = fmt(train.learning_rate);
    kv["batch_size"] = std::to_string(train.batch_size);
    kv["epochs"] = std::to_string(train.epochs);
    kv["gradient_bound"] = fmt(train.gradient_bound);
    kv["temperature"] = fmt(temperature);
    kv["top_p"] = fmt(top_p);
    kv["data_desc"] = data_desc;
    kv["surrogate_sigma"] = fmt(surrogate_sigma);
    kv["use_description"] = arm.use_description ? "true" : "false";
    kv["use_feedback"] = arm.use_feedback ? "true" : "false";
    kv["variance_mode"] = to_string(variance_mode);
    kv["restarts"] = std::to_string(restarts);
    kv["seed"] = std::to_string(seed);
    kv["endpoint"] = endpoint.url;
    kv["model"] = endpoint.model;
    kv["api_key_env"] = endpoint.api_key_env;
    return kv;
}

std::vector<int> ExperimentConfig::sweep_points() const {
    if (!points.empty()) return points;
    std::vector<int> out;
    if (axis == SweepAxis::Qubits) {
        for (int n = 2; n <= 20; n += 2) out.push_back(n);
    } else {
        for (int l = 4; l <= 40; l += 4) out.push_back(l);
    }
    return out;
}

qnn::CircuitSpec ExperimentConfig::circuit_at(int point) const {
    return axis == SweepAxis::Qubits ? qnn::CircuitSpec{fixed_layers, point, 3} : qnn::CircuitSpec{point, fixed_qubits, 3};
}

std::string ExperimentConfig::fingerprint() const { return hex(fnv1a(canonical(to_key_values()))); }

std::string ExperimentConfig::sweep_fingerprint() const {
    static const std::set<std::string> keys = {"dataset", "data_path",    "labels_path", "sweep",        "points",
                                               "fixed_layers", "fixed_qubits", "repeats", "learning_rate", "batch_size",
                                               "epochs",  "variance_mode", "restarts",   "seed"};
    KeyValues sub;
    for (const auto& [k, v] : to_key_values()) {
        if (keys.count(k)) sub[k] = v;
    }
    return hex(fnv1a(canonical(sub)));
}

std::string ExperimentConfig::method_label() const {
    if (method == Method::Classic) return "classic:" + init.to_string();
    return "adainit:" + to_string(generator);
}

void ExperimentConfig::validate() const {
    if (repeats < 1) throw InvalidArgument("repeats must be >= 1");
    const auto pts = sweep_points();
    if (pts.empty()) throw InvalidArgument("sweep has no points");
    for (int p : pts) circuit_at(p).validate();
    if (workers < 1) throw InvalidArgument("workers must be >= 1");
    if (iterations < 1) throw InvalidArgument("iterations must be >= 1");
    if (K < 0) throw InvalidArgument("K must be >= 0");
    if (restarts < 2) throw InvalidArgument("restarts must be >= 2");
    if (!(surrogate_sigma >= 0.0)) throw InvalidArgument("surrogate_sigma must be >= 0");
    train.validate();
    init.validate();
    gen::PromptContext probe;
    probe.temperature = temperature;
    probe.top_p = top_p;
    probe.validate();
}

}  // namespace bplab::exp
