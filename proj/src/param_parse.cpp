#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "bplab/error.hpp"
#include "bplab/generator.hpp"

namespace bplab::gen {
namespace {

struct Node {
    bool is_list = false;
    double value = 0.0;
    std::vector<Node> items;
};

struct SyntaxError {
    std::string message;
};

/// Recursive-descent reader for the Python/JSON literal subset LLMs emit:
/// a dict of quoted keys to nested lists (or tuples) of numbers.
class LiteralReader {
public:
    explicit LiteralReader(std::string_view text) : text_(text) {}

    std::map<std::string, Node> read_dict() {
        skip_ws();
        expect('{');
        std::map<std::string, Node> out;
        skip_ws();
        if (peek() == '}') {
            ++pos_;
            return out;
        }
        while (true) {
            skip_ws();
            std::string key = read_key();
            skip_ws();
            expect(':');
            out[key] = read_value();
            skip_ws();
            if (peek() == ',') {
                ++pos_;
                skip_ws();
                if (peek() == '}') {
                    ++pos_;
                    break;
                }
                continue;
            }
            expect('}');
            break;
        }
        return out;
    }

private:
    char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    [[noreturn]] void fail(const std::string& what) const {
        throw SyntaxError{what + " at offset " + std::to_string(pos_)};
    }

    void expect(char c) {
        if (peek() != c) fail(std::string("expected '") + c + "'");
        ++pos_;
    }

    std::string read_key() {
        const char q = peek();
        if (q == '\'' || q == '"') {
            ++pos_;
            const auto end = text_.find(q, pos_);
            if (end == std::string_view::npos) fail("unterminated key");
            std::string key(text_.substr(pos_, end - pos_));
            pos_ = end + 1;
            return key;
        }
        std::string key;
        while (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_') key += text_[pos_++];
        if (key.empty()) fail("expected key");
        return key;
    }

    Node read_value() {
        skip_ws();
        const char c = peek();
        if (c == '[' || c == '(') return read_list(c == '[' ? ']' : ')');
        return read_number();
    }

    Node read_list(char close) {
        ++pos_;
        Node n;
        n.is_list = true;
        skip_ws();
        if (peek() == close) {
            ++pos_;
            return n;
        }
        while (true) {
            n.items.push_back(read_value());
            skip_ws();
            if (peek() == ',') {
                ++pos_;
                skip_ws();
                if (peek() == close) {
                    ++pos_;
                    break;
                }
                continue;
            }
            expect(close);
            break;
        }
        return n;
    }

    Node read_number() {
        const std::size_t start = pos_;
        while (pos_ < text_.size()) {
            const char c = text_[pos_];
            if (std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '+') {
                ++pos_;
            } else {
                break;
            }
        }
        std::string token(text_.substr(start, pos_ - start));
        if (token.empty()) fail("expected number");
        std::string lower;
        for (char c : token) lower += static_cast<char>(std::tolower(c));
        Node n;
        if (lower == "nan" || lower == "inf" || lower == "+inf" || lower == "-inf" || lower == "infinity" ||
            lower == "-infinity" || lower == "+infinity") {
            n.value = lower == "nan" ? NAN : (lower[0] == '-' ? -INFINITY : INFINITY);
            return n;
        }
        char* end = nullptr;
        n.value = std::strtod(token.c_str(), &end);
        if (end != token.c_str() + token.size()) fail("bad number '" + token + "'");
        return n;
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

/// Shape of a regular nested list; nullopt when ragged.
std::optional<std::vector<std::size_t>> shape_of(const Node& n) {
    if (!n.is_list) return std::vector<std::size_t>{};
    std::vector<std::size_t> dims{n.items.size()};
    if (n.items.empty()) return dims;
    auto first = shape_of(n.items.front());
    if (!first) return std::nullopt;
    for (std::size_t i = 1; i < n.items.size(); ++i) {
        if (shape_of(n.items[i]) != first) return std::nullopt;
    }
    dims.insert(dims.end(), first->begin(), first->end());
    return dims;
}

void flatten(const Node& n, std::vector<double>& out) {
    if (!n.is_list) {
        out.push_back(n.value);
        return;
    }
    for (const auto& c : n.items) flatten(c, out);
}

std::string_view extract_dict_text(std::string_view text) {
    const auto open = text.find('{');
    const auto close = text.rfind('}');
    if (open == std::string_view::npos || close == std::string_view::npos || close < open) return {};
    return text.substr(open, close - open + 1);
}

}  // namespace

std::string shape_string(const std::vector<std::size_t>& dims) {
    std::string s = "(";
    for (std::size_t i = 0; i < dims.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(dims[i]);
    }
    return s + ")";
}

ParseResult parse_and_validate(const std::string& raw_text, const qnn::CircuitSpec& expected, int num_classes) {
    const auto body = extract_dict_text(raw_text);
    if (body.empty()) return ParseError{ParseErrorKind::Unparseable, "no dictionary literal found"};

    std::map<std::string, Node> dict;
    try {
        dict = LiteralReader(body).read_dict();
    } catch (const SyntaxError& e) {
        return ParseError{ParseErrorKind::Unparseable, e.message};
    }

    const std::size_t L = expected.num_layers, N = expected.num_qubits, R = expected.num_rotations,
                      C = num_classes;
    const std::pair<const char*, std::vector<std::size_t>> want[] = {
        {"l0", {L, N, R}}, {"l1", {C, N}}, {"l2", {C}}};

    std::string problems;
    auto note = [&](const std::string& s) { problems += (problems.empty() ? "" : "; ") + s; };
    std::vector<double> flat[3];
    for (int k = 0; k < 3; ++k) {
        const auto& [key, dims] = want[k];
        auto it = dict.find(key);
        if (it == dict.end()) {
            note(std::string("missing key '") + key + "'");
            continue;
        }
        auto actual = shape_of(it->second);
        if (!actual) {
            note(std::string(key) + ": expected " + shape_string(dims) + " actual ragged list");
        } else if (*actual != dims) {
            note(std::string(key) + ": expected " + shape_string(dims) + " actual " + shape_string(*actual));
        } else {
            flatten(it->second, flat[k]);
        }
    }
    if (!problems.empty()) return ParseError{ParseErrorKind::ShapeMismatch, problems};

    for (const auto& v : flat) {
        for (double x : v) {
            if (!std::isfinite(x)) return ParseError{ParseErrorKind::NonFinite, "non-finite number in dictionary"};
        }
    }

    GeneratedParams out;
    out.params = qnn::QnnParams::zeros(expected, num_classes);
    out.params.theta = std::move(flat[0]);
    out.params.head_weights = std::move(flat[1]);
    out.params.head_bias = std::move(flat[2]);
    out.raw_text = raw_text;
    return out;
}

namespace {

void emit_number(std::string& out, double x, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, x);
    out += buf;
}

}  // namespace

std::string format_params_dict(const qnn::QnnParams& p, int digits) {
    std::string out = "{'l0': [";
    for (int l = 0; l < p.num_layers; ++l) {
        out += l ? ", [" : "[";
        for (int q = 0; q < p.num_qubits; ++q) {
            out += q ? ", [" : "[";
            for (int r = 0; r < p.num_rotations; ++r) {
                if (r) out += ", ";
                emit_number(out, p.theta_at(l, q, r), digits);
            }
            out += "]";
        }
        out += "]";
    }
    out += "], 'l1': [";
    for (int c = 0; c < p.num_classes; ++c) {
        out += c ? ", [" : "[";
        for (int q = 0; q < p.num_qubits; ++q) {
            if (q) out += ", ";
            emit_number(out, p.weight(c, q), digits);
        }
        out += "]";
    }
    out += "], 'l2': [";
    for (int c = 0; c < p.num_classes; ++c) {
        if (c) out += ", ";
        emit_number(out, p.head_bias[c], digits);
    }
    out += "]}";
    return out;
}

}  // namespace bplab::gen
