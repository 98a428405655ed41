#include <string>
#include <utility>

#include "bplab/error.hpp"
#include "bplab/generator.hpp"
#include "prompt_template.hpp"

namespace bplab::gen {

void PromptContext::validate() const {
    if (nlayers < 1 || nqubits < 1 || nrot < 1 || nclasses < 1) {
        throw InvalidArgument("prompt context dimensions must be positive");
    }
    if (!(temperature >= 0.0 && temperature <= 2.0)) throw InvalidArgument("temperature must lie in [0, 2]");
    if (!(top_p > 0.0 && top_p <= 1.0)) throw InvalidArgument("top_p must lie in (0, 1]");
}

const std::string& prompt_template() {
    static const std::string text = detail::kPromptTemplate;
    return text;
}

namespace {

void replace_all(std::string& text, const std::string& key, const std::string& value) {
    for (std::size_t pos = text.find(key); pos != std::string::npos; pos = text.find(key, pos + value.size())) {
        text.replace(pos, key.size(), value);
    }
}

}  // namespace

std::string build_prompt(const PromptContext& ctx) {
    ctx.validate();
    std::string text = prompt_template();
    // Free-text fields go last so their contents are never re-scanned.
    const std::pair<const char*, std::string> fields[] = {
        {"{nlayers}", std::to_string(ctx.nlayers)}, {"{nqubits}", std::to_string(ctx.nqubits)},
        {"{nrot}", std::to_string(ctx.nrot)},       {"{nclasses}", std::to_string(ctx.nclasses)},
        {"{init}", ctx.init_family},
    };
    for (const auto& [key, value] : fields) replace_all(text, key, value);
    const auto desc_pos = text.find("{data_desc}");
    const auto fb_pos = text.find("{feedback}");
    // feedback sits after data_desc in the template; substitute back to front.
    if (fb_pos != std::string::npos) text.replace(fb_pos, 10, ctx.feedback);
    if (desc_pos != std::string::npos) text.replace(desc_pos, 11, ctx.data_desc);
    return text;
}

}  // namespace bplab::gen
