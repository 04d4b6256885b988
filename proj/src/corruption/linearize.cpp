#include "dnlg/corruption/linearize.hpp"

#include <cctype>

#include "dnlg/data/tokenizer.hpp"
#include "dnlg/errors.hpp"

namespace dnlg {

TokenSequence slot_name_words(std::string_view name) {
    std::string spaced;
    for (std::size_t i = 0; i < name.size(); ++i) {
        const auto c = static_cast<unsigned char>(name[i]);
        if (i > 0 && std::isupper(c) && std::islower(static_cast<unsigned char>(name[i - 1]))) spaced += ' ';
        spaced += static_cast<char>(std::tolower(c));
    }
    return tokenize(spaced);
}

TokenSequence linearize_mr(const MeaningRepresentation& mr, const LinearizeOptions& options) {
    if (mr.empty()) throw ValidationError("cannot linearize an empty meaning representation");

    TokenSequence out;
    for (const auto& slot : mr.slots) {
        const bool yes = slot.value == "yes";
        const bool no = slot.value == "no";
        if (slot.is_boolean != (yes || no))
            throw ValidationError("slot '" + slot.name + "': boolean value must be 'yes' or 'no', got '" +
                                  slot.value + "'");
        if (!slot.is_boolean) {
            auto words = tokenize(slot.value);
            out.insert(out.end(), words.begin(), words.end());
            continue;
        }
        if (no) {
            if (options.boolean_no == BooleanNoPolicy::kOmit) continue;
            out.emplace_back("not");
        }
        auto words = slot_name_words(slot.name);
        out.insert(out.end(), words.begin(), words.end());
    }
    return out;
}

}  // namespace dnlg
