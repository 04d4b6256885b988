#pragma once

#include <string>
#include <string_view>

#include "dnlg/data/types.hpp"

namespace dnlg {

enum class BooleanNoPolicy {
    kOmit,    // drop slots whose value is "no"
    kNegate,  // emit "not" followed by the slot name
};

struct LinearizeOptions {
    BooleanNoPolicy boolean_no = BooleanNoPolicy::kOmit;
};

// Turns a slot name into words: camelCase is split and lowercased, so
// "familyFriendly" and "family friendly" both read as [family, friendly].
TokenSequence slot_name_words(std::string_view name);

// Flattens an MR into the corrupted-input surface form: each non-boolean
// slot contributes its tokenized value, each boolean "yes" slot its name.
// Throws ValidationError on an empty MR or an inconsistent boolean slot.
TokenSequence linearize_mr(const MeaningRepresentation& mr, const LinearizeOptions& options = {});

}  // namespace dnlg
