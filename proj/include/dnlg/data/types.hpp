#pragma once

#include <string>
#include <vector>

namespace dnlg {

// Ordered tokens of one sentence. Tokens are never empty strings.
using TokenSequence = std::vector<std::string>;

struct SlotPair {
    std::string name;
    std::string value;
    bool is_boolean = false;  // value is "yes" or "no"

    // Validates non-empty name/value and derives is_boolean from the value.
    static SlotPair make(std::string name, std::string value);

    bool operator==(const SlotPair&) const = default;
};

struct MeaningRepresentation {
    std::vector<SlotPair> slots;

    bool empty() const noexcept { return slots.empty(); }
    bool operator==(const MeaningRepresentation&) const = default;
};

struct LabeledExample {
    MeaningRepresentation mr;
    std::vector<TokenSequence> references;  // at least one
};

}  // namespace dnlg
