#include "dnlg/data/mr.hpp"

#include <cctype>
#include <unordered_set>

#include "dnlg/errors.hpp"

namespace dnlg {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

}  // namespace

SlotPair SlotPair::make(std::string name, std::string value) {
    if (name.empty()) throw ValidationError("slot name must be non-empty");
    if (value.empty()) throw ValidationError("slot '" + name + "' has an empty value");
    SlotPair slot;
    slot.is_boolean = value == "yes" || value == "no";
    slot.name = std::move(name);
    slot.value = std::move(value);
    return slot;
}

MeaningRepresentation parse_mr(std::string_view line) {
    if (trim(line).empty()) throw ParseError("empty meaning representation", 0);

    MeaningRepresentation mr;
    std::unordered_set<std::string> seen;
    std::size_t pos = 0;
    const std::size_t n = line.size();

    while (true) {
        while (pos < n && is_space(line[pos])) ++pos;
        if (pos >= n) throw ParseError("expected slot name", pos);

        const std::size_t name_start = pos;
        while (pos < n && line[pos] != '[' && line[pos] != ']' && line[pos] != ',') ++pos;
        if (pos >= n || line[pos] != '[') throw ParseError("expected '[' after slot name", pos);
        const std::string name(trim(line.substr(name_start, pos - name_start)));
        if (name.empty()) throw ParseError("empty slot name", name_start);
        ++pos;

        const std::size_t value_start = pos;
        while (pos < n && line[pos] != ']' && line[pos] != '[') ++pos;
        if (pos >= n || line[pos] != ']') throw ParseError("unterminated slot value for '" + name + "'", pos);
        const std::string value(trim(line.substr(value_start, pos - value_start)));
        if (value.empty()) throw ParseError("empty value for slot '" + name + "'", value_start);
        ++pos;

        if (!seen.insert(name).second) throw ValidationError("duplicate slot name '" + name + "'");
        mr.slots.push_back(SlotPair::make(name, value));

        while (pos < n && is_space(line[pos])) ++pos;
        if (pos >= n) break;
        if (line[pos] != ',') throw ParseError("expected ',' between slots", pos);
        ++pos;
    }
    return mr;
}

std::string format_mr(const MeaningRepresentation& mr) {
    std::string out;
    for (const auto& slot : mr.slots) {
        if (!out.empty()) out += ", ";
        out += slot.name;
        out += '[';
        out += slot.value;
        out += ']';
    }
    return out;
}

}  // namespace dnlg
