#pragma once

#include <string>
#include <string_view>

#include "dnlg/data/types.hpp"

namespace dnlg {

// Parses E2E-style "name[value], name[value]" syntax.
// Throws ParseError (with character offset) on bracket errors and
// ValidationError on duplicate slot names.
MeaningRepresentation parse_mr(std::string_view line);

// Inverse of parse_mr, in canonical "name[value], ..." form.
std::string format_mr(const MeaningRepresentation& mr);

}  // namespace dnlg
