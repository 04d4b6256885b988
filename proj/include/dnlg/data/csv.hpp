#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace dnlg {

using CsvRow = std::vector<std::string>;

// RFC 4180 reader: quoted fields, doubled quotes, embedded newlines.
// Throws ParseError with the byte offset of an unterminated quote.
std::vector<CsvRow> parse_csv(std::string_view text);

std::string csv_escape(std::string_view field);

}  // namespace dnlg
