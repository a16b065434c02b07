#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace mptbf::csv {

/// RFC-4180 reader. Accepts LF and CRLF; quoted fields may contain commas,
/// doubled quotes and line breaks. Throws std::runtime_error with the line
/// number on an unterminated quote.
std::vector<std::vector<std::string>> parse(std::string_view text);

/// Quotes a field if it contains a comma, quote, CR or LF.
std::string escape(std::string_view field);

std::string join(const std::vector<std::string>& fields);

}  // namespace mptbf::csv
