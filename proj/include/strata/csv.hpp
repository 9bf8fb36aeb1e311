#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace strata::csv {

using Row = std::vector<std::string>;

// Parses RFC-4180 CSV text. Accepts LF or CRLF line endings, an optional
// UTF-8 byte-order mark and an optional trailing newline. Throws SchemaError
// on invalid UTF-8 or an unterminated quoted field. Row widths are not
// checked here.
std::vector<Row> parse(std::string_view text);

// Quotes a field when it contains a comma, quote, CR or LF.
std::string escape_field(std::string_view field);

// Appends one CRLF-terminated record.
void write_row(std::string& out, const Row& row);

bool is_valid_utf8(std::string_view text);

}  // namespace strata::csv
