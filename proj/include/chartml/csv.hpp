#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace chartml::csv {

/// Parse a whole CSV document into rows of fields. RFC 4180 rules: fields
/// separated by commas, records by LF or CRLF, double quotes protect commas,
/// quotes and newlines, "" inside a quoted field is a literal quote.
/// A trailing newline does not produce an empty record.
std::vector<std::vector<std::string>> parse(std::string_view content, const std::string& source = {});

/// Quote a field if it contains a comma, quote, or newline.
std::string escape(std::string_view field);

/// Join already-escaped or plain fields into one CSV record (no newline).
std::string join_row(const std::vector<std::string>& fields);

}  // namespace chartml::csv
