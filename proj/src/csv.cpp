#include "chartml/csv.hpp"

#include "chartml/error.hpp"

namespace chartml::csv {

std::vector<std::vector<std::string>> parse(std::string_view content, const std::string& source) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;  // row has at least one field character or separator
    std::size_t line = 1;

    auto end_field = [&] {
        row.push_back(std::move(field));
        field.clear();
    };
    auto end_row = [&] {
        end_field();
        rows.push_back(std::move(row));
        row.clear();
        field_started = false;
    };

    for (std::size_t i = 0; i < content.size(); ++i) {
        char c = content[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < content.size() && content[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                if (c == '\n') ++line;
                field += c;
            }
            continue;
        }
        switch (c) {
            case '"':
                in_quotes = true;
                field_started = true;
                break;
            case ',':
                end_field();
                field_started = true;
                break;
            case '\r':
                if (i + 1 < content.size() && content[i + 1] == '\n') break;  // CRLF, handled at '\n'
                field += c;
                break;
            case '\n':
                end_row();
                ++line;
                break;
            default:
                field += c;
                field_started = true;
                break;
        }
    }
    if (in_quotes) {
        throw ParseError("unterminated quoted field", source, line);
    }
    if (field_started || !field.empty() || !row.empty()) {
        end_row();
    }
    return rows;
}

std::string escape(std::string_view field) {
    bool needs_quotes = field.find_first_of(",\"\r\n") != std::string_view::npos;
    if (!needs_quotes) return std::string(field);
    std::string out;
    out.reserve(field.size() + 2);
    out += '"';
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string join_row(const std::vector<std::string>& fields) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out += ',';
        out += escape(fields[i]);
    }
    return out;
}

}  // namespace chartml::csv
