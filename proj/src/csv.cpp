#include "csv.hpp"

#include "verifai/error.hpp"

namespace verifai::detail {

std::vector<CsvRecord> parse_csv(std::string_view input, char delimiter) {
    if (input.size() >= 3 && input.substr(0, 3) == "\xEF\xBB\xBF") input.remove_prefix(3);

    std::vector<CsvRecord> records;
    CsvRecord current;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;  // current record has at least one char or delimiter
    std::size_t line = 1;
    current.line = 1;

    auto end_record = [&] {
        if (field_started || !field.empty()) {
            current.fields.push_back(std::move(field));
            records.push_back(std::move(current));
        }
        current = CsvRecord{};
        field.clear();
        field_started = false;
    };

    for (std::size_t i = 0; i < input.size(); ++i) {
        const char c = input[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < input.size() && input[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                if (c == '\n') ++line;
                field.push_back(c);
            }
            continue;
        }
        if (c == '"' && field.empty()) {
            in_quotes = true;
            field_started = true;
        } else if (c == delimiter) {
            current.fields.push_back(std::move(field));
            field.clear();
            field_started = true;
        } else if (c == '\r' && i + 1 < input.size() && input[i + 1] == '\n') {
            // handled by the '\n' branch
        } else if (c == '\n') {
            end_record();
            ++line;
            current.line = line;
        } else {
            if (!field_started) current.line = line;
            field.push_back(c);
            field_started = true;
        }
    }
    if (in_quotes) throw IngestError("unterminated quoted field starting on line " + std::to_string(current.line),
                                     static_cast<std::ptrdiff_t>(current.line));
    end_record();
    return records;
}

}  // namespace verifai::detail
