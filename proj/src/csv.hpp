#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace verifai::detail {

struct CsvRecord {
    std::size_t line = 0;  // 1-based line on which the record starts
    std::vector<std::string> fields;
};

/// RFC-4180 reader: quoted fields may hold delimiters, doubled quotes and
/// line breaks; CRLF and LF are both accepted; blank lines are skipped.
/// Throws IngestError on an unterminated quoted field.
std::vector<CsvRecord> parse_csv(std::string_view input, char delimiter = ',');

}  // namespace verifai::detail
