#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

// Unicode helpers shared by ingestion, tokenization, reranking and the
// verifiers. All functions take and return UTF-8.
namespace verifai::text {

/// Byte offset of the first ill-formed UTF-8 sequence, or nullopt.
std::optional<std::size_t> find_invalid_utf8(std::string_view s);

std::string to_nfc(std::string_view s);
std::string to_lower(std::string_view s);

/// Strips leading/trailing Unicode white space.
std::string_view trim(std::string_view s);

/// NFC, lowercase, trim. The equality domain for cell values.
std::string normalize_value(std::string_view s);

/// Lowercase + trim, used for attribute names.
std::string normalize_attr(std::string_view s);

/// Parses the whole string as a finite decimal number (surrounding white
/// space allowed, thousands separators not).
std::optional<double> parse_number(std::string_view s);

/// Equality of two cell values: numerically with relative tolerance 1e-9 when
/// both parse as numbers, otherwise on the normalized strings.
bool values_equal(std::string_view a, std::string_view b);

bool is_space(char32_t cp);

}  // namespace verifai::text
