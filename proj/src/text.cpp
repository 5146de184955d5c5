#include "verifai/text.hpp"

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>

namespace verifai::text {
namespace {

bool is_ascii(std::string_view s) {
    return std::all_of(s.begin(), s.end(), [](char c) { return static_cast<unsigned char>(c) < 0x80; });
}

}  // namespace

std::optional<std::size_t> find_invalid_utf8(std::string_view s) {
    const auto* p = reinterpret_cast<const uint8_t*>(s.data());
    const auto len = static_cast<int32_t>(s.size());
    int32_t i = 0;
    while (i < len) {
        const int32_t start = i;
        UChar32 c;
        U8_NEXT(p, i, len, c);
        if (c < 0) return static_cast<std::size_t>(start);
    }
    return std::nullopt;
}

std::string to_nfc(std::string_view s) {
    if (is_ascii(s)) return std::string(s);
    UErrorCode status = U_ZERO_ERROR;
    const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
    if (U_FAILURE(status)) throw std::runtime_error("ICU NFC normalizer unavailable");
    const auto u = icu::UnicodeString::fromUTF8(icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
    icu::UnicodeString out = nfc->normalize(u, status);
    if (U_FAILURE(status)) throw std::runtime_error("ICU NFC normalization failed");
    std::string result;
    out.toUTF8String(result);
    return result;
}

std::string to_lower(std::string_view s) {
    if (is_ascii(s)) {
        std::string out(s);
        std::transform(out.begin(), out.end(), out.begin(), [](char c) {
            return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
        });
        return out;
    }
    auto u = icu::UnicodeString::fromUTF8(icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
    u.toLower(icu::Locale::getRoot());
    std::string result;
    u.toUTF8String(result);
    return result;
}

bool is_space(char32_t cp) {
    return u_isUWhiteSpace(static_cast<UChar32>(cp)) != 0;
}

std::string_view trim(std::string_view s) {
    const auto* p = reinterpret_cast<const uint8_t*>(s.data());
    const auto len = static_cast<int32_t>(s.size());
    int32_t begin = 0;
    while (begin < len) {
        int32_t next = begin;
        UChar32 c;
        U8_NEXT(p, next, len, c);
        if (c < 0 || !is_space(static_cast<char32_t>(c))) break;
        begin = next;
    }
    int32_t end = len;
    while (end > begin) {
        int32_t prev = end;
        UChar32 c;
        U8_PREV(p, 0, prev, c);
        if (c < 0 || !is_space(static_cast<char32_t>(c))) break;
        end = prev;
    }
    return s.substr(static_cast<std::size_t>(begin), static_cast<std::size_t>(end - begin));
}

std::string normalize_value(std::string_view s) {
    return std::string(trim(to_lower(to_nfc(s))));
}

std::string normalize_attr(std::string_view s) {
    return std::string(trim(to_lower(s)));
}

std::optional<double> parse_number(std::string_view s) {
    s = trim(s);
    if (s.empty()) return std::nullopt;
    if (s.front() == '+') s.remove_prefix(1);
    double value = 0.0;
    const auto* first = s.data();
    const auto* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, value, std::chars_format::general);
    if (ec != std::errc{} || ptr != last || !std::isfinite(value)) return std::nullopt;
    return value;
}

bool values_equal(std::string_view a, std::string_view b) {
    const auto na = parse_number(a);
    const auto nb = parse_number(b);
    if (na && nb) {
        const double scale = std::max(std::fabs(*na), std::fabs(*nb));
        return std::fabs(*na - *nb) <= 1e-9 * scale;
    }
    return normalize_value(a) == normalize_value(b);
}

}  // namespace verifai::text
