#include "verifai/tokenize.hpp"

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include "verifai/text.hpp"

namespace verifai {

std::vector<std::string> tokenize(std::string_view input) {
    const std::string s = text::to_lower(text::to_nfc(input));
    std::vector<std::string> tokens;
    std::string current;
    const auto* p = reinterpret_cast<const uint8_t*>(s.data());
    const auto len = static_cast<int32_t>(s.size());
    int32_t i = 0;
    while (i < len) {
        const int32_t start = i;
        UChar32 c;
        U8_NEXT(p, i, len, c);
        const bool alnum = c >= 0 && (c < 0x80 ? ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9'))
                                                : u_isalnum(c) != 0);
        if (alnum) {
            current.append(s, static_cast<std::size_t>(start), static_cast<std::size_t>(i - start));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

}  // namespace verifai
