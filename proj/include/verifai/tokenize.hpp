#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace verifai {

/// NFC + lowercase, then split on every code point that is not a Unicode
/// letter or digit. No stemming and no stopwords.
std::vector<std::string> tokenize(std::string_view text);

}  // namespace verifai
