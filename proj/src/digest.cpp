#include "verifai/digest.hpp"

#include <openssl/evp.h>

#include <array>
#include <stdexcept>

namespace verifai {
namespace {

std::array<unsigned char, 32> sha256(std::string_view bytes) {
    std::array<unsigned char, 32> out{};
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), out.data(), &len, EVP_sha256(), nullptr) != 1 || len != out.size()) {
        throw std::runtime_error("SHA-256 digest failed");
    }
    return out;
}

std::string to_hex(const unsigned char* data, std::size_t n) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string s;
    s.reserve(n * 2);
    for (std::size_t i = 0; i < n; ++i) {
        s.push_back(digits[data[i] >> 4]);
        s.push_back(digits[data[i] & 0x0f]);
    }
    return s;
}

}  // namespace

std::string sha256_hex(std::string_view bytes) {
    const auto d = sha256(bytes);
    return to_hex(d.data(), d.size());
}

std::string digest128_hex(std::string_view bytes) {
    const auto d = sha256(bytes);
    return to_hex(d.data(), 16);
}

}  // namespace verifai
