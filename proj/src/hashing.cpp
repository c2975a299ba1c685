#include "cpsg/hashing.hpp"

#include <openssl/evp.h>

#include <array>
#include <stdexcept>

namespace cpsg {

std::string sha256_hex(std::string_view data) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("sha256 digest failed");
    }
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xf]);
    }
    return out;
}

std::string canonical_json(const nlohmann::json& value) {
    // nlohmann::json objects are ordered maps sorted by key, so a plain dump
    // is already canonical.
    return value.dump();
}

}  // namespace cpsg
