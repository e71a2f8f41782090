#pragma once

#include <array>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <string>

#include <openssl/evp.h>

#include "json.hpp"

namespace cglasso::cli {

inline constexpr const char* kToolVersion = "1.0.0";

inline std::string sha256_hex(const std::string& bytes) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    EVP_Digest(bytes.data(), bytes.size(), digest.data(), &len, EVP_sha256(), nullptr);
    std::string out;
    char hex[3];
    for (unsigned int i = 0; i < len; ++i) {
        std::snprintf(hex, sizeof(hex), "%02x", digest[i]);
        out += hex;
    }
    return out;
}

inline std::string file_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return sha256_hex(bytes);
}

/// Everything needed to reproduce an output directory. Thread count is left out:
/// results do not depend on it.
struct RunManifest {
    std::string subcommand;
    nlohmann::json options = nlohmann::json::object();
    nlohmann::json inputs = nlohmann::json::object();
    unsigned long long seed = 0;

    void add_input(const std::string& role, const std::string& path) {
        inputs[role] = {{"path", path}, {"sha256", file_digest(path)}};
    }

    nlohmann::json to_json() const {
        return {{"tool", "cglasso"},
                {"version", kToolVersion},
                {"subcommand", subcommand},
                {"options", options},
                {"inputs", inputs},
                {"seed", seed}};
    }
};

}  // namespace cglasso::cli
