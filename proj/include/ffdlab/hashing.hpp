#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace ffdlab {

// Lower-case hex SHA-256.
std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);

// Stage seed derivation: splitmix64(global_seed + stage_index).
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t stage_seed(std::uint64_t global_seed, std::uint64_t stage_index);

}  // namespace ffdlab
