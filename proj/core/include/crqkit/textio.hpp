#pragma once

#include <cstdint>
#include <string>

namespace crqkit {

// Shortest decimal representation that round-trips the double exactly.
std::string format_double(double value);

// FNV-1a 64-bit digest, hex encoded. Used to fingerprint input files in
// artifact metadata.
std::uint64_t fnv1a64(const void* data, std::size_t size);
std::string fnv1a64_hex(const std::string& bytes);

}  // namespace crqkit
