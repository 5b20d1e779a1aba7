#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

namespace rulkit {

// FNV-1a 64-bit; used for config and input fingerprints in stage manifests.
inline std::uint64_t fnv1a64(const void* data, std::size_t len,
                             std::uint64_t h = 0xcbf29ce484222325ULL) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t fnv1a64(const std::string& s) {
  return fnv1a64(s.data(), s.size());
}

// CRC-32 (IEEE, reflected); trailer checksum of the checkpoint container.
std::uint32_t crc32(const void* data, std::size_t len, std::uint32_t crc = 0);

// FNV-1a of a file's contents. Throws IoError if unreadable.
std::uint64_t hash_file(const std::string& path);

std::string hex64(std::uint64_t v);

}  // namespace rulkit
