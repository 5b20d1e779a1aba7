#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "rulkit/layers.hpp"

namespace rulkit::ckpt {

// Named-array container behind model checkpoints and feature files.
//
// Layout (all integers little-endian):
//   magic "RKCP" | u32 version | u64 entry count
//   per entry: u32 name length | name bytes | u32 ndim | u64 dims... | f64 values...
//   trailer: u32 CRC-32 of every preceding byte
struct Entry {
  std::string name;
  std::vector<std::size_t> dims;
  std::vector<double> values;

  std::size_t count() const {
    std::size_t n = 1;
    for (std::size_t d : dims) n *= d;
    return n;
  }
};

class Container {
 public:
  void put(std::string name, std::vector<std::size_t> dims, std::vector<double> values);
  void put_scalar(std::string name, double v) { put(std::move(name), {1}, {v}); }
  bool has(const std::string& name) const { return find(name) != nullptr; }
  const Entry* find(const std::string& name) const;
  const Entry& at(const std::string& name) const;  // throws IoError when missing
  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

 private:
  std::vector<Entry> entries_;
};

// Atomic write (temp file + rename) and strict load: bad magic, version,
// truncation, or checksum mismatch throw IoError naming the problem.
void save(const Container& c, const std::filesystem::path& path);
Container load(const std::filesystem::path& path);

// Bridges to the named-parameter lists used by layers and optimizers.
Container pack_params(const nn::NamedParams& params);
void append_params(Container& c, const nn::NamedParams& params);

// Copies entry values into matching tensors. Missing or shape-mismatched
// names are collected and reported together in one IoError.
void assign_params(const Container& c, nn::NamedParams& params);

// Extracts entries with a given prefix back into (name, tensor) pairs.
nn::NamedParams extract_prefixed(const Container& c, const std::string& prefix);

}  // namespace rulkit::ckpt
