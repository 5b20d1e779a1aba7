#include "rulkit/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "rulkit/errors.hpp"
#include "rulkit/hash.hpp"

namespace rulkit::ckpt {

namespace {

constexpr char kMagic[4] = {'R', 'K', 'C', 'P'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof(bits));
  put_u64(out, bits);
}

// Bounds-checked little-endian reader over a loaded buffer.
struct Reader {
  const unsigned char* p;
  std::size_t len;
  std::size_t pos = 0;
  std::string origin;

  void need(std::size_t n, const char* what) {
    if (pos + n > len)
      throw IoError(origin + ": truncated checkpoint (reading " + what + " at offset " +
                    std::to_string(pos) + ")");
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[pos + i]) << (8 * i);
    pos += 4;
    return v;
  }
  std::uint64_t u64(const char* what) {
    need(8, what);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[pos + i]) << (8 * i);
    pos += 8;
    return v;
  }
  double f64(const char* what) {
    std::uint64_t bits = u64(what);
    double v;
    std::memcpy(&v, &bits, sizeof(v));
    return v;
  }
  std::string str(std::size_t n, const char* what) {
    need(n, what);
    std::string s(reinterpret_cast<const char*>(p + pos), n);
    pos += n;
    return s;
  }
};

}  // namespace

void Container::put(std::string name, std::vector<std::size_t> dims,
                    std::vector<double> values) {
  std::size_t n = 1;
  for (std::size_t d : dims) n *= d;
  if (n != values.size())
    throw ShapeError("checkpoint entry '" + name + "': " + std::to_string(values.size()) +
                     " values do not fill the declared shape");
  for (auto& e : entries_) {
    if (e.name == name) {
      e.dims = std::move(dims);
      e.values = std::move(values);
      return;
    }
  }
  entries_.push_back({std::move(name), std::move(dims), std::move(values)});
}

const Entry* Container::find(const std::string& name) const {
  for (const auto& e : entries_)
    if (e.name == name) return &e;
  return nullptr;
}

const Entry& Container::at(const std::string& name) const {
  const Entry* e = find(name);
  if (!e) throw IoError("checkpoint is missing entry '" + name + "'");
  return *e;
}

void save(const Container& c, const std::filesystem::path& path) {
  std::string buf;
  buf.append(kMagic, 4);
  put_u32(buf, kVersion);
  put_u64(buf, c.size());
  for (const Entry& e : c.entries()) {
    put_u32(buf, static_cast<std::uint32_t>(e.name.size()));
    buf += e.name;
    put_u32(buf, static_cast<std::uint32_t>(e.dims.size()));
    for (std::size_t d : e.dims) put_u64(buf, d);
    for (double v : e.values) put_f64(buf, v);
  }
  put_u32(buf, crc32(buf.data(), buf.size()));

  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot create " + tmp.string());
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw IoError("write failed: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " +
                        ec.message());
}

Container load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (buf.size() < 4 + 4 + 8 + 4) throw IoError(path.string() + ": truncated checkpoint");

  if (std::memcmp(buf.data(), kMagic, 4) != 0)
    throw IoError(path.string() + ": bad magic (not a checkpoint file)");
  std::uint32_t stored_crc = 0;
  for (int i = 0; i < 4; ++i)
    stored_crc |= static_cast<std::uint32_t>(
                      static_cast<unsigned char>(buf[buf.size() - 4 + i]))
                  << (8 * i);
  std::uint32_t actual_crc = crc32(buf.data(), buf.size() - 4);
  if (stored_crc != actual_crc)
    throw IoError(path.string() + ": checksum mismatch (file corrupted)");

  Reader r{reinterpret_cast<const unsigned char*>(buf.data()), buf.size() - 4, 4,
           path.string()};
  std::uint32_t version = r.u32("version");
  if (version != kVersion)
    throw IoError(path.string() + ": unsupported checkpoint version " +
                  std::to_string(version));
  std::uint64_t count = r.u64("entry count");
  Container c;
  for (std::uint64_t i = 0; i < count; ++i) {
    std::uint32_t name_len = r.u32("name length");
    std::string name = r.str(name_len, "name");
    std::uint32_t ndim = r.u32("rank");
    std::vector<std::size_t> dims(ndim);
    std::size_t n = 1;
    for (std::uint32_t d = 0; d < ndim; ++d) {
      dims[d] = static_cast<std::size_t>(r.u64("dimension"));
      n *= dims[d];
    }
    std::vector<double> values(n);
    for (std::size_t k = 0; k < n; ++k) values[k] = r.f64("value");
    c.put(std::move(name), std::move(dims), std::move(values));
  }
  if (r.pos != r.len)
    throw IoError(path.string() + ": trailing bytes after last entry");
  return c;
}

Container pack_params(const nn::NamedParams& params) {
  Container c;
  append_params(c, params);
  return c;
}

void append_params(Container& c, const nn::NamedParams& params) {
  for (const auto& [name, t] : params) c.put(name, t.shape(), t.values());
}

void assign_params(const Container& c, nn::NamedParams& params) {
  std::string missing, mismatched;
  for (auto& [name, t] : params) {
    const Entry* e = c.find(name);
    if (!e) {
      if (!missing.empty()) missing += ", ";
      missing += name;
      continue;
    }
    if (e->dims != t.shape()) {
      if (!mismatched.empty()) mismatched += ", ";
      mismatched += name;
      continue;
    }
    t.values() = e->values;
  }
  if (!missing.empty() || !mismatched.empty()) {
    std::string msg = "checkpoint does not fit the model:";
    if (!missing.empty()) msg += " missing [" + missing + "]";
    if (!mismatched.empty()) msg += " shape mismatch [" + mismatched + "]";
    throw IoError(msg);
  }
}

nn::NamedParams extract_prefixed(const Container& c, const std::string& prefix) {
  nn::NamedParams out;
  for (const Entry& e : c.entries()) {
    if (e.name.size() < prefix.size() || e.name.compare(0, prefix.size(), prefix) != 0)
      continue;
    out.emplace_back(e.name, nn::Tensor::from_data(e.values, e.dims));
  }
  return out;
}

}  // namespace rulkit::ckpt
