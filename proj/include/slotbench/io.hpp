#pragma once

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "slotbench/common.hpp"

namespace slotbench {

// Little-endian binary writer into a memory buffer. Callers persist the
// buffer with atomic_write so partially written files never land.
class ByteWriter {
 public:
  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f32(float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    u32(bits);
  }
  void bytes(const void* data, std::size_t len) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    buf_.insert(buf_.end(), p, p + len);
  }
  // Length-prefixed UTF-8 string (u32 length).
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }
  void magic(const char m[4]) { bytes(m, 4); }

  const std::vector<std::uint8_t>& buffer() const { return buf_; }
  std::size_t size() const { return buf_.size(); }

 private:
  std::vector<std::uint8_t> buf_;
};

class ByteReader {
 public:
  explicit ByteReader(std::vector<std::uint8_t> data) : buf_(std::move(data)) {}

  std::uint64_t offset() const { return pos_; }
  bool at_end() const { return pos_ == buf_.size(); }
  std::size_t remaining() const { return buf_.size() - pos_; }

  std::uint8_t u8() {
    need(1);
    return buf_[pos_++];
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(buf_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return v;
  }
  float f32() {
    const std::uint32_t bits = u32();
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
  }
  void bytes(void* out, std::size_t len) {
    need(len);
    std::memcpy(out, buf_.data() + pos_, len);
    pos_ += len;
  }
  std::string str() {
    const std::uint32_t len = u32();
    need(len);
    std::string s(reinterpret_cast<const char*>(buf_.data() + pos_), len);
    pos_ += len;
    return s;
  }
  void expect_magic(const char m[4], const std::string& what) {
    need(4, what + " magic");
    if (std::memcmp(buf_.data() + pos_, m, 4) != 0)
      throw FormatError("bad magic for " + what, pos_);
    pos_ += 4;
  }

  void need(std::size_t n, const std::string& what = "") {
    if (pos_ + n > buf_.size())
      throw FormatError("truncated input" + (what.empty() ? "" : " reading " + what) + ", need " +
                            std::to_string(n) + " bytes",
                        pos_);
  }

 private:
  std::vector<std::uint8_t> buf_;
  std::uint64_t pos_ = 0;
};

inline std::vector<std::uint8_t> read_file(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) throw InvalidInput("cannot open " + path);
  std::fseek(f, 0, SEEK_END);
  const long sz = std::ftell(f);
  std::fseek(f, 0, SEEK_SET);
  std::vector<std::uint8_t> data(static_cast<std::size_t>(sz < 0 ? 0 : sz));
  if (!data.empty() && std::fread(data.data(), 1, data.size(), f) != data.size()) {
    std::fclose(f);
    throw InvalidInput("short read on " + path);
  }
  std::fclose(f);
  return data;
}

// Write via temp file + rename so outputs land atomically.
inline void atomic_write(const std::string& path, const void* data, std::size_t len) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const std::string tmp = path + ".tmp";
  std::FILE* f = std::fopen(tmp.c_str(), "wb");
  if (!f) throw InvalidInput("cannot open " + tmp + " for writing");
  if (len > 0 && std::fwrite(data, 1, len, f) != len) {
    std::fclose(f);
    std::remove(tmp.c_str());
    throw InvalidInput("short write on " + tmp);
  }
  std::fflush(f);
  std::fclose(f);
  fs::rename(tmp, target);
}

inline void atomic_write(const std::string& path, const ByteWriter& w) {
  atomic_write(path, w.buffer().data(), w.size());
}

inline void atomic_write(const std::string& path, const std::string& text) {
  atomic_write(path, text.data(), text.size());
}

}  // namespace slotbench
