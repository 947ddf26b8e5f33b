#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sdms {

class CorruptFileError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Little-endian byte sink.
class ByteWriter {
 public:
  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void f64s(std::span<const double> v) {
    for (double x : v) f64(x);
  }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    buf_.insert(buf_.end(), s.begin(), s.end());
  }
  void magic(const char (&m)[5]) { buf_.insert(buf_.end(), m, m + 4); }
  const std::vector<std::uint8_t>& bytes() const { return buf_; }
  std::vector<std::uint8_t> take() { return std::move(buf_); }

 private:
  std::vector<std::uint8_t> buf_;
};

/// Little-endian byte source; every read past the end throws CorruptFileError.
class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> data) : data_(data) {}
  std::uint8_t u8() { return need(1)[0]; }
  std::uint32_t u32() {
    const auto* p = need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    const auto* p = need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::vector<double> f64s(std::size_t n) {
    if (n > remaining() / 8) throw CorruptFileError("truncated file");
    std::vector<double> v(n);
    for (auto& x : v) x = f64();
    return v;
  }
  std::string str() {
    const std::uint32_t n = u32();
    const auto* p = need(n);
    return std::string(reinterpret_cast<const char*>(p), n);
  }
  bool magic(const char (&m)[5]) { return std::memcmp(need(4), m, 4) == 0; }
  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  const std::uint8_t* need(std::size_t n) {
    if (n > remaining()) throw CorruptFileError("truncated file");
    const auto* p = data_.data() + pos_;
    pos_ += n;
    return p;
  }
  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

std::vector<std::uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, std::span<const std::uint8_t> bytes);

/// FNV-1a 64-bit.
std::uint64_t fnv1a(std::span<const std::uint8_t> bytes);
std::uint64_t fnv1a(const std::string& s);

}  // namespace sdms
