#include "tcd/binio.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace tcd {

namespace {

const std::array<std::uint32_t, 256>& crc_table() {
  static const std::array<std::uint32_t, 256> table = [] {
    std::array<std::uint32_t, 256> t{};
    for (std::uint32_t i = 0; i < 256; ++i) {
      std::uint32_t c = i;
      for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xedb88320u ^ (c >> 1) : c >> 1;
      t[i] = c;
    }
    return t;
  }();
  return table;
}

}  // namespace

std::uint32_t crc32_ieee(const std::uint8_t* data, std::size_t n, std::uint32_t seed) {
  std::uint32_t c = seed;
  const auto& t = crc_table();
  for (std::size_t i = 0; i < n; ++i) c = t[(c ^ data[i]) & 0xffu] ^ (c >> 8);
  return c;
}

void BinWriter::raw(const void* p, std::size_t n) {
  const auto* b = static_cast<const std::uint8_t*>(p);
  buf_.insert(buf_.end(), b, b + n);
  crc_ = crc32_ieee(b, n, crc_);
}

void BinWriter::u8(std::uint8_t v) { raw(&v, 1); }

void BinWriter::u32(std::uint32_t v) {
  std::uint8_t b[4] = {static_cast<std::uint8_t>(v), static_cast<std::uint8_t>(v >> 8),
                       static_cast<std::uint8_t>(v >> 16), static_cast<std::uint8_t>(v >> 24)};
  raw(b, 4);
}

void BinWriter::u64(std::uint64_t v) {
  u32(static_cast<std::uint32_t>(v));
  u32(static_cast<std::uint32_t>(v >> 32));
}

void BinWriter::f64(double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  u64(bits);
}

void BinWriter::f64_array(const std::vector<double>& v) {
  for (double x : v) f64(x);
}

void BinWriter::str(const std::string& s) {
  u32(static_cast<std::uint32_t>(s.size()));
  raw(s.data(), s.size());
}

void BinWriter::magic(const char (&m)[9]) { raw(m, 8); }

void BinWriter::save(const std::string& path) {
  const std::uint32_t c = crc_ ^ 0xffffffffu;
  std::uint8_t b[4] = {static_cast<std::uint8_t>(c), static_cast<std::uint8_t>(c >> 8),
                       static_cast<std::uint8_t>(c >> 16), static_cast<std::uint8_t>(c >> 24)};
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os.write(reinterpret_cast<const char*>(buf_.data()), static_cast<std::streamsize>(buf_.size()));
  os.write(reinterpret_cast<const char*>(b), 4);
  if (!os) throw std::runtime_error("write failed: " + path);
}

BinReader::BinReader(std::vector<std::uint8_t> bytes) : buf_(std::move(bytes)) {}

BinReader BinReader::from_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open for reading: " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return BinReader(std::move(bytes));
}

void BinReader::raw(void* p, std::size_t n) {
  if (pos_ + n > buf_.size()) throw std::runtime_error("truncated file: unexpected end of data");
  std::memcpy(p, buf_.data() + pos_, n);
  pos_ += n;
}

std::uint8_t BinReader::u8() {
  std::uint8_t v;
  raw(&v, 1);
  return v;
}

std::uint32_t BinReader::u32() {
  std::uint8_t b[4];
  raw(b, 4);
  return static_cast<std::uint32_t>(b[0]) | static_cast<std::uint32_t>(b[1]) << 8 |
         static_cast<std::uint32_t>(b[2]) << 16 | static_cast<std::uint32_t>(b[3]) << 24;
}

std::uint64_t BinReader::u64() {
  const std::uint64_t lo = u32();
  const std::uint64_t hi = u32();
  return lo | hi << 32;
}

double BinReader::f64() {
  const std::uint64_t bits = u64();
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

std::vector<double> BinReader::f64_array(std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = f64();
  return v;
}

std::string BinReader::str() {
  const std::uint32_t n = u32();
  std::string s(n, '\0');
  raw(s.data(), n);
  return s;
}

void BinReader::expect_magic(const char (&m)[9], const std::string& what) {
  char got[8];
  raw(got, 8);
  if (std::memcmp(got, m, 8) != 0) throw std::runtime_error("bad magic bytes: not a " + what + " file");
}

void BinReader::check_crc(const std::string& what) {
  if (buf_.size() < 4) throw std::runtime_error("truncated file: missing checksum in " + what);
  const std::size_t payload = buf_.size() - 4;
  const std::uint32_t want = static_cast<std::uint32_t>(buf_[payload]) |
                             static_cast<std::uint32_t>(buf_[payload + 1]) << 8 |
                             static_cast<std::uint32_t>(buf_[payload + 2]) << 16 |
                             static_cast<std::uint32_t>(buf_[payload + 3]) << 24;
  const std::uint32_t got = crc32_ieee(buf_.data(), payload) ^ 0xffffffffu;
  if (want != got) throw std::runtime_error("checksum failure in " + what + " file");
}

}  // namespace tcd
