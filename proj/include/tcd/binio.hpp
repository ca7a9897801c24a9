#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace tcd {

// Little-endian binary writer with a running CRC-32 (IEEE polynomial).
// Shared by the dataset and checkpoint file formats.
class BinWriter {
 public:
  void u8(std::uint8_t v);
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void f64(double v);
  void f64_array(const std::vector<double>& v);
  void str(const std::string& s);  // u32 length + bytes
  void magic(const char (&m)[9]);  // exactly 8 bytes

  std::uint32_t crc() const { return crc_; }
  const std::vector<std::uint8_t>& bytes() const { return buf_; }

  // Appends the CRC-32 of everything written so far and writes to disk.
  void save(const std::string& path);

 private:
  void raw(const void* p, std::size_t n);
  std::vector<std::uint8_t> buf_;
  std::uint32_t crc_ = 0xffffffffu;
};

// Reader with the matching CRC check. All read_* throw std::runtime_error
// on truncation; check_crc throws on checksum failure.
class BinReader {
 public:
  explicit BinReader(std::vector<std::uint8_t> bytes);
  static BinReader from_file(const std::string& path);

  std::uint8_t u8();
  std::uint32_t u32();
  std::uint64_t u64();
  double f64();
  std::vector<double> f64_array(std::size_t n);
  std::string str();
  void expect_magic(const char (&m)[9], const std::string& what);

  // Verifies the trailing CRC-32 (last 4 bytes) against the payload.
  void check_crc(const std::string& what);
  bool at_trailer() const { return pos_ == buf_.size() - 4; }

 private:
  void raw(void* p, std::size_t n);
  std::vector<std::uint8_t> buf_;
  std::size_t pos_ = 0;
};

std::uint32_t crc32_ieee(const std::uint8_t* data, std::size_t n, std::uint32_t seed = 0xffffffffu);

}  // namespace tcd
