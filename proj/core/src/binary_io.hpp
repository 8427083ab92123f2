#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "binclust/errors.hpp"
#include "binclust/matrix.hpp"

// Little-endian primitives shared by every persisted blob. All on-disk
// formats are magic(4) + u32 version + payload.

namespace binclust::io {

inline void write_bytes(std::ostream& os, const void* p, std::size_t n) {
  os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
  if (!os) throw IoError("write failed");
}

inline void read_bytes(std::istream& is, void* p, std::size_t n) {
  is.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(is.gcount()) != n) throw IoError("unexpected end of file");
}

inline void write_u8(std::ostream& os, std::uint8_t v) { write_bytes(os, &v, 1); }
inline std::uint8_t read_u8(std::istream& is) {
  std::uint8_t v;
  read_bytes(is, &v, 1);
  return v;
}

inline void write_u32(std::ostream& os, std::uint32_t v) {
  std::array<std::uint8_t, 4> b;
  for (int i = 0; i < 4; ++i) b[i] = static_cast<std::uint8_t>(v >> (8 * i));
  write_bytes(os, b.data(), 4);
}
inline std::uint32_t read_u32(std::istream& is) {
  std::array<std::uint8_t, 4> b;
  read_bytes(is, b.data(), 4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

inline void write_u64(std::ostream& os, std::uint64_t v) {
  std::array<std::uint8_t, 8> b;
  for (int i = 0; i < 8; ++i) b[i] = static_cast<std::uint8_t>(v >> (8 * i));
  write_bytes(os, b.data(), 8);
}
inline std::uint64_t read_u64(std::istream& is) {
  std::array<std::uint8_t, 8> b;
  read_bytes(is, b.data(), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

inline void write_i64(std::ostream& os, std::int64_t v) {
  write_u64(os, static_cast<std::uint64_t>(v));
}
inline std::int64_t read_i64(std::istream& is) {
  return static_cast<std::int64_t>(read_u64(is));
}

inline void write_f64(std::ostream& os, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  write_u64(os, bits);
}
inline double read_f64(std::istream& is) {
  const std::uint64_t bits = read_u64(is);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

inline void write_string(std::ostream& os, const std::string& s) {
  write_u32(os, static_cast<std::uint32_t>(s.size()));
  write_bytes(os, s.data(), s.size());
}
inline std::string read_string(std::istream& is) {
  const std::uint32_t n = read_u32(is);
  std::string s(n, '\0');
  if (n > 0) read_bytes(is, s.data(), n);
  return s;
}

inline void write_f64_vector(std::ostream& os, const std::vector<double>& v) {
  write_u64(os, v.size());
  for (double x : v) write_f64(os, x);
}
inline std::vector<double> read_f64_vector(std::istream& is) {
  const std::uint64_t n = read_u64(is);
  std::vector<double> v(n);
  for (auto& x : v) x = read_f64(is);
  return v;
}

inline void write_matrix(std::ostream& os, const Matrix& m) {
  write_u64(os, m.rows());
  write_u64(os, m.cols());
  for (std::size_t i = 0; i < m.rows() * m.cols(); ++i) write_f64(os, m.data()[i]);
}
inline Matrix read_matrix(std::istream& is) {
  const std::uint64_t rows = read_u64(is);
  const std::uint64_t cols = read_u64(is);
  Matrix m(rows, cols);
  for (std::uint64_t i = 0; i < rows * cols; ++i) m.data()[i] = read_f64(is);
  return m;
}

void write_magic(std::ostream& os, const char magic[4], std::uint32_t version);
std::uint32_t read_magic(std::istream& is, const char magic[4]);

}  // namespace binclust::io
