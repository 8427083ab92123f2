#include "binary_io.hpp"

namespace binclust::io {

void write_magic(std::ostream& os, const char magic[4], std::uint32_t version) {
  write_bytes(os, magic, 4);
  write_u32(os, version);
}

std::uint32_t read_magic(std::istream& is, const char magic[4]) {
  char got[4];
  read_bytes(is, got, 4);
  if (std::memcmp(got, magic, 4) != 0)
    throw IoError(std::string("bad magic, expected ") + std::string(magic, 4));
  return read_u32(is);
}

}  // namespace binclust::io
