#ifndef GMK_HASH_HPP
#define GMK_HASH_HPP

#include <cstddef>
#include <string>

namespace gmk {

std::string sha256_hex(const void* data, size_t len);
std::string sha256_hex(const std::string& text);
std::string sha256_file(const std::string& path);

}  // namespace gmk

#endif
