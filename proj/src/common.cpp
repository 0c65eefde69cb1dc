#include "incsyn/common.hpp"

#include <cstring>
#include <sstream>
#include <vector>

namespace incsyn {

std::uint64_t hashMatrices(const std::vector<Matrix>& mats) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](const void* data, std::size_t len) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      h ^= p[i];
      h *= 0x100000001b3ULL;
    }
  };
  for (const Matrix& m : mats) {
    std::int64_t dims[2] = {m.rows(), m.cols()};
    mix(dims, sizeof(dims));
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      for (Eigen::Index i = 0; i < m.rows(); ++i) {
        double v = m(i, j);
        mix(&v, sizeof(v));
      }
    }
  }
  return h;
}

std::string formatHex(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << v;
  return os.str();
}

}  // namespace incsyn
