#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "malnorm/core/matrix.hpp"
#include "malnorm/core/polar.hpp"
#include "malnorm/random.hpp"

namespace malnorm::testing {

inline RealMatrix random_real(std::size_t rows, std::size_t cols, SeededStream& s) {
  RealMatrix m(rows, cols);
  for (auto& v : m.entries()) v = s.next_normal_pair().first;
  return m;
}

inline RealMatrix random_real(std::size_t n, SeededStream& s) { return random_real(n, n, s); }

inline ComplexMatrix random_complex(std::size_t n, SeededStream& s) {
  ComplexMatrix m(n, n);
  for (auto& v : m.entries()) {
    const auto [a, b] = s.next_normal_pair();
    v = {a, b};
  }
  return m;
}

inline RealMatrix random_symmetric(std::size_t n, SeededStream& s) {
  RealMatrix a = random_real(n, s);
  return hermitian_real_part(a);
}

inline ComplexMatrix random_hermitian(std::size_t n, SeededStream& s) {
  return hermitian_real_part(random_complex(n, s));
}

inline ComplexMatrix random_unitary(std::size_t n, SeededStream& s) {
  return polar_unitary(random_complex(n, s));
}

inline RealMatrix random_orthogonal(std::size_t n, SeededStream& s) {
  return polar_unitary(random_real(n, s));
}

inline std::filesystem::path temp_dir() {
  std::filesystem::path p = MALNORM_TEST_TMPDIR;
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace malnorm::testing
