#pragma once

#include <charconv>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>

#include "malnorm/core/errors.hpp"
#include "malnorm/core/matrix.hpp"

namespace malnorm {

/// A matrix read from text, real or complex depending on its header.
using AnyMatrix = std::variant<RealMatrix, ComplexMatrix>;

// Text format:
//   rows cols flavor          (flavor is "real" or "complex")
//   entries, row-major, whitespace separated; complex entries as a+bi / a-bi.
// Doubles are written in shortest round-trip form, so write(read(s)) is
// value-exact and read(write(m)) == m bit for bit.

namespace detail {

inline double parse_double(std::string_view tok) {
  double v = 0.0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw InputError("matrix text: cannot parse number '" + std::string(tok) + "'");
  }
  return v;
}

inline cplx parse_complex(std::string_view tok) {
  if (tok.empty()) throw InputError("matrix text: empty token");
  if (tok.back() != 'i') return {parse_double(tok), 0.0};
  const std::string_view body = tok.substr(0, tok.size() - 1);
  // Split at the last sign that is not a leading sign or part of an exponent.
  std::size_t split = std::string_view::npos;
  for (std::size_t k = body.size(); k-- > 1;) {
    const char c = body[k];
    if ((c == '+' || c == '-') && body[k - 1] != 'e' && body[k - 1] != 'E') {
      split = k;
      break;
    }
  }
  if (split == std::string_view::npos) {
    // Pure imaginary "bi".
    if (body.empty() || body == "+") return {0.0, 1.0};
    if (body == "-") return {0.0, -1.0};
    return {0.0, parse_double(body)};
  }
  const std::string_view re = body.substr(0, split);
  std::string_view im = body.substr(split);
  double imv;
  if (im == "+") {
    imv = 1.0;
  } else if (im == "-") {
    imv = -1.0;
  } else {
    imv = parse_double(im);
  }
  return {parse_double(re), imv};
}

inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

}  // namespace detail

inline std::string format_scalar(double v) { return detail::format_double(v); }
inline std::string format_scalar(cplx z) {
  std::string re = detail::format_double(z.real());
  std::string im = detail::format_double(z.imag());
  if (im.front() != '-') im.insert(im.begin(), '+');
  return re + im + "i";
}

inline AnyMatrix read_matrix(std::istream& in) {
  std::size_t rows = 0, cols = 0;
  std::string flavor;
  if (!(in >> rows >> cols >> flavor)) {
    throw InputError("matrix text: expected header 'rows cols flavor'");
  }
  std::string tok;
  if (flavor == "real") {
    RealMatrix m(rows, cols);
    for (auto& v : m.entries()) {
      if (!(in >> tok)) throw InputError("matrix text: too few entries");
      v = detail::parse_double(tok);
    }
    return m;
  }
  if (flavor == "complex") {
    ComplexMatrix m(rows, cols);
    for (auto& v : m.entries()) {
      if (!(in >> tok)) throw InputError("matrix text: too few entries");
      v = detail::parse_complex(tok);
    }
    return m;
  }
  throw InputError("matrix text: unknown flavor '" + flavor + "'");
}

inline AnyMatrix read_matrix_string(const std::string& text) {
  std::istringstream in(text);
  return read_matrix(in);
}

inline AnyMatrix read_matrix_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open matrix file '" + path + "'");
  return read_matrix(in);
}

template <MatrixScalar S>
void write_matrix(std::ostream& out, const Matrix<S>& m) {
  out << m.rows() << ' ' << m.cols() << ' ' << (is_complex_v<S> ? "complex" : "real") << '\n';
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j > 0) out << ' ';
      out << format_scalar(m(i, j));
    }
    out << '\n';
  }
}

inline void write_matrix(std::ostream& out, const AnyMatrix& m) {
  std::visit([&](const auto& x) { write_matrix(out, x); }, m);
}

template <typename M>
std::string matrix_to_string(const M& m) {
  std::ostringstream out;
  write_matrix(out, m);
  return out.str();
}

}  // namespace malnorm
