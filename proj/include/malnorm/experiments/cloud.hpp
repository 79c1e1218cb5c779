#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "malnorm/core/errors.hpp"
#include "malnorm/core/general_eig.hpp"
#include "malnorm/ensembles.hpp"

namespace malnorm {

struct EigCloud {
  std::vector<cplx> points;
  std::size_t samples = 0;
  std::size_t failed_samples = 0;  // eigensolver did not converge; skipped
};

/// Eigenvalues of `samples` draws from the ensemble at dimension n, sample by
/// sample in index order.
inline EigCloud eig_cloud(EnsembleKind kind, std::size_t n, std::size_t samples, std::uint64_t seed) {
  if (samples < 1) throw InputError("eig_cloud: samples must be at least 1");
  EigCloud c;
  c.samples = samples;
  c.points.reserve(n * samples);
  for (std::uint64_t i = 0; i < samples; ++i) {
    const AnyMatrix x = sample_ensemble(EnsembleSpec{kind, n, seed}, i);
    try {
      const auto ev = std::visit([](const auto& m) { return general_eigvals(m); }, x);
      c.points.insert(c.points.end(), ev.values.begin(), ev.values.end());
    } catch (const ConvergenceError&) {
      ++c.failed_samples;
    }
  }
  return c;
}

inline void write_cloud_csv(std::ostream& out, const std::vector<cplx>& points) {
  out << "re,im\n";
  char buf[64];
  for (const auto& z : points) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", z.real(), z.imag());
    out << buf;
  }
}

inline void write_cloud_csv(const std::string& path, const std::vector<cplx>& points) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open '" + path + "' for writing");
  write_cloud_csv(f, points);
  if (!f) throw Error("write failed on '" + path + "'");
}

/// Standalone SVG scatter on the square [-1.1, 1.1]^2 (imaginary axis up),
/// one circle per point.
inline std::string render_scatter_svg(const std::vector<cplx>& points) {
  if (points.empty()) throw InputError("render_scatter: no points");
  std::string s;
  s.reserve(200 + points.size() * 48);
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"600\" height=\"600\" "
       "viewBox=\"-1.1 -1.1 2.2 2.2\">\n";
  s += "<rect x=\"-1.1\" y=\"-1.1\" width=\"2.2\" height=\"2.2\" fill=\"white\"/>\n";
  s += "<path d=\"M-1.1 0H1.1M0 -1.1V1.1\" stroke=\"#bbb\" stroke-width=\"0.004\"/>\n";
  s += "<g fill=\"#1f4e9a\" fill-opacity=\"0.35\">\n";
  char buf[96];
  for (const auto& z : points) {
    const double y = -z.imag();
    std::snprintf(buf, sizeof buf, "<circle cx=\"%.6f\" cy=\"%.6f\" r=\"0.005\"/>\n", z.real(),
                  y == 0.0 ? 0.0 : y);
    s += buf;
  }
  s += "</g>\n</svg>\n";
  return s;
}

inline void render_scatter(const std::vector<cplx>& points, const std::string& path) {
  const std::string svg = render_scatter_svg(points);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open '" + path + "' for writing");
  f << svg;
  if (!f) throw Error("write failed on '" + path + "'");
}

}  // namespace malnorm
