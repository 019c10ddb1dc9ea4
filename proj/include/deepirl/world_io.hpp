#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "deepirl/errors.hpp"
#include "deepirl/matrix.hpp"
#include "deepirl/trainer.hpp"
#include "deepirl/world.hpp"

namespace deepirl {

// World text format.
//
//   objectworld M C n_objects seed        binaryworld M seed
//   row col color     (n_objects lines)   M lines of M '0'/'1' (1 = blue)

inline void write_world(std::ostream& os, const World& w) {
  if (w.kind == WorldKind::Objectworld) {
    os << "objectworld " << w.size << ' ' << w.colors << ' ' << w.objects.size() << ' ' << w.seed
       << '\n';
    for (const auto& o : w.objects) os << o.row << ' ' << o.col << ' ' << o.color << '\n';
  } else {
    os << "binaryworld " << w.size << ' ' << w.seed << '\n';
    for (std::size_t r = 0; r < w.size; ++r) {
      for (std::size_t c = 0; c < w.size; ++c) os << (w.cell_colors[r * w.size + c] ? '1' : '0');
      os << '\n';
    }
  }
}

inline World read_world(std::istream& is, double discount = kDefaultDiscount) {
  std::string kind;
  if (!(is >> kind)) throw InvalidArgument("empty world file");
  if (kind == "objectworld") {
    std::size_t m = 0, colors = 0, count = 0;
    std::uint64_t seed = 0;
    if (!(is >> m >> colors >> count >> seed)) throw InvalidArgument("malformed objectworld header");
    std::vector<WorldObject> objects(count);
    for (auto& o : objects)
      if (!(is >> o.row >> o.col >> o.color)) throw InvalidArgument("malformed object listing");
    return build_objectworld(m, colors, std::move(objects), seed, discount);
  }
  if (kind == "binaryworld") {
    std::size_t m = 0;
    std::uint64_t seed = 0;
    if (!(is >> m >> seed)) throw InvalidArgument("malformed binaryworld header");
    std::vector<std::uint8_t> colors;
    colors.reserve(m * m);
    for (std::size_t r = 0; r < m; ++r) {
      std::string line;
      if (!(is >> line) || line.size() != m) throw InvalidArgument("malformed binaryworld row");
      for (char ch : line) {
        if (ch != '0' && ch != '1') throw InvalidArgument("binaryworld cells must be 0 or 1");
        colors.push_back(ch == '1' ? 1 : 0);
      }
    }
    return build_binaryworld(m, std::move(colors), seed, discount);
  }
  throw InvalidArgument("unknown world kind '" + kind + "'");
}

/// One row per state, comma separated, 17 significant digits.
inline void write_matrix_csv(std::ostream& os, const Matrix& m) {
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (c) os << ',';
      os << detail::format_double(m(r, c));
    }
    os << '\n';
  }
}

/// Binary 8-bit PGM, min-max normalized; a constant map renders black.
inline void write_pgm(std::ostream& os, const std::vector<double>& values, std::size_t height,
                      std::size_t width) {
  detail::require(values.size() == height * width, "reward map does not match image size");
  os << "P5\n" << width << ' ' << height << "\n255\n";
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double span = values.empty() ? 0.0 : *hi - *lo;
  for (double v : values) {
    const double unit = span > 0.0 ? (v - *lo) / span : 0.0;
    os.put(static_cast<char>(static_cast<unsigned char>(std::lround(unit * 255.0))));
  }
}

namespace detail {

template <class Fn>
void write_file(const std::string& path, Fn&& fn, bool binary = false) {
  std::ofstream os(path, binary ? std::ios::binary | std::ios::out : std::ios::out);
  if (!os) throw IoError("cannot open " + path + " for writing");
  fn(os);
  os.flush();
  if (!os) throw IoError("failed writing " + path);
}

}  // namespace detail

inline World load_world(const std::string& path, double discount = kDefaultDiscount) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path);
  return read_world(is, discount);
}

}  // namespace deepirl
