#include "lowlight/color.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <vector>

#include "lowlight/error.hpp"

namespace lowlight {

namespace {

constexpr const char* kFeatureNames[kBinomialTerms] = {"1",  "r",  "g",   "b",  "r^2",
                                                       "rg", "rb", "g^2", "gb", "b^2"};

struct NormalEquations {
  std::array<std::array<double, kBinomialTerms>, kBinomialTerms> gram{};
  std::array<std::array<double, 3>, kBinomialTerms> rhs{};

  void add(const NormalEquations& o) {
    for (int i = 0; i < kBinomialTerms; ++i) {
      for (int j = 0; j < kBinomialTerms; ++j) gram[i][j] += o.gram[i][j];
      for (int c = 0; c < 3; ++c) rhs[i][c] += o.rhs[i][c];
    }
  }
};

void accumulate_rows(const Image& src, const Image& ref, int y0, int y1, NormalEquations& eq) {
  auto s = src.data();
  auto r = ref.data();
  const std::size_t w = static_cast<std::size_t>(src.width());
  for (std::size_t p = static_cast<std::size_t>(y0) * w; p < static_cast<std::size_t>(y1) * w; ++p) {
    const BinomialFeatures phi = binomial_expand(s[3 * p], s[3 * p + 1], s[3 * p + 2]);
    for (int i = 0; i < kBinomialTerms; ++i) {
      for (int j = i; j < kBinomialTerms; ++j) eq.gram[i][j] += phi[i] * phi[j];
      for (int c = 0; c < 3; ++c) eq.rhs[i][c] += phi[i] * r[3 * p + c];
    }
  }
}

// Fixed row chunks reduced in order: independent of the worker count.
NormalEquations build_normal_equations(const Image& src, const Image& ref) {
  constexpr int kRowsPerChunk = 32;
  const int h = src.height();
  const int chunks = (h + kRowsPerChunk - 1) / kRowsPerChunk;
  std::vector<NormalEquations> partial(static_cast<std::size_t>(chunks));
#pragma omp parallel for schedule(static)
  for (int k = 0; k < chunks; ++k) {
    accumulate_rows(src, ref, k * kRowsPerChunk, std::min(h, (k + 1) * kRowsPerChunk),
                    partial[k]);
  }
  NormalEquations eq;
  for (const auto& p : partial) eq.add(p);
  for (int i = 0; i < kBinomialTerms; ++i) {
    for (int j = 0; j < i; ++j) eq.gram[i][j] = eq.gram[j][i];
  }
  return eq;
}

double eval_channel(const ColorMatrix& m, int row, const BinomialFeatures& phi) {
  double acc = 0.0;
  for (int k = 0; k < kBinomialTerms; ++k) acc += m(row, k) * phi[k];
  return acc;
}

}  // namespace

BinomialFeatures binomial_expand(double r, double g, double b) noexcept {
  return {1.0, r, g, b, r * r, r * g, r * b, g * g, g * b, b * b};
}

const char* binomial_feature_name(int k) {
  return k >= 0 && k < kBinomialTerms ? kFeatureNames[k] : "?";
}

ColorMatrix::ColorMatrix(const std::array<Row, 3>& rows) : rows_(rows) {
  for (const Row& row : rows_) {
    for (double v : row) {
      if (!std::isfinite(v)) throw Error(ErrorKind::parameter, "color matrix entries must be finite");
    }
  }
}

ColorMatrix ColorMatrix::identity() {
  ColorMatrix m;
  m(0, 1) = 1.0;
  m(1, 2) = 1.0;
  m(2, 3) = 1.0;
  return m;
}

std::array<double, 3> ColorMatrix::apply(const BinomialFeatures& phi) const noexcept {
  return {eval_channel(*this, 0, phi), eval_channel(*this, 1, phi), eval_channel(*this, 2, phi)};
}

ColorMatrix fit_color_matrix(const Image& src, const Image& ref, double ridge) {
  require_channels(src, 3, "fit_color_matrix");
  require_same_shape(src, ref, "fit_color_matrix");
  if (!(ridge >= 0.0) || !std::isfinite(ridge)) {
    throw Error(ErrorKind::parameter, "fit_color_matrix: ridge must be >= 0");
  }
  NormalEquations eq = build_normal_equations(src, ref);
  auto& a = eq.gram;
  double scale = 0.0;
  for (int i = 0; i < kBinomialTerms; ++i) {
    a[i][i] += ridge;
    scale = std::max(scale, a[i][i]);
  }

  // In-place Cholesky: lower triangle of `a` becomes L. With ridge > 0 the
  // system is positive definite and only a non-positive pivot is rejected.
  const double tol = ridge > 0.0 ? 0.0 : 1e-10 * scale;
  for (int j = 0; j < kBinomialTerms; ++j) {
    double d = a[j][j];
    for (int k = 0; k < j; ++k) d -= a[j][k] * a[j][k];
    if (!(d > tol)) {
      throw Error(ErrorKind::rank_deficient,
                  std::string("fit_color_matrix: normal equations are singular; feature ") +
                      std::to_string(j) + " (" + kFeatureNames[j] +
                      ") is linearly dependent on the preceding features (use ridge > 0)");
    }
    a[j][j] = std::sqrt(d);
    for (int i = j + 1; i < kBinomialTerms; ++i) {
      double s = a[i][j];
      for (int k = 0; k < j; ++k) s -= a[i][k] * a[j][k];
      a[i][j] = s / a[j][j];
    }
  }

  ColorMatrix m;
  for (int c = 0; c < 3; ++c) {
    std::array<double, kBinomialTerms> z{};
    for (int i = 0; i < kBinomialTerms; ++i) {
      double s = eq.rhs[i][c];
      for (int k = 0; k < i; ++k) s -= a[i][k] * z[k];
      z[i] = s / a[i][i];
    }
    for (int i = kBinomialTerms - 1; i >= 0; --i) {
      double s = z[i];
      for (int k = i + 1; k < kBinomialTerms; ++k) s -= a[k][i] * m(c, k);
      m(c, i) = s / a[i][i];
    }
  }
  return m;
}

Image apply_color_matrix(const Image& img, const ColorMatrix& m) {
  require_channels(img, 3, "apply_color_matrix");
  Image out(img.width(), img.height(), 3);
  auto s = img.data();
  auto d = out.data();
  const std::size_t n = img.pixel_count();
#pragma omp parallel for schedule(static)
  for (std::size_t p = 0; p < n; ++p) {
    const auto rgb = m.apply(binomial_expand(s[3 * p], s[3 * p + 1], s[3 * p + 2]));
    for (int c = 0; c < 3; ++c) d[3 * p + c] = static_cast<float>(std::clamp(rgb[c], 0.0, 1.0));
  }
  return out;
}

Image block_max_pool(const Image& img, int pool) {
  if (pool < 1) throw Error(ErrorKind::parameter, "block_max_pool: pool must be >= 1");
  if (pool > img.width() || pool > img.height()) {
    throw Error(ErrorKind::size, "pool window " + std::to_string(pool) + " exceeds image " +
                                     std::to_string(img.width()) + "x" +
                                     std::to_string(img.height()));
  }
  if (pool == 1) return img;
  const int w = img.width();
  const int h = img.height();
  const int ch = img.channels();
  Image out(w, h, ch);
  for (int by = 0; by < h; by += pool) {
    for (int bx = 0; bx < w; bx += pool) {
      const int ey = std::min(h, by + pool);
      const int ex = std::min(w, bx + pool);
      for (int c = 0; c < ch; ++c) {
        float m = -std::numeric_limits<float>::infinity();
        for (int y = by; y < ey; ++y) {
          for (int x = bx; x < ex; ++x) m = std::max(m, img.at(x, y, c));
        }
        for (int y = by; y < ey; ++y) {
          for (int x = bx; x < ex; ++x) out.at(x, y, c) = m;
        }
      }
    }
  }
  return out;
}

Image pcm_correct(const Image& img, const ColorMatrix& coarse, const ColorMatrix& fine, int pool) {
  require_channels(img, 3, "pcm_correct");
  const Image pooled = block_max_pool(img, pool);
  Image out(img.width(), img.height(), 3);
  auto c1 = img.data();
  auto c2 = pooled.data();
  auto d = out.data();
  const std::size_t n = img.pixel_count();
#pragma omp parallel for schedule(static)
  for (std::size_t p = 0; p < n; ++p) {
    const BinomialFeatures own = binomial_expand(c1[3 * p], c1[3 * p + 1], c1[3 * p + 2]);
    const BinomialFeatures local = binomial_expand(c2[3 * p], c2[3 * p + 1], c2[3 * p + 2]);
    const auto base = coarse.apply(local);
    const auto fine_own = fine.apply(own);
    const auto fine_local = fine.apply(local);
    for (int c = 0; c < 3; ++c) {
      const double v = base[c] + (fine_own[c] - fine_local[c]);
      d[3 * p + c] = static_cast<float>(std::clamp(v, 0.0, 1.0));
    }
  }
  return out;
}

void write_color_matrix(std::ostream& out, const ColorMatrix& m) {
  const auto old_flags = out.flags();
  const auto old_precision = out.precision();
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (int r = 0; r < 3; ++r) {
    for (int k = 0; k < kBinomialTerms; ++k) {
      if (k) out << ' ';
      out << m(r, k);
    }
    out << '\n';
  }
  out.flags(old_flags);
  out.precision(old_precision);
}

std::string format_color_matrix(const ColorMatrix& m) {
  std::ostringstream os;
  write_color_matrix(os, m);
  return os.str();
}

ColorMatrix parse_color_matrix(std::istream& in) {
  std::array<ColorMatrix::Row, 3> rows{};
  int row = 0;
  int line_no = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (row == 3) {
      throw Error(ErrorKind::decode,
                  "color matrix: unexpected extra row at line " + std::to_string(line_no));
    }
    std::istringstream ls(line);
    int col = 0;
    std::string token;
    while (ls >> token) {
      if (col == kBinomialTerms) {
        throw Error(ErrorKind::decode, "color matrix: more than 10 values at line " +
                                           std::to_string(line_no));
      }
      double v = 0.0;
      const char* end = token.data() + token.size();
      auto [ptr, ec] = std::from_chars(token.data(), end, v);
      if (ec != std::errc{} || ptr != end || !std::isfinite(v)) {
        throw Error(ErrorKind::decode, "color matrix: invalid number '" + token +
                                           "' at line " + std::to_string(line_no));
      }
      rows[row][col++] = v;
    }
    if (col != kBinomialTerms) {
      throw Error(ErrorKind::decode, "color matrix: expected 10 values at line " +
                                         std::to_string(line_no) + ", found " +
                                         std::to_string(col));
    }
    ++row;
  }
  if (row != 3) {
    throw Error(ErrorKind::decode,
                "color matrix: expected 3 rows, found " + std::to_string(row));
  }
  return ColorMatrix(rows);
}

ColorMatrix load_color_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open color matrix '" + path.string() + "'");
  return parse_color_matrix(in);
}

void save_color_matrix(const std::filesystem::path& path, const ColorMatrix& m) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "cannot create '" + path.string() + "'");
  write_color_matrix(out, m);
  if (!out) throw Error(ErrorKind::io, "failed writing '" + path.string() + "'");
}

}  // namespace lowlight
