#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "lowlight/image.hpp"

namespace lowlight {

inline constexpr int kBinomialTerms = 10;
using BinomialFeatures = std::array<double, kBinomialTerms>;

/// Upper triangle of [1 r g b]^T [1 r g b], row-major:
/// [1, r, g, b, r^2, rg, rb, g^2, gb, b^2].
BinomialFeatures binomial_expand(double r, double g, double b) noexcept;

/// Name of feature k ("1", "r", ..., "b^2").
const char* binomial_feature_name(int k);

/// 3x10 matrix mapping binomial features to (r, g, b).
class ColorMatrix {
 public:
  using Row = std::array<double, kBinomialTerms>;

  /// All-zero matrix.
  ColorMatrix() = default;
  explicit ColorMatrix(const std::array<Row, 3>& rows);

  /// Rows select the linear r, g, b features.
  static ColorMatrix identity();

  double operator()(int row, int col) const { return rows_[row][col]; }
  double& operator()(int row, int col) { return rows_[row][col]; }
  const std::array<Row, 3>& rows() const noexcept { return rows_; }

  std::array<double, 3> apply(const BinomialFeatures& phi) const noexcept;

  friend bool operator==(const ColorMatrix&, const ColorMatrix&) = default;

 private:
  std::array<Row, 3> rows_{};
};

/// Least squares with ridge: argmin sum_p |M phi(src_p) - ref_p|^2 + ridge |M|_F^2,
/// solved through the 10x10 normal equations. Throws rank_deficient (naming
/// the first dependent feature) when the system is singular.
ColorMatrix fit_color_matrix(const Image& src, const Image& ref, double ridge = 1e-6);

/// out_p = clamp(M phi(img_p), 0, 1).
Image apply_color_matrix(const Image& img, const ColorMatrix& m);

/// Per-channel pool x pool block maximum, broadcast back to every pixel of the
/// block (non-overlapping blocks; partial blocks at the right/bottom edges).
Image block_max_pool(const Image& img, int pool);

/// coarse = M_coarse phi(C2); fine = M_fine phi(C1) - M_fine phi(C2);
/// out = clamp(coarse + fine, 0, 1) with C1 = img and C2 = block_max_pool(img).
Image pcm_correct(const Image& img, const ColorMatrix& coarse, const ColorMatrix& fine,
                  int pool = 4);

/// Three lines of ten whitespace-separated decimals.
void write_color_matrix(std::ostream& out, const ColorMatrix& m);
std::string format_color_matrix(const ColorMatrix& m);
ColorMatrix parse_color_matrix(std::istream& in);
ColorMatrix load_color_matrix(const std::filesystem::path& path);
void save_color_matrix(const std::filesystem::path& path, const ColorMatrix& m);

}  // namespace lowlight
