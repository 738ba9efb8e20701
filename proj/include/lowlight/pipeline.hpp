#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

#include "lowlight/adjust.hpp"
#include "lowlight/bilateral.hpp"
#include "lowlight/color.hpp"
#include "lowlight/image.hpp"
#include "lowlight/pyramid.hpp"
#include "lowlight/retinex.hpp"

namespace lowlight {

enum class Denoiser { grid, bilateral };
enum class MatrixSource { identity, file, fit };
enum class AdjustMode { fixed, automatic };

struct PipelineConfig {
  float epsilon = kDefaultEpsilon;
  SmoothingParams smoothing;

  bool denoise = true;
  Denoiser denoiser = Denoiser::grid;
  GridDims grid;
  double sigma_s = 2.0;
  double sigma_r = 0.1;

  bool restore = true;
  RestoreParams rpm;

  bool correct = true;
  int pool = 4;
  double ridge = 1e-6;
  MatrixSource matrix_source = MatrixSource::identity;
  std::filesystem::path matrix_file;

  bool adjust = true;
  AdjustMode adjust_mode = AdjustMode::fixed;
  double gamma = 0.5;

  std::uint64_t seed = 42;
  bool record_timing = false;
};

/// Throws a parameter error naming the first field outside its documented range.
void validate(const PipelineConfig& cfg);

/// Applies one key=value setting. Unknown keys and malformed values throw a
/// parameter error.
void apply_setting(PipelineConfig& cfg, std::string_view key, std::string_view value);

/// Flat key=value text; '#' starts a comment, blank lines are ignored.
PipelineConfig parse_config(std::istream& in, PipelineConfig base = {});
PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig base = {});

/// Key=value rendering of every field, loadable by parse_config.
std::string format_config(const PipelineConfig& cfg);

struct Diagnostics {
  double gamma = 1.0;
  ColorMatrix coarse = ColorMatrix::identity();
  ColorMatrix fine = ColorMatrix::identity();
  Image denoised;              // reflectance after the denoise stage
  Image restored;              // reflectance after detail restoration and color correction
  Image adjusted_illumination;
  std::optional<RetinexDecomposition> reference;  // decomposition of S_high when given
};

struct EnhanceResult {
  Image output;
  RetinexDecomposition decomposition;
  Diagnostics diagnostics;
};

/// decompose -> denoise -> restore -> correct -> adjust -> recompose. Errors
/// carry the failing stage as a message prefix.
EnhanceResult enhance(const Image& low, const PipelineConfig& cfg,
                      const Image* reference = nullptr);

}  // namespace lowlight
