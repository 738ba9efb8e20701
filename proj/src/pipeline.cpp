#include "lowlight/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "lowlight/error.hpp"

namespace lowlight {

namespace {

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view why) {
  throw Error(ErrorKind::parameter, "config key '" + std::string(key) + "': invalid value '" +
                                        std::string(value) + "' (" + std::string(why) + ")");
}

double to_double(std::string_view key, std::string_view value) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc{} || ptr != value.data() + value.size() || !std::isfinite(v)) {
    bad_value(key, value, "expected a number");
  }
  return v;
}

template <typename Int>
Int to_int(std::string_view key, std::string_view value) {
  Int v{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc{} || ptr != value.data() + value.size()) {
    bad_value(key, value, "expected an integer");
  }
  return v;
}

bool to_bool(std::string_view key, std::string_view value) {
  if (value == "on" || value == "true" || value == "1" || value == "yes") return true;
  if (value == "off" || value == "false" || value == "0" || value == "no") return false;
  bad_value(key, value, "expected on/off");
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

void require(bool ok, const char* field, const char* range) {
  if (!ok) {
    throw Error(ErrorKind::parameter,
                std::string("config: ") + field + " must be " + range);
  }
}

template <typename Fn>
auto staged(const char* stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    throw e.with_stage(stage);
  }
}

}  // namespace

void validate(const PipelineConfig& cfg) {
  require(cfg.epsilon > 0.0f && cfg.epsilon <= 0.1f, "epsilon", "in (0, 0.1]");
  require(cfg.smoothing.lambda >= 0.0 && std::isfinite(cfg.smoothing.lambda), "lambda", ">= 0");
  require(cfg.smoothing.iterations >= 0 && cfg.smoothing.iterations <= 10000, "iterations",
          "in [0, 10000]");
  require(cfg.smoothing.edge_sigma > 0.0, "edge_sigma", "> 0");
  require(cfg.smoothing.damping > 0.0 && cfg.smoothing.damping <= 1.0, "damping", "in (0, 1]");
  require(cfg.grid.depth >= 1 && cfg.grid.depth <= 256 && cfg.grid.rows >= 1 &&
              cfg.grid.rows <= 256 && cfg.grid.cols >= 1 && cfg.grid.cols <= 256,
          "grid dims", "in [1, 256]");
  require(cfg.sigma_s > 0.0 && cfg.sigma_s <= 64.0, "sigma_s", "in (0, 64]");
  require(cfg.sigma_r > 0.0 && std::isfinite(cfg.sigma_r), "sigma_r", "> 0");
  require(cfg.rpm.alpha >= 0.0 && std::isfinite(cfg.rpm.alpha), "alpha", ">= 0");
  require(cfg.rpm.rho >= 0.0 && cfg.rpm.rho <= 64.0, "rho", "in [0, 64]");
  require(cfg.rpm.levels >= 1 && cfg.rpm.levels <= 8, "levels", "in [1, 8]");
  require(cfg.pool >= 1, "pool", ">= 1");
  require(cfg.ridge >= 0.0 && std::isfinite(cfg.ridge), "ridge", ">= 0");
  require(cfg.gamma > 0.0 && std::isfinite(cfg.gamma), "gamma", "> 0");
  require(cfg.matrix_source != MatrixSource::file || !cfg.matrix_file.empty(), "matrix_file",
          "set when matrix_source = file");
}

void apply_setting(PipelineConfig& cfg, std::string_view key, std::string_view value) {
  if (key == "epsilon") {
    cfg.epsilon = static_cast<float>(to_double(key, value));
  } else if (key == "lambda") {
    cfg.smoothing.lambda = to_double(key, value);
  } else if (key == "iterations") {
    cfg.smoothing.iterations = to_int<int>(key, value);
  } else if (key == "edge_sigma") {
    cfg.smoothing.edge_sigma = to_double(key, value);
  } else if (key == "damping") {
    cfg.smoothing.damping = to_double(key, value);
  } else if (key == "denoise") {
    cfg.denoise = to_bool(key, value);
  } else if (key == "denoiser") {
    if (value == "grid") cfg.denoiser = Denoiser::grid;
    else if (value == "bilateral") cfg.denoiser = Denoiser::bilateral;
    else bad_value(key, value, "expected grid or bilateral");
  } else if (key == "grid_depth") {
    cfg.grid.depth = to_int<int>(key, value);
  } else if (key == "grid_rows") {
    cfg.grid.rows = to_int<int>(key, value);
  } else if (key == "grid_cols") {
    cfg.grid.cols = to_int<int>(key, value);
  } else if (key == "sigma_s") {
    cfg.sigma_s = to_double(key, value);
  } else if (key == "sigma_r") {
    cfg.sigma_r = to_double(key, value);
  } else if (key == "restore") {
    cfg.restore = to_bool(key, value);
  } else if (key == "alpha") {
    cfg.rpm.alpha = to_double(key, value);
  } else if (key == "rho") {
    cfg.rpm.rho = to_double(key, value);
  } else if (key == "levels") {
    cfg.rpm.levels = to_int<int>(key, value);
  } else if (key == "correct") {
    cfg.correct = to_bool(key, value);
  } else if (key == "pool") {
    cfg.pool = to_int<int>(key, value);
  } else if (key == "ridge") {
    cfg.ridge = to_double(key, value);
  } else if (key == "matrix_source") {
    if (value == "identity") cfg.matrix_source = MatrixSource::identity;
    else if (value == "file") cfg.matrix_source = MatrixSource::file;
    else if (value == "fit") cfg.matrix_source = MatrixSource::fit;
    else bad_value(key, value, "expected identity, file or fit");
  } else if (key == "matrix_file") {
    cfg.matrix_file = std::filesystem::path(std::string(value));
  } else if (key == "adjust") {
    cfg.adjust = to_bool(key, value);
  } else if (key == "adjust_mode") {
    if (value == "gamma") cfg.adjust_mode = AdjustMode::fixed;
    else if (value == "auto") cfg.adjust_mode = AdjustMode::automatic;
    else bad_value(key, value, "expected gamma or auto");
  } else if (key == "gamma") {
    cfg.gamma = to_double(key, value);
  } else if (key == "seed") {
    cfg.seed = to_int<std::uint64_t>(key, value);
  } else if (key == "timing") {
    cfg.record_timing = to_bool(key, value);
  } else {
    throw Error(ErrorKind::parameter, "unknown config key '" + std::string(key) + "'");
  }
}

PipelineConfig parse_config(std::istream& in, PipelineConfig base) {
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view text(line);
    if (auto hash = text.find('#'); hash != std::string_view::npos) text = text.substr(0, hash);
    text = trim(text);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorKind::parameter,
                  "config line " + std::to_string(line_no) + ": expected key=value");
    }
    try {
      apply_setting(base, trim(text.substr(0, eq)), trim(text.substr(eq + 1)));
    } catch (const Error& e) {
      throw e.with_stage("config line " + std::to_string(line_no));
    }
  }
  return base;
}

PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig base) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open config '" + path.string() + "'");
  return parse_config(in, std::move(base));
}

std::string format_config(const PipelineConfig& cfg) {
  std::ostringstream os;
  os.precision(std::numeric_limits<double>::max_digits10);
  auto onoff = [](bool b) { return b ? "on" : "off"; };
  os << "epsilon=" << cfg.epsilon << '\n'
     << "lambda=" << cfg.smoothing.lambda << '\n'
     << "iterations=" << cfg.smoothing.iterations << '\n'
     << "edge_sigma=" << cfg.smoothing.edge_sigma << '\n'
     << "damping=" << cfg.smoothing.damping << '\n'
     << "denoise=" << onoff(cfg.denoise) << '\n'
     << "denoiser=" << (cfg.denoiser == Denoiser::grid ? "grid" : "bilateral") << '\n'
     << "grid_depth=" << cfg.grid.depth << '\n'
     << "grid_rows=" << cfg.grid.rows << '\n'
     << "grid_cols=" << cfg.grid.cols << '\n'
     << "sigma_s=" << cfg.sigma_s << '\n'
     << "sigma_r=" << cfg.sigma_r << '\n'
     << "restore=" << onoff(cfg.restore) << '\n'
     << "alpha=" << cfg.rpm.alpha << '\n'
     << "rho=" << cfg.rpm.rho << '\n'
     << "levels=" << cfg.rpm.levels << '\n'
     << "correct=" << onoff(cfg.correct) << '\n'
     << "pool=" << cfg.pool << '\n'
     << "ridge=" << cfg.ridge << '\n'
     << "matrix_source="
     << (cfg.matrix_source == MatrixSource::identity
             ? "identity"
             : (cfg.matrix_source == MatrixSource::file ? "file" : "fit"))
     << '\n';
  if (!cfg.matrix_file.empty()) os << "matrix_file=" << cfg.matrix_file.string() << '\n';
  os << "adjust=" << onoff(cfg.adjust) << '\n'
     << "adjust_mode=" << (cfg.adjust_mode == AdjustMode::fixed ? "gamma" : "auto") << '\n'
     << "gamma=" << cfg.gamma << '\n'
     << "seed=" << cfg.seed << '\n'
     << "timing=" << onoff(cfg.record_timing) << '\n';
  return os.str();
}

EnhanceResult enhance(const Image& low, const PipelineConfig& cfg, const Image* reference) {
  staged("config", [&] { validate(cfg); });
  staged("decompose", [&] {
    require_channels(low, 3, "enhance");
    if (reference != nullptr) require_same_shape(low, *reference, "enhance reference");
    const int need = cfg.restore ? (1 << (cfg.rpm.levels - 1)) : 1;
    if (std::min(low.width(), low.height()) < need) {
      throw Error(ErrorKind::size, "image " + std::to_string(low.width()) + "x" +
                                       std::to_string(low.height()) +
                                       " is too small for a " +
                                       std::to_string(cfg.rpm.levels) + "-level pyramid");
    }
  });

  EnhanceResult result;
  Diagnostics& diag = result.diagnostics;
  result.decomposition = staged("decompose", [&] {
    return decompose(low, cfg.smoothing, cfg.epsilon);
  });
  if (reference != nullptr) {
    diag.reference = staged("decompose", [&] {
      return decompose(*reference, cfg.smoothing, cfg.epsilon);
    });
  }
  const Image& illumination = result.decomposition.illumination;

  Image reflectance = result.decomposition.reflectance;
  if (cfg.denoise) {
    reflectance = staged("denoise", [&] {
      return cfg.denoiser == Denoiser::grid
                 ? cdm_denoise(reflectance, cfg.grid)
                 : bilateral_denoise(reflectance, cfg.sigma_s, cfg.sigma_r);
    });
  }
  diag.denoised = reflectance;

  if (cfg.restore) {
    reflectance = staged("restore", [&] { return rpm_restore(reflectance, illumination, cfg.rpm); });
  }

  if (cfg.correct) {
    reflectance = staged("correct", [&] {
      switch (cfg.matrix_source) {
        case MatrixSource::identity:
          break;
        case MatrixSource::file:
          diag.coarse = load_color_matrix(cfg.matrix_file);
          diag.fine = diag.coarse;
          break;
        case MatrixSource::fit: {
          if (!diag.reference) {
            throw Error(ErrorKind::parameter,
                        "matrix_source = fit requires a reference image");
          }
          const Image& target = diag.reference->reflectance;
          diag.fine = fit_color_matrix(reflectance, target, cfg.ridge);
          diag.coarse = fit_color_matrix(block_max_pool(reflectance, cfg.pool),
                                         block_max_pool(target, cfg.pool), cfg.ridge);
          break;
        }
      }
      return pcm_correct(reflectance, diag.coarse, diag.fine, cfg.pool);
    });
  }
  diag.restored = reflectance;

  diag.adjusted_illumination = illumination;
  if (cfg.adjust) {
    diag.adjusted_illumination = staged("adjust", [&] {
      if (cfg.adjust_mode == AdjustMode::automatic) {
        if (!diag.reference) {
          throw Error(ErrorKind::calibration, "auto gamma requires a reference image");
        }
        diag.gamma = auto_gamma(illumination, diag.reference->illumination);
      } else {
        diag.gamma = cfg.gamma;
      }
      return adjust_illumination(illumination, AdjustParams{diag.gamma});
    });
  }

  result.output = staged("recompose", [&] {
    return recompose(reflectance, diag.adjusted_illumination);
  });
  return result;
}

}  // namespace lowlight
