#include "cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include "lowlight/codec.hpp"
#include "lowlight/color.hpp"
#include "lowlight/dataset.hpp"
#include "lowlight/error.hpp"
#include "lowlight/metrics.hpp"
#include "lowlight/parallel.hpp"
#include "lowlight/pipeline.hpp"
#include "lowlight/retinex.hpp"

namespace lowlight {

namespace {

// Flag values land here; only flags actually given override the config.
struct PipelineFlags {
  std::string config_path;
  float epsilon = 0;
  double lambda = 0;
  int iterations = 0;
  std::string denoiser;
  std::vector<int> grid;
  double sigma_s = 0;
  double sigma_r = 0;
  double alpha = 0;
  double rho = 0;
  int levels = 0;
  int pool = 0;
  double ridge = 0;
  std::string color_matrix;
  bool fit_color = false;
  double gamma = 0;
  bool auto_gamma = false;
  bool no_denoise = false;
  bool no_restore = false;
  bool no_correct = false;
  bool no_adjust = false;
  std::uint64_t seed = 0;

  std::vector<std::pair<CLI::Option*, std::function<void(PipelineConfig&)>>> setters;
};

template <typename T>
void bind_option(CLI::App* app, PipelineFlags& f, const std::string& name, T& target,
          const std::string& help, std::function<void(PipelineConfig&)> apply) {
  CLI::Option* opt = app->add_option(name, target, help);
  f.setters.emplace_back(opt, std::move(apply));
}

void bind_flag(CLI::App* app, PipelineFlags& f, const std::string& name, bool& target,
               const std::string& help, std::function<void(PipelineConfig&)> apply) {
  CLI::Option* opt = app->add_flag(name, target, help);
  f.setters.emplace_back(opt, std::move(apply));
}

void add_pipeline_options(CLI::App* app, PipelineFlags& f) {
  app->add_option("--config", f.config_path, "key=value config file (flags override it)");
  bind_option(app, f, "--epsilon", f.epsilon, "division guard for reflectance",
       [&f](PipelineConfig& c) { c.epsilon = f.epsilon; });
  bind_option(app, f, "--lambda", f.lambda, "illumination smoothness weight",
       [&f](PipelineConfig& c) { c.smoothing.lambda = f.lambda; });
  bind_option(app, f, "--iters", f.iterations, "illumination smoothing iterations",
       [&f](PipelineConfig& c) { c.smoothing.iterations = f.iterations; });
  bind_option(app, f, "--denoiser", f.denoiser, "grid | bilateral",
       [&f](PipelineConfig& c) { apply_setting(c, "denoiser", f.denoiser); });
  {
    CLI::Option* opt = app->add_option("--grid", f.grid, "bilateral grid dims: depth rows cols")
                           ->expected(3);
    f.setters.emplace_back(opt, [&f](PipelineConfig& c) {
      c.grid = GridDims{f.grid[0], f.grid[1], f.grid[2]};
    });
  }
  bind_option(app, f, "--sigma-s", f.sigma_s, "bilateral spatial sigma (px)",
       [&f](PipelineConfig& c) { c.sigma_s = f.sigma_s; });
  bind_option(app, f, "--sigma-r", f.sigma_r, "bilateral range sigma",
       [&f](PipelineConfig& c) { c.sigma_r = f.sigma_r; });
  bind_option(app, f, "--alpha", f.alpha, "dark-region detail gain",
       [&f](PipelineConfig& c) { c.rpm.alpha = f.alpha; });
  bind_option(app, f, "--rho", f.rho, "max sampling offset (px)",
       [&f](PipelineConfig& c) { c.rpm.rho = f.rho; });
  bind_option(app, f, "--levels", f.levels, "pyramid levels",
       [&f](PipelineConfig& c) { c.rpm.levels = f.levels; });
  bind_option(app, f, "--pool", f.pool, "color correction pooling window",
       [&f](PipelineConfig& c) { c.pool = f.pool; });
  bind_option(app, f, "--ridge", f.ridge, "ridge for color matrix fitting",
       [&f](PipelineConfig& c) { c.ridge = f.ridge; });
  bind_option(app, f, "--color-matrix", f.color_matrix, "color matrix file (3 x 10 text)",
       [&f](PipelineConfig& c) {
         c.matrix_source = MatrixSource::file;
         c.matrix_file = f.color_matrix;
       });
  bind_flag(app, f, "--fit-color", f.fit_color, "fit color matrices against the reference",
            [](PipelineConfig& c) { c.matrix_source = MatrixSource::fit; });
  bind_option(app, f, "--gamma", f.gamma, "illumination gamma",
       [&f](PipelineConfig& c) {
         c.adjust_mode = AdjustMode::fixed;
         c.gamma = f.gamma;
       });
  bind_flag(app, f, "--auto-gamma", f.auto_gamma, "calibrate gamma from the reference",
            [](PipelineConfig& c) { c.adjust_mode = AdjustMode::automatic; });
  bind_flag(app, f, "--no-denoise", f.no_denoise, "bypass the denoise stage",
            [](PipelineConfig& c) { c.denoise = false; });
  bind_flag(app, f, "--no-restore", f.no_restore, "bypass detail restoration",
            [](PipelineConfig& c) { c.restore = false; });
  bind_flag(app, f, "--no-correct", f.no_correct, "bypass color correction",
            [](PipelineConfig& c) { c.correct = false; });
  bind_flag(app, f, "--no-adjust", f.no_adjust, "bypass illumination adjustment",
            [](PipelineConfig& c) { c.adjust = false; });
  bind_option(app, f, "--seed", f.seed, "seed for synthetic data generators",
       [&f](PipelineConfig& c) { c.seed = f.seed; });
}

PipelineConfig resolve_config(const PipelineFlags& f) {
  PipelineConfig cfg;
  if (!f.config_path.empty()) cfg = load_config(f.config_path);
  for (const auto& [opt, apply] : f.setters) {
    if (opt->count() > 0) apply(cfg);
  }
  validate(cfg);
  return cfg;
}

int run_enhance(const PipelineFlags& f, const std::string& in, const std::string& out_path,
                const std::string& ref_path, const std::string& debug_r,
                const std::string& debug_i, std::ostream& out) {
  const PipelineConfig cfg = resolve_config(f);
  const Image low = read_image(in);
  Image reference;
  if (!ref_path.empty()) reference = read_image(ref_path);
  const EnhanceResult res = enhance(low, cfg, ref_path.empty() ? nullptr : &reference);
  write_image(out_path, res.output);
  if (!debug_r.empty()) write_image(debug_r, res.diagnostics.restored);
  if (!debug_i.empty()) write_image(debug_i, res.diagnostics.adjusted_illumination);
  out << "wrote " << out_path << " (" << res.output.width() << "x" << res.output.height()
      << ", gamma " << res.diagnostics.gamma << ")\n";
  return 0;
}

int run_decompose(const PipelineFlags& f, const std::string& in, const std::string& out_r,
                  const std::string& out_i, std::ostream& out) {
  const PipelineConfig cfg = resolve_config(f);
  const Image s = read_image(in);
  RetinexDecomposition d;
  try {
    d = decompose(s, cfg.smoothing, cfg.epsilon);
  } catch (const Error& e) {
    throw e.with_stage("decompose");
  }
  write_image(out_r, d.reflectance, ImageFormat::png8);
  write_image(out_i, d.illumination, ImageFormat::ppm);
  out << "wrote " << out_r << " and " << out_i << "\n";
  return 0;
}

int run_eval(const PipelineFlags& f, const std::string& low, const std::string& high,
             const std::string& report, std::string summary, bool timing, std::ostream& out) {
  PipelineConfig cfg = resolve_config(f);
  if (timing) cfg.record_timing = true;
  const EvalReport rep = eval_dataset(low, high, cfg);
  {
    std::ofstream csv(report, std::ios::trunc);
    if (!csv) throw Error(ErrorKind::io, "cannot create '" + report + "'");
    write_report_csv(csv, rep.records);
    if (!csv) throw Error(ErrorKind::io, "failed writing '" + report + "'");
  }
  if (summary.empty()) summary = std::filesystem::path(report).replace_extension(".json").string();
  {
    std::ofstream js(summary, std::ios::trunc);
    if (!js) throw Error(ErrorKind::io, "cannot create '" + summary + "'");
    js << summary_json(rep);
    if (!js) throw Error(ErrorKind::io, "failed writing '" + summary + "'");
  }
  const EvalSummary& s = rep.summary;
  out << s.pairs << " pairs, " << s.failed << " failed; mean PSNR "
      << format_db(s.psnr_before.mean, 3) << " -> " << format_db(s.psnr_after.mean, 3)
      << " dB\n";
  return 0;
}

int run_fit_color(const std::string& src_path, const std::string& ref_path, double ridge,
                  const std::string& out_path, std::ostream& out) {
  const Image src = read_image(src_path);
  const Image ref = read_image(ref_path);
  ColorMatrix m;
  try {
    m = fit_color_matrix(src, ref, ridge);
  } catch (const Error& e) {
    throw e.with_stage("fit-color");
  }
  if (out_path.empty() || out_path == "-") {
    write_color_matrix(out, m);
  } else {
    save_color_matrix(out_path, m);
  }
  return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Retinex low-light image enhancement", "lowlight"};
  app.require_subcommand(1);

  PipelineFlags enhance_flags;
  std::string enh_in, enh_out, enh_ref, enh_debug_r, enh_debug_i;
  CLI::App* enh = app.add_subcommand("enhance", "enhance one low-light image");
  enh->add_option("--in", enh_in, "input image")->required();
  enh->add_option("--out", enh_out, "output image (.png or .ppm)")->required();
  enh->add_option("--ref", enh_ref, "normal-light reference (auto gamma / color fitting)");
  enh->add_option("--debug-r", enh_debug_r, "write the restored reflectance here");
  enh->add_option("--debug-i", enh_debug_i, "write the adjusted illumination here");
  add_pipeline_options(enh, enhance_flags);

  PipelineFlags decompose_flags;
  std::string dec_in, dec_r, dec_i;
  CLI::App* dec = app.add_subcommand("decompose", "write reflectance (PNG) and illumination (PGM)");
  dec->add_option("--in", dec_in, "input image")->required();
  dec->add_option("--out-r", dec_r, "reflectance output (PNG)")->required();
  dec->add_option("--out-i", dec_i, "illumination output (PGM)")->required();
  dec->add_option("--config", decompose_flags.config_path, "key=value config file");
  bind_option(dec, decompose_flags, "--lambda", decompose_flags.lambda, "illumination smoothness weight",
       [&](PipelineConfig& c) { c.smoothing.lambda = decompose_flags.lambda; });
  bind_option(dec, decompose_flags, "--iters", decompose_flags.iterations, "smoothing iterations",
       [&](PipelineConfig& c) { c.smoothing.iterations = decompose_flags.iterations; });
  bind_option(dec, decompose_flags, "--epsilon", decompose_flags.epsilon, "division guard",
       [&](PipelineConfig& c) { c.epsilon = decompose_flags.epsilon; });

  PipelineFlags eval_flags;
  std::string ev_low, ev_high, ev_report, ev_summary;
  bool ev_timing = false;
  CLI::App* ev = app.add_subcommand("eval", "evaluate over paired low/ and high/ directories");
  ev->add_option("--low", ev_low, "directory of low-light images")->required();
  ev->add_option("--high", ev_high, "directory of normal-light references")->required();
  ev->add_option("--report", ev_report, "CSV report path")->required();
  ev->add_option("--summary", ev_summary, "JSON summary path (default: report with .json)");
  ev->add_flag("--timing", ev_timing, "record wall time per pair (reports become non-reproducible)");
  add_pipeline_options(ev, eval_flags);

  std::string fit_src, fit_ref, fit_out;
  double fit_ridge = 1e-6;
  CLI::App* fit = app.add_subcommand("fit-color", "fit a 3x10 binomial color matrix");
  fit->add_option("--src", fit_src, "source image")->required();
  fit->add_option("--ref", fit_ref, "reference image")->required();
  fit->add_option("--ridge", fit_ridge, "ridge regularization")->capture_default_str();
  fit->add_option("--out", fit_out, "output matrix file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (*enh) return run_enhance(enhance_flags, enh_in, enh_out, enh_ref, enh_debug_r, enh_debug_i, out);
    if (*dec) return run_decompose(decompose_flags, dec_in, dec_r, dec_i, out);
    if (*ev) return run_eval(eval_flags, ev_low, ev_high, ev_report, ev_summary, ev_timing, out);
    if (*fit) return run_fit_color(fit_src, fit_ref, fit_ridge, fit_out, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  err << app.help();
  return 2;
}

}  // namespace lowlight
