#include "lowlight/dataset.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <ostream>
#include <set>

#include <json.hpp>

#include "lowlight/codec.hpp"
#include "lowlight/error.hpp"
#include "lowlight/metrics.hpp"

namespace lowlight {

namespace {

bool is_image_name(const std::filesystem::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".png" || ext == ".ppm" || ext == ".pgm" || ext == ".pnm";
}

std::string fixed(double v, int digits) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string opt_field(const std::optional<double>& v, int digits) {
  return v ? fixed(*v, digits) : std::string();
}

MetricSummary summarize_values(std::vector<double> values) {
  MetricSummary s;
  if (values.empty()) {
    s.mean = s.median = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  double total = 0.0;
  for (double v : values) total += v;
  s.mean = total / static_cast<double>(values.size());
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  s.median = n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
  return s;
}

nlohmann::ordered_json json_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return nullptr;
  return v;
}

nlohmann::ordered_json json_metric(const MetricSummary& m) {
  return {{"mean", json_number(m.mean)}, {"median", json_number(m.median)}};
}

}  // namespace

std::vector<std::string> list_images(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) {
    throw Error(ErrorKind::dataset, "'" + dir.string() + "' is not a directory");
  }
  std::vector<std::string> names;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && is_image_name(entry.path())) {
      names.push_back(entry.path().filename().string());
    }
  }
  std::sort(names.begin(), names.end());
  return names;
}

EvalRecord evaluate_pair(std::string id, const Image& low, const Image& high,
                         const PipelineConfig& cfg) {
  EvalRecord rec;
  rec.id = std::move(id);
  const auto start = std::chrono::steady_clock::now();
  try {
    rec.psnr_before = psnr(low, high);
    rec.ssim_before = ssim(low, high);
    EnhanceResult res = enhance(low, cfg, &high);
    const RetinexDecomposition& ref = *res.diagnostics.reference;
    rec.psnr_after = psnr(res.output, high);
    rec.ssim_after = ssim(res.output, high);
    rec.loss_decom = loss_decom(res.decomposition.reflectance, ref.reflectance,
                                res.decomposition.illumination, ref.illumination, low, high);
    rec.loss_restore = loss_restore(res.diagnostics.restored, ref.reflectance);
    rec.loss_illum = loss_illum(res.diagnostics.adjusted_illumination, ref.illumination);
  } catch (const std::exception& e) {
    rec.error = e.what();
    rec.psnr_after.reset();
    rec.ssim_after.reset();
    rec.loss_decom.reset();
    rec.loss_restore.reset();
    rec.loss_illum.reset();
  }
  if (cfg.record_timing) {
    rec.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
                 .count();
  }
  return rec;
}

EvalReport eval_dataset(const std::filesystem::path& low_dir,
                        const std::filesystem::path& high_dir, const PipelineConfig& cfg) {
  validate(cfg);
  const std::vector<std::string> lows = list_images(low_dir);
  const std::vector<std::string> highs = list_images(high_dir);
  const std::set<std::string> high_set(highs.begin(), highs.end());
  const bool any_match = std::any_of(lows.begin(), lows.end(),
                                     [&](const std::string& n) { return high_set.count(n) > 0; });
  if (!any_match) {
    throw Error(ErrorKind::dataset, "no matching filenames between '" + low_dir.string() +
                                        "' and '" + high_dir.string() + "'");
  }

  EvalReport report;
  report.records.resize(lows.size());
  const int n = static_cast<int>(lows.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (int i = 0; i < n; ++i) {
    const std::string& name = lows[i];
    EvalRecord& rec = report.records[i];
    if (high_set.count(name) == 0) {
      rec.id = name;
      rec.error = "missing counterpart '" + (high_dir / name).string() + "'";
      continue;
    }
    try {
      const Image low = read_image(low_dir / name);
      const Image high = read_image(high_dir / name);
      rec = evaluate_pair(name, low, high, cfg);
    } catch (const std::exception& e) {
      rec.id = name;
      rec.error = std::string("load: ") + e.what();
    }
  }
  report.summary = summarize(report.records);
  return report;
}

EvalSummary summarize(const std::vector<EvalRecord>& records) {
  EvalSummary s;
  s.pairs = records.size();
  std::vector<double> pb, pa, sb, sa;
  for (const EvalRecord& r : records) {
    if (!r.ok()) {
      ++s.failed;
      continue;
    }
    ++s.succeeded;
    pb.push_back(*r.psnr_before);
    pa.push_back(*r.psnr_after);
    sb.push_back(*r.ssim_before);
    sa.push_back(*r.ssim_after);
  }
  s.psnr_before = summarize_values(std::move(pb));
  s.psnr_after = summarize_values(std::move(pa));
  s.ssim_before = summarize_values(std::move(sb));
  s.ssim_after = summarize_values(std::move(sa));
  return s;
}

void write_report_csv(std::ostream& out, const std::vector<EvalRecord>& records) {
  out << kReportHeader << '\n';
  for (const EvalRecord& r : records) {
    out << r.id << ',' << opt_field(r.psnr_before, 4) << ',' << opt_field(r.psnr_after, 4) << ','
        << opt_field(r.ssim_before, 6) << ',' << opt_field(r.ssim_after, 6) << ','
        << opt_field(r.loss_decom, 6) << ',' << opt_field(r.loss_restore, 6) << ','
        << opt_field(r.loss_illum, 6) << ',' << fixed(r.ms, 1) << '\n';
  }
}

std::string summary_json(const EvalReport& report) {
  const EvalSummary& s = report.summary;
  nlohmann::ordered_json failures = nlohmann::ordered_json::array();
  for (const EvalRecord& r : report.records) {
    if (!r.ok()) failures.push_back({{"id", r.id}, {"error", r.error}});
  }
  nlohmann::ordered_json j;
  j["pairs"] = s.pairs;
  j["succeeded"] = s.succeeded;
  j["failed"] = s.failed;
  j["psnr_before"] = json_metric(s.psnr_before);
  j["psnr_after"] = json_metric(s.psnr_after);
  j["ssim_before"] = json_metric(s.ssim_before);
  j["ssim_after"] = json_metric(s.ssim_after);
  j["failures"] = std::move(failures);
  return j.dump(2) + "\n";
}

}  // namespace lowlight
