#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lowlight/pipeline.hpp"

namespace lowlight {

inline constexpr std::string_view kReportHeader =
    "id,psnr_before,psnr_after,ssim_before,ssim_after,loss_decom,loss_restore,loss_illum,ms";

/// One low/high pair. Metrics are empty when the stage producing them failed;
/// `error` then carries the stage-labeled message.
struct EvalRecord {
  std::string id;
  std::optional<double> psnr_before;
  std::optional<double> psnr_after;
  std::optional<double> ssim_before;
  std::optional<double> ssim_after;
  std::optional<double> loss_decom;
  std::optional<double> loss_restore;
  std::optional<double> loss_illum;
  double ms = 0.0;
  std::string error;

  bool ok() const noexcept { return error.empty(); }
};

struct MetricSummary {
  double mean = 0.0;
  double median = 0.0;
};

struct EvalSummary {
  std::size_t pairs = 0;
  std::size_t succeeded = 0;
  std::size_t failed = 0;
  MetricSummary psnr_before;
  MetricSummary psnr_after;
  MetricSummary ssim_before;
  MetricSummary ssim_after;
};

struct EvalReport {
  std::vector<EvalRecord> records;
  EvalSummary summary;
};

/// Sorted image filenames (.png/.ppm/.pgm/.pnm) directly inside dir.
std::vector<std::string> list_images(const std::filesystem::path& dir);

/// Enhances one pair against its reference and fills every metric.
EvalRecord evaluate_pair(std::string id, const Image& low, const Image& high,
                         const PipelineConfig& cfg);

/// Processes every image in low_dir that has a same-named file in high_dir.
/// Pairs run concurrently; records come back in sorted-filename order. A
/// missing counterpart or failing pair becomes an error record. No matching
/// pair at all is a dataset error.
EvalReport eval_dataset(const std::filesystem::path& low_dir,
                        const std::filesystem::path& high_dir, const PipelineConfig& cfg);

EvalSummary summarize(const std::vector<EvalRecord>& records);

void write_report_csv(std::ostream& out, const std::vector<EvalRecord>& records);
/// JSON summary; infinite PSNR values are written as the string "inf".
std::string summary_json(const EvalReport& report);

}  // namespace lowlight
