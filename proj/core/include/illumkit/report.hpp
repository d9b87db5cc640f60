#pragma once

// Dataset-level evaluation report and its on-disk formats.
//
// JSON layout (schema_version 1), keys in this order:
//   schema_version, angular_mode, count,
//   angular {mean, median, trimean, std, min, max, count},
//   psnr {...}, ssim {...}, delta_e {...} (absent when not computed),
//   per_image [{id, angular_mean, valid_fraction, psnr, ssim[, delta_e]}]
// Floats are written with 6 significant digits. Aggregates are statistics
// over the per-image rows.
//
// CSV: header "id,angular_mean,valid_fraction,psnr,ssim[,delta_e]", one row
// per image in id order.

#include <optional>
#include <string>
#include <vector>

#include "illumkit/metrics.hpp"

namespace illumkit {

struct ImageEvalRow {
  std::string id;
  double angular_mean = 0;
  double valid_fraction = 0;
  double psnr = 0;
  double ssim = 0;
  std::optional<double> delta_e;
};

struct EvalReport {
  static constexpr int kSchemaVersion = 1;

  std::string angular_mode;  // "recovered", "gtmap" or "pixel"
  ErrorStats angular;
  ErrorStats psnr;
  ErrorStats ssim;
  std::optional<ErrorStats> delta_e;
  std::vector<ImageEvalRow> per_image;

  /// Fills the aggregate statistics from per_image. Throws EmptySampleError
  /// when there are no rows.
  void aggregate();

  std::string to_json() const;
  std::string to_csv() const;
  /// Throws std::runtime_error on schema violations.
  static EvalReport from_json(const std::string& text);
};

/// Rounds to 6 significant digits, the precision of serialized reports.
double round_sig6(double v);

}  // namespace illumkit
