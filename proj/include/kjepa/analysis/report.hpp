// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace kjepa::analysis {

inline constexpr int kReportSchemaVersion = 1;

struct AnalysisReport {
  double purity_jepa = 0.0;
  /// Absent when no autoencoder checkpoint was analysed.
  std::optional<double> purity_ae;
  double frob_rel = 0.0;
  double skew_rel = 0.0;
  std::vector<double> eigen_mags;
  std::vector<double> centroid_errors;
  double centroid_mean = 0.0;
  double invariance_err = 0.0;
  /// The same quantity for the encoder at its initial (untrained) weights.
  double invariance_err_untrained = 0.0;
  double decomposition_gap = 0.0;
};

/// Throws ContractError on non-finite values or a wrong centroid count.
void validate(const AnalysisReport& r);

/// Flat `key=value` text; lists are comma separated and an absent purity_ae reads `absent`.
std::string to_text(const AnalysisReport& r);
/// Throws ParseError carrying the offending line number.
AnalysisReport parse_text(const std::string& text);

std::string to_json(const AnalysisReport& r);
/// Throws ParseError on malformed JSON, missing fields or a foreign schema version.
AnalysisReport parse_json(const std::string& text);

void write_report(const AnalysisReport& r, const std::filesystem::path& text_path,
                  const std::filesystem::path& json_path);
AnalysisReport read_report(const std::filesystem::path& path);

struct CriterionLine {
  std::string name;
  bool pass = false;
  std::string detail;
};

/// Evaluates the report-level acceptance thresholds (clustering, predictor, centroids,
/// spectrum, invariance, decomposition).
std::vector<CriterionLine> check_thresholds(const AnalysisReport& r);

/// Paper-comparison table followed by the threshold verdicts.
void print_summary(const AnalysisReport& r, std::ostream& os);

}  // namespace kjepa::analysis
