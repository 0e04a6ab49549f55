// SPDX-License-Identifier: Apache-2.0
#include "kjepa/analysis/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "kjepa/analysis/thresholds.hpp"
#include "kjepa/errors.hpp"
#include "kjepa/synthgen/regimes.hpp"

namespace kjepa::analysis {

namespace fs = std::filesystem;
namespace th = thresholds;

namespace {

const std::vector<std::string>& field_names() {
  static const std::vector<std::string> names{
      "schema_version",  "purity_jepa",    "purity_ae",      "frob_rel",
      "skew_rel",        "eigen_mags",     "centroid_errors", "centroid_mean",
      "invariance_err",  "invariance_err_untrained", "decomposition_gap"};
  return names;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string list(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + num(v[i]);
  return s;
}

double parse_num(std::string_view s, int line) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty())
    throw ParseError("not a number: '" + std::string(s) + "'", line);
  return v;
}

std::vector<double> parse_list(std::string_view s, int line) {
  std::vector<double> out;
  if (s.empty()) return out;
  for (std::size_t pos; (pos = s.find(',')) != std::string_view::npos;) {
    out.push_back(parse_num(s.substr(0, pos), line));
    s.remove_prefix(pos + 1);
  }
  out.push_back(parse_num(s, line));
  return out;
}

}  // namespace

void validate(const AnalysisReport& r) {
  auto finite = [](double v, const char* what) {
    if (!std::isfinite(v)) throw ContractError(std::string("report: ") + what + " is not finite");
  };
  finite(r.purity_jepa, "purity_jepa");
  if (r.purity_ae) finite(*r.purity_ae, "purity_ae");
  finite(r.frob_rel, "frob_rel");
  finite(r.skew_rel, "skew_rel");
  finite(r.centroid_mean, "centroid_mean");
  finite(r.invariance_err, "invariance_err");
  finite(r.invariance_err_untrained, "invariance_err_untrained");
  finite(r.decomposition_gap, "decomposition_gap");
  for (double v : r.eigen_mags) finite(v, "eigen_mags");
  for (double v : r.centroid_errors) finite(v, "centroid_errors");
  if (r.centroid_errors.size() != static_cast<std::size_t>(synth::kNumRegimes))
    throw ContractError("report: expected " + std::to_string(synth::kNumRegimes) +
                        " centroid errors, got " + std::to_string(r.centroid_errors.size()));
  if (r.eigen_mags.empty()) throw ContractError("report: eigen_mags is empty");
}

std::string to_text(const AnalysisReport& r) {
  validate(r);
  std::ostringstream os;
  os << "schema_version=" << kReportSchemaVersion << '\n'
     << "purity_jepa=" << num(r.purity_jepa) << '\n'
     << "purity_ae=" << (r.purity_ae ? num(*r.purity_ae) : "absent") << '\n'
     << "frob_rel=" << num(r.frob_rel) << '\n'
     << "skew_rel=" << num(r.skew_rel) << '\n'
     << "eigen_mags=" << list(r.eigen_mags) << '\n'
     << "centroid_errors=" << list(r.centroid_errors) << '\n'
     << "centroid_mean=" << num(r.centroid_mean) << '\n'
     << "invariance_err=" << num(r.invariance_err) << '\n'
     << "invariance_err_untrained=" << num(r.invariance_err_untrained) << '\n'
     << "decomposition_gap=" << num(r.decomposition_gap) << '\n';
  return os.str();
}

AnalysisReport parse_text(const std::string& text) {
  std::map<std::string, std::pair<std::string, int>> kv;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected key=value", lineno);
    std::string key = line.substr(0, eq);
    if (std::find(field_names().begin(), field_names().end(), key) == field_names().end())
      throw ParseError("unknown key '" + key + "'", lineno);
    const std::string value = line.substr(eq + 1);
    if (key == "eigen_mags" || key == "centroid_errors")
      parse_list(value, lineno);
    else if (key != "schema_version" && !(key == "purity_ae" && value == "absent"))
      parse_num(value, lineno);
    if (!kv.emplace(key, std::pair{value, lineno}).second)
      throw ParseError("duplicate key '" + key + "'", lineno);
  }
  for (const auto& name : field_names())
    if (!kv.count(name)) throw ParseError("missing key '" + name + "'", lineno + 1);

  auto get = [&](const std::string& k) { return kv.at(k); };
  auto scalar = [&](const std::string& k) {
    const auto& [v, l] = kv.at(k);
    return parse_num(v, l);
  };
  const auto [ver, ver_line] = get("schema_version");
  if (ver != std::to_string(kReportSchemaVersion))
    throw ParseError("unsupported schema_version " + ver, ver_line);

  AnalysisReport r;
  r.purity_jepa = scalar("purity_jepa");
  if (get("purity_ae").first != "absent") r.purity_ae = scalar("purity_ae");
  r.frob_rel = scalar("frob_rel");
  r.skew_rel = scalar("skew_rel");
  r.eigen_mags = parse_list(get("eigen_mags").first, get("eigen_mags").second);
  r.centroid_errors = parse_list(get("centroid_errors").first, get("centroid_errors").second);
  r.centroid_mean = scalar("centroid_mean");
  r.invariance_err = scalar("invariance_err");
  r.invariance_err_untrained = scalar("invariance_err_untrained");
  r.decomposition_gap = scalar("decomposition_gap");
  try {
    validate(r);
  } catch (const ContractError& e) {
    throw ParseError(e.what(), lineno);
  }
  return r;
}

std::string to_json(const AnalysisReport& r) {
  validate(r);
  nlohmann::ordered_json j;
  j["schema_version"] = kReportSchemaVersion;
  j["purity_jepa"] = r.purity_jepa;
  j["purity_ae"] = r.purity_ae ? nlohmann::ordered_json(*r.purity_ae) : nlohmann::ordered_json();
  j["frob_rel"] = r.frob_rel;
  j["skew_rel"] = r.skew_rel;
  j["eigen_mags"] = r.eigen_mags;
  j["centroid_errors"] = r.centroid_errors;
  j["centroid_mean"] = r.centroid_mean;
  j["invariance_err"] = r.invariance_err;
  j["invariance_err_untrained"] = r.invariance_err_untrained;
  j["decomposition_gap"] = r.decomposition_gap;
  return j.dump(2) + "\n";
}

AnalysisReport parse_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.at("schema_version").get<int>() != kReportSchemaVersion)
      throw ParseError("report json: unsupported schema_version", 1);
    AnalysisReport r;
    r.purity_jepa = j.at("purity_jepa").get<double>();
    if (!j.at("purity_ae").is_null()) r.purity_ae = j.at("purity_ae").get<double>();
    r.frob_rel = j.at("frob_rel").get<double>();
    r.skew_rel = j.at("skew_rel").get<double>();
    r.eigen_mags = j.at("eigen_mags").get<std::vector<double>>();
    r.centroid_errors = j.at("centroid_errors").get<std::vector<double>>();
    r.centroid_mean = j.at("centroid_mean").get<double>();
    r.invariance_err = j.at("invariance_err").get<double>();
    r.invariance_err_untrained = j.at("invariance_err_untrained").get<double>();
    r.decomposition_gap = j.at("decomposition_gap").get<double>();
    validate(r);
    return r;
  } catch (const nlohmann::json::parse_error& e) {
    const auto end = text.begin() + static_cast<std::ptrdiff_t>(std::min(e.byte, text.size()));
    throw ParseError(std::string("report json: ") + e.what(),
                     1 + static_cast<int>(std::count(text.begin(), end, '\n')));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("report json: ") + e.what(), 1);
  }
}

void write_report(const AnalysisReport& r, const fs::path& text_path, const fs::path& json_path) {
  for (const auto& [path, body] : {std::pair{text_path, to_text(r)}, {json_path, to_json(r)}}) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::trunc);
    if (!os || !(os << body)) throw IoError("cannot write " + path.string());
  }
}

AnalysisReport read_report(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return path.extension() == ".json" ? parse_json(ss.str()) : parse_text(ss.str());
}

std::vector<CriterionLine> check_thresholds(const AnalysisReport& r) {
  std::vector<CriterionLine> out;
  char buf[200];

  const double gap = r.purity_ae ? r.purity_jepa - *r.purity_ae : std::nan("");
  std::snprintf(buf, sizeof buf, "purity_jepa=%.4f (>= %.2f), gap=%s (>= %.2f)", r.purity_jepa,
                th::kPurityJepaMin, r.purity_ae ? num(gap).substr(0, 7).c_str() : "absent",
                th::kPurityGapMin);
  out.push_back({"clustering", r.purity_jepa >= th::kPurityJepaMin && r.purity_ae &&
                                   gap >= th::kPurityGapMin,
                 buf});

  std::snprintf(buf, sizeof buf, "frob_rel=%.4f skew_rel=%.4f (<= %.2f)", r.frob_rel, r.skew_rel,
                th::kFrobRelMax);
  out.push_back(
      {"predictor", r.frob_rel <= th::kFrobRelMax && r.skew_rel <= th::kSkewRelMax, buf});

  std::snprintf(buf, sizeof buf, "centroid_mean=%.4f (<= %.2f)", r.centroid_mean,
                th::kCentroidMeanMax);
  out.push_back({"centroids", r.centroid_mean <= th::kCentroidMeanMax, buf});

  int near = 0;
  for (double m : r.eigen_mags) near += m >= th::kEigenBandLo && m <= th::kEigenBandHi;
  std::snprintf(buf, sizeof buf, "%d of %zu magnitudes in [%.2f, %.2f] (>= %d)", near,
                r.eigen_mags.size(), th::kEigenBandLo, th::kEigenBandHi, th::kEigenNearOneMin);
  out.push_back({"spectrum", near >= th::kEigenNearOneMin, buf});

  std::snprintf(buf, sizeof buf, "trained=%.4f (<= %.2f), untrained=%.4f (>= %.0fx trained)",
                r.invariance_err, th::kInvarianceMax, r.invariance_err_untrained,
                th::kInvarianceUntrainedRatio);
  out.push_back({"invariance",
                 r.invariance_err <= th::kInvarianceMax &&
                     r.invariance_err_untrained >= th::kInvarianceUntrainedRatio * r.invariance_err,
                 buf});

  std::snprintf(buf, sizeof buf, "gap=%.3g (<= %.0e)", r.decomposition_gap,
                th::kDecompositionGapMax);
  out.push_back({"decomposition", r.decomposition_gap <= th::kDecompositionGapMax, buf});
  return out;
}

void print_summary(const AnalysisReport& r, std::ostream& os) {
  auto pct = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%7.2f%%", 100.0 * v);
    return std::string(buf);
  };
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-22s %12s %22s\n", "metric", "this run", "paper (full scale)");
  os << buf;
  auto row = [&](const char* name, std::optional<double> v, double paper) {
    std::snprintf(buf, sizeof buf, "%-22s %12s %22s\n", name, v ? pct(*v).c_str() : "absent",
                  pct(paper).c_str());
    os << buf;
  };
  row("purity_jepa", r.purity_jepa, th::kPaperPurityJepa);
  row("purity_ae", r.purity_ae, th::kPaperPurityAe);
  row("frob_rel", r.frob_rel, th::kPaperFrobRel);
  row("skew_rel", r.skew_rel, th::kPaperSkewRel);
  row("centroid_mean", r.centroid_mean, th::kPaperCentroidMean);
  std::snprintf(buf, sizeof buf, "%-22s %12.4g %22s\n", "invariance_err", r.invariance_err, "-");
  os << buf;
  std::snprintf(buf, sizeof buf, "%-22s %12.3g %22s\n", "decomposition_gap", r.decomposition_gap,
                "-");
  os << buf << '\n';
  for (const auto& c : check_thresholds(r))
    os << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
}

}  // namespace kjepa::analysis
