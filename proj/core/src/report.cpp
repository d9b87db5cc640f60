#include "illumkit/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace illumkit {

namespace {

using Json = nlohmann::ordered_json;

Json stats_json(const ErrorStats& s) {
  Json j;
  j["mean"] = round_sig6(s.mean);
  j["median"] = round_sig6(s.median);
  j["trimean"] = round_sig6(s.trimean);
  j["std"] = round_sig6(s.std);
  j["min"] = round_sig6(s.min);
  j["max"] = round_sig6(s.max);
  j["count"] = s.count;
  return j;
}

ErrorStats stats_from_json(const Json& j) {
  ErrorStats s;
  s.mean = j.at("mean").get<double>();
  s.median = j.at("median").get<double>();
  s.trimean = j.at("trimean").get<double>();
  s.std = j.at("std").get<double>();
  s.min = j.at("min").get<double>();
  s.max = j.at("max").get<double>();
  s.count = j.at("count").get<std::size_t>();
  return s;
}

std::string fmt6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

double round_sig6(double v) {
  if (!std::isfinite(v) || v == 0.0) return v;
  return std::stod(fmt6(v));
}

void EvalReport::aggregate() {
  std::vector<double> ang, ps, ss, de;
  for (const auto& row : per_image) {
    ang.push_back(row.angular_mean);
    ps.push_back(row.psnr);
    ss.push_back(row.ssim);
    if (row.delta_e) de.push_back(*row.delta_e);
  }
  angular = compute_stats(ang);
  psnr = compute_stats(ps);
  ssim = compute_stats(ss);
  if (!de.empty()) {
    if (de.size() != per_image.size()) throw std::runtime_error("delta_e missing for some rows");
    delta_e = compute_stats(de);
  } else {
    delta_e.reset();
  }
}

std::string EvalReport::to_json() const {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["angular_mode"] = angular_mode;
  j["count"] = per_image.size();
  j["angular"] = stats_json(angular);
  j["psnr"] = stats_json(psnr);
  j["ssim"] = stats_json(ssim);
  if (delta_e) j["delta_e"] = stats_json(*delta_e);
  Json rows = Json::array();
  for (const auto& r : per_image) {
    Json row;
    row["id"] = r.id;
    row["angular_mean"] = round_sig6(r.angular_mean);
    row["valid_fraction"] = round_sig6(r.valid_fraction);
    row["psnr"] = round_sig6(r.psnr);
    row["ssim"] = round_sig6(r.ssim);
    if (r.delta_e) row["delta_e"] = round_sig6(*r.delta_e);
    rows.push_back(std::move(row));
  }
  j["per_image"] = std::move(rows);
  return j.dump(2) + "\n";
}

std::string EvalReport::to_csv() const {
  std::ostringstream out;
  const bool with_de = delta_e.has_value();
  out << "id,angular_mean,valid_fraction,psnr,ssim" << (with_de ? ",delta_e" : "") << "\n";
  for (const auto& r : per_image) {
    out << r.id << ',' << fmt6(r.angular_mean) << ',' << fmt6(r.valid_fraction) << ',' << fmt6(r.psnr)
        << ',' << fmt6(r.ssim);
    if (with_de) out << ',' << fmt6(r.delta_e.value_or(0.0));
    out << "\n";
  }
  return out.str();
}

EvalReport EvalReport::from_json(const std::string& text) {
  EvalReport rep;
  try {
    const Json j = Json::parse(text);
    if (j.at("schema_version").get<int>() != kSchemaVersion) {
      throw std::runtime_error("unsupported report schema_version");
    }
    rep.angular_mode = j.at("angular_mode").get<std::string>();
    rep.angular = stats_from_json(j.at("angular"));
    rep.psnr = stats_from_json(j.at("psnr"));
    rep.ssim = stats_from_json(j.at("ssim"));
    if (j.contains("delta_e")) rep.delta_e = stats_from_json(j.at("delta_e"));
    for (const auto& r : j.at("per_image")) {
      ImageEvalRow row;
      row.id = r.at("id").get<std::string>();
      row.angular_mean = r.at("angular_mean").get<double>();
      row.valid_fraction = r.at("valid_fraction").get<double>();
      row.psnr = r.at("psnr").get<double>();
      row.ssim = r.at("ssim").get<double>();
      if (r.contains("delta_e")) row.delta_e = r.at("delta_e").get<double>();
      rep.per_image.push_back(std::move(row));
    }
    if (j.at("count").get<std::size_t>() != rep.per_image.size()) {
      throw std::runtime_error("report count does not match per_image rows");
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("malformed report: ") + e.what());
  }
  return rep;
}

}  // namespace illumkit
