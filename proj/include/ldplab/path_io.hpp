#pragma once

#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "paths.hpp"

namespace ldplab {

using Json = nlohmann::json;

inline const char* to_string(SegmentMode m) { return m == SegmentMode::constant ? "constant" : "linear"; }

inline SegmentMode segment_mode_from_string(const std::string& s) {
  if (s == "constant") return SegmentMode::constant;
  if (s == "linear") return SegmentMode::linear;
  throw std::invalid_argument("unknown segment mode '" + s + "'");
}

/// {dim, T, breakpoints[], values[][], left_values[][], modes[]}
inline Json to_json(const CadlagPath& p) {
  Json values = Json::array(), left = Json::array(), modes = Json::array();
  for (std::size_t k = 0; k < p.size(); ++k) {
    auto v = p.value_span(k);
    auto l = p.left_span(k);
    values.push_back(std::vector<double>(v.begin(), v.end()));
    left.push_back(std::vector<double>(l.begin(), l.end()));
  }
  for (auto m : p.modes()) modes.push_back(to_string(m));
  return Json{{"dim", p.dim()},        {"T", p.horizon()},     {"breakpoints", p.times()},
              {"values", values},      {"left_values", left},  {"modes", modes}};
}

inline CadlagPath path_from_json(const Json& j) {
  const auto dim = j.at("dim").get<std::size_t>();
  auto times = j.at("breakpoints").get<std::vector<double>>();
  if (times.empty() || times.back() != j.at("T").get<double>())
    throw DomainError("path JSON: last breakpoint must equal T");
  auto flatten = [dim](const Json& rows) {
    std::vector<double> out;
    for (const auto& r : rows) {
      auto v = r.get<std::vector<double>>();
      if (v.size() != dim) throw DimensionError("path JSON: row has wrong dim");
      out.insert(out.end(), v.begin(), v.end());
    }
    return out;
  };
  std::vector<SegmentMode> modes;
  for (const auto& m : j.at("modes")) modes.push_back(segment_mode_from_string(m.get<std::string>()));
  return CadlagPath(dim, std::move(times), flatten(j.at("values")), flatten(j.at("left_values")), std::move(modes));
}

/// Right-continuous samples on a uniform grid of `points` times over [0, T].
/// Columns: t, x0, x1, ...
inline void write_csv(std::ostream& os, const CadlagPath& p, std::size_t points) {
  if (points < 2) throw DomainError("write_csv: need at least two grid points");
  os << "t";
  for (std::size_t i = 0; i < p.dim(); ++i) os << ",x" << i;
  os << '\n' << std::setprecision(17);
  Vector buf(static_cast<Eigen::Index>(p.dim()));
  for (std::size_t k = 0; k < points; ++k) {
    const double t = k + 1 == points ? p.horizon() : p.horizon() * static_cast<double>(k) / static_cast<double>(points - 1);
    p.eval(t, {buf.data(), p.dim()});
    os << t;
    for (Eigen::Index i = 0; i < buf.size(); ++i) os << ',' << buf[i];
    os << '\n';
  }
}

}  // namespace ldplab
