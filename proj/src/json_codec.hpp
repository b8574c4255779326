#pragma once

// nlohmann/json glue shared by the serializers. Not installed.

#include "corectron/diagnostics.hpp"

#include "json.hpp"

#include <cmath>
#include <limits>

namespace corectron::detail {

using Json = nlohmann::json;

// Non-finite doubles have no JSON literal; they are written as null.
inline Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }
inline double number_from(const Json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

inline Json vector_json(const Vector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(number(v(i)));
  return a;
}

inline Vector vector_from(const Json& j) {
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = number_from(j[i]);
  return v;
}

inline Json certificate_json(const diag::Certificate& c) {
  Json j;
  j["name"] = c.name;
  j["lhs"] = number(c.lhs);
  j["rhs"] = number(c.rhs);
  j["slack"] = number(c.slack);
  j["tolerance"] = number(c.tolerance);
  j["holds"] = c.holds;
  j["skipped"] = c.skipped;
  if (!c.note.empty()) j["note"] = c.note;
  return j;
}

}  // namespace corectron::detail
