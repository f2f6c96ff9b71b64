#pragma once

#include "hostcap/error.hpp"
#include "hostcap/network.hpp"

#include <json.hpp>

#include <string>

namespace hostcap::detail {

using json = nlohmann::json;

inline json to_json(const Vector& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

inline Vector vector_from_json(const json& arr, const std::string& what) {
  if (!arr.is_array()) throw Error(ErrorKind::ParseError, what + " must be an array");
  Vector v(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_number()) throw Error(ErrorKind::ParseError, "non-numeric entry in " + what);
    v[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
  }
  return v;
}

inline const json& field(const json& obj, const char* key) {
  if (!obj.is_object() || !obj.contains(key)) throw Error(ErrorKind::ParseError, std::string("missing field '") + key + "'");
  return obj.at(key);
}

inline json parse_json(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::ParseError, std::string(what) + ": " + e.what());
  }
}

}  // namespace hostcap::detail
