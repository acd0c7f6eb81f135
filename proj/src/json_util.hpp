#pragma once

#include <cctype>
#include <limits>
#include <string>
#include <string_view>

#include <json.hpp>

#include "exactml/error.hpp"

namespace exactml::detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline nlohmann::json parse_json(std::string_view text, const char* what) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(std::string("malformed ") + what + " document: " + e.what());
  }
}

inline void expect_format_version(const nlohmann::json& doc, const char* what) {
  if (!doc.is_object()) throw InputError(std::string(what) + " document must be an object");
  if (!doc.contains("format_version"))
    throw InputError(std::string(what) + " document lacks 'format_version'");
  const auto& v = doc.at("format_version");
  if (!v.is_number_integer() || v.get<long long>() != 1)
    throw InputError(std::string("unsupported ") + what + " format_version (expected 1)");
}

template <typename Int>
Int get_int(const nlohmann::json& v, const std::string& what) {
  if (v.is_number_integer()) {
    if (v.is_number_unsigned()) {
      auto u = v.get<unsigned long long>();
      if (u > static_cast<unsigned long long>(std::numeric_limits<Int>::max()))
        throw InputError(what + " is out of range");
      return static_cast<Int>(u);
    }
    auto s = v.get<long long>();
    if (s < static_cast<long long>(std::numeric_limits<Int>::min()) ||
        s > static_cast<long long>(std::numeric_limits<Int>::max()))
      throw InputError(what + " is out of range");
    return static_cast<Int>(s);
  }
  if (v.is_number_float()) throw InputError("non-integer value for " + what);
  throw InputError("expected an integer for " + what);
}

}  // namespace exactml::detail
