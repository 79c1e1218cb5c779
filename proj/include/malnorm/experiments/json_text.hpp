#pragma once

#include <cmath>
#include <cstdio>
#include <string>

#include <json.hpp>

namespace malnorm {

using Json = nlohmann::json;

namespace detail {

inline void dump_json(const Json& j, std::string& out) {
  switch (j.type()) {
    case Json::value_t::object: {
      // nlohmann::json objects are std::map backed, so iteration is key-sorted.
      out += '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ',';
        first = false;
        out += Json(it.key()).dump();
        out += ':';
        dump_json(it.value(), out);
      }
      out += '}';
      break;
    }
    case Json::value_t::array: {
      out += '[';
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ',';
        dump_json(j[i], out);
      }
      out += ']';
      break;
    }
    case Json::value_t::number_float: {
      const double v = j.get<double>();
      if (!std::isfinite(v)) {
        out += "null";
      } else {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out += buf;
      }
      break;
    }
    default: out += j.dump();
  }
}

}  // namespace detail

/// Compact JSON with sorted keys and every float printed with 17 significant
/// digits, so equal values always produce equal bytes.
inline std::string to_json_text(const Json& j) {
  std::string out;
  detail::dump_json(j, out);
  return out;
}

}  // namespace malnorm
