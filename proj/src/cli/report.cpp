#include <cmath>
#include <cstdio>
#include <string>

#include <openssl/evp.h>

#include "symfact/cli.hpp"

namespace symfact::cli {

namespace {

std::string format_float(double x) {
  if (!std::isfinite(x)) return "null";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string scalar(const Json& j) {
  switch (j.type()) {
    case Json::value_t::number_float: return format_float(j.get<double>());
    case Json::value_t::string: return j.dump();  // quoted and escaped
    default: return j.dump();
  }
}

bool is_scalar_array(const Json& j) {
  for (const auto& e : j)
    if (e.is_object() || e.is_array()) return false;
  return true;
}

// Arrays of scalars or of scalar arrays (a matrix row of [re, im] pairs)
// print on one line.
bool is_leaf_array(const Json& j) {
  for (const auto& e : j)
    if (e.is_object() || (e.is_array() && !is_scalar_array(e))) return false;
  return true;
}

std::string compact(const Json& j) {
  if (j.is_array()) {
    std::string s = "[";
    for (std::size_t i = 0; i < j.size(); ++i) {
      if (i > 0) s += ", ";
      s += compact(j[i]);
    }
    return s + "]";
  }
  return scalar(j);
}

void write(const Json& j, int indent, std::string& out) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
  if (j.is_object()) {
    if (j.empty()) {
      out += "{}";
      return;
    }
    out += "{\n";
    bool first = true;
    for (auto it = j.begin(); it != j.end(); ++it) {  // nlohmann::json keeps keys sorted
      if (!first) out += ",\n";
      first = false;
      out += inner + Json(it.key()).dump() + ": ";
      write(it.value(), indent + 1, out);
    }
    out += "\n" + pad + "}";
  } else if (j.is_array()) {
    if (j.empty() || is_leaf_array(j)) {
      // Leaf arrays, e.g. complex [re, im] pairs and matrix rows, stay on one line.
      out += "[";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i > 0) out += ", ";
        out += compact(j[i]);
      }
      out += "]";
      return;
    }
    out += "[\n";
    for (std::size_t i = 0; i < j.size(); ++i) {
      if (i > 0) out += ",\n";
      out += inner;
      write(j[i], indent + 1, out);
    }
    out += "\n" + pad + "]";
  } else {
    out += scalar(j);
  }
}

void flatten(const Json& j, const std::string& path, std::string& out) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it)
      flatten(it.value(), path.empty() ? it.key() : path + "." + it.key(), out);
    return;
  }
  if (j.is_array() && !is_leaf_array(j)) {
    bool nested_objects = false;
    for (const auto& e : j) nested_objects = nested_objects || e.is_object();
    if (nested_objects) {
      for (std::size_t i = 0; i < j.size(); ++i) flatten(j[i], path + "[" + std::to_string(i) + "]", out);
      return;
    }
  }
  out += path + ": " + (j.is_string() ? j.get<std::string>() : compact(j)) + "\n";
}

}  // namespace

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("sha256: digest computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xF];
  }
  return out;
}

std::string dump_json(const Json& j) {
  std::string out;
  write(j, 0, out);
  out += "\n";
  return out;
}

std::string dump_text(const Json& j) {
  std::string out;
  flatten(j, "", out);
  return out;
}

Json to_json(Complex z) { return Json::array({z.real(), z.imag()}); }

Json to_json(const Matrix& m) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(to_json(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace symfact::cli
