#include "cbca/json_io.hpp"

#include <fstream>
#include <sstream>

namespace cbca {

nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << text;
  if (!out) throw InputError("write failed: " + path.string());
}

JsonObject::JsonObject(const nlohmann::json& j, std::string where) : j_(j), where_(std::move(where)) {
  if (!j_.is_object()) throw InputError("'" + (where_.empty() ? std::string("<root>") : where_) + "' must be an object");
}

void JsonObject::allow_only(std::initializer_list<std::string_view> keys) const {
  for (const auto& [k, v] : j_.items()) {
    bool ok = false;
    for (auto a : keys) ok = ok || a == k;
    if (!ok) throw InputError("unknown key '" + path(k) + "'");
  }
}

JsonObject JsonObject::child(std::string_view key) const {
  if (!has(key)) fail(std::string(key), "missing");
  return JsonObject(j_.at(key), path(key));
}

std::vector<JsonObject> JsonObject::children(std::string_view key) const {
  if (!has(key)) fail(std::string(key), "missing");
  const auto& arr = j_.at(key);
  if (!arr.is_array()) fail(std::string(key), "must be an array");
  std::vector<JsonObject> out;
  for (std::size_t i = 0; i < arr.size(); ++i) out.emplace_back(arr[i], path(key) + "[" + std::to_string(i) + "]");
  return out;
}

void JsonObject::fail(const std::string& key, const std::string& what) const {
  throw InputError("'" + path(key) + "' " + what);
}

}  // namespace cbca
