#pragma once

#include <filesystem>
#include <initializer_list>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include <json.hpp>

#include "cbca/error.hpp"

namespace cbca {

// Parses a whole file; malformed JSON becomes InputError.
nlohmann::json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

// Typed, strict access to one JSON object. Every failure is an InputError naming the key path.
class JsonObject {
 public:
  JsonObject(const nlohmann::json& j, std::string where);

  // Any key outside `keys` is an error.
  void allow_only(std::initializer_list<std::string_view> keys) const;
  bool has(std::string_view key) const { return j_.contains(key); }
  JsonObject child(std::string_view key) const;
  // Elements of an array of objects.
  std::vector<JsonObject> children(std::string_view key) const;

  template <typename T>
  T get(std::string_view key) const {
    if (!has(key)) fail(std::string(key), "missing");
    return convert<T>(j_.at(key), path(key));
  }

  // Leaves `out` untouched when the key is absent.
  template <typename T>
  void maybe(std::string_view key, T& out) const {
    if (has(key)) out = convert<T>(j_.at(key), path(key));
  }

  const std::string& where() const { return where_; }

 private:
  std::string path(std::string_view key) const { return where_.empty() ? std::string(key) : where_ + "." + std::string(key); }
  [[noreturn]] void fail(const std::string& key, const std::string& what) const;

  template <typename T>
  static T convert(const nlohmann::json& v, const std::string& at) {
    auto bad = [&](const char* want) { return InputError("'" + at + "' must be " + want); };
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw bad("a boolean");
      return v.get<bool>();
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw bad("an integer");
      if constexpr (std::is_unsigned_v<T>) {
        if (v.is_number_unsigned()) return v.get<T>();
        if (v.get<long long>() < 0) throw bad("a nonnegative integer");
      }
      return v.get<T>();
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw bad("a number");
      return v.get<T>();
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw bad("a string");
      return v.get<std::string>();
    } else {
      if (!v.is_array()) throw bad("an array");
      T out;
      for (std::size_t i = 0; i < v.size(); ++i)
        out.push_back(convert<typename T::value_type>(v[i], at + "[" + std::to_string(i) + "]"));
      return out;
    }
  }

  const nlohmann::json& j_;
  std::string where_;
};

}  // namespace cbca
