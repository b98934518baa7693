#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace nsurf::io {

// Flat key = value settings. Lines may carry '#' comments; a '[name]'
// header prefixes the following keys with "name.". Values may be quoted.
class Config {
 public:
  Config() = default;
  static Config parse(const std::string& text, const std::string& origin = "<config>");
  static Config load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  const std::map<std::string, std::string>& values() const { return values_; }

  // Typed lookups; a missing key returns the fallback, a malformed value
  // throws std::invalid_argument naming the key.
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  // Three comma or space separated numbers, optionally in brackets.
  Eigen::Vector3d get_vec3(const std::string& key, const Eigen::Vector3d& fallback) const;

  // Throws std::invalid_argument listing keys outside `known`.
  void require_known(const std::set<std::string>& known) const;

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace nsurf::io
