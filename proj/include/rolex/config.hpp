#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace rolex {

// "key = value" lines; '#' starts a comment; blank lines ignored.
// Keys keep duplicates' last value. Used by campaign configs and the
// kernel corpus manifest.
class KeyValueConfig {
 public:
  static KeyValueConfig parseText(const std::string& text);
  static KeyValueConfig parseFile(const std::string& path);  // throws on I/O error

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  std::string get(const std::string& key, const std::string& fallback = "") const;
  int64_t getInt(const std::string& key, int64_t fallback) const;
  double getDouble(const std::string& key, double fallback) const;
  std::vector<std::string> getList(const std::string& key) const;  // comma-separated

  const std::map<std::string, std::string>& entries() const { return values_; }
  void set(const std::string& key, const std::string& value) { values_[key] = value; }

 private:
  std::map<std::string, std::string> values_;
};

std::vector<std::string> splitString(const std::string& s, char sep);

}  // namespace rolex
