#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "slotbench/common.hpp"

namespace slotbench {

// Run configuration: `key = value` lines with dotted namespaces, `#`
// comments, unknown keys rejected. Flags override file values which
// override defaults; the effective config is printable and hashable so
// runs carry a reproducibility fingerprint.
class RunConfig {
 public:
  RunConfig();  // defaults

  static RunConfig from_file(const std::string& path);
  void load_file(const std::string& path);

  // Parse a single "key = value" or "key=value" assignment.
  void set(const std::string& key, const std::string& value);
  void set_line(const std::string& line);

  bool has(const std::string& key) const;
  const std::string& get_str(const std::string& key) const;
  std::int64_t get_int(const std::string& key) const;
  double get_double(const std::string& key) const;
  bool get_bool(const std::string& key) const;

  // Sorted `key = value` text of every key (defaults included).
  std::string effective_text() const;
  std::array<std::uint8_t, 32> hash() const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  void require_known(const std::string& key) const;
  std::map<std::string, std::string> values_;
};

}  // namespace slotbench
