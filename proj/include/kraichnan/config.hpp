// SPDX-License-Identifier: Apache-2.0
//
// Flat key=value experiment configuration: '#' comments, dotted section
// prefixes (model.alpha=0.5), every key registered with a typed default.
// Unknown keys, duplicates, and type mismatches are reported with line
// numbers.
#ifndef KRAICHNAN_CONFIG_HPP
#define KRAICHNAN_CONFIG_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "kraichnan/dispersion_mc.hpp"
#include "kraichnan/kernels.hpp"
#include "kraichnan/radial_pde.hpp"

namespace kraichnan {

class ExperimentConfig {
 public:
  ExperimentConfig();  // all defaults

  static ExperimentConfig from_file(const std::string& path);
  static ExperimentConfig from_text(const std::string& text, const std::string& origin = "<text>");

  // CLI-style override "key=value"; overrides replace earlier values.
  void set_override(const std::string& assignment);

  const std::string& get(const std::string& key) const;
  double get_double(const std::string& key) const;
  long get_long(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;
  std::vector<double> get_list(const std::string& key) const;

  std::string experiment() const { return get("experiment"); }

  ModelParams model_params() const;
  PdeConfig pde_config() const;  // observable_times filled by the runner
  McConfig mc_config() const;

  // canonical "key=value\n" dump of every resolved key, sorted
  std::string resolved_text() const;
  // FNV-1a 64 over the resolved text minus result-neutral keys (out, threads)
  std::uint64_t config_hash() const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  void set_checked(const std::string& key, const std::string& value, const std::string& where,
                   int line);
  std::map<std::string, std::string> values_;
};

std::uint64_t fnv1a64(const std::string& text);

}  // namespace kraichnan

#endif
