#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "safenav/core/types.hpp"

namespace safenav::nn {

// Named parameter arrays. Names are unique; shapes are fixed at creation.
// Serialized as a manifest (names, shapes, format version) followed by the
// flat little-endian float64 arrays, in name order.
class ParamStore {
 public:
  static constexpr std::uint32_t kFormatVersion = 1;

  void add(const std::string& name, std::vector<std::size_t> shape, Vec values);
  bool has(const std::string& name) const { return entries_.count(name) > 0; }

  Vec& values(const std::string& name);
  const Vec& values(const std::string& name) const;
  const std::vector<std::size_t>& shape(const std::string& name) const;

  std::vector<std::string> names() const;
  std::vector<std::string> names_with_prefix(const std::string& prefix) const;
  std::size_t size() const { return entries_.size(); }

  void save(const std::string& path) const;
  static ParamStore load(const std::string& path);

 private:
  struct Entry {
    std::vector<std::size_t> shape;
    Vec values;
  };
  std::map<std::string, Entry> entries_;
};

// target <- tau * online + (1 - tau) * target, for every "prefix_online.*"
// array paired with "prefix_target.*". Shapes must agree.
void polyak_update(ParamStore& store, const std::string& online_prefix,
                   const std::string& target_prefix, double tau);

// Copies every "online_prefix.*" array into "target_prefix.*", creating the
// target entries if absent.
void clone_params(ParamStore& store, const std::string& online_prefix,
                  const std::string& target_prefix);

}  // namespace safenav::nn
