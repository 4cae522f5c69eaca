#include "safenav/nn/param_store.hpp"

#include <cstdint>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <utility>

namespace safenav::nn {

namespace {
constexpr char kMagic[8] = {'S', 'N', 'C', 'K', 'P', 'T', '0', '\n'};

template <typename T>
void write_pod(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  return v;
}
}  // namespace

void ParamStore::add(const std::string& name, std::vector<std::size_t> shape, Vec values) {
  if (entries_.count(name) > 0) {
    throw std::invalid_argument("ParamStore: duplicate name " + name);
  }
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  if (n != values.size()) {
    throw std::invalid_argument("ParamStore: shape/value mismatch for " + name);
  }
  entries_.emplace(name, Entry{std::move(shape), std::move(values)});
}

Vec& ParamStore::values(const std::string& name) {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw std::out_of_range("ParamStore: unknown name " + name);
  return it->second.values;
}

const Vec& ParamStore::values(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw std::out_of_range("ParamStore: unknown name " + name);
  return it->second.values;
}

const std::vector<std::size_t>& ParamStore::shape(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw std::out_of_range("ParamStore: unknown name " + name);
  return it->second.shape;
}

std::vector<std::string> ParamStore::names() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& [name, _] : entries_) out.push_back(name);
  return out;
}

std::vector<std::string> ParamStore::names_with_prefix(const std::string& prefix) const {
  std::vector<std::string> out;
  for (const auto& [name, _] : entries_) {
    if (name.rfind(prefix, 0) == 0) out.push_back(name);
  }
  return out;
}

void ParamStore::save(const std::string& path) const {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("ParamStore::save: cannot open " + path);
  os.write(kMagic, sizeof(kMagic));
  write_pod<std::uint32_t>(os, kFormatVersion);
  write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(entries_.size()));
  for (const auto& [name, e] : entries_) {
    write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(e.shape.size()));
    for (std::size_t d : e.shape) write_pod<std::uint64_t>(os, d);
  }
  for (const auto& [name, e] : entries_) {
    os.write(reinterpret_cast<const char*>(e.values.data()),
             static_cast<std::streamsize>(e.values.size() * sizeof(double)));
  }
  if (!os) throw std::runtime_error("ParamStore::save: write failed for " + path);
}

ParamStore ParamStore::load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("ParamStore::load: cannot open " + path);
  char magic[8];
  is.read(magic, sizeof(magic));
  for (std::size_t i = 0; i < sizeof(magic); ++i) {
    if (magic[i] != kMagic[i]) throw std::runtime_error("ParamStore::load: bad magic in " + path);
  }
  const auto version = read_pod<std::uint32_t>(is);
  if (version != kFormatVersion) {
    throw std::runtime_error("ParamStore::load: unsupported format version " + std::to_string(version));
  }
  const auto count = read_pod<std::uint32_t>(is);
  std::vector<std::pair<std::string, std::vector<std::size_t>>> manifest;
  manifest.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto name_len = read_pod<std::uint32_t>(is);
    std::string name(name_len, '\0');
    is.read(name.data(), name_len);
    const auto ndim = read_pod<std::uint32_t>(is);
    std::vector<std::size_t> shape(ndim);
    for (auto& d : shape) d = static_cast<std::size_t>(read_pod<std::uint64_t>(is));
    manifest.emplace_back(std::move(name), std::move(shape));
  }
  ParamStore store;
  for (auto& [name, shape] : manifest) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    Vec values(n);
    is.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(n * sizeof(double)));
    store.add(name, std::move(shape), std::move(values));
  }
  if (!is) throw std::runtime_error("ParamStore::load: truncated file " + path);
  return store;
}

void polyak_update(ParamStore& store, const std::string& online_prefix,
                   const std::string& target_prefix, double tau) {
  if (tau <= 0.0 || tau > 1.0) throw std::invalid_argument("polyak_update: tau outside (0, 1]");
  for (const std::string& name : store.names_with_prefix(online_prefix)) {
    const std::string target_name = target_prefix + name.substr(online_prefix.size());
    const Vec& online = store.values(name);
    Vec& target = store.values(target_name);
    if (online.size() != target.size()) {
      throw std::invalid_argument("polyak_update: shape mismatch for " + name);
    }
    for (std::size_t i = 0; i < online.size(); ++i) {
      // Incremental form: exact no-op when target already equals online,
      // exact copy at tau = 1.
      target[i] = tau == 1.0 ? online[i] : target[i] + tau * (online[i] - target[i]);
    }
  }
}

void clone_params(ParamStore& store, const std::string& online_prefix,
                  const std::string& target_prefix) {
  for (const std::string& name : store.names_with_prefix(online_prefix)) {
    const std::string target_name = target_prefix + name.substr(online_prefix.size());
    if (store.has(target_name)) {
      store.values(target_name) = store.values(name);
    } else {
      store.add(target_name, store.shape(name), store.values(name));
    }
  }
}

}  // namespace safenav::nn
