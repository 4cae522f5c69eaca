#pragma once

#include <string>
#include <vector>

#include "safenav/core/rng.hpp"
#include "safenav/nn/tape.hpp"

namespace safenav::nn {

enum class Act { Identity, Tanh, Relu, Softplus };

struct MlpSpec {
  std::size_t in = 0;
  std::vector<std::size_t> hidden;
  std::size_t out = 0;
  Act hidden_act = Act::Tanh;
  Act out_act = Act::Identity;
};

// Dense multilayer map. Parameters live in a ParamStore under
// "<prefix>.W<k>" / "<prefix>.b<k>"; forward() fetches them through the
// tape so gradients land on the named arrays. frozen=true evaluates with
// constant leaves (target-network use).
class Mlp {
 public:
  Mlp() = default;
  Mlp(std::string prefix, MlpSpec spec) : prefix_(std::move(prefix)), spec_(std::move(spec)) {}

  void init(ParamStore& store, Rng rng) const;

  Var forward(Tape& tape, Var x, bool frozen = false) const;

  // No-graph evaluation; pure function of (store, x).
  Vec eval(const ParamStore& store, const Vec& x) const;

  const MlpSpec& spec() const { return spec_; }
  const std::string& prefix() const { return prefix_; }

  // Layer dims: in, hidden..., out
  std::vector<std::size_t> dims() const;

 private:
  std::string prefix_;
  MlpSpec spec_;
};

}  // namespace safenav::nn
