#include "safenav/nn/mlp.hpp"

#include <cmath>
#include <stdexcept>

namespace safenav::nn {

namespace {
Var apply_act(Tape& tape, Var x, Act act) {
  switch (act) {
    case Act::Identity: return x;
    case Act::Tanh: return tape.tanh_(x);
    case Act::Relu: return tape.relu(x);
    case Act::Softplus: return tape.softplus(x);
  }
  throw std::logic_error("apply_act: unknown activation");
}

double apply_act_scalar(double x, Act act) {
  switch (act) {
    case Act::Identity: return x;
    case Act::Tanh: return std::tanh(x);
    case Act::Relu: return x > 0.0 ? x : 0.0;
    case Act::Softplus:
      if (x > 30.0) return x;
      if (x < -30.0) return std::exp(x);
      return std::log1p(std::exp(x));
  }
  throw std::logic_error("apply_act_scalar: unknown activation");
}
}  // namespace

std::vector<std::size_t> Mlp::dims() const {
  std::vector<std::size_t> d;
  d.push_back(spec_.in);
  for (std::size_t h : spec_.hidden) d.push_back(h);
  d.push_back(spec_.out);
  return d;
}

void Mlp::init(ParamStore& store, Rng rng) const {
  const auto d = dims();
  for (std::size_t k = 0; k + 1 < d.size(); ++k) {
    const std::size_t rows = d[k + 1], cols = d[k];
    // Xavier-uniform; keeps tanh layers in their linear region at start.
    const double a = std::sqrt(6.0 / static_cast<double>(rows + cols));
    Vec w(rows * cols);
    for (double& x : w) x = rng.uniform(-a, a);
    Vec b(rows, 0.0);
    store.add(prefix_ + ".W" + std::to_string(k), {rows, cols}, std::move(w));
    store.add(prefix_ + ".b" + std::to_string(k), {rows}, std::move(b));
  }
}

Var Mlp::forward(Tape& tape, Var x, bool frozen) const {
  if (x.size != spec_.in) {
    throw std::invalid_argument("Mlp::forward(" + prefix_ + "): input size " + std::to_string(x.size) +
                                " != " + std::to_string(spec_.in));
  }
  const auto d = dims();
  Var h = x;
  for (std::size_t k = 0; k + 1 < d.size(); ++k) {
    const std::string wname = prefix_ + ".W" + std::to_string(k);
    const std::string bname = prefix_ + ".b" + std::to_string(k);
    Var w = frozen ? tape.constant(tape.store()->values(wname)) : tape.param(wname);
    Var b = frozen ? tape.constant(tape.store()->values(bname)) : tape.param(bname);
    h = tape.affine(h, w, b, d[k + 1], d[k]);
    const bool last = (k + 2 == d.size());
    h = apply_act(tape, h, last ? spec_.out_act : spec_.hidden_act);
  }
  return h;
}

Vec Mlp::eval(const ParamStore& store, const Vec& x) const {
  if (x.size() != spec_.in) {
    throw std::invalid_argument("Mlp::eval(" + prefix_ + "): input size mismatch");
  }
  const auto d = dims();
  Vec h = x;
  for (std::size_t k = 0; k + 1 < d.size(); ++k) {
    const Vec& w = store.values(prefix_ + ".W" + std::to_string(k));
    const Vec& b = store.values(prefix_ + ".b" + std::to_string(k));
    const std::size_t rows = d[k + 1], cols = d[k];
    Vec out(rows);
    for (std::size_t i = 0; i < rows; ++i) {
      double acc = b[i];
      const double* wrow = w.data() + i * cols;
      for (std::size_t j = 0; j < cols; ++j) acc += wrow[j] * h[j];
      out[i] = acc;
    }
    const bool last = (k + 2 == d.size());
    const Act act = last ? spec_.out_act : spec_.hidden_act;
    for (double& v : out) v = apply_act_scalar(v, act);
    h = std::move(out);
  }
  return h;
}

}  // namespace safenav::nn
