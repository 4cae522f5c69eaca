#include "safenav/nn/tape.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace safenav::nn {

Var Tape::make(Vec value, std::function<void(Tape&, int)> back) {
  Node n;
  n.value = std::move(value);
  n.grad.assign(n.value.size(), 0.0);
  n.back = std::move(back);
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1, nodes_.back().value.size()};
}

void Tape::check(Var v) const {
  if (v.id < 0 || v.id >= static_cast<int>(nodes_.size())) {
    throw std::invalid_argument("Tape: variable from another tape or uninitialized");
  }
}

void Tape::check_same(Var a, Var b) {
  if (a.size != b.size) {
    throw std::invalid_argument("Tape: size mismatch " + std::to_string(a.size) + " vs " +
                                std::to_string(b.size));
  }
}

Var Tape::constant(Vec v) { return make(std::move(v), {}); }

Var Tape::param(const std::string& name) {
  if (params_ == nullptr) {
    throw std::logic_error("Tape: no ParamStore bound");
  }
  auto it = param_vars_.find(name);
  if (it != param_vars_.end()) return it->second;
  Var v = make(params_->values(name), {});
  param_vars_.emplace(name, v);
  return v;
}

Var Tape::affine(Var x, Var w, Var b, std::size_t rows, std::size_t cols) {
  check(x);
  check(w);
  check(b);
  if (x.size != cols || w.size != rows * cols || b.size != rows) {
    throw std::invalid_argument("affine: shape mismatch");
  }
  const Vec& xv = nodes_[x.id].value;
  const Vec& wv = nodes_[w.id].value;
  const Vec& bv = nodes_[b.id].value;
  Vec out(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    double acc = bv[i];
    const double* wrow = wv.data() + i * cols;
    for (std::size_t j = 0; j < cols; ++j) acc += wrow[j] * xv[j];
    out[i] = acc;
  }
  const int xi = x.id, wi = w.id, bi = b.id;
  return make(std::move(out), [xi, wi, bi, rows, cols](Tape& t, int self) {
    const Vec& g = t.nodes_[self].grad;
    const Vec& xv = t.nodes_[xi].value;
    const Vec& wv = t.nodes_[wi].value;
    Vec& xg = t.nodes_[xi].grad;
    Vec& wg = t.nodes_[wi].grad;
    Vec& bg = t.nodes_[bi].grad;
    for (std::size_t i = 0; i < rows; ++i) {
      const double gi = g[i];
      if (gi == 0.0) continue;
      bg[i] += gi;
      const double* wrow = wv.data() + i * cols;
      double* wgrow = wg.data() + i * cols;
      for (std::size_t j = 0; j < cols; ++j) {
        wgrow[j] += gi * xv[j];
        xg[j] += gi * wrow[j];
      }
    }
  });
}

Var Tape::add(Var a, Var b) {
  check(a);
  check(b);
  check_same(a, b);
  const Vec& av = nodes_[a.id].value;
  const Vec& bv = nodes_[b.id].value;
  Vec out(a.size);
  for (std::size_t i = 0; i < a.size; ++i) out[i] = av[i] + bv[i];
  const int ai = a.id, bi = b.id;
  return make(std::move(out), [ai, bi](Tape& t, int self) {
    const Vec& g = t.nodes_[self].grad;
    for (std::size_t i = 0; i < g.size(); ++i) {
      t.nodes_[ai].grad[i] += g[i];
      t.nodes_[bi].grad[i] += g[i];
    }
  });
}

Var Tape::sub(Var a, Var b) {
  check(a);
  check(b);
  check_same(a, b);
  const Vec& av = nodes_[a.id].value;
  const Vec& bv = nodes_[b.id].value;
  Vec out(a.size);
  for (std::size_t i = 0; i < a.size; ++i) out[i] = av[i] - bv[i];
  const int ai = a.id, bi = b.id;
  return make(std::move(out), [ai, bi](Tape& t, int self) {
    const Vec& g = t.nodes_[self].grad;
    for (std::size_t i = 0; i < g.size(); ++i) {
      t.nodes_[ai].grad[i] += g[i];
      t.nodes_[bi].grad[i] -= g[i];
    }
  });
}

Var Tape::mul(Var a, Var b) {
  check(a);
  check(b);
  check_same(a, b);
  const Vec& av = nodes_[a.id].value;
  const Vec& bv = nodes_[b.id].value;
  Vec out(a.size);
  for (std::size_t i = 0; i < a.size; ++i) out[i] = av[i] * bv[i];
  const int ai = a.id, bi = b.id;
  return make(std::move(out), [ai, bi](Tape& t, int self) {
    const Vec& g = t.nodes_[self].grad;
    const Vec& av = t.nodes_[ai].value;
    const Vec& bv = t.nodes_[bi].value;
    for (std::size_t i = 0; i < g.size(); ++i) {
      t.nodes_[ai].grad[i] += g[i] * bv[i];
      t.nodes_[bi].grad[i] += g[i] * av[i];
    }
  });
}

Var Tape::div(Var a, Var b) {
  check(a);
  check(b);
  check_same(a, b);
  const Vec& av = nodes_[a.id].value;
  const Vec& bv = nodes_[b.id].value;
  Vec out(a.size);
  for (std::size_t i = 0; i < a.size; ++i) out[i] = av[i] / bv[i];
  const int ai = a.id, bi = b.id;
  return make(std::move(out), [ai, bi](Tape& t, int self) {
    const Vec& g = t.nodes_[self].grad;
    const Vec& av = t.nodes_[ai].value;
    const Vec& bv = t.nodes_[bi].value;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double inv = 1.0 / bv[i];
      t.nodes_[ai].grad[i] += g[i] * inv;
      t.nodes_[bi].grad[i] -= g[i] * av[i] * inv * inv;
    }
  });
}

Var Tape::min2(Var a, Var b) {
  check(a);
  check(b);
  check_same(a, b);
  const Vec& av = nodes_[a.id].value;
  const Vec& bv = nodes_[b.id].value;
  Vec out(a.size);
  for (std::size_t i = 0; i < a.size; ++i) out[i] = std::min(av[i], bv[i]);
  const int ai = a.id, bi = b.id;
  return make(std::move(out), [ai, bi](Tape& t, int self) {
    const Vec& g = t.nodes_[self].grad;
    const Vec& av = t.nodes_[ai].value;
    const Vec& bv = t.nodes_[bi].value;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (av[i] <= bv[i]) {
        t.nodes_[ai].grad[i] += g[i];
      } else {
        t.nodes_[bi].grad[i] += g[i];
      }
    }
  });
}

Var Tape::scale(Var a, double c) {
  check(a);
  const Vec& av = nodes_[a.id].value;
  Vec out(a.size);
  for (std::size_t i = 0; i < a.size; ++i) out[i] = c * av[i];
  const int ai = a.id;
  return make(std::move(out), [ai, c](Tape& t, int self) {
    const Vec& g = t.nodes_[self].grad;
    for (std::size_t i = 0; i < g.size(); ++i) t.nodes_[ai].grad[i] += c * g[i];
  });
}

Var Tape::offset(Var a, double c) {
  check(a);
  const Vec& av = nodes_[a.id].value;
  Vec out(a.size);
  for (std::size_t i = 0; i < a.size; ++i) out[i] = av[i] + c;
  const int ai = a.id;
  return make(std::move(out), [ai](Tape& t, int self) {
    const Vec& g = t.nodes_[self].grad;
    for (std::size_t i = 0; i < g.size(); ++i) t.nodes_[ai].grad[i] += g[i];
  });
}

Var Tape::tanh_(Var a) {
  check(a);
  const Vec& av = nodes_[a.id].value;
  Vec out(a.size);
  for (std::size_t i = 0; i < a.size; ++i) out[i] = std::tanh(av[i]);
  const int ai = a.id;
  return make(std::move(out), [ai](Tape& t, int self) {
    const Vec& g = t.nodes_[self].grad;
    const Vec& y = t.nodes_[self].value;
    for (std::size_t i = 0; i < g.size(); ++i) {
      t.nodes_[ai].grad[i] += g[i] * (1.0 - y[i] * y[i]);
    }
  });
}

Var Tape::sigmoid(Var a) {
  check(a);
  const Vec& av = nodes_[a.id].value;
  Vec out(a.size);
  for (std::size_t i = 0; i < a.size; ++i) {
    const double x = av[i];
    out[i] = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
  }
  const int ai = a.id;
  return make(std::move(out), [ai](Tape& t, int self) {
    const Vec& g = t.nodes_[self].grad;
    const Vec& y = t.nodes_[self].value;
    for (std::size_t i = 0; i < g.size(); ++i) {
      t.nodes_[ai].grad[i] += g[i] * y[i] * (1.0 - y[i]);
    }
  });
}

Var Tape::clamp_min(Var a, double floor) {
  check(a);
  const Vec& av = nodes_[a.id].value;
  Vec out(a.size);
  for (std::size_t i = 0; i < a.size; ++i) out[i] = std::max(av[i], floor);
  const int ai = a.id;
  return make(std::move(out), [ai, floor](Tape& t, int self) {
    const Vec& g = t.nodes_[self].grad;
    const Vec& av = t.nodes_[ai].value;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (av[i] > floor) t.nodes_[ai].grad[i] += g[i];
    }
  });
}

Var Tape::relu(Var a) {
  check(a);
  const Vec& av = nodes_[a.id].value;
  Vec out(a.size);
  for (std::size_t i = 0; i < a.size; ++i) out[i] = av[i] > 0.0 ? av[i] : 0.0;
  const int ai = a.id;
  return make(std::move(out), [ai](Tape& t, int self) {
    const Vec& g = t.nodes_[self].grad;
    const Vec& av = t.nodes_[ai].value;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (av[i] > 0.0) t.nodes_[ai].grad[i] += g[i];
    }
  });
}

namespace {
inline double softplus_fn(double x) {
  // log(1 + e^x), overflow-safe
  if (x > 30.0) return x;
  if (x < -30.0) return std::exp(x);
  return std::log1p(std::exp(x));
}
inline double sigmoid_fn(double x) {
  if (x >= 0.0) {
    const double e = std::exp(-x);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}
}  // namespace

Var Tape::softplus(Var a) {
  check(a);
  const Vec& av = nodes_[a.id].value;
  Vec out(a.size);
  for (std::size_t i = 0; i < a.size; ++i) out[i] = softplus_fn(av[i]);
  const int ai = a.id;
  return make(std::move(out), [ai](Tape& t, int self) {
    const Vec& g = t.nodes_[self].grad;
    const Vec& av = t.nodes_[ai].value;
    for (std::size_t i = 0; i < g.size(); ++i) {
      t.nodes_[ai].grad[i] += g[i] * sigmoid_fn(av[i]);
    }
  });
}

Var Tape::exp_(Var a) {
  check(a);
  const Vec& av = nodes_[a.id].value;
  Vec out(a.size);
  for (std::size_t i = 0; i < a.size; ++i) out[i] = std::exp(av[i]);
  const int ai = a.id;
  return make(std::move(out), [ai](Tape& t, int self) {
    const Vec& g = t.nodes_[self].grad;
    const Vec& y = t.nodes_[self].value;
    for (std::size_t i = 0; i < g.size(); ++i) t.nodes_[ai].grad[i] += g[i] * y[i];
  });
}

Var Tape::log_(Var a) {
  check(a);
  const Vec& av = nodes_[a.id].value;
  Vec out(a.size);
  for (std::size_t i = 0; i < a.size; ++i) out[i] = std::log(av[i]);
  const int ai = a.id;
  return make(std::move(out), [ai](Tape& t, int self) {
    const Vec& g = t.nodes_[self].grad;
    const Vec& av = t.nodes_[ai].value;
    for (std::size_t i = 0; i < g.size(); ++i) t.nodes_[ai].grad[i] += g[i] / av[i];
  });
}

Var Tape::sqrt_(Var a) {
  check(a);
  const Vec& av = nodes_[a.id].value;
  Vec out(a.size);
  for (std::size_t i = 0; i < a.size; ++i) out[i] = std::sqrt(av[i]);
  const int ai = a.id;
  return make(std::move(out), [ai](Tape& t, int self) {
    const Vec& g = t.nodes_[self].grad;
    const Vec& y = t.nodes_[self].value;
    for (std::size_t i = 0; i < g.size(); ++i) {
      t.nodes_[ai].grad[i] += g[i] * 0.5 / y[i];
    }
  });
}

Var Tape::square(Var a) {
  check(a);
  const Vec& av = nodes_[a.id].value;
  Vec out(a.size);
  for (std::size_t i = 0; i < a.size; ++i) out[i] = av[i] * av[i];
  const int ai = a.id;
  return make(std::move(out), [ai](Tape& t, int self) {
    const Vec& g = t.nodes_[self].grad;
    const Vec& av = t.nodes_[ai].value;
    for (std::size_t i = 0; i < g.size(); ++i) {
      t.nodes_[ai].grad[i] += g[i] * 2.0 * av[i];
    }
  });
}

Var Tape::sum(Var a) {
  check(a);
  const Vec& av = nodes_[a.id].value;
  double acc = 0.0;
  for (double v : av) acc += v;
  const int ai = a.id;
  return make(Vec{acc}, [ai](Tape& t, int self) {
    const double g = t.nodes_[self].grad[0];
    for (double& gi : t.nodes_[ai].grad) gi += g;
  });
}

Var Tape::mean(Var a) {
  check(a);
  if (a.size == 0) throw std::invalid_argument("mean: empty");
  return scale(sum(a), 1.0 / static_cast<double>(a.size));
}

Var Tape::concat(Var a, Var b) {
  check(a);
  check(b);
  const Vec& av = nodes_[a.id].value;
  const Vec& bv = nodes_[b.id].value;
  Vec out;
  out.reserve(a.size + b.size);
  out.insert(out.end(), av.begin(), av.end());
  out.insert(out.end(), bv.begin(), bv.end());
  const int ai = a.id, bi = b.id;
  const std::size_t na = a.size;
  return make(std::move(out), [ai, bi, na](Tape& t, int self) {
    const Vec& g = t.nodes_[self].grad;
    for (std::size_t i = 0; i < na; ++i) t.nodes_[ai].grad[i] += g[i];
    for (std::size_t i = na; i < g.size(); ++i) t.nodes_[bi].grad[i - na] += g[i];
  });
}

Var Tape::slice(Var a, std::size_t start, std::size_t len) {
  check(a);
  if (start + len > a.size) throw std::invalid_argument("slice: out of range");
  const Vec& av = nodes_[a.id].value;
  Vec out(av.begin() + start, av.begin() + start + len);
  const int ai = a.id;
  return make(std::move(out), [ai, start](Tape& t, int self) {
    const Vec& g = t.nodes_[self].grad;
    for (std::size_t i = 0; i < g.size(); ++i) t.nodes_[ai].grad[start + i] += g[i];
  });
}

double Tape::scalar(Var v) const {
  check(v);
  if (v.size != 1) throw std::invalid_argument("scalar: size != 1");
  return nodes_[v.id].value[0];
}

void Tape::backward(Var loss) {
  check(loss);
  if (spent_) throw std::logic_error("Tape: backward on a spent tape");
  if (loss.size != 1) throw std::invalid_argument("backward: loss must be scalar");
  spent_ = true;
  nodes_[loss.id].grad[0] = 1.0;
  for (int i = loss.id; i >= 0; --i) {
    if (nodes_[i].back) nodes_[i].back(*this, i);
  }
}

std::map<std::string, Vec> Tape::param_grads() const {
  std::map<std::string, Vec> out;
  for (const auto& [name, var] : param_vars_) {
    out.emplace(name, nodes_[var.id].grad);
  }
  return out;
}

}  // namespace safenav::nn
