#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "safenav/core/types.hpp"
#include "safenav/nn/param_store.hpp"

namespace safenav::nn {

struct Var {
  int id = -1;
  std::size_t size = 0;
};

// Records one forward evaluation; backward() replays it in reverse order,
// visiting each node exactly once. A tape is single-use: build, backward,
// read gradients, discard.
class Tape {
 public:
  explicit Tape(ParamStore* params = nullptr) : params_(params) {}

  Var constant(Vec v);
  Var constant(double x) { return constant(Vec{x}); }

  // Tracked leaf backed by a named parameter array. Cached per name so a
  // parameter used twice accumulates gradients into one node.
  Var param(const std::string& name);

  // y = W x + b, W row-major [rows x cols], b size rows.
  Var affine(Var x, Var w, Var b, std::size_t rows, std::size_t cols);

  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var div(Var a, Var b);
  Var min2(Var a, Var b);           // elementwise min; ties route to a
  Var scale(Var a, double c);
  Var offset(Var a, double c);
  Var neg(Var a) { return scale(a, -1.0); }

  Var tanh_(Var a);
  Var sigmoid(Var a);
  Var relu(Var a);
  Var clamp_min(Var a, double floor);  // max(x, floor); gradient passes iff x > floor
  Var softplus(Var a);
  Var exp_(Var a);
  Var log_(Var a);
  Var sqrt_(Var a);
  Var square(Var a);

  Var sum(Var a);
  Var mean(Var a);
  Var concat(Var a, Var b);
  Var slice(Var a, std::size_t start, std::size_t len);

  const Vec& value(Var v) const { return nodes_[v.id].value; }
  double scalar(Var v) const;

  // Reverse pass from a scalar loss. Throws on reuse of a spent tape.
  void backward(Var loss);

  const Vec& grad(Var v) const { return nodes_[v.id].grad; }

  // name -> gradient for every parameter touched via param().
  std::map<std::string, Vec> param_grads() const;

  std::size_t num_nodes() const { return nodes_.size(); }
  ParamStore* store() const { return params_; }

 private:
  struct Node {
    Vec value;
    Vec grad;
    std::function<void(Tape&, int self)> back;  // empty for leaves
  };

  Var make(Vec value, std::function<void(Tape&, int self)> back);
  void check(Var v) const;
  static void check_same(Var a, Var b);

  ParamStore* params_;
  std::vector<Node> nodes_;
  std::map<std::string, Var> param_vars_;
  bool spent_ = false;
};

}  // namespace safenav::nn
