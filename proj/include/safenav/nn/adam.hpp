#pragma once

#include <map>
#include <string>

#include "safenav/nn/param_store.hpp"

namespace safenav::nn {

// Adam with bias correction. State is kept per parameter name; lr = 0
// leaves parameters untouched. A non-finite gradient throws, naming the
// offending parameter.
class Adam {
 public:
  explicit Adam(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void step(ParamStore& store, const std::map<std::string, Vec>& grads);
  void set_lr(double lr) { lr_ = lr; }
  double lr() const { return lr_; }

 private:
  struct Moments {
    Vec m;
    Vec v;
    long t = 0;
  };

  double lr_, beta1_, beta2_, eps_;
  std::map<std::string, Moments> state_;
};

}  // namespace safenav::nn
