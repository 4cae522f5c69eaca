#include "safenav/nn/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace safenav::nn {

void Adam::step(ParamStore& store, const std::map<std::string, Vec>& grads) {
  for (const auto& [name, grad] : grads) {
    for (double g : grad) {
      if (!std::isfinite(g)) {
        throw std::runtime_error("Adam: non-finite gradient for parameter " + name);
      }
    }
  }
  if (lr_ == 0.0) return;
  for (const auto& [name, grad] : grads) {
    Vec& w = store.values(name);
    if (w.size() != grad.size()) {
      throw std::invalid_argument("Adam: gradient shape mismatch for " + name);
    }
    Moments& st = state_[name];
    if (st.m.empty()) {
      st.m.assign(w.size(), 0.0);
      st.v.assign(w.size(), 0.0);
    }
    ++st.t;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(st.t));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(st.t));
    for (std::size_t i = 0; i < w.size(); ++i) {
      st.m[i] = beta1_ * st.m[i] + (1.0 - beta1_) * grad[i];
      st.v[i] = beta2_ * st.v[i] + (1.0 - beta2_) * grad[i] * grad[i];
      const double mhat = st.m[i] / bc1;
      const double vhat = st.v[i] / bc2;
      w[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
    }
  }
}

}  // namespace safenav::nn
