#include "safenav/core/replay_buffer.hpp"

#include <stdexcept>
#include <string>
#include <utility>

namespace safenav {

ReplayBuffer::ReplayBuffer(std::size_t capacity_steps) : capacity_(capacity_steps) {}

void ReplayBuffer::push_episode(Episode ep) {
  if (ep.steps.empty()) {
    throw std::invalid_argument("push_episode: empty episode");
  }
  episodes_.push_back(std::move(ep));
  total_steps_ += episodes_.back().size();
  // Oldest-first eviction. The newest episode is always kept, even if it
  // alone exceeds capacity.
  while (total_steps_ > capacity_ && episodes_.size() > 1) {
    total_steps_ -= episodes_.front().size();
    episodes_.pop_front();
  }
}

std::vector<SequenceWindow> ReplayBuffer::sample_sequence_batch(std::size_t batch, std::size_t length,
                                                                std::uint64_t rng_seed) const {
  std::vector<const Episode*> eligible;
  std::vector<std::size_t> offsets_count;
  std::size_t total_offsets = 0;
  std::size_t longest = 0;
  for (const Episode& ep : episodes_) {
    longest = std::max(longest, ep.size());
    if (ep.size() >= length) {
      eligible.push_back(&ep);
      offsets_count.push_back(ep.size() - length + 1);
      total_offsets += offsets_count.back();
    }
  }
  if (eligible.empty()) {
    throw std::runtime_error("sample_sequence_batch: no episode of length >= " + std::to_string(length) +
                             " (longest stored: " + std::to_string(longest) + ")");
  }
  Rng rng(rng_seed);
  std::vector<SequenceWindow> out;
  out.reserve(batch);
  for (std::size_t b = 0; b < batch; ++b) {
    std::size_t pick = rng.below(total_offsets);
    for (std::size_t i = 0; i < eligible.size(); ++i) {
      if (pick < offsets_count[i]) {
        out.push_back({eligible[i], pick, length});
        break;
      }
      pick -= offsets_count[i];
    }
  }
  return out;
}

double discounted_return(std::span<const double> values, double gamma) {
  double acc = 0.0;
  double w = 1.0;
  for (double v : values) {
    acc += w * v;
    w *= gamma;
  }
  return acc;
}

}  // namespace safenav
