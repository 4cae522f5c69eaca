#pragma once

#include <deque>
#include <span>
#include <vector>

#include "safenav/core/rng.hpp"
#include "safenav/core/types.hpp"

namespace safenav {

// A contiguous window of steps inside one stored episode.
struct SequenceWindow {
  const Episode* episode = nullptr;
  std::size_t start = 0;
  std::size_t length = 0;

  const TransitionStep& step(std::size_t i) const { return episode->steps[start + i]; }
};

// Episode-granular replay storage. Capacity counts steps; eviction is
// oldest-first. Single writer; readers must hold a stable reference while
// no push is in flight.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity_steps);

  // Appends an episode, evicting oldest episodes until the step total fits.
  // Throws std::invalid_argument on an empty episode.
  void push_episode(Episode ep);

  // Draws `batch` contiguous windows of `length` steps, each from a single
  // episode, uniformly over valid (episode, offset) pairs. Identical seed
  // gives an identical batch. Throws std::runtime_error when no stored
  // episode is long enough, naming the deficit.
  std::vector<SequenceWindow> sample_sequence_batch(std::size_t batch, std::size_t length,
                                                    std::uint64_t rng_seed) const;

  std::size_t total_steps() const { return total_steps_; }
  std::size_t capacity() const { return capacity_; }
  std::size_t num_episodes() const { return episodes_.size(); }
  const Episode& episode(std::size_t i) const { return episodes_[i]; }

 private:
  std::size_t capacity_;
  std::size_t total_steps_ = 0;
  std::deque<Episode> episodes_;
};

// Sum_t gamma^t * values[t]; empty sequence -> 0.
double discounted_return(std::span<const double> values, double gamma);

}  // namespace safenav
