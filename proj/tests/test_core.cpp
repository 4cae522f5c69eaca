#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "safenav/core/replay_buffer.hpp"
#include "safenav/core/rng.hpp"

using namespace safenav;

namespace {
Episode make_episode(std::size_t n, std::uint64_t seed) {
  Episode ep;
  ep.seed = seed;
  for (std::size_t i = 0; i < n; ++i) {
    TransitionStep st;
    st.observation = {static_cast<double>(seed), static_cast<double>(i)};
    st.action = {0.0, 0.0};
    st.reward = static_cast<double>(i);
    st.done = i + 1 == n;
    ep.steps.push_back(st);
  }
  return ep;
}
}  // namespace

TEST_CASE("rng: identical seeds give identical streams") {
  Rng a(123), b(123);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("rng: split is non-consuming and tag-dependent") {
  Rng a(7);
  Rng child1 = a.split("x");
  const std::uint64_t next = a.next_u64();
  Rng b(7);
  Rng child2 = b.split("x");
  CHECK(b.next_u64() == next);  // split did not consume
  CHECK(child1.next_u64() == child2.next_u64());
  CHECK(Rng(7).split("x").next_u64() != Rng(7).split("y").next_u64());
  CHECK(Rng(7).split(1).next_u64() != Rng(7).split(2).next_u64());
}

TEST_CASE("rng: uniform in [0,1), below unbiased range, gaussian moments") {
  Rng r(99);
  double sum = 0.0, sum2 = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    const double g = r.gaussian();
    sum += g;
    sum2 += g * g;
    CHECK(r.below(7) < 7);
  }
  CHECK(std::abs(sum / n) < 0.02);
  CHECK(std::abs(sum2 / n - 1.0) < 0.02);
}

TEST_CASE("replay: rejects empty episodes, counts steps") {
  ReplayBuffer buf(100);
  CHECK_THROWS_AS(buf.push_episode(Episode{}), std::invalid_argument);
  buf.push_episode(make_episode(10, 1));
  buf.push_episode(make_episode(20, 2));
  CHECK(buf.total_steps() == 30);
  CHECK(buf.num_episodes() == 2);
}

TEST_CASE("replay: evicts oldest first, always keeps newest") {
  ReplayBuffer buf(25);
  buf.push_episode(make_episode(10, 1));
  buf.push_episode(make_episode(10, 2));
  buf.push_episode(make_episode(10, 3));  // evicts episode 1
  CHECK(buf.num_episodes() == 2);
  CHECK(buf.episode(0).seed == 2);
  buf.push_episode(make_episode(40, 4));  // larger than capacity: keeps newest only
  CHECK(buf.num_episodes() == 1);
  CHECK(buf.episode(0).seed == 4);
}

TEST_CASE("replay: sequence sampling is seeded-deterministic and in-bounds") {
  ReplayBuffer buf(1000);
  buf.push_episode(make_episode(12, 1));
  buf.push_episode(make_episode(5, 2));
  buf.push_episode(make_episode(30, 3));
  const auto a = buf.sample_sequence_batch(16, 5, 42);
  const auto b = buf.sample_sequence_batch(16, 5, 42);
  REQUIRE(a.size() == 16);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].episode == b[i].episode);
    CHECK(a[i].start == b[i].start);
    CHECK(a[i].length == 5);
    CHECK(a[i].start + a[i].length <= a[i].episode->size());
  }
  CHECK(buf.sample_sequence_batch(16, 5, 43)[0].episode->size() >= 5);
}

TEST_CASE("replay: too-long request names the deficit") {
  ReplayBuffer buf(1000);
  buf.push_episode(make_episode(4, 1));
  CHECK_THROWS_WITH_AS(static_cast<void>(buf.sample_sequence_batch(1, 9, 0)),
                       doctest::Contains("9"), std::runtime_error);
}

TEST_CASE("discounted_return") {
  const std::vector<double> v{1.0, 1.0, 1.0};
  CHECK(discounted_return(v, 0.5) == doctest::Approx(1.75).epsilon(1e-12));
  CHECK(discounted_return({}, 0.9) == 0.0);
  const std::vector<double> one{3.0};
  CHECK(discounted_return(one, 0.1) == 3.0);
}
