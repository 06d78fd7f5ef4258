// SPDX-License-Identifier: Apache-2.0
#include <atomic>
#include <set>

#include "core/common.hpp"
#include "doctest.h"

using namespace aet;

TEST_CASE("mix_seed separates streams and is deterministic") {
  CHECK(mix_seed(1, 1) == mix_seed(1, 1));
  CHECK(mix_seed(1, 1) != mix_seed(1, 2));
  CHECK(mix_seed(1, 1) != mix_seed(2, 1));
  std::set<std::uint64_t> seen;
  for (std::uint64_t s = 0; s < 1000; ++s) seen.insert(mix_seed(42, s));
  CHECK(seen.size() == 1000);
}

TEST_CASE("hash_name is FNV-1a") {
  CHECK(hash_name("") == 0xcbf29ce484222325ULL);
  CHECK(hash_name("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("parallel_for visits every index once for any job count") {
  for (std::size_t jobs : {1, 2, 3, 8}) {
    std::vector<std::atomic<int>> hits(103);
    parallel_for(hits.size(), jobs, [&](std::size_t i) { ++hits[i]; });
    for (auto& h : hits) CHECK(h.load() == 1);
  }
}

TEST_CASE("parallel_for rethrows worker errors") {
  CHECK_THROWS_AS(parallel_for(10, 4, [](std::size_t i) {
                    if (i == 7) fail(ErrorCode::numeric, "boom");
                  }),
                  Error);
}

TEST_CASE("error codes carry their category") {
  try {
    fail(ErrorCode::validation, "bad");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::validation);
    CHECK(std::string(e.what()) == "bad");
  }
}
