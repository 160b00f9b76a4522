#pragma once

#include <algorithm>
#include <filesystem>
#include <numeric>
#include <random>
#include <string>

#include "routediag/bench.h"
#include "routediag/evaluation.h"
#include "routediag/instance.h"

#ifndef ROUTEDIAG_DATA_DIR
#define ROUTEDIAG_DATA_DIR "data"
#endif

namespace fixture {

inline std::string c103_path() { return std::string(ROUTEDIAG_DATA_DIR) + "/C103.txt"; }

// Catalog variant on C103 truncated to `n` customers, default parameters.
inline routediag::ProblemInstance variant(const std::string& name, std::size_t n = 25) {
  return routediag::featured_instance(c103_path(), n, name);
}

// Random permutation of 1..n cut into 1..max_routes nonempty routes.
inline routediag::RoutePlan random_plan(std::size_t n, std::mt19937_64& rng,
                                        std::size_t max_routes = 5) {
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 1);
  std::shuffle(perm.begin(), perm.end(), rng);
  const std::size_t k =
      std::uniform_int_distribution<std::size_t>(1, std::min(n, max_routes))(rng);
  std::vector<std::size_t> cuts(n - 1);
  std::iota(cuts.begin(), cuts.end(), 1);
  std::shuffle(cuts.begin(), cuts.end(), rng);
  cuts.resize(k - 1);
  std::sort(cuts.begin(), cuts.end());
  cuts.push_back(n);
  routediag::RoutePlan plan;
  std::size_t start = 0;
  for (auto c : cuts) {
    plan.routes.emplace_back(perm.begin() + static_cast<std::ptrdiff_t>(start),
                             perm.begin() + static_cast<std::ptrdiff_t>(c));
    start = c;
  }
  return plan;
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("routediag_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace fixture
