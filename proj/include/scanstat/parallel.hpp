#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace scanstat {

/// Worker count from SCANSTAT_THREADS, falling back to hardware concurrency.
inline unsigned default_thread_count() {
  if (const char* env = std::getenv("SCANSTAT_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v >= 1) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs body(replica, tally, workspace) for every replica in [0, count),
/// splitting the index space into contiguous chunks, one per worker. Each
/// worker owns its tally and workspace; tallies are merged in chunk order.
/// `Tally` must provide `merge(const Tally&)`.
template <typename Tally, typename MakeWorkspace, typename Body>
Tally parallel_tally(std::uint64_t count, unsigned threads, const Tally& init, MakeWorkspace make_workspace,
                     Body body) {
  threads = std::max(1u, threads);
  if (count < threads) threads = static_cast<unsigned>(std::max<std::uint64_t>(1, count));
  std::vector<Tally> partial(threads, init);
  std::vector<std::exception_ptr> errors(threads);

  const auto run_chunk = [&](unsigned w) {
    try {
      const std::uint64_t begin = count * w / threads;
      const std::uint64_t end = count * (w + 1) / threads;
      auto workspace = make_workspace();
      for (std::uint64_t r = begin; r < end; ++r) body(r, partial[w], workspace);
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };

  if (threads == 1) {
    run_chunk(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(run_chunk, w);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  Tally total = init;
  for (const auto& p : partial) total.merge(p);
  return total;
}

}  // namespace scanstat
