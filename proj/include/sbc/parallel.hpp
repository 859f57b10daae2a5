#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace sbc {

/// out[i] = fn(in[i]) over a small worker pool. Output order matches input
/// order, so results do not depend on the thread count. `threads == 0`
/// uses the hardware concurrency.
template <typename In, typename Fn>
auto parallel_map(const std::vector<In>& in, Fn fn, unsigned threads = 0) {
  using Out = decltype(fn(in.front()));
  std::vector<Out> out(in.size());
  if (in.empty()) return out;
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, in.size()));

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < in.size();) {
      try {
        out[i] = fn(in[i]);
      } catch (...) {
        if (!failed.exchange(true)) failure = std::current_exception();
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned k = 0; k < threads; ++k) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace sbc
