#ifndef FRACSOB_SUMMATION_HPP
#define FRACSOB_SUMMATION_HPP

#include <cmath>
#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace fracsob
{

  /// Neumaier's variant of Kahan summation.
  class CompensatedSum
  {
  public:
    void add(double v)
    {
      const double t = sum_ + v;
      if (std::abs(sum_) >= std::abs(v))
        comp_ += (sum_ - t) + v;
      else
        comp_ += (v - t) + sum_;
      sum_ = t;
    }
    double value() const { return sum_ + comp_; }

  private:
    double sum_ = 0.0;
    double comp_ = 0.0;
  };

  inline int resolve_threads(int requested)
  {
    if (requested > 0)
      return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
  }

  /**
   * Runs body(i) for i in [0, n) on up to `threads` workers. Each index is
   * handled exactly once; callers write results into per-index slots and
   * reduce afterwards, so the result never depends on the worker count.
   */
  template <class Body>
  void parallel_for(std::size_t n, int threads, Body &&body)
  {
    const int nt = std::min<std::size_t>(resolve_threads(threads), n == 0 ? 1 : n);
    if (nt <= 1)
      {
        for (std::size_t i = 0; i < n; ++i)
          body(i);
        return;
      }
    std::vector<std::thread>         pool;
    std::vector<std::exception_ptr>  errors(nt);
    pool.reserve(nt);
    for (int t = 0; t < nt; ++t)
      pool.emplace_back([&, t] {
        try
          {
            for (std::size_t i = t; i < n; i += nt)
              body(i);
          }
        catch (...)
          {
            errors[t] = std::current_exception();
          }
      });
    for (auto &th : pool)
      th.join();
    for (auto &e : errors)
      if (e)
        std::rethrow_exception(e);
  }

} // namespace fracsob

#endif
