#pragma once

// Seeded randomness and the deterministic trial runner shared by the Monte
// Carlo harnesses. Everything here is bit-reproducible across platforms:
// std::mt19937_64 has a fully specified output stream, and the uniform and
// normal transforms below are written out instead of using std:: distributions
// (whose algorithms are implementation-defined).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <random>
#include <thread>
#include <vector>

namespace occam {

inline constexpr std::uint64_t default_seed = 20070611;

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Per-trial seed from the master seed and the trial counter.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept
{
    return splitmix64(splitmix64(master) ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform on (0, 1).
    double uniform_open()
    {
        double u;
        do {
            u = uniform();
        } while (u == 0.0);
        return u;
    }

    /// Uniform integer on {lo, ..., hi}.
    std::uint64_t uniform_int(std::uint64_t lo, std::uint64_t hi)
    {
        const std::uint64_t span = hi - lo + 1;
        if (span == 0) return engine_();
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return lo + x % span;
    }

    bool bernoulli(double p) { return uniform() < p; }

    /// Standard normal by the Marsaglia polar method.
    double normal()
    {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double a, b, s;
        do {
            a = 2.0 * uniform() - 1.0;
            b = 2.0 * uniform() - 1.0;
            s = a * a + b * b;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = b * f;
        has_spare_ = true;
        return a * f;
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Neumaier-compensated running sum; result depends only on the order of add().
class CompensatedSum {
public:
    void add(double x) noexcept
    {
        const double t = sum_ + x;
        if (std::fabs(sum_) >= std::fabs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// Number of workers to use when the caller passes 0.
inline unsigned default_workers() noexcept
{
    return std::max(1U, std::thread::hardware_concurrency());
}

/// Evaluates fn(i) for i in [0, count) on `workers` threads and returns the
/// results indexed by i. Trials share no mutable state, so the output does not
/// depend on the worker count.
template <class T>
std::vector<T> run_indexed(std::size_t count, unsigned workers, const std::function<T(std::size_t)>& fn)
{
    std::vector<T> out(count);
    if (workers == 0) workers = default_workers();
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(count, 1)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) out[i] = fn(i);
        return out;
    }
    std::vector<std::exception_ptr> failures(workers);
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t i = w; i < count; i += workers) out[i] = fn(i);
                } catch (...) {
                    failures[w] = std::current_exception();
                }
            });
        }
    } // joined here, before `out` is returned
    for (auto& f : failures)
        if (f) std::rethrow_exception(f);
    return out;
}

} // namespace occam
