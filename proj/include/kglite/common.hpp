#ifndef KGLITE_COMMON_HPP
#define KGLITE_COMMON_HPP

#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace kglite {

// Bad or inconsistent input data (files, id ranges, shape mismatches).
class data_error : public std::runtime_error {
public:
    explicit data_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Numeric failure (divergence, non-finite values).
class numeric_error : public std::runtime_error {
public:
    explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Caller-side misuse: missing paths, bad flag combinations.
class usage_error : public std::runtime_error {
public:
    explicit usage_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Deterministic RNG. All draws go through explicit helpers so that a fixed
/// seed reproduces the same stream independent of the standard library's
/// distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    // uniform in [0,1)
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform integer in [0,n), unbiased
    std::int64_t uniform_int(std::int64_t n) {
        if (n <= 0) throw std::invalid_argument("Rng::uniform_int: n must be positive");
        const std::uint64_t un = static_cast<std::uint64_t>(n);
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % un;
        std::uint64_t r;
        do {
            r = eng_();
        } while (r >= limit);
        return static_cast<std::int64_t>(r % un);
    }

    bool coin() { return (eng_() & 1u) != 0; }

    // normal via Box-Muller on the deterministic uniform stream
    double normal(double mean = 0.0, double stddev = 1.0) {
        if (!have_spare_) {
            double u1 = 0.0;
            while (u1 <= 0.0) u1 = uniform();
            const double u2 = uniform();
            const double mag = std::sqrt(-2.0 * std::log(u1));
            spare_ = mag * std::sin(6.283185307179586476925286766559 * u2);
            have_spare_ = true;
            return mean + stddev * mag * std::cos(6.283185307179586476925286766559 * u2);
        }
        have_spare_ = false;
        return mean + stddev * spare_;
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(uniform_int(static_cast<std::int64_t>(i)));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

/// Derive a per-stage seed from the master seed. Every source of randomness
/// in the pipeline flows from the single config seed through this mix.
inline std::uint64_t mix_seed(std::uint64_t master, std::string_view tag) {
    return splitmix64(master ^ fnv1a64(tag));
}

inline std::uint64_t mix_seed(std::uint64_t master, std::string_view tag, std::uint64_t salt) {
    return splitmix64(splitmix64(master ^ fnv1a64(tag)) + salt);
}

/// Chunked parallel map over [0,n). Each worker handles one contiguous chunk;
/// outputs written to disjoint slots stay deterministic for any thread count.
inline void parallel_for(std::size_t n, int threads,
                         const std::function<void(std::size_t, std::size_t)>& body) {
    if (n == 0) return;
    if (threads <= 1 || n == 1) {
        body(0, n);
        return;
    }
    const std::size_t nt = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
    const std::size_t chunk = (n + nt - 1) / nt;
    std::vector<std::thread> pool;
    pool.reserve(nt);
    for (std::size_t w = 0; w < nt; ++w) {
        const std::size_t lo = w * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&body, lo, hi] { body(lo, hi); });
    }
    for (auto& t : pool) t.join();
}

inline double sigmoid(double x) {
    if (x >= 0.0) {
        const double z = std::exp(-x);
        return 1.0 / (1.0 + z);
    }
    const double z = std::exp(x);
    return z / (1.0 + z);
}

// log(sigmoid(x)), stable for large |x|
inline double log_sigmoid(double x) {
    if (x >= 0.0) return -std::log1p(std::exp(-x));
    return x - std::log1p(std::exp(x));
}

}  // namespace kglite

#endif  // KGLITE_COMMON_HPP
