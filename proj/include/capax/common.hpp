#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

namespace capax {

/**
 * Error kinds, one per CLI exit code. Library code throws these; the CLI
 * front end maps usage_error to exit 2, solver_error to 3, io_error to 4.
 */
class usage_error : public std::runtime_error {
public:
    explicit usage_error(const std::string& msg) : std::runtime_error(msg) {}
};

class solver_error : public std::runtime_error {
public:
    explicit solver_error(const std::string& msg) : std::runtime_error(msg) {}
};

class io_error : public std::runtime_error {
public:
    explicit io_error(const std::string& msg) : std::runtime_error(msg) {}
};

/**
 * Deterministic RNG (splitmix64-seeded xoshiro256**). Fully specified here so
 * reports are byte-identical across runs and platforms; the standard library
 * distributions are implementation-defined and would not be.
 */
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t x = seed;
        for (auto& si : s_) {
            x += 0x9e3779b97f4a7c15ULL;
            std::uint64_t z = x;
            z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
            z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
            si = z ^ (z >> 31);
        }
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // uniform in [0,1)
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    // uniform integer in [0, n)
    std::uint64_t uniform_int(std::uint64_t n) { return next() % n; }

private:
    static std::uint64_t rotl(std::uint64_t v, int k) {
        return (v << k) | (v >> (64 - k));
    }
    std::uint64_t s_[4];
};

// Stable 64-bit hash for deriving per-instance seeds from (seed, label, index).
std::uint64_t stable_hash(std::uint64_t seed, const std::string& label, std::uint64_t index);

/**
 * Run fn(i) for i in [0, n). Splits the range across CAPAX_THREADS workers
 * (default 1). Each index writes only its own outputs, so results do not
 * depend on the thread count.
 */
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace capax
