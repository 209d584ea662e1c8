#pragma once

// Small seeded generators for property tests.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace gen {

class Source {
public:
    explicit Source(std::uint64_t seed) : rng_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    double log_uniform(double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

    std::vector<double> vec(int n, double lo, double hi) {
        std::vector<double> v(n);
        for (auto& x : v) x = uniform(lo, hi);
        return v;
    }

    /// Uniform point in the ball of radius r.
    std::vector<double> in_ball(int n, double r) {
        for (;;) {
            auto v = vec(n, -r, r);
            double q = 0.0;
            for (double x : v) q += x * x;
            if (q <= r * r) return v;
        }
    }

private:
    std::mt19937_64 rng_;
};

template <class F>
void for_cases(int count, std::uint64_t seed, F&& body) {
    Source src(seed);
    for (int i = 0; i < count; ++i) body(src, i);
}

} // namespace gen
