#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace advgen {

// Deterministic RNG used everywhere. We avoid std:: distributions because
// their output is implementation-defined; reproducibility across runs and
// worker counts is a hard requirement.
struct Rng {
    uint64_t state = 0x9e3779b97f4a7c15ull;

    Rng() = default;
    explicit Rng(uint64_t seed) : state(seed + 0x9e3779b97f4a7c15ull) {}

    // splitmix64
    uint64_t next_u64() {
        uint64_t z = (state += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1)
    double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // integer in [0, n)
    uint64_t below(uint64_t n) { return n == 0 ? 0 : next_u64() % n; }

    int range(int lo, int hi_inclusive) {
        return lo + int(below(uint64_t(hi_inclusive - lo + 1)));
    }

    // Box-Muller; one value per call (no cached spare, keeps streams simple)
    double normal() {
        double u1 = uniform(), u2 = uniform();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }
};

// FNV-1a over the module name mixed into the global seed. This is the
// documented seed-splitting rule: every module/cell derives its stream from
// (global seed, name) so worker scheduling can never affect results.
inline uint64_t seed_for(uint64_t global_seed, std::string_view name) {
    uint64_t h = 1469598103934665603ull;
    for (char c : name) {
        h ^= uint64_t(uint8_t(c));
        h *= 1099511628211ull;
    }
    // one splitmix64 round to decorrelate
    uint64_t z = global_seed ^ h;
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline uint64_t seed_for(uint64_t global_seed, std::string_view name, uint64_t index) {
    return seed_for(global_seed ^ (0x9e3779b97f4a7c15ull * (index + 1)), name);
}

inline double sigmoid(double x) {
    if (x >= 0.0) {
        double e = std::exp(-x);
        return 1.0 / (1.0 + e);
    }
    double e = std::exp(x);
    return e / (1.0 + e);
}

// log(1 + e^x), overflow-safe for large |x|
inline double log1p_exp(double x) {
    if (x > 0.0) return x + std::log1p(std::exp(-x));
    return std::log1p(std::exp(x));
}

inline double logsumexp(const std::vector<double>& v) {
    if (v.empty()) throw std::invalid_argument("logsumexp: empty input");
    double m = v[0];
    for (double x : v) m = std::max(m, x);
    double s = 0.0;
    for (double x : v) s += std::exp(x - m);
    return m + std::log(s);
}

inline double clamp01(double x) { return x < 0.0 ? 0.0 : (x > 1.0 ? 1.0 : x); }

// wrap to (-pi, pi]
inline double wrap_angle(double a) {
    double two_pi = 2.0 * M_PI;
    a = std::fmod(a, two_pi);
    if (a <= -M_PI) a += two_pi;
    if (a > M_PI) a -= two_pi;
    return a;
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw std::invalid_argument("dot: size mismatch");
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(const std::vector<double>& a) {
    double s = 0.0;
    for (double x : a) s += x * x;
    return std::sqrt(s);
}

}  // namespace advgen
