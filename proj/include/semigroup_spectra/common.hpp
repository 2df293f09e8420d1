#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace sgs {

using cplx = std::complex<double>;

constexpr double kPi = 3.141592653589793238462643383279502884;

// Numerical failure that should abort the current pipeline stage, not the process.
struct numeric_error : std::runtime_error {
    explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed input (file, config, or argument).
struct input_error : std::runtime_error {
    explicit input_error(const std::string& what) : std::runtime_error(what) {}
};

// splitmix64: tiny deterministic generator for sample points and probe vectors.
// Deterministic across platforms, unlike distribution adapters in <random>.
struct SplitMix64 {
    std::uint64_t state;
    explicit SplitMix64(std::uint64_t seed) : state(seed) {}
    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    // uniform in [0,1)
    double uniform() { return (next() >> 11) * 0x1.0p-53; }
    // uniform in [a,b)
    double uniform(double a, double b) { return a + (b - a) * uniform(); }
};

} // namespace sgs
