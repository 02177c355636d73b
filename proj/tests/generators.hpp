#pragma once
// Random inputs for property tests.

#include "ccf/spectral.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

namespace testgen {

using ccf::spectral::RealField;
using ccf::spectral::TorusGrid;

inline constexpr double kPi = std::numbers::pi;

/// One sinusoid of a trigonometric polynomial.
struct Mode {
    int m;
    double amplitude;
    double phase;
};

/// Draws real trigonometric polynomials with modes 1..band. Amplitudes decay
/// like 1/m so fields stay O(1) and smooth.
class FieldGen {
public:
    explicit FieldGen(std::uint64_t seed, int band = 12) : rng_(seed), band_(band) {}

    std::vector<Mode> modes() {
        std::uniform_real_distribution<double> amp(-1.0, 1.0), phase(0.0, 2.0 * kPi);
        std::vector<Mode> out;
        for (int m = 1; m <= band_; ++m) out.push_back({m, amp(rng_) / m, phase(rng_)});
        return out;
    }

    /// Mean-free field; the modes are returned through `drawn` when given.
    RealField field(const TorusGrid& grid, double mean = 0.0, std::vector<Mode>* drawn = nullptr) {
        auto ms = modes();
        if (drawn) *drawn = ms;
        return RealField::sample(grid, [&](double x) { return mean + evaluate(ms, x); });
    }

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    std::mt19937_64& engine() { return rng_; }

    static double evaluate(const std::vector<Mode>& ms, double x) {
        double v = 0.0;
        for (const auto& md : ms) v += md.amplitude * std::cos(md.m * x + md.phase);
        return v;
    }

private:
    std::mt19937_64 rng_;
    int band_;
};

inline double max_abs_diff(const RealField& f, const std::function<double(double)>& g) {
    double e = 0.0;
    for (std::size_t j = 0; j < f.size(); ++j) e = std::max(e, std::abs(f[j] - g(f.grid().point(j))));
    return e;
}

}  // namespace testgen
