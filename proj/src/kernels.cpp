#include "ccf/kernels.hpp"


#include <algorithm>
#include <cmath>

namespace ccf::kernels {

namespace {

inline std::size_t wrap(std::ptrdiff_t k, std::size_t n) {
    const auto sn = static_cast<std::ptrdiff_t>(n);
    k %= sn;
    return static_cast<std::size_t>(k < 0 ? k + sn : k);
}

inline double quadrature_point(std::span<const double> center, std::span<const double> shifted,
                               std::span<const double> weights, std::ptrdiff_t offset, int power,
                               std::size_t i) {
    const std::size_t n = center.size();
    const double c = center[i];
    std::size_t idx = wrap(static_cast<std::ptrdiff_t>(i) + offset, n);
    double acc = 0.0;
    if (power == 1) {
        for (std::size_t j = 0; j < n; ++j) {
            acc += weights[j] * (c - shifted[idx]);
            if (++idx == n) idx = 0;
        }
    } else {
        for (std::size_t j = 0; j < n; ++j) {
            const double d = c - shifted[idx];
            acc += weights[j] * d * d;
            if (++idx == n) idx = 0;
        }
    }
    return acc;
}

inline double holder_offset(std::span<const double> v, std::size_t k, double spacing, double alpha) {
    const std::size_t n = v.size();
    double worst = 0.0;
    std::size_t idx = k;
    for (std::size_t i = 0; i < n; ++i) {
        worst = std::max(worst, std::abs(v[i] - v[idx]));
        if (++idx == n) idx = 0;
    }
    return worst / std::pow(static_cast<double>(k) * spacing, alpha);
}

}  // namespace

void difference_quadrature_serial(std::span<const double> center, std::span<const double> shifted,
                                  std::span<const double> weights, std::ptrdiff_t offset, int power,
                                  std::span<double> out) {
    for (std::size_t i = 0; i < center.size(); ++i)
        out[i] = quadrature_point(center, shifted, weights, offset, power, i);
}

void difference_quadrature_parallel(std::span<const double> center, std::span<const double> shifted,
                                    std::span<const double> weights, std::ptrdiff_t offset, int power,
                                    std::span<double> out) {
    const auto n = static_cast<std::ptrdiff_t>(center.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i)
        out[static_cast<std::size_t>(i)] =
            quadrature_point(center, shifted, weights, offset, power, static_cast<std::size_t>(i));
}

double holder_max_serial(std::span<const double> values, double spacing, double alpha) {
    double best = 0.0;
    for (std::size_t k = 1; k <= values.size() / 2; ++k)
        best = std::max(best, holder_offset(values, k, spacing, alpha));
    return best;
}

double holder_max_parallel(std::span<const double> values, double spacing, double alpha) {
    const auto half = static_cast<std::ptrdiff_t>(values.size() / 2);
    double best = 0.0;
#pragma omp parallel for schedule(static) reduction(max : best)
    for (std::ptrdiff_t k = 1; k <= half; ++k)
        best = std::max(best, holder_offset(values, static_cast<std::size_t>(k), spacing, alpha));
    return best;
}

}  // namespace ccf::kernels
