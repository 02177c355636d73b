#include "ccf/spectral.hpp"

#include "ccf/error.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <string>

namespace ccf::spectral {

namespace {

// FFTW planning is not thread-safe; execution with the new-array interface is.
// Plans are created once per size under a lock and kept for the process
// lifetime. FFTW_ESTIMATE keeps the chosen algorithm independent of timing,
// so transforms are reproducible run to run.
struct PlanPair {
    fftw_plan r2c = nullptr;
    fftw_plan c2r = nullptr;
};

const PlanPair& plans_for(std::size_t n) {
    static std::mutex mutex;
    static std::map<std::size_t, PlanPair> cache;
    std::lock_guard lock(mutex);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;

    const int len = static_cast<int>(n);
    std::vector<double> real(n);
    std::vector<fftw_complex> half(n / 2 + 1);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED | FFTW_DESTROY_INPUT;
    PlanPair p;
    p.r2c = fftw_plan_dft_r2c_1d(len, real.data(), half.data(), flags);
    p.c2r = fftw_plan_dft_c2r_1d(len, half.data(), real.data(), flags);
    return cache.emplace(n, p).first->second;
}

}  // namespace

// ---------------------------------------------------------------------------
// TorusGrid

TorusGrid::TorusGrid(std::size_t n) : n_(n) {
    if (n < 8 || n % 2 != 0)
        throw ValidationError("n", "grid size must be even and >= 8, got " + std::to_string(n));
}

double TorusGrid::spacing() const noexcept { return 2.0 * std::numbers::pi / static_cast<double>(n_); }

double TorusGrid::point(std::size_t j) const noexcept {
    return 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n_);
}

std::vector<double> TorusGrid::points() const {
    std::vector<double> x(n_);
    for (std::size_t j = 0; j < n_; ++j) x[j] = point(j);
    return x;
}

long TorusGrid::mode(std::size_t slot) const noexcept {
    const auto k = static_cast<long>(slot);
    return slot <= n_ / 2 ? k : k - static_cast<long>(n_);
}

std::size_t TorusGrid::slot(long m) const {
    const long half = nyquist();
    if (m <= -half || m > half)
        throw ValidationError("m", "wavenumber " + std::to_string(m) + " outside (-n/2, n/2]");
    return static_cast<std::size_t>(m >= 0 ? m : m + static_cast<long>(n_));
}

// ---------------------------------------------------------------------------
// RealField

RealField::RealField(TorusGrid grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size())
        throw ValidationError("values", "expected " + std::to_string(grid_.size()) + " samples, got " +
                                            std::to_string(values_.size()));
    for (std::size_t j = 0; j < values_.size(); ++j)
        if (!std::isfinite(values_[j]))
            throw NumericalError("non-finite sample at index " + std::to_string(j));
}

RealField RealField::sample(const TorusGrid& grid, const std::function<double(double)>& f) {
    std::vector<double> v(grid.size());
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = f(grid.point(j));
    return RealField(grid, std::move(v));
}

RealField RealField::zeros(const TorusGrid& grid) { return RealField(grid, std::vector<double>(grid.size(), 0.0)); }

double RealField::max_abs() const noexcept {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

double RealField::min() const noexcept { return *std::min_element(values_.begin(), values_.end()); }
double RealField::max() const noexcept { return *std::max_element(values_.begin(), values_.end()); }

// ---------------------------------------------------------------------------
// SpectralField

SpectralField::SpectralField(TorusGrid grid, std::vector<Complex> coeffs)
    : grid_(grid), coeffs_(std::move(coeffs)) {
    const std::size_t n = grid_.size();
    if (coeffs_.size() != n)
        throw ValidationError("coeffs", "expected " + std::to_string(n) + " coefficients, got " +
                                            std::to_string(coeffs_.size()));
    double scale = 1.0;
    for (const auto& c : coeffs_) {
        if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
            throw NumericalError("non-finite Fourier coefficient");
        scale = std::max(scale, std::abs(c));
    }
    const double tol = kSymmetryTolerance * scale;
    if (std::abs(coeffs_[0].imag()) > tol) throw ValidationError("coeffs", "mean mode is not real");
    if (std::abs(coeffs_[n / 2].imag()) > tol) throw ValidationError("coeffs", "Nyquist mode is not real");
    for (std::size_t k = 1; k < n / 2; ++k)
        if (std::abs(coeffs_[k] - std::conj(coeffs_[n - k])) > tol)
            throw ValidationError("coeffs", "Hermitian symmetry violated at m = " + std::to_string(k));
}

SpectralField SpectralField::zeros(const TorusGrid& grid) {
    return SpectralField(grid, std::vector<Complex>(grid.size()));
}

// ---------------------------------------------------------------------------
// Transforms

SpectralField forward(const RealField& f) {
    const std::size_t n = f.size();
    const auto& p = plans_for(n);
    std::vector<double> in(f.values().begin(), f.values().end());
    std::vector<Complex> half(n / 2 + 1);
    fftw_execute_dft_r2c(p.r2c, in.data(), reinterpret_cast<fftw_complex*>(half.data()));

    const double inv_n = 1.0 / static_cast<double>(n);
    std::vector<Complex> full(n);
    for (std::size_t k = 0; k <= n / 2; ++k) full[k] = half[k] * inv_n;
    full[0].imag(0.0);
    full[n / 2].imag(0.0);
    for (std::size_t k = 1; k < n / 2; ++k) full[n - k] = std::conj(full[k]);
    return SpectralField(f.grid(), std::move(full));
}

RealField inverse(const SpectralField& F) {
    const std::size_t n = F.size();
    const auto& p = plans_for(n);
    std::vector<Complex> half(F.coeffs().begin(), F.coeffs().begin() + static_cast<std::ptrdiff_t>(n / 2 + 1));
    half[0].imag(0.0);
    half[n / 2].imag(0.0);
    std::vector<double> out(n);
    fftw_execute_dft_c2r(p.c2r, reinterpret_cast<fftw_complex*>(half.data()), out.data());
    return RealField(F.grid(), std::move(out));
}

SpectralField apply_symbol(const SpectralField& F, const std::function<Complex(long)>& symbol) {
    const auto& g = F.grid();
    const std::size_t n = g.size();
    std::vector<Complex> c(F.coeffs().begin(), F.coeffs().end());
    for (std::size_t k = 0; k <= n / 2; ++k) {
        const long m = g.mode(k);
        const Complex s = symbol(m);
        if (k == 0 || k == n / 2) {
            c[k] *= s.real();
        } else {
            c[k] *= s;
            c[n - k] = std::conj(c[k]);
        }
    }
    return SpectralField(g, std::move(c));
}

SpectralField derivative(const SpectralField& F) {
    const long nyq = F.grid().nyquist();
    return apply_symbol(F, [nyq](long m) {
        return m == nyq ? Complex(0.0) : Complex(0.0, static_cast<double>(m));
    });
}

SpectralField dealias(const SpectralField& F) {
    const long cutoff = static_cast<long>(F.grid().size() / 3);
    return apply_symbol(F, [cutoff](long m) { return std::abs(m) > cutoff ? 0.0 : 1.0; });
}

SpectralField translate(const SpectralField& F, double shift) {
    return apply_symbol(F, [shift](long m) { return std::polar(1.0, static_cast<double>(m) * shift); });
}

double tail_fraction(const SpectralField& F, long cutoff) {
    const auto& g = F.grid();
    double total = 0.0, tail = 0.0;
    for (std::size_t k = 1; k < F.size(); ++k) {
        const double e = std::norm(F.coeffs()[k]);
        total += e;
        if (std::abs(g.mode(k)) > cutoff) tail += e;
    }
    return total > 0.0 ? tail / total : 0.0;
}

double parseval_energy(const SpectralField& F) {
    double s = 0.0;
    for (const auto& c : F.coeffs()) s += std::norm(c);
    return 2.0 * std::numbers::pi * s;
}

double physical_energy(const RealField& f) {
    double s = 0.0;
    for (double v : f.values()) s += v * v;
    return 2.0 * std::numbers::pi * s / static_cast<double>(f.size());
}

// ---------------------------------------------------------------------------
// Arithmetic

namespace {

void require_same_grid(const TorusGrid& a, const TorusGrid& b) {
    if (!(a == b))
        throw ValidationError("grid", "fields live on different grids (" + std::to_string(a.size()) +
                                          " vs " + std::to_string(b.size()) + ")");
}

template <class T, class Op>
std::vector<T> zip(std::span<const T> a, std::span<const T> b, Op op) {
    std::vector<T> out(a.size());
    std::transform(a.begin(), a.end(), b.begin(), out.begin(), op);
    return out;
}

}  // namespace

SpectralField operator+(const SpectralField& a, const SpectralField& b) {
    require_same_grid(a.grid(), b.grid());
    return SpectralField(a.grid(), zip(a.coeffs(), b.coeffs(), std::plus<>{}));
}

SpectralField operator-(const SpectralField& a, const SpectralField& b) {
    require_same_grid(a.grid(), b.grid());
    return SpectralField(a.grid(), zip(a.coeffs(), b.coeffs(), std::minus<>{}));
}

SpectralField operator*(double s, const SpectralField& a) {
    std::vector<Complex> c(a.coeffs().begin(), a.coeffs().end());
    for (auto& v : c) v *= s;
    return SpectralField(a.grid(), std::move(c));
}

RealField operator+(const RealField& a, const RealField& b) {
    require_same_grid(a.grid(), b.grid());
    return RealField(a.grid(), zip(a.values(), b.values(), std::plus<>{}));
}

RealField operator-(const RealField& a, const RealField& b) {
    require_same_grid(a.grid(), b.grid());
    return RealField(a.grid(), zip(a.values(), b.values(), std::minus<>{}));
}

RealField operator*(const RealField& a, const RealField& b) {
    require_same_grid(a.grid(), b.grid());
    return RealField(a.grid(), zip(a.values(), b.values(), std::multiplies<>{}));
}

RealField operator*(double s, const RealField& a) {
    std::vector<double> v(a.values().begin(), a.values().end());
    for (auto& x : v) x *= s;
    return RealField(a.grid(), std::move(v));
}

double max_abs_diff(const RealField& a, const RealField& b) {
    require_same_grid(a.grid(), b.grid());
    double m = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) m = std::max(m, std::abs(a[j] - b[j]));
    return m;
}

}  // namespace ccf::spectral
