#pragma once
// Uniform grids on the 2*pi-periodic torus and the discrete Fourier machinery
// every other module is written against.
//
// Normalization: coeff_m = (1/n) sum_j f(x_j) exp(-i m x_j), so cos(x) maps to
// 1/2 on m = +1 and m = -1. Modes are stored in FFT order: slot k holds
// m = k for k <= n/2 and m = k - n otherwise. Slot n/2 is the Nyquist mode.

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace ccf::spectral {

using Complex = std::complex<double>;

class TorusGrid {
public:
    /// Throws ValidationError unless n is even and at least 8.
    explicit TorusGrid(std::size_t n);

    std::size_t size() const noexcept { return n_; }
    double spacing() const noexcept;
    double point(std::size_t j) const noexcept;
    std::vector<double> points() const;

    /// Signed wavenumber stored in FFT slot k.
    long mode(std::size_t slot) const noexcept;
    /// FFT slot of wavenumber m, for m in (-n/2, n/2].
    std::size_t slot(long m) const;
    long nyquist() const noexcept { return static_cast<long>(n_ / 2); }

    friend bool operator==(const TorusGrid&, const TorusGrid&) = default;

private:
    std::size_t n_;
};

/// Real samples on a torus grid. All entries are finite.
class RealField {
public:
    RealField(TorusGrid grid, std::vector<double> values);
    /// Samples `f` at the grid points.
    static RealField sample(const TorusGrid& grid, const std::function<double(double)>& f);
    static RealField zeros(const TorusGrid& grid);

    const TorusGrid& grid() const noexcept { return grid_; }
    std::span<const double> values() const noexcept { return values_; }
    double operator[](std::size_t j) const noexcept { return values_[j]; }
    std::size_t size() const noexcept { return values_.size(); }

    double max_abs() const noexcept;
    double min() const noexcept;
    double max() const noexcept;

private:
    TorusGrid grid_;
    std::vector<double> values_;
};

/// Hermitian Fourier coefficients of a real field.
class SpectralField {
public:
    static constexpr double kSymmetryTolerance = 1e-12;

    /// `coeffs` in FFT order. Throws ValidationError when conjugate symmetry
    /// (or reality of the mean and Nyquist modes) is violated by more than
    /// kSymmetryTolerance relative to max(1, max |coeff|).
    SpectralField(TorusGrid grid, std::vector<Complex> coeffs);
    static SpectralField zeros(const TorusGrid& grid);

    const TorusGrid& grid() const noexcept { return grid_; }
    std::span<const Complex> coeffs() const noexcept { return coeffs_; }
    /// Coefficient of wavenumber m, m in (-n/2, n/2].
    Complex at(long m) const { return coeffs_[grid_.slot(m)]; }
    std::size_t size() const noexcept { return coeffs_.size(); }

private:
    TorusGrid grid_;
    std::vector<Complex> coeffs_;
};

/// Throws NumericalError on non-finite input.
SpectralField forward(const RealField& f);
RealField inverse(const SpectralField& F);

/// Multiplies slot-wise by `symbol(m)`. The caller guarantees symbol(-m) ==
/// conj(symbol(m)); the Nyquist entry is multiplied by the real part of
/// symbol(n/2) only.
SpectralField apply_symbol(const SpectralField& F, const std::function<Complex(long)>& symbol);

/// i*m on every mode, Nyquist zeroed.
SpectralField derivative(const SpectralField& F);
/// Zeroes |m| > floor(n/3).
SpectralField dealias(const SpectralField& F);
/// Coefficients of f(x + shift), a continuous translation.
SpectralField translate(const SpectralField& F, double shift);

/// Energy in |m| > cutoff over energy in m != 0; 0 for a constant field.
double tail_fraction(const SpectralField& F, long cutoff);

/// 2*pi * sum |coeff|^2, the squared L2(T) norm via Parseval.
double parseval_energy(const SpectralField& F);
/// 2*pi * mean(f^2), the squared L2(T) norm by the trapezoid rule.
double physical_energy(const RealField& f);

SpectralField operator+(const SpectralField& a, const SpectralField& b);
SpectralField operator-(const SpectralField& a, const SpectralField& b);
SpectralField operator*(double s, const SpectralField& a);

RealField operator+(const RealField& a, const RealField& b);
RealField operator-(const RealField& a, const RealField& b);
/// Pointwise product.
RealField operator*(const RealField& a, const RealField& b);
RealField operator*(double s, const RealField& a);

/// max_j |a_j - b_j|.
double max_abs_diff(const RealField& a, const RealField& b);

}  // namespace ccf::spectral
