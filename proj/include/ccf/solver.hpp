#pragma once
// Time integration of theta_t = H(theta) theta_x - Lambda^gamma theta on the
// torus.
//
// Scheme: integrating-factor (Lawson) fourth-order Runge-Kutta. Each mode is
// advanced with the exact factor exp(-|m|^gamma dt) on the dissipation and
// classical RK4 on the nonlinear term in the transformed variable. The
// linear part is unconditionally stable; the nonlinear part is limited by
//   dt = min(dt_max, cfl * dx / max(1, ||H theta||_inf)).

#include "ccf/regularity.hpp"
#include "ccf/spectral.hpp"

#include <string>
#include <vector>

namespace ccf::solver {

using spectral::RealField;
using spectral::SpectralField;

struct ModelParams {
    double gamma = 0.9;
    bool dissipation_on = true;
    bool dealias_on = true;
    std::size_t n = 256;
    /// Test hook: drop the transport term to leave pure dissipation.
    bool nonlinear_on = true;

    void validate() const;
};

struct StepControl {
    double cfl = 0.5;
    double dt_max = 0.01;
    double t_end = 1.0;
    double snapshot_every = 0.01;

    void validate() const;
};

struct SolverState {
    double t = 0.0;
    SpectralField theta_hat;
    std::size_t step_count = 0;
};

enum class Outcome { Completed, BlowupSuspected, UnderResolved, StepCollapse, Failed };

const char* to_string(Outcome o);
/// Inverse of to_string; throws SchemaError for unknown names.
Outcome outcome_from_string(const std::string& s);

/// Thrown by step() when the state can no longer be advanced.
class SimulationFault : public std::runtime_error {
public:
    SimulationFault(Outcome kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    Outcome kind() const noexcept { return kind_; }

private:
    Outcome kind_;
};

/// Smallest admissible step before StepCollapse is declared.
inline constexpr double kMinStep = 1e-12;

/// FFT of H(theta) * theta_x from two inverse transforms and a pointwise
/// product, dealiased when p.dealias_on. Zero when p.nonlinear_on is false.
/// Throws SimulationFault(BlowupSuspected) on non-finite values.
SpectralField nonlinear_term(const SpectralField& theta_hat, const ModelParams& p);

/// CFL-limited step size for the current state.
double stable_dt(const SpectralField& theta_hat, const ModelParams& p, const StepControl& c);

/// One Lawson-RK4 step of exactly `dt`.
SolverState advance(const SolverState& s, const ModelParams& p, double dt);

/// advance() by stable_dt(). Throws SimulationFault on NaN/Inf
/// (BlowupSuspected) or when dt < kMinStep (StepCollapse).
SolverState step(const SolverState& s, const ModelParams& p, const StepControl& c);

/// Tail fraction: energy in |m| > n/4 over total energy without the mean.
double resolution_monitor(const SpectralField& theta_hat);

struct DiagnosticPlan {
    std::vector<double> holder_alphas;
    /// min(2(1 - gamma), 1/2) when admissible, plus 1/2; sorted, deduplicated.
    static DiagnosticPlan for_gamma(double gamma);
};

struct RunResult {
    std::vector<regularity::DiagnosticsSample> samples;
    Outcome outcome = Outcome::Completed;
    std::string detail;
    std::size_t step_count = 0;
    double t_final = 0.0;
};

/// Gradient growth over the initial ||theta_x||_inf that counts as blow-up.
inline constexpr double kGradientBlowupFactor = 1e3;
/// Tail growth across one snapshot interval that turns an under-resolved
/// flag into a blow-up suspicion.
inline constexpr double kTailGrowthFactor = 10.0;

/// Integrates from theta0 to c.t_end, sampling diagnostics at t = 0 and every
/// c.snapshot_every (steps are shortened to land on snapshot times). Stops
/// early on a fault; the last sample is always the state at stop time.
RunResult run(const RealField& theta0, const ModelParams& p, const StepControl& c, const DiagnosticPlan& plan);

}  // namespace ccf::solver
