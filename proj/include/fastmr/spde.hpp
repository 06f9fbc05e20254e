#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace fastmr {

// Uniform grid on [0, x_max]; node 0 sits at x = 0.
struct SpatialGrid {
    double dx = 0.02;
    double x_max = 10.0;

    std::size_t n_nodes() const { return static_cast<std::size_t>(x_max / dx + 0.5) + 1; }
    double x(std::size_t j) const { return dx * static_cast<double>(j); }
    void validate() const {
        if (!(dx > 0.0) || !(x_max > dx)) throw std::invalid_argument("invalid spatial grid");
    }
};

enum class FieldKind {
    Density,  // u: Dirichlet u(t,0) = 0, absorbing zero at x_max
    Survival, // v: Neumann v_x(t,0) = 0 (ghost node), Dirichlet 0 at x_max
};

struct SpdeParams {
    SpatialGrid grid;
    double dt = 1e-4;
    double r = 0.05;
    double rho1 = 0.5;
};

class CflError : public std::runtime_error {
public:
    CflError(const std::string& msg, double suggested_dt)
        : std::runtime_error(msg), suggested_dt(suggested_dt) {}
    double suggested_dt;
};

// Semi-implicit transport-noise stepper: implicit centred diffusion
// h^2/2, explicit conservative-upwind drift -(r - h^2/2) u_x, explicit
// centred transport noise -rho1 h u_x dW with the Milstein-type
// correction (rho1^2 h^2 / 2) u_xx ((dW)^2 - dt). Boundary fluxes of the
// explicit terms are upwinded / one-sided so that discrete mass can only
// leave through the barrier and the far-field cut-off.
class SpdeStepper {
public:
    SpdeStepper(const SpdeParams& params, FieldKind kind, std::vector<double> initial);

    void step(double h_s, double dW);

    const std::vector<double>& values() const { return u_; }
    const SpdeParams& params() const { return params_; }
    FieldKind kind() const { return kind_; }
    double time() const { return t_; }

    double mass() const;       // integral of u (density) or v at 0 (survival)
    double norm2() const;      // discrete squared L2 norm
    double grad_norm2() const; // discrete squared L2 norm of the x-derivative
    double clipped_mass() const { return clipped_mass_; }
    std::size_t clip_events() const { return clip_events_; }

private:
    void check_cfl(double h_s) const;

    SpdeParams params_;
    FieldKind kind_;
    std::vector<double> u_, work_, thomas_c_, thomas_d_;
    double t_ = 0.0;
    double clipped_mass_ = 0.0;
    std::size_t clip_events_ = 0;
};

// A solved field with per-step diagnostics; snapshots of the full
// profile are kept every `snapshot_stride` steps (0 = none beyond the
// initial and final profiles).
struct SpdeField {
    SpatialGrid grid;
    FieldKind kind = FieldKind::Density;
    double dt = 0.0;
    double rho1 = 0.0;
    std::vector<double> t_grid;         // every time level, size n_steps + 1
    std::vector<double> mass;           // per level
    std::vector<double> norm2;          // per level
    std::vector<double> grad_norm2;     // per level
    std::vector<double> h_used;         // per step, size n_steps
    std::vector<double> snapshot_times;
    std::vector<std::vector<double>> snapshots;
    double clipped_mass = 0.0;

    std::vector<double> loss_curve() const; // L_t = 1 - mass
};

// h_values has one entry per time step (h evaluated at the step's left
// endpoint); w0_increments the matching Brownian increments.
SpdeField solve_density(const std::vector<double>& u0, const std::vector<double>& h_values,
                        const std::vector<double>& w0_increments, const SpdeParams& params,
                        std::size_t snapshot_stride = 0);

SpdeField solve_survival(const std::vector<double>& v0, const std::vector<double>& h_values,
                         const std::vector<double>& w0_increments, const SpdeParams& params,
                         std::size_t snapshot_stride = 0);

// Relative residual per time level of the discrete energy balance
// ||u(t)||^2 + (1 - rho1^2) sum h^2 ||u_x||^2 dt = ||u0||^2.
std::vector<double> energy_residual(const SpdeField& field);

std::vector<double> loss_from_field(const SpdeField& field);

// Rayleigh initial data (scale beta): density vanishes at 0 and has a
// closed-form tail, which keeps the Dirichlet/Neumann data consistent.
double rayleigh_density(double x, double beta);
double rayleigh_tail(double x, double beta);
std::vector<double> rayleigh_u0(const SpatialGrid& grid, double beta);
std::vector<double> rayleigh_v0(const SpatialGrid& grid, double beta);

} // namespace fastmr
