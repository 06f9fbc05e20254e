#include "fastmr/spde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace fastmr {

SpdeStepper::SpdeStepper(const SpdeParams& params, FieldKind kind, std::vector<double> initial)
    : params_(params), kind_(kind), u_(std::move(initial)) {
    params_.grid.validate();
    if (!(params_.dt > 0.0)) throw std::invalid_argument("spde: dt must be positive");
    if (params_.rho1 < 0.0 || params_.rho1 >= 1.0)
        throw std::invalid_argument("spde: rho1 must lie in [0,1)");
    const std::size_t n = params_.grid.n_nodes();
    if (u_.size() != n) throw std::invalid_argument("spde: initial data size does not match grid");
    if (kind_ == FieldKind::Density && u_.front() != 0.0)
        throw std::invalid_argument("spde: density initial data must vanish at x=0");
    u_.back() = 0.0;
    work_.resize(n);
    thomas_c_.resize(n);
    thomas_d_.resize(n);
}

void SpdeStepper::check_cfl(double h_s) const {
    const double dx = params_.grid.dx;
    const double a = std::abs(params_.r - 0.5 * h_s * h_s);
    double limit = std::numeric_limits<double>::infinity();
    if (a > 0.0) limit = std::min(limit, dx / (2.0 * a));
    const double rh = params_.rho1 * h_s;
    if (rh > 0.0) limit = std::min(limit, dx * dx / (rh * rh));
    if (params_.dt > limit) {
        std::ostringstream os;
        os << "spde: CFL violation at t=" << t_ << " (h=" << h_s << "): dt=" << params_.dt
           << " > " << limit;
        throw CflError(os.str(), 0.9 * limit);
    }
}

void SpdeStepper::step(double h_s, double dW) {
    check_cfl(h_s);
    const double dx = params_.grid.dx;
    const double dt = params_.dt;
    const std::size_t M = u_.size() - 1; // far-field node index
    const double a = params_.r - 0.5 * h_s * h_s;
    const double s = params_.rho1 * h_s * dW;
    const double q = 0.5 * params_.rho1 * params_.rho1 * h_s * h_s * (dW * dW - dt);
    const double mass_before = mass();

    if (kind_ == FieldKind::Density) {
        // total explicit flux through each face j+1/2, j = 0..M-1
        // (drift upwinded; noise centred with upwinded boundary faces;
        // Milstein diffusive flux, suppressed at the boundary when
        // antidiffusive so mass cannot enter the domain)
        auto face_flux = [&](std::size_t j) {
            const double ul = u_[j], ur = u_[j + 1];
            double f = dt * (a > 0.0 ? a * ul : a * ur);
            if (j == 0)
                f += s > 0.0 ? s * ul : s * ur;
            else if (j == M - 1)
                f += s > 0.0 ? s * ul : s * ur;
            else
                f += s * 0.5 * (ul + ur);
            const double g = q * (ur - ul) / dx;
            if (q > 0.0 || (j != 0 && j != M - 1)) f -= g;
            return f;
        };
        work_[0] = 0.0;
        work_[M] = 0.0;
        double flux_left = face_flux(0);
        for (std::size_t j = 1; j < M; ++j) {
            const double flux_right = face_flux(j);
            work_[j] = u_[j] - (flux_right - flux_left) / dx;
            flux_left = flux_right;
        }
    } else {
        // survival field: mirror ghost at x=0 (v_x(0) = 0), zero at x_max
        auto at = [&](std::ptrdiff_t j) -> double {
            if (j < 0) return u_[static_cast<std::size_t>(-j)];
            return u_[static_cast<std::size_t>(j)];
        };
        for (std::size_t j = 0; j < M; ++j) {
            const auto js = static_cast<std::ptrdiff_t>(j);
            const double up = (j + 1 <= M) ? u_[j + 1] : 0.0;
            const double um = at(js - 1);
            const double dup = a > 0.0 ? (u_[j] - um) / dx : (up - u_[j]) / dx;
            const double dctr = (up - um) / (2.0 * dx);
            const double d2 = (up - 2.0 * u_[j] + um) / (dx * dx);
            work_[j] = u_[j] - dt * a * dup - s * dctr + q * d2;
        }
        work_[M] = 0.0;
    }

    // clip explicit-stage undershoots; for the conservative density form
    // the clipped mass is rescaled away again so the total cannot grow
    double pre_clip_sum = 0.0;
    if (kind_ == FieldKind::Density)
        for (std::size_t j = 0; j <= M; ++j) pre_clip_sum += work_[j];
    bool clipped = false;
    for (std::size_t j = 0; j <= M; ++j) {
        if (work_[j] < 0.0) {
            clipped_mass_ += -work_[j] * dx;
            ++clip_events_;
            work_[j] = 0.0;
            clipped = true;
        }
    }
    if (clipped && kind_ == FieldKind::Density && pre_clip_sum > 0.0) {
        double post_clip_sum = 0.0;
        for (std::size_t j = 0; j <= M; ++j) post_clip_sum += work_[j];
        if (post_clip_sum > pre_clip_sum) {
            const double scale = pre_clip_sum / post_clip_sum;
            for (std::size_t j = 0; j <= M; ++j) work_[j] *= scale;
        }
    }
    if (clipped_mass_ > 1e-2) {
        std::ostringstream os;
        os << "spde: cumulative clipped mass " << clipped_mass_ << " exceeds 1e-2 at t=" << t_;
        throw std::runtime_error(os.str());
    }

    // implicit diffusion (I - lambda D2) u = work, Thomas solve
    const double lambda = 0.5 * h_s * h_s * dt / (dx * dx);
    if (kind_ == FieldKind::Density) {
        // unknowns 1..M-1, Dirichlet ends
        const double diag = 1.0 + 2.0 * lambda;
        thomas_c_[1] = -lambda / diag;
        thomas_d_[1] = work_[1] / diag;
        for (std::size_t j = 2; j < M; ++j) {
            const double m = diag + lambda * thomas_c_[j - 1];
            thomas_c_[j] = -lambda / m;
            thomas_d_[j] = (work_[j] + lambda * thomas_d_[j - 1]) / m;
        }
        u_[M] = 0.0;
        u_[0] = 0.0;
        double next = 0.0;
        for (std::size_t j = M - 1; j >= 1; --j) {
            u_[j] = thomas_d_[j] - thomas_c_[j] * next;
            next = u_[j];
        }
    } else {
        // unknowns 0..M-1; row 0 uses the mirror ghost: (1+2L) v0 - 2L v1
        const double diag = 1.0 + 2.0 * lambda;
        thomas_c_[0] = -2.0 * lambda / diag;
        thomas_d_[0] = work_[0] / diag;
        for (std::size_t j = 1; j < M; ++j) {
            const double m = diag + lambda * thomas_c_[j - 1];
            thomas_c_[j] = -lambda / m;
            thomas_d_[j] = (work_[j] + lambda * thomas_d_[j - 1]) / m;
        }
        u_[M] = 0.0;
        double next = 0.0;
        for (std::size_t j = M; j-- > 0;) {
            u_[j] = thomas_d_[j] - thomas_c_[j] * next;
            next = u_[j];
        }
    }

    t_ += dt;

    if (!std::isfinite(u_[M / 2]) || !std::isfinite(mass())) {
        std::ostringstream os;
        os << "spde: non-finite values at t=" << t_ << " (blowup); dt=" << dt << " dx=" << dx;
        throw std::runtime_error(os.str());
    }
    if (kind_ == FieldKind::Density && mass() > mass_before + 1e-8) {
        std::ostringstream os;
        os << "spde: mass increased by " << mass() - mass_before << " at t=" << t_
           << " (negative-mass blowup guard)";
        throw std::runtime_error(os.str());
    }
}

double SpdeStepper::mass() const {
    if (kind_ == FieldKind::Survival) return u_.front();
    double m = 0.0;
    for (double v : u_) m += v;
    return m * params_.grid.dx;
}

double SpdeStepper::norm2() const {
    double n = 0.0;
    for (double v : u_) n += v * v;
    return n * params_.grid.dx;
}

double SpdeStepper::grad_norm2() const {
    double n = 0.0;
    const double dx = params_.grid.dx;
    for (std::size_t j = 0; j + 1 < u_.size(); ++j) {
        const double d = (u_[j + 1] - u_[j]) / dx;
        n += d * d;
    }
    return n * dx;
}

namespace {

SpdeField solve_impl(FieldKind kind, const std::vector<double>& init,
                     const std::vector<double>& h_values, const std::vector<double>& w0_increments,
                     const SpdeParams& params, std::size_t snapshot_stride) {
    if (h_values.size() != w0_increments.size())
        throw std::invalid_argument("spde: h_values and w0_increments must have equal length");
    SpdeStepper st(params, kind, init);
    SpdeField f;
    f.grid = params.grid;
    f.kind = kind;
    f.dt = params.dt;
    f.rho1 = params.rho1;
    const std::size_t n = h_values.size();
    f.t_grid.reserve(n + 1);
    f.mass.reserve(n + 1);
    f.norm2.reserve(n + 1);
    f.grad_norm2.reserve(n + 1);
    f.h_used = h_values;

    auto record = [&](std::size_t k) {
        f.t_grid.push_back(params.dt * static_cast<double>(k));
        f.mass.push_back(st.mass());
        f.norm2.push_back(st.norm2());
        f.grad_norm2.push_back(st.grad_norm2());
        if (k == 0 || k == n || (snapshot_stride > 0 && k % snapshot_stride == 0)) {
            f.snapshot_times.push_back(f.t_grid.back());
            f.snapshots.push_back(st.values());
        }
    };

    record(0);
    for (std::size_t k = 0; k < n; ++k) {
        st.step(h_values[k], w0_increments[k]);
        record(k + 1);
    }
    f.clipped_mass = st.clipped_mass();
    return f;
}

} // namespace

SpdeField solve_density(const std::vector<double>& u0, const std::vector<double>& h_values,
                        const std::vector<double>& w0_increments, const SpdeParams& params,
                        std::size_t snapshot_stride) {
    return solve_impl(FieldKind::Density, u0, h_values, w0_increments, params, snapshot_stride);
}

SpdeField solve_survival(const std::vector<double>& v0, const std::vector<double>& h_values,
                         const std::vector<double>& w0_increments, const SpdeParams& params,
                         std::size_t snapshot_stride) {
    return solve_impl(FieldKind::Survival, v0, h_values, w0_increments, params, snapshot_stride);
}

std::vector<double> energy_residual(const SpdeField& field) {
    if (field.kind != FieldKind::Density)
        throw std::invalid_argument("energy_residual: defined for density fields only");
    const double n0 = field.norm2.front();
    const double c = 1.0 - field.rho1 * field.rho1;
    std::vector<double> res(field.t_grid.size());
    double dissipated = 0.0;
    res[0] = 0.0;
    for (std::size_t k = 0; k < field.h_used.size(); ++k) {
        dissipated += field.h_used[k] * field.h_used[k] * field.grad_norm2[k] * field.dt;
        res[k + 1] = std::abs(field.norm2[k + 1] + c * dissipated - n0) / n0;
    }
    return res;
}

std::vector<double> SpdeField::loss_curve() const {
    std::vector<double> out(mass.size());
    for (std::size_t k = 0; k < mass.size(); ++k) out[k] = 1.0 - mass[k];
    return out;
}

std::vector<double> loss_from_field(const SpdeField& field) { return field.loss_curve(); }

double rayleigh_density(double x, double beta) {
    if (x <= 0.0) return 0.0;
    const double b2 = beta * beta;
    return x / b2 * std::exp(-x * x / (2.0 * b2));
}

double rayleigh_tail(double x, double beta) {
    if (x <= 0.0) return 1.0;
    return std::exp(-x * x / (2.0 * beta * beta));
}

std::vector<double> rayleigh_u0(const SpatialGrid& grid, double beta) {
    std::vector<double> u(grid.n_nodes());
    for (std::size_t j = 0; j < u.size(); ++j) u[j] = rayleigh_density(grid.x(j), beta);
    u.back() = 0.0;
    return u;
}

std::vector<double> rayleigh_v0(const SpatialGrid& grid, double beta) {
    std::vector<double> v(grid.n_nodes());
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = rayleigh_tail(grid.x(j), beta);
    v.back() = 0.0;
    return v;
}

} // namespace fastmr
