#include "fastmr/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "fastmr/parallel.hpp"

namespace fastmr {

FitResult fit_log_log(const std::vector<double>& eps_grid, const std::vector<double>& errors) {
    if (eps_grid.size() != errors.size() || eps_grid.size() < 3)
        throw std::invalid_argument("fit_log_log: need >= 3 matching points");
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < eps_grid.size(); ++i) {
        if (!(eps_grid[i] > 0.0) || !(errors[i] > 0.0))
            throw std::invalid_argument("fit_log_log: eps and error values must be positive");
        lx.push_back(std::log(eps_grid[i]));
        ly.push_back(std::log(errors[i]));
    }
    const double n = static_cast<double>(lx.size());
    const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
    const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
        syy += (ly[i] - my) * (ly[i] - my);
    }
    FitResult f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    return f;
}

void RateReport::finalize() {
    std::vector<double> eps, err;
    for (const auto& p : points) {
        eps.push_back(p.eps);
        err.push_back(p.error);
    }
    fit = fit_log_log(eps, err);
    monotone_ok = true;
    for (std::size_t i = 0; i + 1 < points.size(); ++i)
        if (!(points[i + 1].error < points[i].error + points[i + 1].std_error))
            monotone_ok = false;
}

namespace {

double ks_statistic(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        // advance both walks past the tied value before recording
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == x) ++i;
        while (j < b.size() && b[j] == x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

} // namespace

KsResult ks_two_sample(const std::vector<double>& a, const std::vector<double>& b,
                       std::size_t n_bootstrap, std::uint64_t seed) {
    if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
    KsResult res;
    res.statistic = ks_statistic(a, b);
    if (n_bootstrap == 0) return res;
    RandomStream rs(mix_key(seed, 0x6B736273ULL)); // "ksbs"
    std::vector<double> stats(n_bootstrap);
    std::vector<double> ra(a.size()), rb(b.size());
    for (auto& st : stats) {
        for (auto& v : ra) v = a[static_cast<std::size_t>(rs.uniform() * a.size())];
        for (auto& v : rb) v = b[static_cast<std::size_t>(rs.uniform() * b.size())];
        st = ks_statistic(ra, rb);
    }
    std::sort(stats.begin(), stats.end());
    res.band_lo = stats[static_cast<std::size_t>(0.025 * (n_bootstrap - 1))];
    res.band_hi = stats[static_cast<std::size_t>(0.975 * (n_bootstrap - 1))];
    return res;
}

namespace {

// coarsening factors so that every eps value's grid dt = eps/50 is an
// integer multiple of the finest grid
struct EpsGrids {
    double dt_fine = 0.0;
    std::size_t n_fine = 0;
    std::vector<std::size_t> factors;
};

EpsGrids plan_eps_grids(const std::vector<double>& eps_grid, double horizon) {
    if (eps_grid.size() < 2) throw std::invalid_argument("eps grid needs >= 2 values");
    for (std::size_t i = 0; i + 1 < eps_grid.size(); ++i)
        if (!(eps_grid[i] > eps_grid[i + 1]))
            throw std::invalid_argument("eps grid must be strictly decreasing");
    EpsGrids g;
    g.dt_fine = eps_grid.back() / 50.0;
    const double nf = horizon / g.dt_fine;
    g.n_fine = static_cast<std::size_t>(std::llround(nf));
    if (std::abs(nf - static_cast<double>(g.n_fine)) > 1e-9)
        throw std::invalid_argument("horizon must be a multiple of the finest dt = eps_min/50");
    for (double e : eps_grid) {
        const double f = e / eps_grid.back();
        const auto fi = static_cast<std::size_t>(std::llround(f));
        if (std::abs(f - static_cast<double>(fi)) > 1e-9)
            throw std::invalid_argument("eps grid values must be integer multiples of eps_min");
        if (g.n_fine % fi != 0)
            throw std::invalid_argument("horizon must be divisible by every eps grid dt");
        g.factors.push_back(fi);
    }
    return g;
}

double mean_of(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// RMS of v with a delta-method standard error for the square root
RatePoint rms_point(double eps, const std::vector<double>& squared) {
    RatePoint p;
    p.eps = eps;
    const double m = mean_of(squared);
    double var = 0.0;
    for (double s : squared) var += (s - m) * (s - m);
    var /= static_cast<double>(squared.size() - 1);
    const double se_m = std::sqrt(var / static_cast<double>(squared.size()));
    p.error = std::sqrt(m);
    p.std_error = p.error > 0.0 ? se_m / (2.0 * p.error) : se_m;
    return p;
}

struct LimitModel {
    CoefficientVector coeffs;
    VolFunctionSpec spec;
};

// constant-volatility comparison model: volatility sigma21, correlation rho
LimitModel make_limit_model(const LargeStudyConfig& cfg, double rho) {
    LimitModel lm;
    lm.coeffs = cfg.coeffs;
    lm.coeffs.rho1 = rho;
    lm.coeffs.xi = 0.0;
    lm.spec = cfg.spec;
    lm.spec.h_kind = HKind::Constant;
    lm.spec.h_const = cfg.moments.sigma21.value;
    return lm;
}

double portfolio_loss_at(const PortfolioParams& params, const NoiseBundle& bundle, double t) {
    return simulate_portfolio_loss(params, bundle, {t})[0].conditional_loss;
}

struct LargeStudySamples {
    std::vector<std::vector<double>> eps_losses; // [eps][outer]
    std::vector<double> limit_a, limit_b;        // [outer]
};

LargeStudySamples run_large_study(const LargeStudyConfig& cfg, double limit_rho) {
    cfg.coeffs.validate();
    cfg.spec.validate();
    cfg.market.validate();
    if (cfg.market.rho3 != 0.0)
        throw std::invalid_argument("large vol-of-vol study requires rho3 = 0");
    if (!cfg.spec.h_bounded())
        throw std::invalid_argument("large vol-of-vol study requires a bounded h");
    if (!(cfg.moments.sigma21.value > 0.0))
        throw std::invalid_argument("large vol-of-vol study: stationary moments not provided");

    const EpsGrids grids = plan_eps_grids(cfg.eps_grid, cfg.t);
    const std::size_t factor_lim = grids.factors.front(); // coarsest grid for the limit model
    const LimitModel lim = make_limit_model(cfg, limit_rho);

    LargeStudySamples out;
    out.eps_losses.assign(cfg.eps_grid.size(), std::vector<double>(cfg.n_outer, 0.0));
    out.limit_a.assign(cfg.n_outer, 0.0);
    out.limit_b.assign(cfg.n_outer, 0.0);

    parallel_for(cfg.n_outer, [&](std::size_t j) {
        const NoiseBundle fine(mix_key(cfg.seed, 0x0A11CEULL, j), grids.dt_fine, grids.n_fine,
                               cfg.market.rho3);
        for (std::size_t e = 0; e < cfg.eps_grid.size(); ++e) {
            PortfolioParams pp;
            pp.coeffs = cfg.coeffs;
            pp.spec = cfg.spec;
            pp.regime = ScalingRegime::large(cfg.eps_grid[e]);
            pp.market = cfg.market;
            pp.n_inner = cfg.n_inner;
            const NoiseBundle b = fine.coarsen(grids.factors[e]);
            out.eps_losses[e][j] = portfolio_loss_at(pp, b, cfg.t);
        }
        PortfolioParams lp;
        lp.coeffs = lim.coeffs;
        lp.spec = lim.spec;
        lp.regime = ScalingRegime::unscaled();
        lp.market = cfg.market;
        lp.n_inner = cfg.n_inner;
        const NoiseBundle bl = fine.coarsen(factor_lim);
        out.limit_a[j] = portfolio_loss_at(lp, bl, cfg.t);
        lp.asset_offset = cfg.n_inner; // independent idiosyncratic replica
        out.limit_b[j] = portfolio_loss_at(lp, bl, cfg.t);
    });
    return out;
}

} // namespace

WeakStudyResult weak_convergence_study(const LargeStudyConfig& cfg) {
    const double rho_tilde =
        cfg.coeffs.rho1 * cfg.moments.sigma_tilde.value / cfg.moments.sigma21.value;
    const LargeStudySamples s = run_large_study(cfg, rho_tilde);

    WeakStudyResult res;
    res.samples = s.eps_losses;
    res.limit_a = s.limit_a;
    res.limit_b = s.limit_b;
    for (std::size_t e = 0; e < cfg.eps_grid.size(); ++e) {
        KsPoint p;
        p.eps = cfg.eps_grid[e];
        p.ks = ks_two_sample(s.eps_losses[e], s.limit_a, cfg.n_bootstrap, mix_key(cfg.seed, e));
        res.points.push_back(p);
    }
    res.floor = ks_two_sample(s.limit_a, s.limit_b, cfg.n_bootstrap, mix_key(cfg.seed, 0xF100ULL));
    res.nonincreasing_within_bands = true;
    for (std::size_t e = 0; e + 1 < res.points.size(); ++e) {
        const auto& a = res.points[e].ks;
        const auto& b = res.points[e + 1].ks;
        const double tol = 0.5 * ((a.band_hi - a.band_lo) + (b.band_hi - b.band_lo));
        if (!(b.statistic <= a.statistic + tol)) res.nonincreasing_within_bands = false;
    }
    return res;
}

PlateauResult strong_failure_study(const LargeStudyConfig& cfg) {
    const double rho_prime =
        cfg.coeffs.rho1 * cfg.moments.sigma11.value / cfg.moments.sigma21.value;
    const LargeStudySamples s = run_large_study(cfg, rho_prime);

    PlateauResult res;
    for (std::size_t e = 0; e < cfg.eps_grid.size(); ++e) {
        std::vector<double> sq(cfg.n_outer);
        for (std::size_t j = 0; j < cfg.n_outer; ++j) {
            const double d = s.eps_losses[e][j] - s.limit_a[j];
            sq[j] = d * d;
        }
        res.distances.push_back(rms_point(cfg.eps_grid[e], sq));
    }
    double fl = 0.0;
    for (std::size_t j = 0; j < cfg.n_outer; ++j) {
        const double d = s.limit_a[j] - s.limit_b[j];
        fl += d * d;
    }
    res.floor = std::sqrt(fl / static_cast<double>(cfg.n_outer));
    res.ratio_at_smallest =
        res.floor > 0.0 ? res.distances.back().error / res.floor
                        : std::numeric_limits<double>::infinity();
    return res;
}

RateReport small_volvol_vol_rate(const VolRateConfig& cfg) {
    cfg.coeffs.validate();
    cfg.spec.validate();
    if (!(cfg.p >= 1.0)) throw std::invalid_argument("small_volvol_vol_rate: p >= 1 required");
    if (!cfg.spec.g_differentiable() && !cfg.spec.g_cir_like())
        throw std::invalid_argument("small_volvol_vol_rate: unsupported g kind");

    const EpsGrids grids = plan_eps_grids(cfg.eps_grid, cfg.t);
    const bool ou = cfg.spec.g_kind == GKind::ConstantOne;
    VolScheme scheme = VolScheme::Euler;
    if (ou) scheme = VolScheme::ExactOu;
    else if (cfg.spec.g_cir_like()) scheme = VolScheme::FullTruncationEuler;

    std::vector<std::vector<double>> errs(cfg.eps_grid.size(),
                                          std::vector<double>(cfg.n_paths, 0.0));
    parallel_for(cfg.n_paths, [&](std::size_t i) {
        const NoiseBundle fine(mix_key(cfg.seed, 0xB0B0ULL, i), grids.dt_fine, grids.n_fine, 0.0);
        RandomStream init = fine.init_stream(1);
        const double z = init.normal(); // shared stationary-start draw across eps
        for (std::size_t e = 0; e < cfg.eps_grid.size(); ++e) {
            const double eps = cfg.eps_grid[e];
            const ScalingRegime regime = ScalingRegime::small(eps);
            double sigma0 = cfg.coeffs.theta;
            if (!std::isnan(cfg.sigma0)) sigma0 = cfg.sigma0;
            else if (ou && cfg.coeffs.xi > 0.0)
                sigma0 += cfg.coeffs.xi * std::sqrt(eps / (2.0 * cfg.coeffs.kappa)) * z;
            const NoiseBundle b = fine.coarsen(grids.factors[e]);
            const VolPath vp = simulate_vol(cfg.coeffs, cfg.spec, regime, b, 1, scheme, sigma0);
            double acc = 0.0;
            const bool p2 = cfg.p == 2.0;
            for (std::size_t k = 0; k < b.n_steps(); ++k) {
                const double d = vp.values[k] - cfg.coeffs.theta;
                acc += (p2 ? d * d : std::pow(std::abs(d), cfg.p)) * b.dt();
            }
            errs[e][i] = acc;
        }
    });

    RateReport rep;
    rep.coupling = "common-noise";
    for (std::size_t e = 0; e < cfg.eps_grid.size(); ++e) {
        RatePoint p;
        p.eps = cfg.eps_grid[e];
        p.error = mean_of(errs[e]);
        double var = 0.0;
        for (double v : errs[e]) var += (v - p.error) * (v - p.error);
        var /= static_cast<double>(cfg.n_paths - 1);
        p.std_error = std::sqrt(var / static_cast<double>(cfg.n_paths));
        rep.points.push_back(p);
    }
    rep.finalize();
    return rep;
}

FieldStudyResult small_volvol_field_study(const FieldStudyConfig& cfg) {
    cfg.coeffs.validate();
    cfg.spec.validate();
    cfg.market.validate();
    cfg.grid.validate();
    const EpsGrids grids = plan_eps_grids(cfg.eps_grid, cfg.T);
    const std::vector<double> v0 = rayleigh_v0(cfg.grid, cfg.market.beta);
    const std::size_t n_x = cfg.grid.n_nodes();
    const double dx = cfg.grid.dx;
    const double h_theta = cfg.spec.h(cfg.coeffs.theta);
    const bool ou = cfg.spec.g_kind == GKind::ConstantOne;
    VolScheme scheme = VolScheme::Euler;
    if (ou) scheme = VolScheme::ExactOu;
    else if (cfg.spec.g_cir_like()) scheme = VolScheme::FullTruncationEuler;

    FieldStudyResult res;
    res.quad_times.resize(cfg.n_quad);
    for (std::size_t q = 0; q < cfg.n_quad; ++q)
        res.quad_times[q] = cfg.T * static_cast<double>(q + 1) / static_cast<double>(cfg.n_quad);
    const std::size_t ne = cfg.eps_grid.size();
    res.v_eps_boundary.assign(
        ne, std::vector<std::vector<double>>(cfg.n_outer, std::vector<double>(cfg.n_quad, 0.0)));
    res.v_limit_boundary = res.v_eps_boundary;
    std::vector<std::vector<double>> h1sq(ne, std::vector<double>(cfg.n_outer, 0.0));

    parallel_for(cfg.n_outer, [&](std::size_t j) {
        const NoiseBundle fine(mix_key(cfg.seed, 0xF1E1DULL, j), grids.dt_fine, grids.n_fine,
                               cfg.market.rho3);
        RandomStream init = fine.init_stream(1);
        const double z = init.normal();
        for (std::size_t e = 0; e < ne; ++e) {
            const double eps = cfg.eps_grid[e];
            const NoiseBundle b = fine.coarsen(grids.factors[e]);
            const double dt = b.dt();
            double sigma0 = cfg.coeffs.theta;
            if (ou && cfg.coeffs.xi > 0.0)
                sigma0 += cfg.coeffs.xi * std::sqrt(eps / (2.0 * cfg.coeffs.kappa)) * z;
            const VolPath vp = simulate_vol(cfg.coeffs, cfg.spec, ScalingRegime::small(eps), b, 1,
                                            scheme, sigma0);

            SpdeParams sp;
            sp.grid = cfg.grid;
            sp.dt = dt;
            sp.r = cfg.coeffs.r;
            sp.rho1 = cfg.coeffs.rho1;
            SpdeStepper pert(sp, FieldKind::Survival, v0);
            SpdeStepper limit(sp, FieldKind::Survival, v0);

            const auto& dw0 = b.systemic_w0();
            double acc = 0.0;
            std::size_t q = 0;
            for (std::size_t k = 0; k < b.n_steps(); ++k) {
                pert.step(cfg.spec.h(vp.values[k]), dw0[k]);
                limit.step(h_theta, dw0[k]);
                const auto& ua = pert.values();
                const auto& ub = limit.values();
                double l2 = 0.0, g2 = 0.0;
                for (std::size_t m = 0; m < n_x; ++m) {
                    const double d = ua[m] - ub[m];
                    l2 += d * d;
                    if (m + 1 < n_x) {
                        const double dg = (ua[m + 1] - ub[m + 1] - d) / dx;
                        g2 += dg * dg;
                    }
                }
                acc += (l2 + g2) * dx * dt;
                // record at the nearest step to each quadrature time
                while (q < cfg.n_quad &&
                       static_cast<std::size_t>(std::llround(res.quad_times[q] / dt)) == k + 1) {
                    res.v_eps_boundary[e][j][q] = pert.values().front();
                    res.v_limit_boundary[e][j][q] = limit.values().front();
                    ++q;
                }
            }
            h1sq[e][j] = acc;
        }
    });

    RateReport rep;
    rep.coupling = "common-noise";
    for (std::size_t e = 0; e < ne; ++e) rep.points.push_back(rms_point(cfg.eps_grid[e], h1sq[e]));
    rep.finalize();
    res.h1_rate = rep;
    return res;
}

RateReport small_volvol_field_rate(const FieldStudyConfig& cfg) {
    return small_volvol_field_study(cfg).h1_rate;
}

RateReport loss_probability_error(const FieldStudyResult& study, double x_level) {
    if (!(x_level > 0.0 && x_level < 1.0))
        throw std::invalid_argument(
            "loss_probability_error: degenerate level x (both probabilities constant)");
    const std::size_t ne = study.v_eps_boundary.size();
    const std::size_t n_outer = study.v_eps_boundary[0].size();
    const std::size_t nq = study.quad_times.size();
    const double w = study.quad_times.back() / static_cast<double>(nq);

    auto e_of = [&](std::size_t e, const std::vector<std::size_t>& idx) {
        double total = 0.0;
        for (std::size_t q = 0; q < nq; ++q) {
            double diff = 0.0;
            for (std::size_t j : idx) {
                diff += (study.v_eps_boundary[e][j][q] > x_level ? 1.0 : 0.0) -
                        (study.v_limit_boundary[e][j][q] > x_level ? 1.0 : 0.0);
            }
            total += std::abs(diff / static_cast<double>(idx.size())) * w;
        }
        return total;
    };

    std::vector<std::size_t> all(n_outer);
    std::iota(all.begin(), all.end(), 0);

    RateReport rep;
    rep.coupling = "common-noise";
    RandomStream rs(0xC33BULL);
    for (std::size_t e = 0; e < ne; ++e) {
        RatePoint p;
        p.eps = study.h1_rate.points[e].eps;
        p.error = e_of(e, all);
        // bootstrap over outer draws
        const std::size_t nb = 200;
        std::vector<double> boot(nb);
        std::vector<std::size_t> idx(n_outer);
        for (auto& boot_v : boot) {
            for (auto& id : idx) id = static_cast<std::size_t>(rs.uniform() * n_outer);
            boot_v = e_of(e, idx);
        }
        double m = mean_of(boot), var = 0.0;
        for (double v : boot) var += (v - m) * (v - m);
        p.std_error = std::sqrt(var / static_cast<double>(nb - 1));
        rep.points.push_back(p);
    }
    rep.finalize();
    return rep;
}

double median_limit_survival(const FieldStudyResult& study) {
    const std::size_t nq = study.quad_times.size();
    const std::size_t q_mid = nq / 2 - 1; // nearest quadrature node to T/2
    std::vector<double> vals;
    const auto& lim = study.v_limit_boundary.back(); // finest grid run
    for (const auto& outer : lim) vals.push_back(outer[q_mid]);
    std::sort(vals.begin(), vals.end());
    return vals[vals.size() / 2];
}

} // namespace fastmr
