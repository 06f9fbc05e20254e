#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "fastmr/asymptotics.hpp"
#include "fastmr/spde.hpp"

using namespace fastmr;

TEST_SUITE_BEGIN("asymptotics");

TEST_CASE("log-log fitter on exact power laws") {
    const std::vector<double> eps{0.2, 0.1, 0.05, 0.025};

    SUBCASE("error = sqrt(eps)") {
        std::vector<double> err;
        for (double e : eps) err.push_back(std::sqrt(e));
        const FitResult f = fit_log_log(eps, err);
        CHECK(f.slope == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(f.intercept == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
        CHECK(f.r2 == doctest::Approx(1.0));
    }

    SUBCASE("constant error has slope 0") {
        const FitResult f = fit_log_log(eps, {0.37, 0.37, 0.37, 0.37});
        CHECK(std::abs(f.slope) < 1e-12);
    }

    SUBCASE("error = 2 eps") {
        std::vector<double> err;
        for (double e : eps) err.push_back(2.0 * e);
        const FitResult f = fit_log_log(eps, err);
        CHECK(f.slope == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(f.intercept == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    }

    SUBCASE("guards") {
        CHECK_THROWS_AS(fit_log_log({0.2, 0.1}, {1.0, 0.5}), std::invalid_argument);
        CHECK_THROWS_AS(fit_log_log(eps, {1.0, 0.5, 0.0, 0.1}), std::invalid_argument);
        CHECK_THROWS_AS(fit_log_log(eps, {1.0, 0.5}), std::invalid_argument);
    }
}

TEST_CASE("two-sample KS distance") {
    SUBCASE("identical samples") {
        const std::vector<double> a{0.1, 0.4, 0.7, 0.9};
        const KsResult k = ks_two_sample(a, a, 50);
        CHECK(k.statistic == 0.0);
    }

    SUBCASE("disjoint supports") {
        const std::vector<double> a{0.0, 0.1, 0.2};
        const std::vector<double> b{1.0, 1.1, 1.2};
        const KsResult k = ks_two_sample(a, b, 50);
        CHECK(k.statistic == doctest::Approx(1.0));
        CHECK(k.band_lo <= k.statistic);
        CHECK(k.band_hi >= k.statistic);
    }

    SUBCASE("null floor sits below the 99% quantile") {
        const std::size_t n = 10000;
        std::mt19937_64 gen(42);
        std::normal_distribution<double> nd;
        std::vector<double> a(n), b(n);
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = nd(gen);
            b[i] = nd(gen);
        }
        const KsResult k = ks_two_sample(a, b, 200);
        // 99% two-sample KS quantile: 1.628 * sqrt((n+m)/(n m))
        CHECK(k.statistic < 1.628 * std::sqrt(2.0 / static_cast<double>(n)));
        CHECK(k.band_lo <= k.statistic);
        CHECK(k.statistic <= k.band_hi);
    }
}

TEST_CASE("vol-rate study: frozen noise recovers the deterministic relaxation") {
    // xi = 0 with a displaced start sigma_0 = 1: the squared deviation is
    // (sigma_0 - theta)^2 * (eps / 2 kappa) * (1 - exp(-2 kappa t / eps)).
    VolRateConfig cfg;
    cfg.coeffs.kappa = 2.0;
    cfg.coeffs.theta = 0.3;
    cfg.coeffs.xi = 0.0;
    cfg.spec.g_kind = GKind::ConstantOne;
    cfg.sigma0 = 1.0;
    cfg.n_paths = 4;
    cfg.t = 1.0;
    const RateReport rep = small_volvol_vol_rate(cfg);
    REQUIRE(rep.points.size() == cfg.eps_grid.size());
    for (const RatePoint& p : rep.points) {
        const double exact = 0.49 * (p.eps / 4.0) * (1.0 - std::exp(-4.0 / p.eps));
        CHECK(p.error == doctest::Approx(exact).epsilon(0.1));
        CHECK(p.std_error < 1e-12); // deterministic across paths
    }
    CHECK(rep.fit.slope == doctest::Approx(1.0).epsilon(0.05));
    CHECK(rep.coupling == "common-noise");
    CHECK(rep.monotone_ok);
}

TEST_CASE("vol-rate study: OU L2 rate is O(eps)") {
    VolRateConfig cfg;
    cfg.coeffs.kappa = 2.0;
    cfg.coeffs.theta = 0.3;
    cfg.coeffs.xi = 0.5;
    cfg.spec.g_kind = GKind::ConstantOne;
    cfg.n_paths = 2000;
    cfg.seed = 99;
    const RateReport rep = small_volvol_vol_rate(cfg);
    CHECK(rep.fit.slope > 0.8);
    CHECK(rep.fit.slope < 1.2);
    CHECK(rep.monotone_ok);
    for (const RatePoint& p : rep.points) CHECK(p.std_error > 0.0);
}

TEST_CASE("vol-rate study: eps grid validation") {
    VolRateConfig cfg;
    cfg.spec.g_kind = GKind::ConstantOne;
    cfg.n_paths = 4;
    cfg.eps_grid = {0.1, 0.2};
    CHECK_THROWS_AS(small_volvol_vol_rate(cfg), std::invalid_argument);
    cfg.eps_grid = {0.25, 0.15, 0.1}; // 0.15 not a multiple of 0.1
    CHECK_THROWS_AS(small_volvol_vol_rate(cfg), std::invalid_argument);
    cfg.eps_grid = {0.2, 0.1};
    cfg.t = 0.1234567; // not a multiple of eps_min / 50
    CHECK_THROWS_AS(small_volvol_vol_rate(cfg), std::invalid_argument);
}

namespace {

LargeStudyConfig degenerate_large_config() {
    LargeStudyConfig cfg;
    cfg.coeffs.kappa = 2.0;
    cfg.coeffs.theta = 0.3;
    cfg.coeffs.xi = 0.0; // volatility frozen at theta
    cfg.coeffs.rho1 = 0.5;
    cfg.coeffs.rho2 = 0.5;
    cfg.spec.g_kind = GKind::ConstantOne;
    cfg.spec.h_kind = HKind::BoundedSigmoid;
    cfg.spec.h_min = 0.1;
    cfg.spec.h_max = 0.6;
    cfg.eps_grid = {0.2, 0.1};
    cfg.n_outer = 80;
    cfg.n_inner = 100;
    cfg.seed = 5;
    cfg.n_bootstrap = 100;
    const double h_theta = cfg.spec.h(cfg.coeffs.theta);
    cfg.moments.sigma11 = {h_theta, 0.0};
    cfg.moments.sigma21 = {h_theta, 0.0};
    cfg.moments.sigma_tilde = {h_theta, 0.0};
    return cfg;
}

} // namespace

TEST_CASE("weak study collapses to the sampling floor when xi = 0") {
    // With frozen volatility the eps model and the limit model share one
    // law, so every KS point must look like a draw from the null.
    const LargeStudyConfig cfg = degenerate_large_config();
    const WeakStudyResult res = weak_convergence_study(cfg);
    REQUIRE(res.points.size() == 2);
    const double null99 = 1.95 * std::sqrt(2.0 / static_cast<double>(cfg.n_outer));
    for (const KsPoint& p : res.points) CHECK(p.ks.statistic < null99);
    CHECK(res.floor.statistic < null99);
    CHECK(res.limit_a.size() == cfg.n_outer);
    for (double v : res.limit_a) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("weak study rejects a correlated systemic pair") {
    LargeStudyConfig cfg = degenerate_large_config();
    cfg.market.rho3 = 0.3;
    CHECK_THROWS_AS(weak_convergence_study(cfg), std::invalid_argument);
}

TEST_CASE("strong study: no plateau at rho2 = 0") {
    LargeStudyConfig cfg = degenerate_large_config();
    cfg.coeffs.xi = 0.4;
    cfg.coeffs.rho2 = 0.0;
    cfg.eps_grid = {0.2, 0.1, 0.05};
    cfg.n_outer = 50;
    cfg.n_inner = 400;
    cfg.seed = 11;

    // moments from a long coupled simulation
    ErgodicConfig ec;
    ec.coeffs = cfg.coeffs;
    ec.spec = cfg.spec;
    ec.horizon = 200.0;
    ec.n_replicas = 2;
    ec.seed = 3;
    cfg.moments = estimate_stationary_moments(ec);

    const PlateauResult res = strong_failure_study(cfg);
    REQUIRE(res.distances.size() == 3);
    CHECK(res.floor > 0.0);
    CHECK(res.ratio_at_smallest < 3.0);
    // coupled distances shrink as eps does
    CHECK(res.distances.back().error <= res.distances.front().error + res.floor);
}

TEST_CASE("loss-probability error on synthetic fields") {
    // 3 eps levels, 4 outer draws, 2 quadrature times; the limit survival
    // always exceeds the level while k_e of the eps runs fall below it, so
    // E(x, T) = k_e / 4 exactly.
    FieldStudyResult study;
    study.quad_times = {0.5, 1.0};
    const std::vector<double> eps{0.75, 0.5, 0.25};
    const std::vector<std::size_t> k{3, 2, 1};
    study.v_eps_boundary.resize(3);
    study.v_limit_boundary.resize(3);
    for (std::size_t e = 0; e < 3; ++e) {
        study.v_eps_boundary[e].assign(4, std::vector<double>(2, 0.9));
        study.v_limit_boundary[e].assign(4, std::vector<double>(2, 0.9));
        for (std::size_t j = 0; j < k[e]; ++j)
            study.v_eps_boundary[e][j].assign(2, 0.1);
        RatePoint p;
        p.eps = eps[e];
        p.error = 1.0;
        study.h1_rate.points.push_back(p);
    }

    CHECK_THROWS_AS(loss_probability_error(study, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(loss_probability_error(study, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(loss_probability_error(study, -0.2), std::invalid_argument);

    const RateReport rep = loss_probability_error(study, 0.5);
    REQUIRE(rep.points.size() == 3);
    for (std::size_t e = 0; e < 3; ++e) {
        CHECK(rep.points[e].eps == eps[e]);
        CHECK(rep.points[e].error ==
              doctest::Approx(static_cast<double>(k[e]) / 4.0).epsilon(1e-12));
    }
    CHECK(rep.fit.slope == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(rep.monotone_ok);

    // median of the limit survival at the mid quadrature node
    CHECK(median_limit_survival(study) == doctest::Approx(0.9));
}

TEST_CASE("paired field solves are deterministic for identical inputs") {
    // surrogate for the eps -> 0 limit: two steppers fed the same h and
    // noise sequences stay bitwise identical.
    SpdeParams p;
    p.grid.dx = 0.05;
    p.dt = 5e-4;
    p.rho1 = 0.5;
    const auto v0 = rayleigh_v0(p.grid, 0.5);
    SpdeStepper sa(p, FieldKind::Survival, v0);
    SpdeStepper sb(p, FieldKind::Survival, v0);
    std::mt19937_64 gen(1);
    std::normal_distribution<double> nd(0.0, std::sqrt(p.dt));
    for (int kstep = 0; kstep < 400; ++kstep) {
        const double dw = nd(gen);
        sa.step(0.3, dw);
        sb.step(0.3, dw);
    }
    CHECK(sa.values() == sb.values());
    CHECK(sa.mass() == sb.mass());
}

TEST_SUITE_END();
