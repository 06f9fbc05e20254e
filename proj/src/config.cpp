#include "fastmr/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace fastmr {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

const char* g_name(GKind k) {
    switch (k) {
        case GKind::ConstantOne: return "constant_one";
        case GKind::CirSqrt: return "cir_sqrt";
        case GKind::DampedSqrt: return "damped_sqrt";
        case GKind::TanhShifted: return "tanh_shifted";
    }
    return "?";
}

const char* h_name(HKind k) {
    switch (k) {
        case HKind::Identity: return "identity";
        case HKind::SqrtAbs: return "sqrt_abs";
        case HKind::BoundedSigmoid: return "bounded_sigmoid";
        case HKind::Constant: return "constant";
    }
    return "?";
}

const char* regime_name(RegimeKind k) {
    switch (k) {
        case RegimeKind::Unscaled: return "unscaled";
        case RegimeKind::LargeVolOfVol: return "large_vol_of_vol";
        case RegimeKind::SmallVolOfVol: return "small_vol_of_vol";
    }
    return "?";
}

struct Parser {
    std::vector<std::string> errors;

    bool parse_double(const std::string& key, const std::string& v, double& out) {
        try {
            std::size_t pos = 0;
            out = std::stod(v, &pos);
            if (pos != v.size()) throw std::invalid_argument("trailing characters");
            return true;
        } catch (const std::exception&) {
            errors.push_back(key + ": not a number: '" + v + "'");
            return false;
        }
    }

    bool parse_size(const std::string& key, const std::string& v, std::size_t& out) {
        try {
            std::size_t pos = 0;
            const long long val = std::stoll(v, &pos);
            if (pos != v.size() || val < 0) throw std::invalid_argument("bad");
            out = static_cast<std::size_t>(val);
            return true;
        } catch (const std::exception&) {
            errors.push_back(key + ": not a non-negative integer: '" + v + "'");
            return false;
        }
    }

    bool parse_u64(const std::string& key, const std::string& v, std::uint64_t& out) {
        try {
            std::size_t pos = 0;
            out = std::stoull(v, &pos);
            if (pos != v.size()) throw std::invalid_argument("bad");
            return true;
        } catch (const std::exception&) {
            errors.push_back(key + ": not an unsigned integer: '" + v + "'");
            return false;
        }
    }

    void parse_eps_grid(const std::string& v, std::vector<double>& out) {
        std::vector<double> grid;
        std::stringstream ss(v);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            tok = trim(tok);
            double x = 0.0;
            if (!parse_double("numerics.eps_grid", tok, x)) return;
            grid.push_back(x);
        }
        if (grid.empty()) {
            errors.push_back("numerics.eps_grid: empty list");
            return;
        }
        out = grid;
    }
};

} // namespace

std::vector<std::string> ExperimentConfig::violations() const {
    std::vector<std::string> v;
    auto collect = [&v](const auto& obj) {
        try {
            obj.validate();
        } catch (const std::exception& e) {
            v.emplace_back(e.what());
        }
    };
    for (const auto& s : coeffs.violations()) v.emplace_back(s);
    collect(spec);
    collect(market);
    if (regime.kind != RegimeKind::Unscaled && !(regime.epsilon > 0.0))
        v.emplace_back("regime.epsilon must be > 0");
    if (regime.kind == RegimeKind::LargeVolOfVol && market.rho3 != 0.0)
        v.emplace_back("large_vol_of_vol regime requires market.rho3 = 0");
    if (!(numerics.dx > 0.0)) v.emplace_back("numerics.dx must be > 0");
    if (!(numerics.dt > 0.0)) v.emplace_back("numerics.dt must be > 0");
    if (!(numerics.x_max > numerics.dx)) v.emplace_back("numerics.x_max must exceed numerics.dx");
    if (numerics.n_inner == 0) v.emplace_back("numerics.n_inner must be >= 1");
    if (numerics.n_outer == 0) v.emplace_back("numerics.n_outer must be >= 1");
    if (!(numerics.T > 0.0)) v.emplace_back("numerics.T must be > 0");
    for (double e : numerics.eps_grid)
        if (!(e > 0.0)) v.emplace_back("numerics.eps_grid entries must be > 0");
    for (std::size_t i = 0; i + 1 < numerics.eps_grid.size(); ++i)
        if (!(numerics.eps_grid[i] > numerics.eps_grid[i + 1])) {
            v.emplace_back("numerics.eps_grid must be strictly decreasing");
            break;
        }
    if (regime.kind != RegimeKind::Unscaled && regime.epsilon > 0.0 &&
        numerics.dt > regime.epsilon / 50.0 + 1e-15)
        v.emplace_back("numerics.dt violates the stiffness rule dt <= epsilon/50");
    return v;
}

void ExperimentConfig::validate() const {
    const auto v = violations();
    if (v.empty()) return;
    std::string msg = "invalid configuration (" + std::to_string(v.size()) + " violations):";
    for (const auto& s : v) msg += "\n  - " + s;
    throw ConfigError(msg, v);
}

std::string ExperimentConfig::canonical_text() const {
    std::ostringstream os;
    os.precision(17);
    os << "model.g = " << g_name(spec.g_kind) << '\n';
    os << "model.g_cg = " << spec.g_cg << '\n';
    os << "model.g_steepness = " << spec.g_steepness << '\n';
    os << "model.g_base = " << spec.g_base << '\n';
    os << "model.g_amplitude = " << spec.g_amplitude << '\n';
    os << "model.h = " << h_name(spec.h_kind) << '\n';
    os << "model.h_min = " << spec.h_min << '\n';
    os << "model.h_max = " << spec.h_max << '\n';
    os << "model.h_const = " << spec.h_const << '\n';
    os << "coeffs.r = " << coeffs.r << '\n';
    os << "coeffs.rho1 = " << coeffs.rho1 << '\n';
    os << "coeffs.rho2 = " << coeffs.rho2 << '\n';
    os << "coeffs.kappa = " << coeffs.kappa << '\n';
    os << "coeffs.theta = " << coeffs.theta << '\n';
    os << "coeffs.xi = " << coeffs.xi << '\n';
    os << "market.rho3 = " << market.rho3 << '\n';
    os << "market.beta = " << market.beta << '\n';
    os << "market.T = " << market.horizon << '\n';
    os << "regime.kind = " << regime_name(regime.kind) << '\n';
    os << "regime.epsilon = " << regime.epsilon << '\n';
    os << "numerics.dx = " << numerics.dx << '\n';
    os << "numerics.dt = " << numerics.dt << '\n';
    os << "numerics.x_max = " << numerics.x_max << '\n';
    os << "numerics.n_outer = " << numerics.n_outer << '\n';
    os << "numerics.n_inner = " << numerics.n_inner << '\n';
    os << "numerics.eps_grid = ";
    for (std::size_t i = 0; i < numerics.eps_grid.size(); ++i)
        os << (i ? "," : "") << numerics.eps_grid[i];
    os << '\n';
    os << "numerics.T = " << numerics.T << '\n';
    os << "numerics.burn_in = " << numerics.burn_in << '\n';
    os << "seed = " << seed << '\n';
    return os.str();
}

ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig cfg;
    Parser p;
    std::istringstream is(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            p.errors.push_back("line " + std::to_string(lineno) + ": expected key = value");
            continue;
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty() || val.empty()) {
            p.errors.push_back("line " + std::to_string(lineno) + ": empty key or value");
            continue;
        }

        if (key == "model.g") {
            if (val == "constant_one") cfg.spec.g_kind = GKind::ConstantOne;
            else if (val == "cir_sqrt") cfg.spec.g_kind = GKind::CirSqrt;
            else if (val == "damped_sqrt") cfg.spec.g_kind = GKind::DampedSqrt;
            else if (val == "tanh_shifted") cfg.spec.g_kind = GKind::TanhShifted;
            else p.errors.push_back("model.g: unknown kind '" + val + "'");
        } else if (key == "model.g_cg") p.parse_double(key, val, cfg.spec.g_cg);
        else if (key == "model.g_steepness") p.parse_double(key, val, cfg.spec.g_steepness);
        else if (key == "model.g_base") p.parse_double(key, val, cfg.spec.g_base);
        else if (key == "model.g_amplitude") p.parse_double(key, val, cfg.spec.g_amplitude);
        else if (key == "model.h") {
            if (val == "identity") cfg.spec.h_kind = HKind::Identity;
            else if (val == "sqrt_abs") cfg.spec.h_kind = HKind::SqrtAbs;
            else if (val == "bounded_sigmoid") cfg.spec.h_kind = HKind::BoundedSigmoid;
            else if (val == "constant") cfg.spec.h_kind = HKind::Constant;
            else p.errors.push_back("model.h: unknown kind '" + val + "'");
        } else if (key == "model.h_min") p.parse_double(key, val, cfg.spec.h_min);
        else if (key == "model.h_max") p.parse_double(key, val, cfg.spec.h_max);
        else if (key == "model.h_const") p.parse_double(key, val, cfg.spec.h_const);
        else if (key == "coeffs.r") p.parse_double(key, val, cfg.coeffs.r);
        else if (key == "coeffs.rho1") p.parse_double(key, val, cfg.coeffs.rho1);
        else if (key == "coeffs.rho2") p.parse_double(key, val, cfg.coeffs.rho2);
        else if (key == "coeffs.kappa") p.parse_double(key, val, cfg.coeffs.kappa);
        else if (key == "coeffs.theta") p.parse_double(key, val, cfg.coeffs.theta);
        else if (key == "coeffs.xi") p.parse_double(key, val, cfg.coeffs.xi);
        else if (key == "market.rho3") p.parse_double(key, val, cfg.market.rho3);
        else if (key == "market.beta") p.parse_double(key, val, cfg.market.beta);
        else if (key == "market.T") p.parse_double(key, val, cfg.market.horizon);
        else if (key == "regime.kind") {
            if (val == "unscaled") cfg.regime.kind = RegimeKind::Unscaled;
            else if (val == "large_vol_of_vol") cfg.regime.kind = RegimeKind::LargeVolOfVol;
            else if (val == "small_vol_of_vol") cfg.regime.kind = RegimeKind::SmallVolOfVol;
            else p.errors.push_back("regime.kind: unknown kind '" + val + "'");
        } else if (key == "regime.epsilon") p.parse_double(key, val, cfg.regime.epsilon);
        else if (key == "numerics.dx") p.parse_double(key, val, cfg.numerics.dx);
        else if (key == "numerics.dt") p.parse_double(key, val, cfg.numerics.dt);
        else if (key == "numerics.x_max") p.parse_double(key, val, cfg.numerics.x_max);
        else if (key == "numerics.n_outer") p.parse_size(key, val, cfg.numerics.n_outer);
        else if (key == "numerics.n_inner") p.parse_size(key, val, cfg.numerics.n_inner);
        else if (key == "numerics.eps_grid") p.parse_eps_grid(val, cfg.numerics.eps_grid);
        else if (key == "numerics.T") p.parse_double(key, val, cfg.numerics.T);
        else if (key == "numerics.burn_in") p.parse_double(key, val, cfg.numerics.burn_in);
        else if (key == "seed") p.parse_u64(key, val, cfg.seed);
        else p.errors.push_back("unknown key '" + key + "'");
    }

    // report parse errors and invariant violations together
    auto all = p.errors;
    const auto inv = cfg.violations();
    all.insert(all.end(), inv.begin(), inv.end());
    if (!all.empty()) {
        std::string msg = "invalid configuration (" + std::to_string(all.size()) + " violations):";
        for (const auto& s : all) msg += "\n  - " + s;
        throw ConfigError(msg, all);
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open config file: " + path, {"cannot open: " + path});
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_config_text(ss.str());
}

} // namespace fastmr
