#pragma once

/// Initializing learnable activations by fitting a target function.
///
/// Lagrange mode matches values only; Hermite-interpolation mode matches
/// values and first derivatives jointly,
///     sum_i (F(x_i) - g(x_i))^2 + lambda (F'(x_i) - g'(x_i))^2,
/// on a uniform grid. Hermite and harmonic Fourier activations are linear in
/// their coefficients, so the direct path is a single least-squares solve.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "orthoact/activations.hpp"
#include "orthoact/error.hpp"

namespace orthoact {

struct FitGrid {
    double lo = -4.0;
    double hi = 4.0;
    int points = 401;

    std::vector<double> xs() const {
        std::vector<double> v(static_cast<std::size_t>(points));
        for (int i = 0; i < points; ++i) v[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (points - 1);
        return v;
    }
};

inline void validate(const FitGrid& g, std::size_t free_parameters) {
    require(std::isfinite(g.lo) && std::isfinite(g.hi) && g.lo < g.hi, "fit grid needs lo < hi");
    require(g.points >= 2 && static_cast<std::size_t>(g.points) >= 2 * free_parameters,
            "fit grid needs at least 2 points per free parameter (" + std::to_string(2 * free_parameters) + ")");
}

/// A function to fit together with its derivative.
struct FitTarget {
    std::string name;  // column label, e.g. "GELU"
    std::function<double(double)> value;
    std::function<double(double)> deriv;
};

inline FitTarget make_target(const Activation& act, std::string name = {}) {
    if (name.empty()) name = std::string(display_name(family_of(act)));
    return {std::move(name), [act](double x) { return eval(act, x); }, [act](double x) { return deriv(act, x); }};
}

/// "gelu", "relu" or "silu".
inline FitTarget parse_target(std::string_view name) {
    const Family f = parse_family(name);
    require(is_classical(f), "fit target must be a classical activation (relu, gelu, silu)");
    return make_target(ClassicalActivation{classical_kind(f)});
}

enum class FitMode { Lagrange, HermiteInterp };

inline std::string_view fit_mode_name(FitMode m) { return m == FitMode::Lagrange ? "lagrange" : "hermite"; }

inline FitMode parse_fit_mode(std::string_view s) {
    if (s == "lagrange") return FitMode::Lagrange;
    if (s == "hermite" || s == "hermite-interp" || s == "hermite_interp") return FitMode::HermiteInterp;
    fail(ErrorCode::InvalidArgument, "unknown fit mode '" + std::string(s) + "' (lagrange|hermite)");
}

struct FitOptions {
    double derivative_weight = 1.0;  // lambda
    bool refine = false;             // gradient refinement of all parameters after the direct solve
    int max_iterations = 100000;
    double tolerance = 1e-10;        // relative loss change that counts as converged
    double max_condition = 1e12;
    double fundamental_scale = 0.0;  // Fourier only; 0 maps the grid onto half a period
    bool learn_powers = true;        // tropical fits only
};

struct FitResult {
    Activation activation;
    double value_rmse = 0.0;
    double deriv_rmse = 0.0;
    FitGrid grid;
    FitMode mode = FitMode::Lagrange;
    int iterations = 0;      // 0 for a direct solve
    double condition = 0.0;  // of the column-scaled design, direct solves only
};

inline void evaluate_fit(FitResult& r, const FitTarget& target) {
    const auto xs = r.grid.xs();
    double sv = 0.0, sd = 0.0;
    for (double x : xs) {
        const double ev = eval(r.activation, x) - target.value(x);
        const double ed = deriv(r.activation, x) - target.deriv(x);
        sv += ev * ev;
        sd += ed * ed;
    }
    r.value_rmse = std::sqrt(sv / static_cast<double>(xs.size()));
    r.deriv_rmse = std::sqrt(sd / static_cast<double>(xs.size()));
}

namespace detail {

// Value and derivative rows of the linear basis for one grid point.
struct BasisRows {
    std::vector<double> value;
    std::vector<double> deriv;
};

inline BasisRows hermite_rows(double x, int degree) {
    BasisRows r;
    r.value = param_grad(HermiteActivation{std::vector<double>(static_cast<std::size_t>(degree + 1))}, x);
    r.deriv.assign(r.value.size(), 0.0);
    for (std::size_t k = 1; k < r.value.size(); ++k) r.deriv[k] = r.value[k - 1];  // (He_k/k!)' = He_{k-1}/(k-1)!
    return r;
}

// Basis [1, cos(k w x)/k!, sin(k w x)/k!] of the harmonic sine-cosine series.
inline BasisRows fourier_rows(double x, int degree, double w) {
    const auto n = static_cast<std::size_t>(degree);
    BasisRows r{std::vector<double>(1 + 2 * n, 0.0), std::vector<double>(1 + 2 * n, 0.0)};
    r.value[0] = 1.0;
    double inv_fact = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double k = static_cast<double>(i + 1);
        inv_fact /= k;
        const double c = std::cos(k * w * x), s = std::sin(k * w * x);
        r.value[1 + i] = c * inv_fact;
        r.value[1 + n + i] = s * inv_fact;
        r.deriv[1 + i] = -k * w * s * inv_fact;
        r.deriv[1 + n + i] = k * w * c * inv_fact;
    }
    return r;
}

struct LinearSolve {
    Eigen::VectorXd coeffs;
    double condition = 0.0;
};

// Least squares on a column-scaled design, solved through the SVD so the
// conditioning is not squared as it would be with the normal equations.
inline LinearSolve solve_scaled(Eigen::MatrixXd a, const Eigen::VectorXd& b, double max_condition) {
    Eigen::VectorXd scale(a.cols());
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
        const double norm = a.col(j).norm();
        scale(j) = norm > 0.0 ? norm : 1.0;
        a.col(j) /= scale(j);
    }
    Eigen::BDCSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& s = svd.singularValues();
    const double smax = s(0);
    const double smin = s(s.size() - 1);
    const double cond = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
    if (!(cond <= max_condition)) {
        fail(ErrorCode::RankDeficient,
             "fit design matrix is numerically singular (condition " + std::to_string(cond) + ")");
    }
    return {svd.solve(b).cwiseQuotient(scale), cond};
}

inline double fit_loss(const Activation& act, const FitTarget& target, std::span<const double> xs, FitMode mode,
                       double lambda) {
    double loss = 0.0;
    for (double x : xs) {
        const double ev = eval(act, x) - target.value(x);
        loss += ev * ev;
        if (mode == FitMode::HermiteInterp) {
            const double ed = deriv(act, x) - target.deriv(x);
            loss += lambda * ed * ed;
        }
    }
    return loss / static_cast<double>(xs.size());
}

inline std::vector<double> fit_loss_grad(const Activation& act, const FitTarget& target, std::span<const double> xs,
                                         FitMode mode, double lambda) {
    std::vector<double> g(parameter_count(act), 0.0);
    const double inv_n = 1.0 / static_cast<double>(xs.size());
    for (double x : xs) {
        const double ev = eval(act, x) - target.value(x);
        const auto pg = param_grad(act, x);
        for (std::size_t p = 0; p < g.size(); ++p) g[p] += 2.0 * ev * pg[p] * inv_n;
        if (mode == FitMode::HermiteInterp) {
            const double ed = deriv(act, x) - target.deriv(x);
            const auto dg = deriv_param_grad(act, x);
            for (std::size_t p = 0; p < g.size(); ++p) g[p] += 2.0 * lambda * ed * dg[p] * inv_n;
        }
    }
    const auto mask = trainable_mask(act);
    for (std::size_t p = 0; p < g.size(); ++p)
        if (!mask[p]) g[p] = 0.0;
    return g;
}

// Damped Gauss-Newton (Levenberg-Marquardt) over the trainable parameters.
// Stops when an accepted step changes the loss by less than the relative tolerance, or
// when a window of 100 iterations gains less than 1e-6 relative (a flat valley, which
// learnable frequencies produce).
inline int refine_by_descent(Activation& act, const FitTarget& target, std::span<const double> xs, FitMode mode,
                             const FitOptions& opts) {
    const auto mask = trainable_mask(act);
    std::vector<std::size_t> free;
    for (std::size_t p = 0; p < mask.size(); ++p)
        if (mask[p]) free.push_back(p);
    const double sqrt_lambda = std::sqrt(opts.derivative_weight);
    const auto n = static_cast<Eigen::Index>(xs.size());
    const Eigen::Index rows = mode == FitMode::HermiteInterp ? 2 * n : n;
    const auto cols = static_cast<Eigen::Index>(free.size());

    auto residuals = [&](const Activation& a, Eigen::VectorXd& r, Eigen::MatrixXd* jac) {
        r.resize(rows);
        if (jac) jac->resize(rows, cols);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double x = xs[static_cast<std::size_t>(i)];
            r(i) = eval(a, x) - target.value(x);
            if (jac) {
                const auto g = param_grad(a, x);
                for (Eigen::Index c = 0; c < cols; ++c) (*jac)(i, c) = g[free[static_cast<std::size_t>(c)]];
            }
            if (mode == FitMode::HermiteInterp) {
                r(n + i) = sqrt_lambda * (deriv(a, x) - target.deriv(x));
                if (jac) {
                    const auto g = deriv_param_grad(a, x);
                    for (Eigen::Index c = 0; c < cols; ++c)
                        (*jac)(n + i, c) = sqrt_lambda * g[free[static_cast<std::size_t>(c)]];
                }
            }
        }
    };

    Eigen::VectorXd r, trial_r;
    Eigen::MatrixXd jac;
    residuals(act, r, &jac);
    double loss = r.squaredNorm();
    double damping = 1e-3;
    double window_start = loss;
    for (int it = 1; it <= opts.max_iterations; ++it) {
        if (loss == 0.0) return it;
        if (it % 100 == 0) {
            if (window_start - loss < 1e-6 * window_start) return it;
            window_start = loss;
        }
        const Eigen::MatrixXd jtj = jac.transpose() * jac;
        const Eigen::VectorXd jtr = jac.transpose() * r;
        bool accepted = false;
        while (!accepted && damping < 1e16) {
            Eigen::MatrixXd lhs = jtj;
            lhs.diagonal() += damping * jtj.diagonal().cwiseMax(1e-12);
            const Eigen::VectorXd delta = lhs.ldlt().solve(-jtr);
            auto params = get_parameters(act);
            for (Eigen::Index c = 0; c < cols; ++c) params[free[static_cast<std::size_t>(c)]] += delta(c);
            Activation trial = act;
            set_parameters(trial, params);
            residuals(trial, trial_r, nullptr);
            const double trial_loss = trial_r.squaredNorm();
            if (std::isfinite(trial_loss) && trial_loss <= loss) {
                const double change = (loss - trial_loss) / loss;
                act = std::move(trial);
                loss = trial_loss;
                damping = std::max(damping / 3.0, 1e-12);
                accepted = true;
                if (change < opts.tolerance) return it;
            } else {
                damping *= 4.0;
            }
        }
        if (!accepted) return it;  // no decrease possible at machine precision: stationary point
        residuals(act, r, &jac);
    }
    fail(ErrorCode::NonConvergent,
         "refinement did not converge within " + std::to_string(opts.max_iterations) + " iterations");
}

}  // namespace detail

inline FitResult fit(const FitTarget& target, Family family, int degree, const FitGrid& grid, FitMode mode,
                     const FitOptions& opts = {}) {
    require(family == Family::Hermite || family == Family::Fourier,
            "direct fitting supports the Hermite and Fourier families");
    require(opts.derivative_weight >= 0.0, "derivative weight must be >= 0");
    const std::size_t params =
        family == Family::Hermite ? static_cast<std::size_t>(degree + 1) : static_cast<std::size_t>(2 * degree + 1);
    require(family == Family::Hermite ? degree >= 0 : degree >= 1, "degree out of range for " +
                                                                       std::string(family_name(family)));
    validate(grid, params);

    // A non-periodic target is fitted on half a period so its periodic extension
    // does not have to jump back at the window edges.
    const double fourier_scale =
        opts.fundamental_scale > 0.0 ? opts.fundamental_scale : std::numbers::pi / (grid.hi - grid.lo);
    const auto xs = grid.xs();
    const Eigen::Index rows = static_cast<Eigen::Index>(xs.size()) * (mode == FitMode::HermiteInterp ? 2 : 1);
    Eigen::MatrixXd a(rows, static_cast<Eigen::Index>(params));
    Eigen::VectorXd b(rows);
    const double sqrt_lambda = std::sqrt(opts.derivative_weight);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const auto r = family == Family::Hermite ? detail::hermite_rows(xs[i], degree)
                                                 : detail::fourier_rows(xs[i], degree, fourier_scale);
        const auto row = static_cast<Eigen::Index>(i);
        for (std::size_t j = 0; j < params; ++j) a(row, static_cast<Eigen::Index>(j)) = r.value[j];
        b(row) = target.value(xs[i]);
        if (mode == FitMode::HermiteInterp) {
            const auto drow = row + static_cast<Eigen::Index>(xs.size());
            for (std::size_t j = 0; j < params; ++j) a(drow, static_cast<Eigen::Index>(j)) = sqrt_lambda * r.deriv[j];
            b(drow) = sqrt_lambda * target.deriv(xs[i]);
        }
    }
    const auto solved = detail::solve_scaled(std::move(a), b, opts.max_condition);
    const double w = fourier_scale;
    const std::vector<double> c(solved.coeffs.data(), solved.coeffs.data() + solved.coeffs.size());

    FitResult result{HermiteActivation{}, 0.0, 0.0, grid, mode, 0, solved.condition};
    if (family == Family::Hermite) {
        result.activation = HermiteActivation{c};
    } else {
        const auto n = static_cast<std::ptrdiff_t>(degree);
        SineCosineSeries s{c[0], {c.begin() + 1, c.begin() + 1 + n}, {c.begin() + 1 + n, c.end()}, w};
        result.activation = to_amplitude_phase(s);
    }
    if (opts.refine) result.iterations = detail::refine_by_descent(result.activation, target, xs, mode, opts);
    evaluate_fit(result, target);
    return result;
}

// ---------------------------------------------------------------------------
// Tropical fits

namespace detail {

// Subgradient descent over the flattened tropical parameters on the joint
// value + derivative loss. Returns the best iterate seen.
inline int tropical_descent(Activation& act, const FitTarget& target, std::span<const double> xs,
                            const FitOptions& opts) {
    const FitMode mode = FitMode::HermiteInterp;
    double best_loss = fit_loss(act, target, xs, mode, opts.derivative_weight);
    Activation best = act;
    if (best_loss == 0.0) return 0;

    auto params = get_parameters(act);
    std::vector<double> m(params.size(), 0.0), v(params.size(), 0.0);
    const double lr = 1e-2 * std::max(1.0, (xs.back() - xs.front()) / 8.0);
    const int patience = 500;
    int since_improvement = 0;
    double window_start = best_loss;
    for (int it = 1; it <= opts.max_iterations; ++it) {
        const auto g = fit_loss_grad(act, target, xs, mode, opts.derivative_weight);
        // Adam moments give a scale-free step on the piecewise-constant subgradients.
        const double b1 = 0.9, b2 = 0.999;
        const double step = lr / std::sqrt(1.0 + it / 1000.0);
        for (std::size_t p = 0; p < params.size(); ++p) {
            m[p] = b1 * m[p] + (1 - b1) * g[p];
            v[p] = b2 * v[p] + (1 - b2) * g[p] * g[p];
            const double mh = m[p] / (1 - std::pow(b1, it));
            const double vh = v[p] / (1 - std::pow(b2, it));
            params[p] -= step * mh / (std::sqrt(vh) + 1e-12);
        }
        set_parameters(act, params);
        const double loss = fit_loss(act, target, xs, mode, opts.derivative_weight);
        if (loss < best_loss) {
            best_loss = loss;
            best = act;
        }
        if (++since_improvement >= patience) {
            const double change = (window_start - best_loss) / std::max(window_start, std::numeric_limits<double>::min());
            if (change < std::max(opts.tolerance, 1e-6)) {
                act = best;
                return it;
            }
            window_start = best_loss;
            since_improvement = 0;
        }
    }
    act = best;
    fail(ErrorCode::NonConvergent,
         "tropical fit did not settle within " + std::to_string(opts.max_iterations) + " iterations");
}

// Tangent lines of h at n+1 points spread over [lo, hi]: max of them is a
// convex under-approximation of h.
inline TropicalPolynomial tangent_polynomial(const std::function<double(double)>& h,
                                             const std::function<double(double)>& dh, double lo, double hi, int degree) {
    TropicalPolynomial p;
    for (int k = 0; k <= degree; ++k) {
        const double t = lo + (hi - lo) * (k + 0.5) / (degree + 1);
        const double slope = dh(t);
        p.coeffs.push_back(h(t) - slope * t);
        p.powers.push_back(slope);
    }
    return p;
}

}  // namespace detail

/// Single convex tropical polynomial fit (numerator only), starting from `init`.
inline FitResult fit_tropical_polynomial(const FitTarget& target, TropicalPolynomial init, const FitGrid& grid,
                                         const FitOptions& opts = {}) {
    TropicalRationalActivation r{std::move(init), TropicalPolynomial{{0.0}, {0.0}}, opts.learn_powers};
    validate(r);
    validate(grid, r.numerator.coeffs.size() * (opts.learn_powers ? 2 : 1));
    Activation act = r;
    const auto xs = grid.xs();
    FitResult result{act, 0.0, 0.0, grid, FitMode::HermiteInterp, 0, 0.0};
    result.iterations = detail::tropical_descent(act, target, xs, opts);
    // The trivial denominator c + s x may have drifted; fold it into the numerator.
    auto& fitted = std::get<TropicalRationalActivation>(act);
    for (std::size_t k = 0; k < fitted.numerator.coeffs.size(); ++k) {
        fitted.numerator.coeffs[k] -= fitted.denominator.coeffs[0];
        fitted.numerator.powers[k] -= fitted.denominator.powers[0];
    }
    fitted.denominator = TropicalPolynomial{{0.0}, {0.0}};
    fitted.learn_powers = false;
    result.activation = act;
    evaluate_fit(result, target);
    return result;
}

/// Convex fit of the given degree with slopes spread over the target's slope range.
inline FitResult fit_tropical_polynomial(const FitTarget& target, int degree, const FitGrid& grid,
                                         const FitOptions& opts = {}) {
    require(degree >= 1, "tropical degree must be >= 1");
    const auto xs = grid.xs();
    const double s_lo = target.deriv(grid.lo), s_hi = target.deriv(grid.hi);
    TropicalPolynomial p;
    for (int k = 0; k <= degree; ++k) {
        const double slope = s_lo + (s_hi - s_lo) * k / degree;
        double c = std::numeric_limits<double>::infinity();
        for (double x : xs) c = std::min(c, target.value(x) - slope * x);  // supporting line from below
        p.coeffs.push_back(c);
        p.powers.push_back(slope);
    }
    return fit_tropical_polynomial(target, std::move(p), grid, opts);
}

/// Difference of two tropical polynomials fitted to a possibly non-convex target.
///
/// Start: with mu >= max(0, -min g''), h = g + mu x^2/2 is convex. Tangents of h
/// give the numerator and tangents of mu x^2/2 the denominator, so P - Q ~ g
/// before any descent. Both parts stay convex because each is a max of affine maps.
inline FitResult fit_tropical_rational(const FitTarget& target, int deg_num, int deg_den, const FitGrid& grid,
                                       const FitOptions& opts = {}) {
    require(deg_num >= 1 && deg_den >= 1, "tropical rational degrees must be >= 1");
    const auto free = static_cast<std::size_t>(deg_num + deg_den + 2) * (opts.learn_powers ? 2 : 1);
    validate(grid, free);
    const auto xs = grid.xs();

    double min_curv = 0.0;
    const double hstep = 1e-4 * (grid.hi - grid.lo);
    for (double x : xs) min_curv = std::min(min_curv, (target.deriv(x + hstep) - target.deriv(x - hstep)) / (2 * hstep));
    const double mu = -min_curv + 0.1;

    auto h = [&](double x) { return target.value(x) + 0.5 * mu * x * x; };
    auto dh = [&](double x) { return target.deriv(x) + mu * x; };
    auto q = [mu](double x) { return 0.5 * mu * x * x; };
    auto dq = [mu](double x) { return mu * x; };

    TropicalRationalActivation r{detail::tangent_polynomial(h, dh, grid.lo, grid.hi, deg_num),
                                 detail::tangent_polynomial(q, dq, grid.lo, grid.hi, deg_den), opts.learn_powers};
    Activation act = r;
    FitResult result{act, 0.0, 0.0, grid, FitMode::HermiteInterp, 0, 0.0};
    result.iterations = detail::tropical_descent(act, target, xs, opts);
    std::get<TropicalRationalActivation>(act).learn_powers = false;
    result.activation = act;
    evaluate_fit(result, target);
    return result;
}

}  // namespace orthoact
