#pragma once

/// Learnable activation families and the classical reference activations.
///
/// Every family exposes the same four contracts through free functions:
///   eval(act, x)              F(x)
///   deriv(act, x)             F'(x)
///   param_grad(act, x)        dF/dtheta over the flattened parameter vector
///   deriv_param_grad(act, x)  dF'/dtheta (used by derivative-matching fits)
/// Parameter vectors are flattened in the order documented on each type.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

#include "orthoact/basis.hpp"
#include "orthoact/error.hpp"

namespace orthoact {

inline constexpr double kSqrt2 = std::numbers::sqrt2;

/// F(x) = sum_{k=0}^{n} a_k He_k(x) / k!.  Parameters: [a_0 .. a_n].
struct HermiteActivation {
    std::vector<double> a;

    int degree() const noexcept { return static_cast<int>(a.size()) - 1; }
};

/// Amplitude-phase cosine series
///     F(x) = a0 + sqrt(2) sum_{k=1}^{n} A_k cos(f_k w x - phi_k) / k!
/// with w the fundamental-frequency scale.
/// Parameters: [a0, A_1..A_n, f_1..f_n, phi_1..phi_n].
struct FourierActivation {
    double a0 = 0.0;
    std::vector<double> amplitude;
    std::vector<double> frequency;
    std::vector<double> phase;
    double fundamental_scale = 1.0;
    bool learn_frequencies = true;  // frequencies and phases; amplitudes are always learnable

    int degree() const noexcept { return static_cast<int>(amplitude.size()); }
};

/// F(x) = scale * max_k (a_k + k x).  Parameters: [a_0 .. a_n].
struct TropicalActivation {
    std::vector<double> a;
    double scale = 1.0;

    int degree() const noexcept { return static_cast<int>(a.size()) - 1; }
};

/// max_k (coeffs_k + powers_k x) with real-valued powers (slopes).
struct TropicalPolynomial {
    std::vector<double> coeffs;
    std::vector<double> powers;

    int degree() const noexcept { return static_cast<int>(coeffs.size()) - 1; }
};

/// F(x) = P(x) - Q(x) for tropical polynomials P, Q.
/// Parameters: [P.coeffs, P.powers, Q.coeffs, Q.powers].
struct TropicalRationalActivation {
    TropicalPolynomial numerator;
    TropicalPolynomial denominator;
    bool learn_powers = false;

    int degree() const noexcept { return std::max(numerator.degree(), denominator.degree()); }
};

enum class ClassicalKind { ReLU, GELU, SiLU };

struct ClassicalActivation {
    ClassicalKind kind = ClassicalKind::GELU;
};

using Activation =
    std::variant<HermiteActivation, FourierActivation, TropicalActivation, TropicalRationalActivation, ClassicalActivation>;

enum class Family { Hermite, Fourier, Tropical, TropicalRational, ReLU, GELU, SiLU };

// ---------------------------------------------------------------------------
// Names

inline std::string_view family_name(Family f) {
    switch (f) {
        case Family::Hermite: return "hermite";
        case Family::Fourier: return "fourier";
        case Family::Tropical: return "tropical";
        case Family::TropicalRational: return "tropical_rational";
        case Family::ReLU: return "relu";
        case Family::GELU: return "gelu";
        case Family::SiLU: return "silu";
    }
    return "unknown";
}

/// Column label used in figure-style data files.
inline std::string_view display_name(Family f) {
    switch (f) {
        case Family::Hermite: return "Hermite";
        case Family::Fourier: return "Fourier";
        case Family::Tropical: return "Tropical";
        case Family::TropicalRational: return "Tropical_rational";
        case Family::ReLU: return "ReLU";
        case Family::GELU: return "GELU";
        case Family::SiLU: return "SiLU";
    }
    return "Unknown";
}

inline Family parse_family(std::string_view name) {
    std::string s(name);
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    std::replace(s.begin(), s.end(), '-', '_');
    for (Family f : {Family::Hermite, Family::Fourier, Family::Tropical, Family::TropicalRational, Family::ReLU,
                     Family::GELU, Family::SiLU}) {
        if (s == family_name(f)) return f;
    }
    fail(ErrorCode::InvalidArgument, "unknown activation family '" + std::string(name) + "'");
}

inline bool is_classical(Family f) { return f == Family::ReLU || f == Family::GELU || f == Family::SiLU; }

inline Family classical_family(ClassicalKind k) {
    switch (k) {
        case ClassicalKind::ReLU: return Family::ReLU;
        case ClassicalKind::GELU: return Family::GELU;
        case ClassicalKind::SiLU: return Family::SiLU;
    }
    return Family::GELU;
}

inline ClassicalKind classical_kind(Family f) {
    switch (f) {
        case Family::ReLU: return ClassicalKind::ReLU;
        case Family::GELU: return ClassicalKind::GELU;
        case Family::SiLU: return ClassicalKind::SiLU;
        default: fail(ErrorCode::InvalidArgument, "not a classical activation: " + std::string(family_name(f)));
    }
}

inline Family family_of(const Activation& act) {
    struct Visitor {
        Family operator()(const HermiteActivation&) const { return Family::Hermite; }
        Family operator()(const FourierActivation&) const { return Family::Fourier; }
        Family operator()(const TropicalActivation&) const { return Family::Tropical; }
        Family operator()(const TropicalRationalActivation&) const { return Family::TropicalRational; }
        Family operator()(const ClassicalActivation& c) const { return classical_family(c.kind); }
    };
    return std::visit(Visitor{}, act);
}

inline int degree_of(const Activation& act) {
    return std::visit(
        [](const auto& a) -> int {
            if constexpr (std::is_same_v<std::decay_t<decltype(a)>, ClassicalActivation>) {
                return 0;
            } else {
                return a.degree();
            }
        },
        act);
}

// ---------------------------------------------------------------------------
// Validation

namespace detail {

inline bool all_finite(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

inline void validate_polynomial(const TropicalPolynomial& p, const char* which) {
    require(!p.coeffs.empty(), std::string("tropical ") + which + " needs at least one term");
    require(p.coeffs.size() == p.powers.size(), std::string("tropical ") + which + " coeffs/powers size mismatch");
    require(all_finite(p.coeffs) && all_finite(p.powers), std::string("tropical ") + which + " must be finite");
}

}  // namespace detail

inline void validate(const HermiteActivation& h) {
    require(!h.a.empty(), "Hermite activation needs degree >= 0");
    require(detail::all_finite(h.a), "Hermite coefficients must be finite");
}

inline void validate(const FourierActivation& f) {
    require(f.degree() >= 1, "Fourier activation needs degree >= 1");
    require(f.frequency.size() == f.amplitude.size() && f.phase.size() == f.amplitude.size(),
            "Fourier amplitude/frequency/phase sizes differ");
    require(std::isfinite(f.a0) && std::isfinite(f.fundamental_scale) && detail::all_finite(f.amplitude) &&
                detail::all_finite(f.frequency) && detail::all_finite(f.phase),
            "Fourier parameters must be finite");
}

inline void validate(const TropicalActivation& t) {
    require(t.degree() >= 1, "tropical activation needs degree >= 1");
    require(detail::all_finite(t.a) && std::isfinite(t.scale), "tropical parameters must be finite");
}

inline void validate(const TropicalRationalActivation& r) {
    detail::validate_polynomial(r.numerator, "numerator");
    detail::validate_polynomial(r.denominator, "denominator");
}

inline void validate(const ClassicalActivation&) {}

inline void validate(const Activation& act) {
    std::visit([](const auto& a) { validate(a); }, act);
}

// ---------------------------------------------------------------------------
// Classical

inline double standard_normal_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }
inline double standard_normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }
inline double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

inline double eval(const ClassicalActivation& c, double x) {
    switch (c.kind) {
        case ClassicalKind::ReLU: return x > 0.0 ? x : (std::isnan(x) ? x : 0.0);
        case ClassicalKind::GELU: return x * standard_normal_cdf(x);
        case ClassicalKind::SiLU: return x * sigmoid(x);
    }
    return 0.0;
}

inline double deriv(const ClassicalActivation& c, double x) {
    switch (c.kind) {
        case ClassicalKind::ReLU: return x > 0.0 ? 1.0 : (std::isnan(x) ? x : 0.0);
        case ClassicalKind::GELU: return standard_normal_cdf(x) + x * standard_normal_pdf(x);
        case ClassicalKind::SiLU: {
            const double s = sigmoid(x);
            return s * (1.0 + x * (1.0 - s));
        }
    }
    return 0.0;
}

// ---------------------------------------------------------------------------
// Hermite (recursive path)

inline double eval(const HermiteActivation& h, double x) {
    const int n = h.degree();
    double acc = h.a[0];
    if (n == 0) return acc;
    double prev = 1.0;  // He_{k-2}
    double cur = x;     // He_{k-1}
    double inv_fact = 1.0;
    acc += h.a[1] * x;
    for (int k = 2; k <= n; ++k) {
        const double next = x * cur - (k - 1) * prev;
        inv_fact /= k;
        acc += h.a[static_cast<std::size_t>(k)] * next * inv_fact;
        prev = cur;
        cur = next;
    }
    return acc;
}

inline double deriv(const HermiteActivation& h, double x) {
    // F'(x) = sum_{k=1}^{n} a_k He_{k-1}(x) / (k-1)!
    const int n = h.degree();
    if (n == 0) return 0.0;
    double acc = h.a[1];
    if (n == 1) return acc;
    double prev = 1.0;
    double cur = x;
    double inv_fact = 1.0;
    acc += h.a[2] * x;
    for (int k = 3; k <= n; ++k) {
        const double next = x * cur - (k - 2) * prev;
        inv_fact /= (k - 1);
        acc += h.a[static_cast<std::size_t>(k)] * next * inv_fact;
        prev = cur;
        cur = next;
    }
    return acc;
}

/// He_k(x)/k! for k = 0..n.
inline std::vector<double> param_grad(const HermiteActivation& h, double x) {
    auto he = hermite_recursive(x, h.degree());
    double inv_fact = 1.0;
    for (std::size_t k = 1; k < he.size(); ++k) {
        inv_fact /= static_cast<double>(k);
        he[k] *= inv_fact;
    }
    return he;
}

inline std::vector<double> deriv_param_grad(const HermiteActivation& h, double x) {
    std::vector<double> g(h.a.size(), 0.0);
    if (h.degree() == 0) return g;
    const auto lower = param_grad(HermiteActivation{std::vector<double>(h.a.size() - 1, 0.0)}, x);
    std::copy(lower.begin(), lower.end(), g.begin() + 1);
    return g;
}

/// Same function evaluated through the explicit monomial table (O(n^2) per input).
inline double eval_explicit(const HermiteActivation& h, const HermiteTable& table, double x) {
    require(table.degree() == h.degree(), "Hermite table degree does not match activation");
    const auto basis = hermite_explicit(x, table);
    double acc = 0.0;
    for (std::size_t k = 0; k < basis.size(); ++k) acc += h.a[k] * basis[k];
    return acc;
}

// ---------------------------------------------------------------------------
// Fourier

inline double eval(const FourierActivation& f, double x) {
    double acc = 0.0;
    double inv_fact = 1.0;
    const double wx = f.fundamental_scale * x;
    for (int k = 1; k <= f.degree(); ++k) {
        const auto i = static_cast<std::size_t>(k - 1);
        inv_fact /= k;
        acc += f.amplitude[i] * std::cos(f.frequency[i] * wx - f.phase[i]) * inv_fact;
    }
    return f.a0 + kSqrt2 * acc;
}

inline double deriv(const FourierActivation& f, double x) {
    double acc = 0.0;
    double inv_fact = 1.0;
    const double w = f.fundamental_scale;
    for (int k = 1; k <= f.degree(); ++k) {
        const auto i = static_cast<std::size_t>(k - 1);
        inv_fact /= k;
        acc += f.amplitude[i] * f.frequency[i] * std::sin(f.frequency[i] * w * x - f.phase[i]) * inv_fact;
    }
    return -kSqrt2 * w * acc;
}

inline std::vector<double> param_grad(const FourierActivation& f, double x) {
    const auto n = static_cast<std::size_t>(f.degree());
    std::vector<double> g(1 + 3 * n, 0.0);
    g[0] = 1.0;
    double inv_fact = 1.0;
    const double w = f.fundamental_scale;
    for (std::size_t i = 0; i < n; ++i) {
        inv_fact /= static_cast<double>(i + 1);
        const double theta = f.frequency[i] * w * x - f.phase[i];
        const double c = std::cos(theta);
        const double s = std::sin(theta);
        g[1 + i] = kSqrt2 * c * inv_fact;
        g[1 + n + i] = -kSqrt2 * f.amplitude[i] * w * x * s * inv_fact;
        g[1 + 2 * n + i] = kSqrt2 * f.amplitude[i] * s * inv_fact;
    }
    return g;
}

inline std::vector<double> deriv_param_grad(const FourierActivation& f, double x) {
    const auto n = static_cast<std::size_t>(f.degree());
    std::vector<double> g(1 + 3 * n, 0.0);
    double inv_fact = 1.0;
    const double w = f.fundamental_scale;
    for (std::size_t i = 0; i < n; ++i) {
        inv_fact /= static_cast<double>(i + 1);
        const double theta = f.frequency[i] * w * x - f.phase[i];
        const double c = std::cos(theta);
        const double s = std::sin(theta);
        g[1 + i] = -kSqrt2 * f.frequency[i] * w * s * inv_fact;
        g[1 + n + i] = -kSqrt2 * f.amplitude[i] * w * (s + f.frequency[i] * w * x * c) * inv_fact;
        g[1 + 2 * n + i] = kSqrt2 * f.amplitude[i] * f.frequency[i] * w * c * inv_fact;
    }
    return g;
}

/// Harmonic sine-cosine series  a0 + sum_k (a_k cos(k w x) + b_k sin(k w x)) / k!.
struct SineCosineSeries {
    double a0 = 0.0;
    std::vector<double> cos_coeffs;
    std::vector<double> sin_coeffs;
    double fundamental_scale = 1.0;
};

inline double eval(const SineCosineSeries& s, double x) {
    double acc = s.a0;
    double inv_fact = 1.0;
    for (std::size_t i = 0; i < s.cos_coeffs.size(); ++i) {
        const double k = static_cast<double>(i + 1);
        inv_fact /= k;
        acc += (s.cos_coeffs[i] * std::cos(k * s.fundamental_scale * x) +
                s.sin_coeffs[i] * std::sin(k * s.fundamental_scale * x)) *
               inv_fact;
    }
    return acc;
}

/// Exact conversion to the amplitude-phase form with harmonic frequencies f_k = k.
inline FourierActivation to_amplitude_phase(const SineCosineSeries& s) {
    require(s.cos_coeffs.size() == s.sin_coeffs.size() && !s.cos_coeffs.empty(), "sine-cosine series size mismatch");
    FourierActivation f;
    f.a0 = s.a0;
    f.fundamental_scale = s.fundamental_scale;
    for (std::size_t i = 0; i < s.cos_coeffs.size(); ++i) {
        const double a = s.cos_coeffs[i];
        const double b = s.sin_coeffs[i];
        f.amplitude.push_back(std::hypot(a, b) / kSqrt2);
        f.frequency.push_back(static_cast<double>(i + 1));
        f.phase.push_back((a == 0.0 && b == 0.0) ? std::numbers::pi / 4.0 : std::atan2(b, a));
    }
    return f;
}

/// Harmonic activation: f_k = k, phi_k = pi/4, so that
/// sqrt(2) A_k cos(k w x - pi/4) = A_k (cos(k w x) + sin(k w x)).
inline FourierActivation make_harmonic_fourier(double a0, std::vector<double> amplitudes,
                                               double fundamental_scale = 1.0) {
    FourierActivation f;
    f.a0 = a0;
    f.amplitude = std::move(amplitudes);
    for (std::size_t i = 0; i < f.amplitude.size(); ++i) {
        f.frequency.push_back(static_cast<double>(i + 1));
        f.phase.push_back(std::numbers::pi / 4.0);
    }
    f.fundamental_scale = fundamental_scale;
    return f;
}

// ---------------------------------------------------------------------------
// Tropical

namespace detail {

// Index of the maximal affine piece; ties resolve to the highest index.
template <class Slope>
std::size_t tropical_argmax(std::span<const double> coeffs, Slope slope, double x) {
    std::size_t best = 0;
    double best_val = coeffs[0] + slope(0) * x;
    for (std::size_t k = 1; k < coeffs.size(); ++k) {
        const double v = coeffs[k] + slope(k) * x;
        if (v >= best_val) {
            best_val = v;
            best = k;
        }
    }
    return best;
}

inline std::size_t argmax(const TropicalActivation& t, double x) {
    return tropical_argmax(t.a, [](std::size_t k) { return static_cast<double>(k); }, x);
}

inline std::size_t argmax(const TropicalPolynomial& p, double x) {
    return tropical_argmax(p.coeffs, [&p](std::size_t k) { return p.powers[k]; }, x);
}

}  // namespace detail

inline double eval(const TropicalActivation& t, double x) {
    double best = t.a[0];
    for (std::size_t k = 1; k < t.a.size(); ++k) best = std::max(best, t.a[k] + static_cast<double>(k) * x);
    if (std::isnan(x)) return x;
    return t.scale * best;
}

inline double deriv(const TropicalActivation& t, double x) {
    if (std::isnan(x)) return x;
    return t.scale * static_cast<double>(detail::argmax(t, x));
}

inline std::vector<double> param_grad(const TropicalActivation& t, double x) {
    std::vector<double> g(t.a.size(), 0.0);
    g[detail::argmax(t, x)] = t.scale;
    return g;
}

inline std::vector<double> deriv_param_grad(const TropicalActivation& t, double) {
    return std::vector<double>(t.a.size(), 0.0);
}

inline double eval(const TropicalPolynomial& p, double x) {
    const auto k = detail::argmax(p, x);
    return p.coeffs[k] + p.powers[k] * x;
}

inline double eval(const TropicalRationalActivation& r, double x) {
    return eval(r.numerator, x) - eval(r.denominator, x);
}

inline double deriv(const TropicalRationalActivation& r, double x) {
    if (std::isnan(x)) return x;
    return r.numerator.powers[detail::argmax(r.numerator, x)] - r.denominator.powers[detail::argmax(r.denominator, x)];
}

inline std::vector<double> param_grad(const TropicalRationalActivation& r, double x) {
    const std::size_t m = r.numerator.coeffs.size();
    const std::size_t n = r.denominator.coeffs.size();
    std::vector<double> g(2 * m + 2 * n, 0.0);
    const auto i = detail::argmax(r.numerator, x);
    const auto j = detail::argmax(r.denominator, x);
    g[i] = 1.0;
    g[m + i] = x;
    g[2 * m + j] = -1.0;
    g[2 * m + n + j] = -x;
    return g;
}

inline std::vector<double> deriv_param_grad(const TropicalRationalActivation& r, double x) {
    const std::size_t m = r.numerator.coeffs.size();
    const std::size_t n = r.denominator.coeffs.size();
    std::vector<double> g(2 * m + 2 * n, 0.0);
    g[m + detail::argmax(r.numerator, x)] = 1.0;
    g[2 * m + n + detail::argmax(r.denominator, x)] = -1.0;
    return g;
}

inline std::vector<double> param_grad(const ClassicalActivation&, double) { return {}; }
inline std::vector<double> deriv_param_grad(const ClassicalActivation&, double) { return {}; }

// ---------------------------------------------------------------------------
// Variant dispatch

inline double eval(const Activation& act, double x) {
    return diagnostics::record(std::visit([x](const auto& a) { return eval(a, x); }, act));
}

inline double deriv(const Activation& act, double x) {
    return diagnostics::record(std::visit([x](const auto& a) { return deriv(a, x); }, act));
}

inline std::vector<double> param_grad(const Activation& act, double x) {
    return std::visit([x](const auto& a) { return param_grad(a, x); }, act);
}

inline std::vector<double> deriv_param_grad(const Activation& act, double x) {
    return std::visit([x](const auto& a) { return deriv_param_grad(a, x); }, act);
}

inline std::vector<double> eval_batch(const Activation& act, std::span<const double> xs) {
    std::vector<double> out(xs.size());
    std::visit(
        [&](const auto& a) {
            for (std::size_t i = 0; i < xs.size(); ++i) out[i] = diagnostics::record(eval(a, xs[i]));
        },
        act);
    return out;
}

inline std::vector<double> deriv_batch(const Activation& act, std::span<const double> xs) {
    std::vector<double> out(xs.size());
    std::visit(
        [&](const auto& a) {
            for (std::size_t i = 0; i < xs.size(); ++i) out[i] = diagnostics::record(deriv(a, xs[i]));
        },
        act);
    return out;
}

/// out += scale * dF/dtheta at x, without allocating. Used on the training hot path.
inline void accumulate_param_grad(const Activation& act, double x, double scale, std::span<double> out) {
    if (const auto* h = std::get_if<HermiteActivation>(&act)) {
        out[0] += scale;
        if (h->degree() == 0) return;
        double prev = 1.0, cur = x, inv_fact = 1.0;
        out[1] += scale * x;
        for (int k = 2; k <= h->degree(); ++k) {
            const double next = x * cur - (k - 1) * prev;
            inv_fact /= k;
            out[static_cast<std::size_t>(k)] += scale * next * inv_fact;
            prev = cur;
            cur = next;
        }
    } else if (const auto* f = std::get_if<FourierActivation>(&act)) {
        const auto n = static_cast<std::size_t>(f->degree());
        const double w = f->fundamental_scale;
        double inv_fact = 1.0;
        out[0] += scale;
        for (std::size_t i = 0; i < n; ++i) {
            inv_fact /= static_cast<double>(i + 1);
            const double theta = f->frequency[i] * w * x - f->phase[i];
            const double c = std::cos(theta), s = std::sin(theta);
            const double k = scale * kSqrt2 * inv_fact;
            out[1 + i] += k * c;
            out[1 + n + i] += -k * f->amplitude[i] * w * x * s;
            out[1 + 2 * n + i] += k * f->amplitude[i] * s;
        }
    } else if (const auto* t = std::get_if<TropicalActivation>(&act)) {
        out[detail::argmax(*t, x)] += scale * t->scale;
    } else if (std::holds_alternative<TropicalRationalActivation>(act)) {
        const auto g = param_grad(act, x);
        for (std::size_t p = 0; p < g.size(); ++p) out[p] += scale * g[p];
    }
}

// ---------------------------------------------------------------------------
// Parameter access

inline std::vector<double> get_parameters(const Activation& act) {
    struct Visitor {
        std::vector<double> operator()(const HermiteActivation& h) const { return h.a; }
        std::vector<double> operator()(const FourierActivation& f) const {
            std::vector<double> p{f.a0};
            p.insert(p.end(), f.amplitude.begin(), f.amplitude.end());
            p.insert(p.end(), f.frequency.begin(), f.frequency.end());
            p.insert(p.end(), f.phase.begin(), f.phase.end());
            return p;
        }
        std::vector<double> operator()(const TropicalActivation& t) const { return t.a; }
        std::vector<double> operator()(const TropicalRationalActivation& r) const {
            std::vector<double> p = r.numerator.coeffs;
            p.insert(p.end(), r.numerator.powers.begin(), r.numerator.powers.end());
            p.insert(p.end(), r.denominator.coeffs.begin(), r.denominator.coeffs.end());
            p.insert(p.end(), r.denominator.powers.begin(), r.denominator.powers.end());
            return p;
        }
        std::vector<double> operator()(const ClassicalActivation&) const { return {}; }
    };
    return std::visit(Visitor{}, act);
}

inline std::size_t parameter_count(const Activation& act) { return get_parameters(act).size(); }

inline void set_parameters(Activation& act, std::span<const double> p) {
    require(p.size() == parameter_count(act), "parameter vector has the wrong length");
    struct Visitor {
        std::span<const double> p;
        void operator()(HermiteActivation& h) const { h.a.assign(p.begin(), p.end()); }
        void operator()(FourierActivation& f) const {
            const std::size_t n = f.amplitude.size();
            f.a0 = p[0];
            std::copy_n(p.begin() + 1, n, f.amplitude.begin());
            std::copy_n(p.begin() + 1 + static_cast<std::ptrdiff_t>(n), n, f.frequency.begin());
            std::copy_n(p.begin() + 1 + 2 * static_cast<std::ptrdiff_t>(n), n, f.phase.begin());
        }
        void operator()(TropicalActivation& t) const { t.a.assign(p.begin(), p.end()); }
        void operator()(TropicalRationalActivation& r) const {
            const auto m = static_cast<std::ptrdiff_t>(r.numerator.coeffs.size());
            const auto n = static_cast<std::ptrdiff_t>(r.denominator.coeffs.size());
            auto it = p.begin();
            std::copy_n(it, m, r.numerator.coeffs.begin());
            std::copy_n(it + m, m, r.numerator.powers.begin());
            std::copy_n(it + 2 * m, n, r.denominator.coeffs.begin());
            std::copy_n(it + 2 * m + n, n, r.denominator.powers.begin());
        }
        void operator()(ClassicalActivation&) const {}
    };
    std::visit(Visitor{p}, act);
}

/// Which flattened parameters the optimizer may update.
inline std::vector<bool> trainable_mask(const Activation& act) {
    struct Visitor {
        std::vector<bool> operator()(const HermiteActivation& h) const { return std::vector<bool>(h.a.size(), true); }
        std::vector<bool> operator()(const FourierActivation& f) const {
            const std::size_t n = f.amplitude.size();
            std::vector<bool> m(1 + 3 * n, f.learn_frequencies);
            std::fill_n(m.begin(), 1 + n, true);
            return m;
        }
        std::vector<bool> operator()(const TropicalActivation& t) const { return std::vector<bool>(t.a.size(), true); }
        std::vector<bool> operator()(const TropicalRationalActivation& r) const {
            const std::size_t m = r.numerator.coeffs.size();
            const std::size_t n = r.denominator.coeffs.size();
            std::vector<bool> mask(2 * m + 2 * n, r.learn_powers);
            std::fill_n(mask.begin(), m, true);
            std::fill_n(mask.begin() + static_cast<std::ptrdiff_t>(2 * m), n, true);
            return mask;
        }
        std::vector<bool> operator()(const ClassicalActivation&) const { return {}; }
    };
    return std::visit(Visitor{}, act);
}

// ---------------------------------------------------------------------------
// FLOP accounting per scalar evaluation (forward only).

inline int flops_per_eval(const Activation& act) {
    const int d = degree_of(act);
    switch (family_of(act)) {
        case Family::Tropical: return 3 * d + 1;
        case Family::Fourier: return 7 * d + 1;
        case Family::Hermite: return 4 * d + 1;
        case Family::GELU: return 12;
        case Family::ReLU: return 1;
        case Family::SiLU: return 4;
        case Family::TropicalRational: {
            const auto& r = std::get<TropicalRationalActivation>(act);
            // two max-reductions of 2 flops per piece plus the final subtraction
            return 2 * static_cast<int>(r.numerator.coeffs.size() + r.denominator.coeffs.size()) + 1;
        }
    }
    return 0;
}

}  // namespace orthoact
