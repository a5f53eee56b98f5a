#pragma once

/// Second moments, forward/backward gains and variance-preserving initializers.
///
/// Gains are the inverse second moments of the activation and of its
/// derivative, taken relative to a unit-variance signal:
///     forward  = 1 / E[F(x)^2]
///     backward = 1 / E[F'(x)^2]
/// Closed forms exist for Hermite (standard normal input), harmonic Fourier
/// series (input uniform over one period after the fundamental scale) and ReLU.
/// Everything else is estimated by seeded Monte-Carlo.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "orthoact/activations.hpp"
#include "orthoact/error.hpp"
#include "orthoact/parallel.hpp"
#include "orthoact/rng.hpp"

namespace orthoact {

enum class InputDist { StdNormal, UniformPi, UniformSqrt3 };

inline std::string_view dist_name(InputDist d) {
    switch (d) {
        case InputDist::StdNormal: return "normal";
        case InputDist::UniformPi: return "uniform-pi";
        case InputDist::UniformSqrt3: return "uniform-sqrt3";
    }
    return "unknown";
}

inline InputDist parse_dist(std::string_view s) {
    if (s == "normal" || s == "std-normal") return InputDist::StdNormal;
    if (s == "uniform-pi") return InputDist::UniformPi;
    if (s == "uniform-sqrt3") return InputDist::UniformSqrt3;
    fail(ErrorCode::InvalidArgument, "unknown input distribution '" + std::string(s) + "'");
}

inline double input_variance(InputDist d) {
    return d == InputDist::UniformPi ? std::numbers::pi * std::numbers::pi / 3.0 : 1.0;
}

inline double draw(InputDist d, CounterRng& rng) {
    switch (d) {
        case InputDist::StdNormal: return rng.normal();
        case InputDist::UniformPi: return rng.uniform(-std::numbers::pi, std::numbers::pi);
        case InputDist::UniformSqrt3: return rng.uniform(-std::numbers::sqrt3, std::numbers::sqrt3);
    }
    return 0.0;
}

/// Modified Bessel function I_0(2) = sum_k 1/(k!)^2 ~ 2.2795.
inline double bessel_i0_of_2() { return std::cyl_bessel_i(0.0, 2.0); }

struct SecondMoments {
    double value = 0.0;  // E[F(x)^2]
    double deriv = 0.0;  // E[F'(x)^2]
};

struct Gains {
    double forward = 0.0;
    double backward = 0.0;
};

namespace detail {

inline bool is_integer(double v) { return std::isfinite(v) && v == std::round(v); }

inline SecondMoments fourier_moments(const FourierActivation& f, InputDist dist) {
    if (dist == InputDist::StdNormal) {
        fail(ErrorCode::UnsupportedDistribution, "Fourier second moments have no closed form under a normal input");
    }
    const double half_width = dist == InputDist::UniformPi ? std::numbers::pi : std::numbers::sqrt3;
    if (std::abs(f.fundamental_scale * half_width - std::numbers::pi) > 1e-12 * std::numbers::pi) {
        fail(ErrorCode::UnsupportedDistribution, "fundamental scale does not map the input onto one period");
    }
    std::vector<double> seen;
    SecondMoments m{f.a0 * f.a0, 0.0};
    double inv_fact = 1.0;
    for (int k = 1; k <= f.degree(); ++k) {
        const auto i = static_cast<std::size_t>(k - 1);
        inv_fact /= k;
        const double freq = std::abs(f.frequency[i]);
        if (!is_integer(freq) || freq == 0.0 || std::find(seen.begin(), seen.end(), freq) != seen.end()) {
            fail(ErrorCode::UnsupportedFamily, "closed-form Fourier moments need distinct non-zero integer frequencies");
        }
        seen.push_back(freq);
        const double amp2 = f.amplitude[i] * f.amplitude[i] * inv_fact * inv_fact;
        m.value += amp2;
        m.deriv += amp2 * freq * freq * f.fundamental_scale * f.fundamental_scale;
    }
    return m;
}

}  // namespace detail

/// Distribution under which an activation's closed-form moments are stated.
inline InputDist natural_distribution(const Activation& act) {
    if (const auto* f = std::get_if<FourierActivation>(&act)) {
        return std::abs(f->fundamental_scale * std::numbers::sqrt3 - std::numbers::pi) < 1e-12 ? InputDist::UniformSqrt3
                                                                                             : InputDist::UniformPi;
    }
    return InputDist::StdNormal;
}

inline SecondMoments analytic_second_moment(const Activation& act, InputDist dist) {
    if (const auto* h = std::get_if<HermiteActivation>(&act)) {
        if (dist != InputDist::StdNormal) {
            fail(ErrorCode::UnsupportedDistribution, "Hermite moments are closed-form under a standard normal input only");
        }
        // sum a_k^2 / k!  and  sum_{k>=1} a_k^2 / (k-1)!
        SecondMoments m;
        double inv_fact = 1.0;
        for (std::size_t k = 0; k < h->a.size(); ++k) {
            if (k > 0) {
                m.deriv += h->a[k] * h->a[k] * inv_fact;
                inv_fact /= static_cast<double>(k);
            }
            m.value += h->a[k] * h->a[k] * inv_fact;
        }
        return m;
    }
    if (const auto* f = std::get_if<FourierActivation>(&act)) return detail::fourier_moments(*f, dist);
    if (const auto* c = std::get_if<ClassicalActivation>(&act); c && c->kind == ClassicalKind::ReLU) {
        if (dist != InputDist::StdNormal) {
            fail(ErrorCode::UnsupportedDistribution, "ReLU moments are closed-form under a standard normal input only");
        }
        return {0.5, 0.5};
    }
    fail(ErrorCode::UnsupportedFamily,
         "no closed-form second moment for " + std::string(family_name(family_of(act))) + "; use Monte-Carlo");
}

inline SecondMoments analytic_second_moment(const Activation& act) {
    return analytic_second_moment(act, natural_distribution(act));
}

inline bool has_closed_form(const Activation& act, InputDist dist) {
    try {
        (void)analytic_second_moment(act, dist);
        return true;
    } catch (const Error&) {
        return false;
    }
}

inline Gains analytic_gains(const Activation& act, InputDist dist) {
    const auto m = analytic_second_moment(act, dist);
    if (m.value == 0.0) fail(ErrorCode::DegenerateActivation, "E[F^2] = 0: forward gain is infinite");
    if (m.deriv == 0.0) fail(ErrorCode::DegenerateActivation, "E[F'^2] = 0: backward gain is infinite");
    return {1.0 / m.value, 1.0 / m.deriv};
}

inline Gains analytic_gains(const Activation& act) { return analytic_gains(act, natural_distribution(act)); }

// ---------------------------------------------------------------------------
// Monte-Carlo

struct GainReport {
    std::string family;
    int degree = 0;
    InputDist input_dist = InputDist::StdNormal;
    std::uint64_t samples = 0;
    std::uint64_t seed = 0;
    std::uint64_t nonfinite = 0;  // draws excluded because F or F' was not finite
    double mc_second_moment = 0.0;
    double mc_deriv_second_moment = 0.0;
    double mc_forward = 0.0;
    double mc_backward = 0.0;
    double cv_forward = 0.0;   // coefficient of variation of F^2 across samples
    double cv_backward = 0.0;  // same for F'^2
    std::optional<double> analytic_forward;
    std::optional<double> analytic_backward;
    std::optional<double> rel_err_forward;
    std::optional<double> rel_err_backward;
    std::string note;
};

namespace detail {

struct MomentSums {
    double f2 = 0.0, f4 = 0.0, d2 = 0.0, d4 = 0.0;
    std::uint64_t count = 0;
    std::uint64_t nonfinite = 0;
};

inline constexpr std::uint64_t kShardSize = 1u << 16;

}  // namespace detail

inline GainReport monte_carlo_gains(const Activation& act, InputDist dist, std::uint64_t samples, std::uint64_t seed,
                                    unsigned workers = 0) {
    require(samples >= 10000, "Monte-Carlo gain estimation needs at least 1e4 samples");
    validate(act);
    if (workers == 0) workers = worker_count();

    const std::uint64_t shards = (samples + detail::kShardSize - 1) / detail::kShardSize;
    std::vector<detail::MomentSums> partial(shards);
    parallel_for(static_cast<std::size_t>(shards), workers, [&](std::size_t s) {
        CounterRng rng(seed, s);
        const std::uint64_t begin = s * detail::kShardSize;
        const std::uint64_t end = std::min(samples, begin + detail::kShardSize);
        detail::MomentSums acc;
        std::visit(
            [&](const auto& a) {
                for (std::uint64_t i = begin; i < end; ++i) {
                    const double x = draw(dist, rng);
                    const double f = eval(a, x);
                    const double d = deriv(a, x);
                    if (!std::isfinite(f) || !std::isfinite(d)) {
                        ++acc.nonfinite;
                        continue;
                    }
                    acc.f2 += f * f;
                    acc.f4 += f * f * f * f;
                    acc.d2 += d * d;
                    acc.d4 += d * d * d * d;
                    ++acc.count;
                }
            },
            act);
        partial[s] = acc;
    });

    detail::MomentSums total;
    for (const auto& p : partial) {
        total.f2 += p.f2;
        total.f4 += p.f4;
        total.d2 += p.d2;
        total.d4 += p.d4;
        total.count += p.count;
        total.nonfinite += p.nonfinite;
    }
    if (total.count == 0) fail(ErrorCode::DegenerateActivation, "every Monte-Carlo sample was non-finite");

    GainReport r;
    r.family = std::string(family_name(family_of(act)));
    r.degree = degree_of(act);
    r.input_dist = dist;
    r.samples = samples;
    r.seed = seed;
    r.nonfinite = total.nonfinite;
    const double n = static_cast<double>(total.count);
    r.mc_second_moment = total.f2 / n;
    r.mc_deriv_second_moment = total.d2 / n;
    if (r.mc_second_moment == 0.0) fail(ErrorCode::DegenerateActivation, "sampled E[F^2] is zero");
    if (r.mc_deriv_second_moment == 0.0) fail(ErrorCode::DegenerateActivation, "sampled E[F'^2] is zero");
    r.mc_forward = 1.0 / r.mc_second_moment;
    r.mc_backward = 1.0 / r.mc_deriv_second_moment;
    auto cv = [n](double s2, double s4) {
        const double mean = s2 / n;
        const double var = std::max(0.0, s4 / n - mean * mean);
        return std::sqrt(var) / mean;
    };
    r.cv_forward = cv(total.f2, total.f4);
    r.cv_backward = cv(total.d2, total.d4);

    if (has_closed_form(act, dist)) {
        const auto m = analytic_second_moment(act, dist);
        if (m.value > 0.0) {
            r.analytic_forward = 1.0 / m.value;
            r.rel_err_forward = std::abs(r.mc_forward - *r.analytic_forward) / *r.analytic_forward;
        }
        if (m.deriv > 0.0) {
            r.analytic_backward = 1.0 / m.deriv;
            r.rel_err_backward = std::abs(r.mc_backward - *r.analytic_backward) / *r.analytic_backward;
        }
    }
    if (family_of(act) == Family::Tropical) {
        r.note = "closed form is asymptotic (n -> infinity); finite-degree gains are measured only";
    }
    return r;
}

inline nlohmann::json to_json_value(const GainReport& r) {
    nlohmann::json j{{"family", r.family},
                     {"degree", r.degree},
                     {"input_dist", std::string(dist_name(r.input_dist))},
                     {"samples", r.samples},
                     {"seed", r.seed},
                     {"nonfinite", r.nonfinite},
                     {"mc_second_moment", r.mc_second_moment},
                     {"mc_deriv_second_moment", r.mc_deriv_second_moment},
                     {"mc_forward", r.mc_forward},
                     {"mc_backward", r.mc_backward},
                     {"cv_forward", r.cv_forward},
                     {"cv_backward", r.cv_backward}};
    auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
    j["analytic_forward"] = opt(r.analytic_forward);
    j["analytic_backward"] = opt(r.analytic_backward);
    j["rel_err_forward"] = opt(r.rel_err_forward);
    j["rel_err_backward"] = opt(r.rel_err_backward);
    if (!r.note.empty()) j["note"] = r.note;
    return j;
}

// ---------------------------------------------------------------------------
// Initializers

enum class InitVariant {
    Theorem,   // equal forward/backward gains at every degree
    UnitGain,  // additionally rescaled so both gains tend to 1 as degree grows
};

inline double factorial(int n) { return std::exp(std::lgamma(n + 1.0)); }

inline Activation init_theorem(Family family, int degree, InitVariant variant = InitVariant::Theorem,
                               double fundamental_scale = 1.0) {
    switch (family) {
        case Family::Hermite: {
            require(degree >= 0, "Hermite degree must be >= 0");
            std::vector<double> a(static_cast<std::size_t>(degree + 1), 1.0);
            a[0] = std::sqrt(1.0 - 1.0 / factorial(degree));
            if (variant == InitVariant::UnitGain) {
                for (double& v : a) v /= std::sqrt(std::numbers::e);
            }
            return HermiteActivation{std::move(a)};
        }
        case Family::Fourier: {
            require(degree >= 1, "Fourier degree must be >= 1");
            const double nf = factorial(degree);
            double a0 = std::sqrt(1.0 - 1.0 / (nf * nf));
            std::vector<double> amp(static_cast<std::size_t>(degree), 1.0);
            if (variant == InitVariant::UnitGain) {
                const double s = std::sqrt(bessel_i0_of_2());
                a0 /= s;
                for (double& v : amp) v /= s;
            }
            return make_harmonic_fourier(a0, std::move(amp), fundamental_scale);
        }
        case Family::Tropical: {
            require(degree >= 1, "tropical degree must be >= 1");
            return TropicalActivation{std::vector<double>(static_cast<std::size_t>(degree + 1), 1.0),
                                      kSqrt2 / static_cast<double>(degree)};
        }
        case Family::TropicalRational:
            fail(ErrorCode::UnsupportedFamily, "tropical rational activations are initialized by fitting");
        default:
            return ClassicalActivation{classical_kind(family)};
    }
}

inline double he_style_weight_std(int fan_in, double gain) {
    require(fan_in >= 1, "fan_in must be >= 1");
    require(gain > 0.0 && std::isfinite(gain), "gain must be positive and finite");
    return std::sqrt(gain / static_cast<double>(fan_in));
}

/// Forward gain under a standard normal input, as used for weight initialization
/// inside a network. Closed form when available, otherwise a fixed-seed estimate.
inline double forward_gain_for_init(const Activation& act) {
    if (has_closed_form(act, InputDist::StdNormal)) {
        const auto m = analytic_second_moment(act, InputDist::StdNormal);
        if (m.value > 0.0) return 1.0 / m.value;
    }
    return monte_carlo_gains(act, InputDist::StdNormal, 100000, 0x5EEDULL, 1).mc_forward;
}

}  // namespace orthoact
