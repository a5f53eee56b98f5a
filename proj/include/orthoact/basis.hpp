#pragma once

/// Probabilist Hermite polynomials He_k.
///
/// Two evaluation routes are provided and kept independent of each other:
///  - the explicit monomial expansion
///        He_n(x) / n! = sum_m (-1)^m x^(n-2m) / (m! (n-2m)! 2^m),
///    tabulated once per degree (coefficients formed in log-space so the
///    factorials never overflow), and
///  - the three-term recurrence He_{k} = x He_{k-1} - (k-1) He_{k-2}.
/// The recurrence is O(degree) per input and is what the activations use; the
/// table exists for cross-checks and for the O(degree^2) benchmark path.

#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "orthoact/error.hpp"

namespace orthoact {

namespace diagnostics {

inline std::atomic<std::uint64_t> nonfinite_counter{0};

/// Number of non-finite activation outputs observed since the last reset.
/// Diagnostic only: inputs are never clamped.
inline std::uint64_t nonfinite_outputs() noexcept { return nonfinite_counter.load(std::memory_order_relaxed); }
inline void reset_nonfinite_outputs() noexcept { nonfinite_counter.store(0, std::memory_order_relaxed); }

inline double record(double v) noexcept {
    if (!std::isfinite(v)) nonfinite_counter.fetch_add(1, std::memory_order_relaxed);
    return v;
}

}  // namespace diagnostics

/// Monomial coefficients of He_i(x)/i! for i = 0..degree.
///
/// Row i, column j holds the coefficient of x^(i-2j); entries with j > i/2 are
/// zero and carry power 0.
class HermiteTable {
public:
    HermiteTable() = default;

    int degree() const noexcept { return degree_; }
    int rows() const noexcept { return degree_ + 1; }
    int cols() const noexcept { return degree_ / 2 + 1; }

    double coeff(int i, int j) const { return coeff_[index(i, j)]; }
    int power(int i, int j) const { return power_[index(i, j)]; }

    std::span<const double> coeff_row(int i) const {
        return {coeff_.data() + static_cast<std::size_t>(i) * cols(), static_cast<std::size_t>(cols())};
    }
    std::span<const int> power_row(int i) const {
        return {power_.data() + static_cast<std::size_t>(i) * cols(), static_cast<std::size_t>(cols())};
    }

    friend HermiteTable build_hermite_table(int degree);

private:
    std::size_t index(int i, int j) const {
        return static_cast<std::size_t>(i) * static_cast<std::size_t>(cols()) + static_cast<std::size_t>(j);
    }

    int degree_ = 0;
    std::vector<double> coeff_;
    std::vector<int> power_;
};

inline HermiteTable build_hermite_table(int degree) {
    require(degree >= 0, "Hermite degree must be non-negative");
    HermiteTable t;
    t.degree_ = degree;
    const int cols = degree / 2 + 1;
    t.coeff_.assign(static_cast<std::size_t>(degree + 1) * cols, 0.0);
    t.power_.assign(static_cast<std::size_t>(degree + 1) * cols, 0);
    const double ln2 = std::log(2.0);
    for (int i = 0; i <= degree; ++i) {
        for (int j = 0; j < cols; ++j) {
            if (2 * j > i) continue;
            const double log_mag = -std::lgamma(j + 1.0) - std::lgamma(i - 2.0 * j + 1.0) - j * ln2;
            const double sign = (j % 2 == 0) ? 1.0 : -1.0;
            t.coeff_[t.index(i, j)] = sign * std::exp(log_mag);
            t.power_[t.index(i, j)] = i - 2 * j;
        }
    }
    return t;
}

/// |x|^p * sign(x)^p, with 0^0 = 1.
inline double signed_power(double x, int p) {
    if (p == 0) return 1.0;
    const double mag = std::pow(std::abs(x), static_cast<double>(p));
    return (x < 0.0 && (p % 2 == 1)) ? -mag : mag;
}

/// He_k(x)/k! for k = 0..table.degree(), by contracting monomials against the table.
inline std::vector<double> hermite_explicit(double x, const HermiteTable& table) {
    std::vector<double> out(static_cast<std::size_t>(table.rows()), 0.0);
    for (int i = 0; i < table.rows(); ++i) {
        const auto c = table.coeff_row(i);
        const auto p = table.power_row(i);
        double acc = 0.0;
        for (int j = 0; j < table.cols(); ++j) acc += c[j] * signed_power(x, p[j]);
        out[static_cast<std::size_t>(i)] = acc;
    }
    return out;
}

/// He_k(x) for k = 0..degree via the three-term recurrence.
inline std::vector<double> hermite_recursive(double x, int degree) {
    require(degree >= 0, "Hermite degree must be non-negative");
    std::vector<double> he(static_cast<std::size_t>(degree + 1));
    he[0] = 1.0;
    if (degree >= 1) he[1] = x;
    for (int k = 2; k <= degree; ++k) {
        he[static_cast<std::size_t>(k)] = x * he[k - 1] - (k - 1) * he[k - 2];
    }
    return he;
}

/// He'_k(x) = k He_{k-1}(x), given He_0..He_n at the same x.
inline std::vector<double> hermite_derivative_basis(std::span<const double> he_values) {
    std::vector<double> d(he_values.size(), 0.0);
    for (std::size_t k = 1; k < he_values.size(); ++k) d[k] = static_cast<double>(k) * he_values[k - 1];
    return d;
}

}  // namespace orthoact
