#pragma once

/// Throughput micro-benchmarks. Timings go through the same eval code paths
/// the library uses (eval_batch for activations, eval_explicit for the
/// monomial-table Hermite path).

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "orthoact/activations.hpp"
#include "orthoact/basis.hpp"
#include "orthoact/error.hpp"
#include "orthoact/gains.hpp"
#include "orthoact/parallel.hpp"
#include "orthoact/rng.hpp"

namespace orthoact {

enum class BenchPath { Recursive, Explicit, NotApplicable };

inline std::string_view bench_path_name(BenchPath p) {
    switch (p) {
        case BenchPath::Recursive: return "recursive";
        case BenchPath::Explicit: return "explicit";
        case BenchPath::NotApplicable: return "n/a";
    }
    return "n/a";
}

inline BenchPath parse_bench_path(std::string_view s) {
    if (s == "recursive") return BenchPath::Recursive;
    if (s == "explicit") return BenchPath::Explicit;
    if (s == "n/a" || s == "na") return BenchPath::NotApplicable;
    fail(ErrorCode::InvalidArgument, "unknown bench path '" + std::string(s) + "' (recursive|explicit)");
}

struct BenchResult {
    std::string family;
    int degree = 0;
    BenchPath path = BenchPath::NotApplicable;
    std::size_t batch = 0;
    double ns_per_eval = 0.0;  // median over repetitions
    double min_ns_per_eval = 0.0;
    double max_ns_per_eval = 0.0;
    int claimed_flops = 0;
    int repetitions = 0;
    unsigned workers = 1;
    bool high_variance = false;  // spread above 50% of the median, or passes too short to time reliably
    std::string hardware;
};

inline std::string hardware_description() {
    return std::to_string(std::thread::hardware_concurrency()) + " hardware threads";
}

/// Times `repetitions` passes over a fixed pseudo-random batch drawn from N(0,1)
/// after one untimed warm-up pass.
inline BenchResult run_bench(Family family, int degree, std::size_t batch, int repetitions,
                             BenchPath path = BenchPath::Recursive, unsigned workers = 1, std::uint64_t seed = 0) {
    require(batch >= 1, "bench batch must be >= 1");
    require(repetitions >= 10, "bench needs at least 10 repetitions");
    require(workers >= 1, "bench needs at least one worker");
    const Activation act = family == Family::TropicalRational
                               ? Activation{TropicalRationalActivation{{std::vector<double>(degree + 1, 0.0),
                                                                        std::vector<double>(degree + 1, 1.0)},
                                                                       {{0.0}, {0.0}},
                                                                       false}}
                               : init_theorem(family, degree);
    if (family != Family::Hermite) path = BenchPath::NotApplicable;
    if (family == Family::Hermite && path == BenchPath::NotApplicable) path = BenchPath::Recursive;

    CounterRng rng(seed, static_cast<std::uint64_t>(degree));
    std::vector<double> xs(batch);
    for (double& x : xs) x = rng.normal();
    const HermiteTable table = path == BenchPath::Explicit ? build_hermite_table(degree) : HermiteTable{};
    const auto& hermite = std::get_if<HermiteActivation>(&act);

    volatile double sink = 0.0;
    auto chunk = [&](std::size_t begin, std::size_t end) {
        double acc = 0.0;
        if (path == BenchPath::Explicit) {
            for (std::size_t i = begin; i < end; ++i) acc += eval_explicit(*hermite, table, xs[i]);
        } else {
            const auto ys = eval_batch(act, std::span<const double>(xs).subspan(begin, end - begin));
            for (double y : ys) acc += y;
        }
        return acc;
    };
    auto pass = [&] {
        if (workers == 1) {
            sink = sink + chunk(0, batch);
            return;
        }
        std::vector<double> partial(workers, 0.0);
        const std::size_t per = (batch + workers - 1) / workers;
        parallel_for(workers, workers, [&](std::size_t w) {
            const std::size_t begin = std::min(batch, w * per);
            partial[w] = chunk(begin, std::min(batch, begin + per));
        });
        for (double p : partial) sink = sink + p;
    };

    pass();  // warm-up
    std::vector<double> per_eval;
    for (int r = 0; r < repetitions; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        pass();
        const auto t1 = std::chrono::steady_clock::now();
        const double ns = std::chrono::duration<double, std::nano>(t1 - t0).count();
        per_eval.push_back(std::max(ns, 1.0) / static_cast<double>(batch));
    }
    std::sort(per_eval.begin(), per_eval.end());

    BenchResult r;
    r.family = std::string(family_name(family));
    r.degree = degree;
    r.path = path;
    r.batch = batch;
    r.repetitions = repetitions;
    r.workers = workers;
    const std::size_t n = per_eval.size();
    r.ns_per_eval = n % 2 ? per_eval[n / 2] : 0.5 * (per_eval[n / 2 - 1] + per_eval[n / 2]);
    r.min_ns_per_eval = per_eval.front();
    r.max_ns_per_eval = per_eval.back();
    const double pass_ns = r.ns_per_eval * static_cast<double>(batch);
    r.high_variance = (r.max_ns_per_eval - r.min_ns_per_eval) > 0.5 * r.ns_per_eval || pass_ns < 1000.0;
    r.claimed_flops = flops_per_eval(act);
    r.hardware = hardware_description();
    return r;
}

inline void write_bench_csv_header(std::ostream& out) { out << "family,degree,path,batch,ns_per_eval,claimed_flops\n"; }

inline void write_bench_csv_row(const BenchResult& r, std::ostream& out) {
    out << r.family << ',' << r.degree << ',' << bench_path_name(r.path) << ',' << r.batch << ',' << r.ns_per_eval
        << ',' << r.claimed_flops << '\n';
}

/// Least-squares slope of log(ns_per_eval) against log(degree).
inline double log_log_slope(const std::vector<BenchResult>& results) {
    require(results.size() >= 2, "slope needs at least two results");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(results.size());
    for (const auto& r : results) {
        const double x = std::log(static_cast<double>(r.degree));
        const double y = std::log(r.ns_per_eval);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace orthoact
