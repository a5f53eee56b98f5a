#pragma once

/// Command-line front end. Exit codes: 0 ok, 1 numeric failure, 2 usage error.
///
///   orthoact [--config FILE] [--summary FILE] <command> [flags]
///
/// A JSON config file maps flag names (without dashes) to values; flags given
/// on the command line win. Every command prints a human-readable table and a
/// JSON summary (to --summary, or to stdout when --summary is absent).

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "orthoact/activation_json.hpp"
#include "orthoact/activations.hpp"
#include "orthoact/bench.hpp"
#include "orthoact/data.hpp"
#include "orthoact/error.hpp"
#include "orthoact/fitting.hpp"
#include "orthoact/gains.hpp"
#include "orthoact/nn.hpp"

namespace orthoact::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitNumeric = 1;
inline constexpr int kExitUsage = 2;

/// Bad flag values detected after parsing, before any computation.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::vector<double> parse_list(const std::string& s, const char* what) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw UsageError(std::string("cannot parse ") + what + " entry '" + item + "'");
        }
    }
    if (out.empty()) throw UsageError(std::string(what) + " is empty");
    return out;
}

template <class F>
auto usage_guard(F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const Error& e) {
        throw UsageError(e.what());
    }
}

inline std::string json_scalar_to_arg(const Json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_array()) {
        std::string s;
        for (const auto& e : v) {
            if (!s.empty()) s += ',';
            s += json_scalar_to_arg(e);
        }
        return s;
    }
    if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
    if (v.is_number()) {
        std::ostringstream os;
        os << std::setprecision(17) << v.get<double>();
        return os.str();
    }
    return v.dump();
}

// Appends "--key value" for every config entry whose flag is not already present.
inline std::vector<std::string> merge_config(std::vector<std::string> args) {
    std::string path;
    for (std::size_t i = 1; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
        if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
    }
    if (path.empty()) return args;
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read config file " + path);
    Json j;
    try {
        j = Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw UsageError("config file is not valid JSON: " + std::string(e.what()));
    }
    if (!j.is_object()) throw UsageError("config file must hold a JSON object");
    auto present = [&](const std::string& flag) {
        for (const auto& a : args)
            if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
        return false;
    };
    for (const auto& [key, value] : j.items()) {
        const std::string flag = "--" + key;
        if (present(flag)) continue;
        if (value.is_boolean()) {
            if (value.get<bool>()) args.push_back(flag);
            continue;
        }
        args.push_back(flag);
        args.push_back(json_scalar_to_arg(value));
    }
    return args;
}

inline void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::Io, "cannot write " + path);
    out << content;
    if (!out) fail(ErrorCode::Io, "write failed for " + path);
}

inline std::string fmt(double v, int precision = 6) {
    std::ostringstream os;
    os << std::setprecision(precision) << v;
    return os.str();
}

// Space-separated figure data: x then value/derivative columns of each function.
inline std::string figure_table(const std::vector<std::pair<std::string, Activation>>& columns,
                                const std::vector<std::pair<std::string, FitTarget>>& targets,
                                const std::vector<double>& xs) {
    std::ostringstream os;
    os << "x";
    for (const auto& [name, _] : targets) os << ' ' << name << ' ' << name << "_deriv";
    for (const auto& [name, _] : columns) os << ' ' << name << ' ' << name << "_deriv";
    os << '\n' << std::setprecision(12);
    for (double x : xs) {
        os << x;
        for (const auto& [_, t] : targets) os << ' ' << t.value(x) << ' ' << t.deriv(x);
        for (const auto& [_, a] : columns) os << ' ' << eval(a, x) << ' ' << deriv(a, x);
        os << '\n';
    }
    return os.str();
}

inline InitVariant parse_variant(const std::string& s) {
    if (s == "theorem") return InitVariant::Theorem;
    if (s == "unit") return InitVariant::UnitGain;
    throw UsageError("unknown --init '" + s + "' (theorem|unit|fit:<target>)");
}

// Activation for --init: theorem, unit, or fit:<target> (fitted on [-4, 4]).
struct InitSpec {
    std::string raw = "theorem";
    bool is_fit = false;
    std::string target;
};

inline InitSpec parse_init(const std::string& s) {
    InitSpec spec{s, false, {}};
    if (s.rfind("fit:", 0) == 0) {
        spec.is_fit = true;
        spec.target = s.substr(4);
        usage_guard([&] { return parse_target(spec.target); });
    } else {
        (void)parse_variant(s);
    }
    return spec;
}

inline Activation fitted_activation(Family family, int degree, const FitTarget& target, FitMode mode,
                                    const FitGrid& grid) {
    switch (family) {
        case Family::Hermite:
        case Family::Fourier: return fit(target, family, degree, grid, mode).activation;
        case Family::Tropical: {
            // convex max-of-affine fit, stored as a rational with a trivial denominator
            const auto r = fit_tropical_polynomial(target, degree, grid);
            return r.activation;
        }
        case Family::TropicalRational: return fit_tropical_rational(target, degree, degree, grid).activation;
        default: fail(ErrorCode::UnsupportedFamily, "classical activations have nothing to fit");
    }
}

inline Activation make_activation(Family family, int degree, const InitSpec& init) {
    if (is_classical(family)) return ClassicalActivation{classical_kind(family)};
    if (init.is_fit) return fitted_activation(family, degree, parse_target(init.target), FitMode::HermiteInterp, {});
    return init_theorem(family, degree, parse_variant(init.raw));
}

inline void check_degree(Family family, int degree) {
    if (is_classical(family)) return;
    const int min = family == Family::Hermite ? 0 : 1;
    if (degree < min || degree > 170) {
        throw UsageError("--degree for " + std::string(family_name(family)) + " must be in [" + std::to_string(min) +
                         ", 170]");
    }
}

inline FitGrid parse_grid(const std::string& s) {
    const auto v = parse_list(s, "--grid");
    if (v.size() != 3) throw UsageError("--grid expects lo,hi,points");
    if (v[2] != std::floor(v[2]) || v[2] < 2) throw UsageError("--grid points must be an integer >= 2");
    return {v[0], v[1], static_cast<int>(v[2])};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Commands. Each returns the JSON summary and writes its table to `out`.

struct EvalOptions {
    std::string family;
    int degree = 3;
    std::string coeffs;
    std::string init = "theorem";
    double from = -4.0;
    double to = 4.0;
    int points = 401;
    std::string out_path;
};

inline Json cmd_eval(const EvalOptions& o, std::ostream& out) {
    const Family family = detail::usage_guard([&] { return parse_family(o.family); });
    detail::check_degree(family, o.degree);
    if (o.points < 2) throw UsageError("--points must be >= 2");
    if (!(o.from < o.to)) throw UsageError("--from must be smaller than --to");
    const auto init = detail::parse_init(o.init);
    std::optional<std::vector<double>> coeffs;
    if (!o.coeffs.empty()) {
        coeffs = detail::parse_list(o.coeffs, "--coeffs");
        if (family != Family::Hermite && family != Family::Tropical && family != Family::Fourier) {
            throw UsageError("--coeffs applies to hermite, fourier (harmonic amplitudes) and tropical");
        }
    }

    Activation act;
    if (coeffs) {
        if (family == Family::Hermite) {
            act = HermiteActivation{*coeffs};
        } else if (family == Family::Tropical) {
            if (coeffs->size() < 2) throw UsageError("tropical --coeffs needs at least two entries");
            act = TropicalActivation{*coeffs, kSqrt2 / static_cast<double>(coeffs->size() - 1)};
        } else {
            if (coeffs->size() < 2) throw UsageError("fourier --coeffs is a0 followed by at least one amplitude");
            act = make_harmonic_fourier((*coeffs)[0], std::vector<double>(coeffs->begin() + 1, coeffs->end()));
        }
    } else {
        act = detail::make_activation(family, o.degree, init);
    }

    std::vector<double> xs(static_cast<std::size_t>(o.points));
    for (int i = 0; i < o.points; ++i) xs[static_cast<std::size_t>(i)] = o.from + (o.to - o.from) * i / (o.points - 1);
    std::vector<std::pair<std::string, FitTarget>> targets;
    if (init.is_fit && !coeffs) {
        const auto t = parse_target(init.target);
        targets.emplace_back(t.name, t);
    }
    const std::string table = detail::figure_table({{std::string(display_name(family)), act}}, targets, xs);
    if (o.out_path.empty()) {
        out << table;
    } else {
        detail::write_text(o.out_path, table);
        out << "wrote " << xs.size() << " rows to " << o.out_path << '\n';
    }
    return {{"command", "eval"}, {"activation", to_json_value(act)}, {"points", o.points}, {"from", o.from},
            {"to", o.to},        {"out", o.out_path}};
}

struct GainOptions {
    std::string family;
    int degree = 3;
    std::string init = "theorem";
    std::string dist;
    std::uint64_t samples = 1'000'000;
    std::uint64_t seed = 0;
    unsigned workers = 0;
};

inline Json cmd_gain_check(const GainOptions& o, std::ostream& out) {
    const Family family = detail::usage_guard([&] { return parse_family(o.family); });
    detail::check_degree(family, o.degree);
    if (o.samples < 10000) throw UsageError("--samples must be >= 10000");
    const auto init = detail::parse_init(o.init);
    if (family == Family::TropicalRational && !init.is_fit) {
        throw UsageError("tropical_rational needs --init fit:<target>");
    }
    std::optional<InputDist> dist;
    if (!o.dist.empty()) dist = detail::usage_guard([&] { return parse_dist(o.dist); });

    const Activation act = detail::make_activation(family, o.degree, init);
    const InputDist d = dist.value_or(natural_distribution(act));
    const auto r = monte_carlo_gains(act, d, o.samples, o.seed, o.workers);

    auto opt = [](const std::optional<double>& v) { return v ? detail::fmt(*v, 8) : std::string("-"); };
    std::string rel = "-";
    if (r.rel_err_forward && r.rel_err_backward) rel = detail::fmt(std::max(*r.rel_err_forward, *r.rel_err_backward), 3);
    out << std::left << std::setw(18) << "family" << std::setw(8) << "degree" << std::setw(14) << "dist"
        << std::setw(16) << "alpha_analytic" << std::setw(16) << "alpha'_analytic" << std::setw(14) << "alpha_mc"
        << std::setw(14) << "alpha'_mc" << "rel_err" << '\n';
    out << std::setw(18) << r.family << std::setw(8) << r.degree << std::setw(14) << dist_name(d) << std::setw(16)
        << opt(r.analytic_forward) << std::setw(16) << opt(r.analytic_backward) << std::setw(14)
        << detail::fmt(r.mc_forward, 8) << std::setw(14) << detail::fmt(r.mc_backward, 8) << rel << '\n'
        << std::right;
    if (!r.note.empty()) out << "note: " << r.note << '\n';
    Json j = to_json_value(r);
    j["command"] = "gain-check";
    return j;
}

struct FitCliOptions {
    std::string target = "gelu";
    std::string family = "hermite";
    int degree = 3;
    std::string mode = "hermite";
    std::string grid = "-4,4,401";
    double lambda = 1.0;
    bool refine = false;
    std::string out_path;
};

inline Json cmd_fit(const FitCliOptions& o, std::ostream& out) {
    const Family family = detail::usage_guard([&] { return parse_family(o.family); });
    if (is_classical(family)) throw UsageError("--family must be a learnable family");
    detail::check_degree(family, o.degree);
    const auto target = detail::usage_guard([&] { return parse_target(o.target); });
    const FitMode mode = detail::usage_guard([&] { return parse_fit_mode(o.mode); });
    const FitGrid grid = detail::parse_grid(o.grid);
    if (!(grid.lo < grid.hi)) throw UsageError("--grid needs lo < hi");
    if (o.lambda < 0) throw UsageError("--lambda must be >= 0");

    FitOptions opts;
    opts.derivative_weight = o.lambda;
    opts.refine = o.refine;
    FitResult r;
    std::size_t free = family == Family::Hermite   ? static_cast<std::size_t>(o.degree + 1)
                       : family == Family::Fourier ? static_cast<std::size_t>(2 * o.degree + 1)
                       : family == Family::Tropical ? static_cast<std::size_t>(2 * o.degree + 2)
                                                    : static_cast<std::size_t>(4 * o.degree + 4);
    detail::usage_guard([&] {
        validate(grid, free);
        return 0;
    });
    if (family == Family::Hermite || family == Family::Fourier) {
        r = fit(target, family, o.degree, grid, mode, opts);
    } else if (family == Family::Tropical) {
        r = fit_tropical_polynomial(target, o.degree, grid, opts);
    } else {
        r = fit_tropical_rational(target, o.degree, o.degree, grid, opts);
    }

    const std::string name(display_name(family));
    out << std::left << std::setw(10) << "target" << std::setw(20) << "family" << std::setw(8) << "degree"
        << std::setw(10) << "mode" << std::setw(14) << "value_rmse" << std::setw(14) << "deriv_rmse" << "iterations\n"
        << std::setw(10) << target.name << std::setw(20) << family_name(family) << std::setw(8) << o.degree
        << std::setw(10) << fit_mode_name(r.mode) << std::setw(14) << detail::fmt(r.value_rmse) << std::setw(14)
        << detail::fmt(r.deriv_rmse) << r.iterations << '\n'
        << std::right;
    if (!o.out_path.empty()) {
        detail::write_text(o.out_path, detail::figure_table({{name, r.activation}}, {{target.name, target}}, grid.xs()));
        out << "wrote " << grid.points << " rows to " << o.out_path << '\n';
    }
    return {{"command", "fit"},          {"target", target.name},        {"family", family_name(family)},
            {"degree", o.degree},        {"mode", fit_mode_name(r.mode)}, {"value_rmse", r.value_rmse},
            {"deriv_rmse", r.deriv_rmse}, {"iterations", r.iterations},   {"activation", to_json_value(r.activation)},
            {"grid", {grid.lo, grid.hi, grid.points}}};
}

struct TrainCliOptions {
    std::string dataset = "moons";
    std::string family = "hermite";
    int degree = 3;
    std::string init = "theorem";
    int epochs = 500;
    std::string freeze = "none";
    std::string source;
    int pretrain_epochs = 300;
    std::uint64_t seed = 0;
    std::string out_dir;
    double noise = 0.2;
    int n = 1000;
    int width = 16;
    double lr = 1e-2;
    double weight_decay = 1e-4;
    int batch_size = 32;
    int resolution = 100;
};

inline Json cmd_train(const TrainCliOptions& o, std::ostream& out) {
    const Family family = detail::usage_guard([&] { return parse_family(o.family); });
    detail::check_degree(family, o.degree);
    const auto init = detail::parse_init(o.init);
    if (o.freeze != "none" && o.freeze != "weights") throw UsageError("--freeze must be weights or none");
    if (family == Family::TropicalRational && !init.is_fit) throw UsageError("tropical_rational needs --init fit:<target>");
    if (o.epochs < 0 || o.pretrain_epochs < 0) throw UsageError("epoch counts must be >= 0");
    if (o.width < 1 || o.batch_size < 1 || o.resolution < 2) throw UsageError("--width, --batch-size must be >= 1");
    if (!(o.lr > 0) || o.weight_decay < 0) throw UsageError("--lr must be > 0 and --weight-decay >= 0");
    const Dataset data = detail::usage_guard([&] { return generate(o.dataset, o.n, o.noise, o.seed); });
    const std::string source_name = o.source.empty() ? (o.dataset == "blobs" ? "moons" : "blobs") : o.source;
    std::optional<Dataset> source;
    if (o.freeze == "weights") {
        source = detail::usage_guard([&] { return generate(source_name, o.n, o.noise, o.seed + 7919); });
    }

    TrainConfig cfg;
    cfg.epochs = o.epochs;
    cfg.seed = o.seed;
    cfg.learning_rate = o.lr;
    cfg.weight_decay = o.weight_decay;
    cfg.batch_size = o.batch_size;

    const auto width = static_cast<std::size_t>(o.width);
    MlpModel model;
    TrainTrace trace;
    std::optional<double> baseline;
    if (source) {
        // pretrain GELU on the source task, then tune only the output layer (+ activation)
        MlpModel base = make_mlp({2, width, 2}, ClassicalActivation{ClassicalKind::GELU}, o.seed);
        TrainConfig pre = cfg;
        pre.epochs = o.pretrain_epochs;
        (void)train(base, *source, pre);
        TrainConfig ft = cfg;
        ft.standardize = false;
        ft.freeze.hidden_weights = ft.freeze.hidden_biases = true;
        ft.seed = o.seed + 1;
        MlpModel frozen_gelu = base;
        baseline = train(frozen_gelu, data, ft).final_test_acc;
        model = base;
        const Activation act =
            is_classical(family) ? Activation{ClassicalActivation{classical_kind(family)}}
                                 : detail::make_activation(family, o.degree, init.is_fit ? init : detail::parse_init("fit:gelu"));
        for (auto& layer : model.layers)
            if (layer.activation) layer.activation = act;
        trace = train(model, data, ft);
    } else {
        model = make_mlp({2, width, 2}, detail::make_activation(family, o.degree, init), o.seed);
        trace = train(model, data, cfg);
    }

    Json summary{{"command", "train"},
                 {"dataset", o.dataset},
                 {"family", family_name(family)},
                 {"degree", o.degree},
                 {"epochs", o.epochs},
                 {"freeze", o.freeze},
                 {"seed", o.seed},
                 {"initial_loss", trace.initial_loss},
                 {"final_train_loss", trace.epochs.back().train_loss},
                 {"train_accuracy", trace.final_train_acc},
                 {"test_accuracy", trace.final_test_acc}};
    if (baseline) summary["frozen_gelu_test_accuracy"] = *baseline;

    if (!o.out_dir.empty()) {
        std::filesystem::create_directories(o.out_dir);
        const std::filesystem::path dir(o.out_dir);
        std::ostringstream trace_csv, boundary_csv;
        write_trace_csv(trace, trace_csv);
        write_boundary_csv(model, data, boundary_csv, o.resolution);
        detail::write_text((dir / "trace.csv").string(), trace_csv.str());
        detail::write_text((dir / "boundary.csv").string(), boundary_csv.str());
        detail::write_text((dir / "checkpoint.json").string(), to_json_value(model).dump(2) + "\n");
        summary["out_dir"] = o.out_dir;
    }
    out << "dataset " << o.dataset << ", " << family_name(family) << "(" << o.degree << "), " << o.epochs
        << " epochs: train accuracy " << detail::fmt(trace.final_train_acc, 4) << ", test accuracy "
        << detail::fmt(trace.final_test_acc, 4);
    if (baseline) out << " (frozen-GELU baseline " << detail::fmt(*baseline, 4) << ")";
    out << '\n';
    return summary;
}

struct PolymapOptions {
    int layers = 2;
    int degree = 2;
    int width = 4;
    std::uint64_t seed = 0;
};

/// Network with `layers` Hermite layers of the given degree and random coefficients.
inline MlpModel random_polynomial_network(int layers, int degree, std::size_t width, std::uint64_t seed) {
    CounterRng rng(seed, 7);
    std::vector<double> a(static_cast<std::size_t>(degree + 1));
    for (double& v : a) v = rng.normal();
    a.back() = a.back() >= 0 ? a.back() + 0.5 : a.back() - 0.5;  // keep the leading term clearly non-zero
    std::vector<std::size_t> widths{2};
    for (int l = 0; l < layers; ++l) widths.push_back(width);
    widths.push_back(1);
    return make_mlp(widths, HermiteActivation{a}, seed);
}

inline Json cmd_verify_polymap(const PolymapOptions& o, std::ostream& out, bool& passed) {
    if (o.layers < 1 || o.degree < 0 || o.width < 1) throw UsageError("--layers, --width must be >= 1 and --degree >= 0");
    const double bound_d = std::pow(static_cast<double>(o.degree), o.layers);
    if (bound_d > 1e6) throw UsageError("degree bound d^L is too large");
    const int bound = static_cast<int>(bound_d);
    const auto model = random_polynomial_network(o.layers, o.degree, static_cast<std::size_t>(o.width), o.seed);
    CounterRng rng(o.seed, 8);
    const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const std::vector<double> direction{std::cos(angle), std::sin(angle)};
    const auto r = verify_polynomial_mapping(model, direction, bound);
    passed = r.passed;
    out << "bound " << bound << ": " << (r.passed ? "PASS" : "FAIL") << " (layers " << o.layers << ", degree "
        << o.degree << ", effective degree " << r.effective_degree << ", max held-out rel error "
        << detail::fmt(r.max_rel_error, 3) << ")\n";
    return {{"command", "verify-polymap"}, {"layers", o.layers},
            {"degree", o.degree},          {"degree_bound", r.degree_bound},
            {"passed", r.passed},          {"effective_degree", r.effective_degree},
            {"max_rel_error", r.max_rel_error}, {"nodes", r.nodes},
            {"held_out", r.held_out}};
}

struct BenchOptions {
    std::string family = "hermite";
    std::string degrees = "3,6,12,24";
    std::string path = "recursive";
    std::size_t batch = 10000;
    int repetitions = 20;
    unsigned workers = 1;
    std::uint64_t seed = 0;
    std::string out_path;
};

inline Json cmd_bench(const BenchOptions& o, std::ostream& out) {
    const Family family = detail::usage_guard([&] { return parse_family(o.family); });
    std::vector<int> degrees;
    for (double d : detail::parse_list(o.degrees, "--degrees")) {
        if (d != std::floor(d)) throw UsageError("--degrees must be integers");
        detail::check_degree(family, static_cast<int>(d));
        degrees.push_back(static_cast<int>(d));
    }
    if (o.batch < 1) throw UsageError("--batch must be >= 1");
    if (o.repetitions < 10) throw UsageError("--repetitions must be >= 10");
    if (o.workers < 1) throw UsageError("--workers must be >= 1");
    std::vector<BenchPath> paths;
    if (o.path == "both") {
        paths = {BenchPath::Recursive, BenchPath::Explicit};
    } else {
        paths = {detail::usage_guard([&] { return parse_bench_path(o.path); })};
    }
    if (family != Family::Hermite) paths = {BenchPath::NotApplicable};

    std::ostringstream csv;
    write_bench_csv_header(csv);
    Json rows = Json::array();
    bool noisy = false;
    for (BenchPath p : paths) {
        for (int d : degrees) {
            const auto r = run_bench(family, d, o.batch, o.repetitions, p, o.workers, o.seed);
            write_bench_csv_row(r, csv);
            noisy = noisy || r.high_variance;
            rows.push_back({{"family", r.family},       {"degree", r.degree},
                            {"path", bench_path_name(r.path)}, {"batch", r.batch},
                            {"ns_per_eval", r.ns_per_eval},    {"min_ns_per_eval", r.min_ns_per_eval},
                            {"max_ns_per_eval", r.max_ns_per_eval}, {"claimed_flops", r.claimed_flops},
                            {"repetitions", r.repetitions},    {"workers", r.workers},
                            {"high_variance", r.high_variance}, {"hardware", r.hardware}});
        }
    }
    if (o.out_path.empty()) {
        out << csv.str();
    } else {
        detail::write_text(o.out_path, csv.str());
        out << csv.str();
    }
    if (noisy) out << "warning: some timings vary by more than 50% across repetitions\n";
    return {{"command", "bench"}, {"results", rows}};
}

// ---------------------------------------------------------------------------

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    std::vector<std::string> args(argv, argv + argc);
    try {
        args = detail::merge_config(std::move(args));
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }

    CLI::App app{"Orthogonal-basis and tropical learnable activations: evaluation, gains, fitting, training, benchmarks",
                 "orthoact"};
    app.require_subcommand(1);
    app.fallthrough();  // --config / --summary may also follow the subcommand
    std::string config_path, summary_path;
    app.add_option("--config", config_path, "JSON file with flag values (command-line flags win)");
    app.add_option("--summary", summary_path, "write the JSON summary here instead of stdout");

    EvalOptions eval_o;
    auto* eval_cmd = app.add_subcommand("eval", "Sample an activation and its derivative on a grid");
    eval_cmd->add_option("--family", eval_o.family, "hermite|fourier|tropical|tropical_rational|relu|gelu|silu")
        ->required();
    eval_cmd->add_option("--degree", eval_o.degree, "activation degree")->capture_default_str();
    eval_cmd->add_option("--coeffs", eval_o.coeffs, "comma-separated coefficients (overrides --init)");
    eval_cmd->add_option("--init", eval_o.init, "theorem|unit|fit:<target>")->capture_default_str();
    eval_cmd->add_option("--from", eval_o.from)->capture_default_str();
    eval_cmd->add_option("--to", eval_o.to)->capture_default_str();
    eval_cmd->add_option("--points", eval_o.points)->capture_default_str();
    eval_cmd->add_option("--out", eval_o.out_path, "output file (default: stdout)");

    GainOptions gain_o;
    auto* gain_cmd = app.add_subcommand("gain-check", "Analytic vs Monte-Carlo forward/backward gains");
    gain_cmd->add_option("--family", gain_o.family)->required();
    gain_cmd->add_option("--degree", gain_o.degree)->capture_default_str();
    gain_cmd->add_option("--init", gain_o.init, "theorem|unit|fit:<target>")->capture_default_str();
    gain_cmd->add_option("--dist", gain_o.dist, "normal|uniform-pi|uniform-sqrt3 (default: the family's own)");
    gain_cmd->add_option("--samples", gain_o.samples)->capture_default_str();
    gain_cmd->add_option("--seed", gain_o.seed)->capture_default_str();
    gain_cmd->add_option("--workers", gain_o.workers, "0 = all available");

    FitCliOptions fit_o;
    auto* fit_cmd = app.add_subcommand("fit", "Fit a learnable activation to a classical one");
    fit_cmd->add_option("--target", fit_o.target, "gelu|relu|silu")->capture_default_str();
    fit_cmd->add_option("--family", fit_o.family)->capture_default_str();
    fit_cmd->add_option("--degree", fit_o.degree)->capture_default_str();
    fit_cmd->add_option("--mode", fit_o.mode, "lagrange|hermite")->capture_default_str();
    fit_cmd->add_option("--grid", fit_o.grid, "lo,hi,points")->capture_default_str();
    fit_cmd->add_option("--lambda", fit_o.lambda, "derivative weight")->capture_default_str();
    fit_cmd->add_flag("--refine", fit_o.refine, "gradient refinement after the direct solve");
    fit_cmd->add_option("--out", fit_o.out_path, "figure-format data file");

    TrainCliOptions train_o;
    auto* train_cmd = app.add_subcommand("train", "Train a one-hidden-layer classifier on a toy dataset");
    train_cmd->add_option("--dataset", train_o.dataset, "moons|circles|blobs")->capture_default_str();
    train_cmd->add_option("--family", train_o.family)->capture_default_str();
    train_cmd->add_option("--degree", train_o.degree)->capture_default_str();
    train_cmd->add_option("--init", train_o.init, "theorem|unit|fit:<target>")->capture_default_str();
    train_cmd->add_option("--epochs", train_o.epochs)->capture_default_str();
    train_cmd->add_option("--freeze", train_o.freeze, "none|weights (pretrain GELU elsewhere, tune last layer)")
        ->capture_default_str();
    train_cmd->add_option("--source", train_o.source, "pretraining dataset for --freeze weights");
    train_cmd->add_option("--pretrain-epochs", train_o.pretrain_epochs)->capture_default_str();
    train_cmd->add_option("--seed", train_o.seed)->capture_default_str();
    train_cmd->add_option("--out-dir", train_o.out_dir, "directory for trace.csv, boundary.csv, checkpoint.json");
    train_cmd->add_option("--noise", train_o.noise)->capture_default_str();
    train_cmd->add_option("--n", train_o.n, "dataset size")->capture_default_str();
    train_cmd->add_option("--width", train_o.width)->capture_default_str();
    train_cmd->add_option("--lr", train_o.lr)->capture_default_str();
    train_cmd->add_option("--weight-decay", train_o.weight_decay)->capture_default_str();
    train_cmd->add_option("--batch-size", train_o.batch_size)->capture_default_str();
    train_cmd->add_option("--resolution", train_o.resolution, "decision-boundary grid size")->capture_default_str();

    PolymapOptions poly_o;
    auto* poly_cmd = app.add_subcommand("verify-polymap", "Check the d^L polynomial-degree bound of a Hermite network");
    poly_cmd->add_option("--layers", poly_o.layers)->capture_default_str();
    poly_cmd->add_option("--degree", poly_o.degree)->capture_default_str();
    poly_cmd->add_option("--width", poly_o.width)->capture_default_str();
    poly_cmd->add_option("--seed", poly_o.seed)->capture_default_str();

    BenchOptions bench_o;
    auto* bench_cmd = app.add_subcommand("bench", "Time activation evaluation");
    bench_cmd->add_option("--family", bench_o.family)->capture_default_str();
    bench_cmd->add_option("--degrees", bench_o.degrees)->capture_default_str();
    bench_cmd->add_option("--path", bench_o.path, "recursive|explicit|both")->capture_default_str();
    bench_cmd->add_option("--batch", bench_o.batch)->capture_default_str();
    bench_cmd->add_option("--repetitions", bench_o.repetitions)->capture_default_str();
    bench_cmd->add_option("--workers", bench_o.workers)->capture_default_str();
    bench_cmd->add_option("--seed", bench_o.seed)->capture_default_str();
    bench_cmd->add_option("--out", bench_o.out_path, "CSV file");

    std::vector<const char*> cargv;
    for (const auto& a : args) cargv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(cargv.size()), cargv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }

    int code = kExitOk;
    try {
        Json summary;
        if (eval_cmd->parsed()) {
            summary = cmd_eval(eval_o, out);
        } else if (gain_cmd->parsed()) {
            summary = cmd_gain_check(gain_o, out);
        } else if (fit_cmd->parsed()) {
            summary = cmd_fit(fit_o, out);
        } else if (train_cmd->parsed()) {
            summary = cmd_train(train_o, out);
        } else if (poly_cmd->parsed()) {
            bool passed = false;
            summary = cmd_verify_polymap(poly_o, out, passed);
            if (!passed) code = kExitNumeric;
        } else if (bench_cmd->parsed()) {
            summary = cmd_bench(bench_o, out);
        }
        if (summary_path.empty()) {
            out << summary.dump() << '\n';
        } else {
            detail::write_text(summary_path, summary.dump(2) + "\n");
        }
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const NonFiniteLossError& e) {
        err << "error: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitNumeric;
    }
    return code;
}

}  // namespace orthoact::cli
