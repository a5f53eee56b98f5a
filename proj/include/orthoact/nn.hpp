#pragma once

/// Small dense networks with per-layer learnable activations.
///
/// Layer l computes z = W a + b followed by the layer activation (shared by all
/// units of the layer); the last layer is linear. Gradients are exact
/// reverse-mode: activation input-derivatives come from deriv(), coefficient
/// gradients from the activation's parameter gradient.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "orthoact/activation_json.hpp"
#include "orthoact/activations.hpp"
#include "orthoact/data.hpp"
#include "orthoact/error.hpp"
#include "orthoact/gains.hpp"
#include "orthoact/rng.hpp"

namespace orthoact {

/// Row-major dense matrix.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

struct DenseLayer {
    Matrix weight;  // out x in
    std::vector<double> bias;
    std::optional<Activation> activation;  // empty for the linear output layer

    std::size_t in() const noexcept { return weight.cols; }
    std::size_t out() const noexcept { return weight.rows; }
};

struct MlpModel {
    std::vector<DenseLayer> layers;
    Standardizer input_norm;  // applied by predict(), not by forward()

    std::size_t input_dim() const { return layers.empty() ? 0 : layers.front().in(); }
    std::size_t output_dim() const { return layers.empty() ? 0 : layers.back().out(); }
};

/// widths = {input, hidden..., output}. Weights are zero-mean normal with the
/// He-style std for the gain of the activation feeding each layer (gain 1 for
/// the standardized input); biases start at zero.
inline MlpModel make_mlp(const std::vector<std::size_t>& widths, const Activation& hidden, std::uint64_t seed) {
    require(widths.size() >= 2, "an MLP needs at least input and output widths");
    for (auto w : widths) require(w >= 1, "layer widths must be >= 1");
    validate(hidden);
    const double gain = forward_gain_for_init(hidden);
    MlpModel m;
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
        DenseLayer layer;
        layer.weight = Matrix(widths[l + 1], widths[l]);
        layer.bias.assign(widths[l + 1], 0.0);
        const double std = he_style_weight_std(static_cast<int>(widths[l]), l == 0 ? 1.0 : gain);
        CounterRng rng(seed, 100 + l);
        for (double& w : layer.weight.data) w = std * rng.normal();
        if (l + 2 < widths.size()) layer.activation = hidden;
        m.layers.push_back(std::move(layer));
    }
    return m;
}

// ---------------------------------------------------------------------------
// Forward / backward

struct ForwardCache {
    std::vector<std::vector<double>> inputs;  // input of each layer
    std::vector<std::vector<double>> pre;     // pre-activations z of each layer
    std::vector<double> output;
};

inline void forward(const MlpModel& m, std::span<const double> x, ForwardCache& cache) {
    if (x.size() != m.input_dim()) {
        fail(ErrorCode::DimensionMismatch,
             "input has " + std::to_string(x.size()) + " features, model expects " + std::to_string(m.input_dim()));
    }
    cache.inputs.resize(m.layers.size());
    cache.pre.resize(m.layers.size());
    cache.output.assign(x.begin(), x.end());
    for (std::size_t l = 0; l < m.layers.size(); ++l) {
        const auto& layer = m.layers[l];
        cache.inputs[l] = cache.output;
        auto& z = cache.pre[l];
        z.assign(layer.out(), 0.0);
        for (std::size_t i = 0; i < layer.out(); ++i) {
            double acc = layer.bias[i];
            const double* row = &layer.weight.data[i * layer.in()];
            for (std::size_t j = 0; j < layer.in(); ++j) acc += row[j] * cache.inputs[l][j];
            z[i] = acc;
        }
        cache.output = z;
        if (layer.activation) {
            for (double& v : cache.output) v = eval(*layer.activation, v);
        }
    }
}

inline std::vector<double> forward(const MlpModel& m, std::span<const double> x) {
    ForwardCache cache;
    forward(m, x, cache);
    return cache.output;
}

/// Gradient buffers shaped like the model.
struct Gradients {
    std::vector<Matrix> weight;
    std::vector<std::vector<double>> bias;
    std::vector<std::vector<double>> activation;

    explicit Gradients(const MlpModel& m) {
        for (const auto& layer : m.layers) {
            weight.emplace_back(layer.out(), layer.in());
            bias.emplace_back(layer.out(), 0.0);
            activation.emplace_back(layer.activation ? parameter_count(*layer.activation) : 0, 0.0);
        }
    }

    void zero() {
        for (auto& w : weight) std::fill(w.data.begin(), w.data.end(), 0.0);
        for (auto& b : bias) std::fill(b.begin(), b.end(), 0.0);
        for (auto& a : activation) std::fill(a.begin(), a.end(), 0.0);
    }
};

/// Accumulates d(loss)/d(parameters) into `grads` given d(loss)/d(output).
inline void backward(const MlpModel& m, const ForwardCache& cache, std::span<const double> loss_grad, Gradients& grads) {
    require(loss_grad.size() == m.output_dim(), "loss gradient size does not match the model output");
    std::vector<double> delta(loss_grad.begin(), loss_grad.end());  // d loss / d(layer output)
    std::vector<double> below;
    for (std::size_t l = m.layers.size(); l-- > 0;) {
        const auto& layer = m.layers[l];
        const auto& z = cache.pre[l];
        if (layer.activation) {
            for (std::size_t i = 0; i < layer.out(); ++i) {
                accumulate_param_grad(*layer.activation, z[i], delta[i], grads.activation[l]);
                delta[i] *= deriv(*layer.activation, z[i]);
            }
        }
        const auto& a = cache.inputs[l];
        below.assign(layer.in(), 0.0);
        for (std::size_t i = 0; i < layer.out(); ++i) {
            grads.bias[l][i] += delta[i];
            double* gw = &grads.weight[l].data[i * layer.in()];
            const double* w = &layer.weight.data[i * layer.in()];
            for (std::size_t j = 0; j < layer.in(); ++j) {
                gw[j] += delta[i] * a[j];
                below[j] += w[j] * delta[i];
            }
        }
        delta.swap(below);
    }
}

// ---------------------------------------------------------------------------
// Losses

/// Softmax cross-entropy of logits against `label`; writes d loss / d logits.
inline double softmax_cross_entropy(std::span<const double> logits, int label, std::span<double> grad) {
    const double mx = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double z : logits) sum += std::exp(z - mx);
    const double log_sum = mx + std::log(sum);
    for (std::size_t k = 0; k < logits.size(); ++k) {
        grad[k] = std::exp(logits[k] - log_sum) - (static_cast<int>(k) == label ? 1.0 : 0.0);
    }
    return log_sum - logits[static_cast<std::size_t>(label)];
}

/// 0.5 * ||y - target||^2; writes d loss / d y.
inline double squared_error(std::span<const double> y, std::span<const double> target, std::span<double> grad) {
    double loss = 0.0;
    for (std::size_t k = 0; k < y.size(); ++k) {
        grad[k] = y[k] - target[k];
        loss += 0.5 * grad[k] * grad[k];
    }
    return loss;
}

inline std::vector<double> softmax(std::span<const double> logits) {
    const double mx = *std::max_element(logits.begin(), logits.end());
    std::vector<double> p(logits.size());
    double sum = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) sum += (p[k] = std::exp(logits[k] - mx));
    for (double& v : p) v /= sum;
    return p;
}

/// Class probabilities for a raw (unstandardized) point.
inline std::vector<double> predict_proba(const MlpModel& m, const std::array<double, 2>& x) {
    const auto z = m.input_norm.apply(x);
    return softmax(forward(m, z));
}

inline int predict(const MlpModel& m, const std::array<double, 2>& x) {
    const auto p = predict_proba(m, x);
    return static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
}

inline double accuracy(const MlpModel& m, const Dataset& d, Split which) {
    const auto idx = d.indices(which);
    if (idx.empty()) return 0.0;
    std::size_t correct = 0;
    for (auto i : idx) correct += predict(m, d.features[i]) == d.labels[i];
    return static_cast<double>(correct) / static_cast<double>(idx.size());
}

// ---------------------------------------------------------------------------
// Optimizer

enum class Optimizer { AdamW, SGD };

/// Parameter groups held fixed during training.
struct Freeze {
    bool hidden_weights = false;
    bool hidden_biases = false;
    bool output_layer = false;
    bool activations = false;
};

struct TrainConfig {
    int epochs = 500;
    int batch_size = 32;
    double learning_rate = 1e-2;
    double weight_decay = 1e-4;  // weight matrices only
    std::uint64_t seed = 0;
    Optimizer optimizer = Optimizer::AdamW;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    bool standardize = true;  // fit input standardization on the training split
    Freeze freeze;
};

/// AdamW with decoupled weight decay on weight matrices; biases and activation
/// coefficients are never decayed. Frozen groups and activation parameters
/// outside trainable_mask() are left untouched.
class ModelOptimizer {
public:
    ModelOptimizer(const MlpModel& m, const TrainConfig& cfg) : cfg_(cfg), m_(m), v_(m) {}

    void step(MlpModel& model, const Gradients& g) {
        ++t_;
        const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
        const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
        const std::size_t last = model.layers.size() - 1;
        for (std::size_t l = 0; l < model.layers.size(); ++l) {
            auto& layer = model.layers[l];
            const bool is_output = l == last;
            const bool weights_frozen = is_output ? cfg_.freeze.output_layer : cfg_.freeze.hidden_weights;
            const bool biases_frozen = is_output ? cfg_.freeze.output_layer : cfg_.freeze.hidden_biases;
            if (!weights_frozen) {
                update(layer.weight.data, g.weight[l].data, m_.weight[l].data, v_.weight[l].data, bc1, bc2,
                       cfg_.weight_decay, nullptr);
            }
            if (!biases_frozen) update(layer.bias, g.bias[l], m_.bias[l], v_.bias[l], bc1, bc2, 0.0, nullptr);
            if (layer.activation && !cfg_.freeze.activations && !g.activation[l].empty()) {
                auto params = get_parameters(*layer.activation);
                const auto mask = trainable_mask(*layer.activation);
                update(params, g.activation[l], m_.activation[l], v_.activation[l], bc1, bc2, 0.0, &mask);
                set_parameters(*layer.activation, params);
            }
        }
    }

    std::int64_t steps() const noexcept { return t_; }

private:
    void update(std::span<double> p, std::span<const double> g, std::span<double> m, std::span<double> v, double bc1,
                double bc2, double decay, const std::vector<bool>* mask) const {
        const double lr = cfg_.learning_rate;
        for (std::size_t i = 0; i < p.size(); ++i) {
            if (mask && !(*mask)[i]) continue;
            if (cfg_.optimizer == Optimizer::SGD) {
                p[i] -= lr * g[i] + lr * decay * p[i];
                continue;
            }
            m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g[i];
            v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g[i] * g[i];
            const double mh = m[i] / bc1;
            const double vh = v[i] / bc2;
            p[i] -= lr * (mh / (std::sqrt(vh) + cfg_.eps)) + lr * decay * p[i];
        }
    }

    TrainConfig cfg_;
    Gradients m_;
    Gradients v_;
    std::int64_t t_ = 0;
};

// ---------------------------------------------------------------------------
// Training

struct EpochRecord {
    int epoch = 0;
    double train_loss = 0.0;
    double test_acc = 0.0;
};

struct TrainTrace {
    double initial_loss = 0.0;
    std::vector<EpochRecord> epochs;  // epoch 0 is the state before training
    double final_train_acc = 0.0;
    double final_test_acc = 0.0;
};

inline double mean_loss(const MlpModel& m, const Dataset& d, std::span<const std::size_t> idx) {
    ForwardCache cache;
    std::vector<double> grad(m.output_dim());
    double total = 0.0;
    for (auto i : idx) {
        const std::array<double, 2> x = m.input_norm.apply(d.features[i]);
        forward(m, x, cache);
        total += softmax_cross_entropy(cache.output, d.labels[i], grad);
    }
    return idx.empty() ? 0.0 : total / static_cast<double>(idx.size());
}

inline TrainTrace train(MlpModel& model, const Dataset& data, const TrainConfig& cfg) {
    require(cfg.epochs >= 0, "epochs must be >= 0");
    require(cfg.batch_size >= 1, "batch size must be >= 1");
    require(cfg.learning_rate > 0.0 && cfg.weight_decay >= 0.0, "learning rate must be > 0 and weight decay >= 0");
    require(model.input_dim() == 2, "toy datasets have two features");
    require(model.output_dim() >= static_cast<std::size_t>(data.num_classes()), "too few output units for the labels");
    if (cfg.standardize) model.input_norm = Standardizer::fit(data);

    auto train_idx = data.indices(Split::Train);
    require(!train_idx.empty(), "dataset has no training rows");
    TrainTrace trace;
    trace.initial_loss = mean_loss(model, data, train_idx);
    trace.epochs.push_back({0, trace.initial_loss, accuracy(model, data, Split::Test)});

    ModelOptimizer opt(model, cfg);
    Gradients grads(model);
    ForwardCache cache;
    std::vector<double> loss_grad(model.output_dim());
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        CounterRng rng(cfg.seed, 1000 + static_cast<std::uint64_t>(epoch));
        shuffle(train_idx.begin(), train_idx.end(), rng);
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < train_idx.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t end = std::min(train_idx.size(), start + static_cast<std::size_t>(cfg.batch_size));
            const double inv = 1.0 / static_cast<double>(end - start);
            grads.zero();
            double batch_loss = 0.0;
            for (std::size_t b = start; b < end; ++b) {
                const auto i = train_idx[b];
                const std::array<double, 2> x = model.input_norm.apply(data.features[i]);
                forward(model, x, cache);
                batch_loss += softmax_cross_entropy(cache.output, data.labels[i], loss_grad);
                for (double& g : loss_grad) g *= inv;
                backward(model, cache, loss_grad, grads);
            }
            if (!std::isfinite(batch_loss)) throw NonFiniteLossError(opt.steps());
            epoch_loss += batch_loss;
            opt.step(model, grads);
        }
        trace.epochs.push_back(
            {epoch, epoch_loss / static_cast<double>(train_idx.size()), accuracy(model, data, Split::Test)});
    }
    trace.final_train_acc = accuracy(model, data, Split::Train);
    trace.final_test_acc = accuracy(model, data, Split::Test);
    return trace;
}

// ---------------------------------------------------------------------------
// Persistence

inline Json to_json_value(const MlpModel& m) {
    Json layers = Json::array();
    for (const auto& layer : m.layers) {
        Json rows = Json::array();
        for (std::size_t i = 0; i < layer.out(); ++i) {
            rows.push_back(std::vector<double>(layer.weight.data.begin() + static_cast<std::ptrdiff_t>(i * layer.in()),
                                               layer.weight.data.begin() +
                                                   static_cast<std::ptrdiff_t>((i + 1) * layer.in())));
        }
        layers.push_back({{"weight", rows},
                          {"bias", layer.bias},
                          {"activation", layer.activation ? to_json_value(*layer.activation) : Json(nullptr)}});
    }
    return {{"layers", layers},
            {"input_mean", m.input_norm.mean},
            {"input_scale", m.input_norm.scale}};
}

inline MlpModel model_from_json(const Json& j) {
    try {
        MlpModel m;
        for (const auto& lj : j.at("layers")) {
            DenseLayer layer;
            const auto rows = lj.at("weight").get<std::vector<std::vector<double>>>();
            require(!rows.empty() && !rows[0].empty(), "empty weight matrix");
            layer.weight = Matrix(rows.size(), rows[0].size());
            for (std::size_t i = 0; i < rows.size(); ++i) {
                require(rows[i].size() == layer.in(), "ragged weight matrix");
                std::copy(rows[i].begin(), rows[i].end(), layer.weight.data.begin() + static_cast<std::ptrdiff_t>(i * layer.in()));
            }
            layer.bias = lj.at("bias").get<std::vector<double>>();
            require(layer.bias.size() == layer.out(), "bias size does not match weight rows");
            if (!lj.at("activation").is_null()) layer.activation = activation_from_json(lj.at("activation"));
            if (!m.layers.empty() && m.layers.back().out() != layer.in()) {
                fail(ErrorCode::DimensionMismatch, "consecutive layer widths do not chain");
            }
            m.layers.push_back(std::move(layer));
        }
        require(!m.layers.empty(), "checkpoint has no layers");
        m.input_norm.mean = j.at("input_mean").get<std::array<double, 2>>();
        m.input_norm.scale = j.at("input_scale").get<std::array<double, 2>>();
        return m;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::InvalidArgument, std::string("malformed checkpoint: ") + e.what());
    }
}

inline void write_trace_csv(const TrainTrace& t, std::ostream& out) {
    out << "epoch,train_loss,test_acc\n" << std::setprecision(10);
    for (const auto& e : t.epochs) out << e.epoch << ',' << e.train_loss << ',' << e.test_acc << '\n';
}

/// Dense grid over the data bounding box (padded by `margin`), resolution x resolution.
inline void write_boundary_csv(const MlpModel& m, const Dataset& d, std::ostream& out, int resolution = 100,
                               double margin = 0.5) {
    require(resolution >= 2, "boundary resolution must be >= 2");
    double lo[2] = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    double hi[2] = {-lo[0], -lo[1]};
    for (const auto& p : d.features) {
        for (int j = 0; j < 2; ++j) {
            lo[j] = std::min(lo[j], p[j]);
            hi[j] = std::max(hi[j], p[j]);
        }
    }
    out << "x,y,predicted_class,class_1_probability\n" << std::setprecision(10);
    for (int iy = 0; iy < resolution; ++iy) {
        const double y = lo[1] - margin + (hi[1] - lo[1] + 2 * margin) * iy / (resolution - 1);
        for (int ix = 0; ix < resolution; ++ix) {
            const double x = lo[0] - margin + (hi[0] - lo[0] + 2 * margin) * ix / (resolution - 1);
            const auto p = predict_proba(m, {x, y});
            const int cls = static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
            out << x << ',' << y << ',' << cls << ',' << (p.size() > 1 ? p[1] : 0.0) << '\n';
        }
    }
}

// ---------------------------------------------------------------------------
// Fine-tuning comparison: a GELU network pretrained on a source task has its
// hidden layer frozen. The baseline retrains only the output layer; the
// learnable variant swaps GELU for a Hermite activation fitted to GELU and also
// trains its coefficients.

struct FinetuneResult {
    double baseline_test_acc = 0.0;
    double learnable_test_acc = 0.0;
};

inline FinetuneResult finetune_comparison(const Dataset& source, const Dataset& target, const Activation& fitted_gelu,
                                          std::size_t hidden_width, int pretrain_epochs, int finetune_epochs,
                                          std::uint64_t seed) {
    MlpModel base = make_mlp({2, hidden_width, 2}, ClassicalActivation{ClassicalKind::GELU}, seed);
    TrainConfig pre;
    pre.epochs = pretrain_epochs;
    pre.seed = seed;
    (void)train(base, source, pre);

    TrainConfig ft;
    ft.epochs = finetune_epochs;
    ft.seed = seed + 1;
    ft.standardize = false;  // keep the input pipeline the hidden layer was trained with
    ft.freeze.hidden_weights = true;
    ft.freeze.hidden_biases = true;

    MlpModel baseline = base;
    const auto b = train(baseline, target, ft);

    MlpModel learnable = base;
    for (auto& layer : learnable.layers)
        if (layer.activation) layer.activation = fitted_gelu;
    const auto l = train(learnable, target, ft);
    return {b.final_test_acc, l.final_test_acc};
}

// ---------------------------------------------------------------------------
// Polynomial-mapping verification

struct PolymapReport {
    bool passed = false;
    int degree_bound = 0;
    int effective_degree = 0;
    double max_rel_error = 0.0;
    int nodes = 0;
    int held_out = 0;
    double tolerance = 1e-6;
};

namespace detail {

// Chebyshev points of the second kind on [-1, 1], t_j = cos(pi j / n).
inline std::vector<double> chebyshev_nodes(int n) {
    std::vector<double> t(static_cast<std::size_t>(n + 1));
    for (int j = 0; j <= n; ++j) t[static_cast<std::size_t>(j)] = n == 0 ? 0.0 : std::cos(std::numbers::pi * j / n);
    return t;
}

// Barycentric evaluation of the interpolant through Chebyshev points of the second kind.
inline double barycentric(std::span<const double> t, std::span<const double> f, double x) {
    const std::size_t n = t.size() - 1;
    if (n == 0) return f[0];
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j <= n; ++j) {
        if (x == t[j]) return f[j];
        double w = (j % 2 == 0) ? 1.0 : -1.0;
        if (j == 0 || j == n) w *= 0.5;
        const double c = w / (x - t[j]);
        num += c * f[j];
        den += c;
    }
    return num / den;
}

// Chebyshev coefficients of the degree-n interpolant through second-kind points.
inline std::vector<double> chebyshev_coefficients(std::span<const double> f) {
    const std::size_t n = f.size() - 1;
    std::vector<double> c(n + 1, 0.0);
    if (n == 0) {
        c[0] = f[0];
        return c;
    }
    for (std::size_t k = 0; k <= n; ++k) {
        double s = 0.0;
        for (std::size_t j = 0; j <= n; ++j) {
            const double w = (j == 0 || j == n) ? 0.5 : 1.0;
            s += w * f[j] * std::cos(std::numbers::pi * static_cast<double>(j * k) / static_cast<double>(n));
        }
        c[k] = 2.0 * s / static_cast<double>(n);
    }
    c[0] *= 0.5;
    c[n] *= 0.5;
    return c;
}

}  // namespace detail

/// Samples the network along x(t) = t * direction, t in [-1, 1], interpolates
/// with a polynomial of degree `degree_bound` and checks it at 100 held-out t.
/// The effective degree is read off the Chebyshev coefficients of a 2x
/// oversampled interpolant.
inline PolymapReport verify_polynomial_mapping(const MlpModel& model, std::span<const double> direction,
                                               int degree_bound, double tolerance = 1e-6) {
    require(degree_bound >= 0, "degree bound must be >= 0");
    require(direction.size() == model.input_dim(), "direction must match the model input width");
    for (const auto& layer : model.layers) {
        if (layer.activation && !std::holds_alternative<HermiteActivation>(*layer.activation)) {
            fail(ErrorCode::UnsupportedFamily, "polynomial mapping needs Hermite (polynomial) activations");
        }
    }
    const int oversampled = 2 * degree_bound + 8;
    const auto t = detail::chebyshev_nodes(degree_bound);
    if (degree_bound >= 1) {
        const double gap = 1.0 - std::cos(std::numbers::pi / oversampled);
        if (gap < 1e-7) fail(ErrorCode::ConditioningFailure, "interpolation nodes are too clustered for this degree");
    }

    auto sample = [&](double s) {
        std::vector<double> x(direction.size());
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = s * direction[i];
        return forward(model, x);
    };

    PolymapReport r;
    r.degree_bound = degree_bound;
    r.nodes = static_cast<int>(t.size());
    r.tolerance = tolerance;
    const std::size_t outputs = model.output_dim();
    std::vector<std::vector<double>> f(outputs, std::vector<double>(t.size()));
    for (std::size_t j = 0; j < t.size(); ++j) {
        const auto y = sample(t[j]);
        for (std::size_t o = 0; o < outputs; ++o) f[o][j] = y[o];
    }

    std::vector<double> held;
    for (int i = 0; i < 100; ++i) {
        const double s = -0.995 + 1.99 * i / 99.0;
        if (std::find(t.begin(), t.end(), s) == t.end()) held.push_back(s);
    }
    r.held_out = static_cast<int>(held.size());

    const auto t_over = detail::chebyshev_nodes(oversampled);
    std::vector<std::vector<double>> f_over(outputs, std::vector<double>(t_over.size()));
    for (std::size_t j = 0; j < t_over.size(); ++j) {
        const auto y = sample(t_over[j]);
        for (std::size_t o = 0; o < outputs; ++o) f_over[o][j] = y[o];
    }

    for (std::size_t o = 0; o < outputs; ++o) {
        double scale = 0.0;
        for (double v : f_over[o]) scale = std::max(scale, std::abs(v));
        scale = std::max(scale, std::numeric_limits<double>::min());
        for (double s : held) {
            const double truth = sample(s)[o];
            const double approx = detail::barycentric(t, f[o], s);
            r.max_rel_error = std::max(r.max_rel_error, std::abs(approx - truth) / scale);
        }
        const auto c = detail::chebyshev_coefficients(f_over[o]);
        double cmax = 0.0;
        for (double v : c) cmax = std::max(cmax, std::abs(v));
        for (std::size_t k = c.size(); k-- > 0;) {
            if (std::abs(c[k]) > 1e-9 * cmax) {
                r.effective_degree = std::max(r.effective_degree, static_cast<int>(k));
                break;
            }
        }
    }
    r.passed = r.max_rel_error <= tolerance && r.effective_degree <= degree_bound;
    return r;
}

}  // namespace orthoact
