#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include "orthoact/fitting.hpp"
#include "orthoact/gains.hpp"
#include "orthoact/nn.hpp"

using namespace orthoact;

namespace {

void randomize(MlpModel& m, CounterRng& rng, double bias_scale = 0.5) {
    for (auto& layer : m.layers) {
        for (double& w : layer.weight.data) w = rng.normal();
        for (double& b : layer.bias) b = bias_scale * rng.normal();
    }
}

Activation random_activation(Family fam, CounterRng& rng) {
    switch (fam) {
        case Family::Hermite: {
            std::vector<double> a(4);
            for (double& v : a) v = rng.normal();
            return HermiteActivation{a};
        }
        case Family::Fourier: {
            auto f = std::get<FourierActivation>(init_theorem(Family::Fourier, 3));
            for (double& v : f.amplitude) v = rng.normal();
            for (double& v : f.frequency) v += 0.3 * rng.normal();
            for (double& v : f.phase) v = rng.uniform(-3.0, 3.0);
            f.a0 = rng.normal();
            return f;
        }
        case Family::Tropical: {
            std::vector<double> a(5);
            for (double& v : a) v = rng.normal();
            return TropicalActivation{a, kSqrt2 / 4};
        }
        default: return ClassicalActivation{ClassicalKind::GELU};
    }
}

// Scalar objective c . forward(x) used by the finite-difference oracle.
double objective(const MlpModel& m, std::span<const double> x, std::span<const double> c) {
    const auto y = forward(m, x);
    double s = 0.0;
    for (std::size_t k = 0; k < y.size(); ++k) s += c[k] * y[k];
    return s;
}

double central_difference(double& param, const std::function<double()>& f, double h = 1e-5) {
    const double saved = param;
    param = saved + h;
    const double up = f();
    param = saved - h;
    const double down = f();
    param = saved;
    return (up - down) / (2 * h);
}

Dataset small_moons() { return generate("moons", 200, 0.1, 3); }

}  // namespace

TEST(Forward, IdentityActivationAndWeightsPassInputThrough) {
    MlpModel m;
    DenseLayer layer;
    layer.weight = Matrix(2, 2);
    layer.weight(0, 0) = layer.weight(1, 1) = 1.0;
    layer.bias = {0.0, 0.0};
    layer.activation = HermiteActivation{{0.0, 1.0, 0.0, 0.0}};
    m.layers.push_back(layer);
    const std::vector<double> x{0.3, -1.7};
    EXPECT_EQ(forward(m, x), x);
}

TEST(Forward, ZeroWeightsGiveAConstant) {
    CounterRng rng(1);
    auto m = make_mlp({2, 5, 3}, init_theorem(Family::Hermite, 3), 1);
    for (auto& l : m.layers) std::fill(l.weight.data.begin(), l.weight.data.end(), 0.0);
    for (double& b : m.layers[0].bias) b = rng.normal();
    for (double& w : m.layers[1].weight.data) w = rng.normal();
    const auto y0 = forward(m, std::vector<double>{0.0, 0.0});
    for (int i = 0; i < 10; ++i) {
        EXPECT_EQ(forward(m, std::vector<double>{rng.normal(), rng.normal()}), y0);
    }
}

TEST(Forward, MatchesDirectComposition) {
    CounterRng rng(2);
    for (Family fam : {Family::Hermite, Family::Fourier, Family::Tropical, Family::GELU}) {
        const Activation act = random_activation(fam, rng);
        auto m = make_mlp({2, 3, 2}, act, 5);
        randomize(m, rng);
        const auto& W1 = m.layers[0].weight;
        const auto& W2 = m.layers[1].weight;
        const auto& b1 = m.layers[0].bias;
        const auto& b2 = m.layers[1].bias;
        for (int t = 0; t < 20; ++t) {
            const double x0 = rng.normal(), x1 = rng.normal();
            const double h0 = eval(act, W1(0, 0) * x0 + W1(0, 1) * x1 + b1[0]);
            const double h1 = eval(act, W1(1, 0) * x0 + W1(1, 1) * x1 + b1[1]);
            const double h2 = eval(act, W1(2, 0) * x0 + W1(2, 1) * x1 + b1[2]);
            const double y0 = W2(0, 0) * h0 + W2(0, 1) * h1 + W2(0, 2) * h2 + b2[0];
            const double y1 = W2(1, 0) * h0 + W2(1, 1) * h1 + W2(1, 2) * h2 + b2[1];
            const auto y = forward(m, std::vector<double>{x0, x1});
            EXPECT_NEAR(y[0], y0, 1e-12 * std::max(1.0, std::abs(y0)));
            EXPECT_NEAR(y[1], y1, 1e-12 * std::max(1.0, std::abs(y1)));
        }
    }
}

TEST(Forward, RejectsWrongInputWidth) {
    const auto m = make_mlp({2, 4, 2}, init_theorem(Family::Hermite, 2), 0);
    try {
        (void)forward(m, std::vector<double>{1.0, 2.0, 3.0});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DimensionMismatch);
    }
}

TEST(Backward, ZeroLossGradientGivesZeroGradients) {
    const auto m = make_mlp({2, 4, 4, 2}, init_theorem(Family::Fourier, 3), 3);
    ForwardCache cache;
    forward(m, std::vector<double>{0.4, -0.2}, cache);
    Gradients g(m);
    backward(m, cache, std::vector<double>{0.0, 0.0}, g);
    for (std::size_t l = 0; l < m.layers.size(); ++l) {
        for (double v : g.weight[l].data) EXPECT_EQ(v, 0.0);
        for (double v : g.bias[l]) EXPECT_EQ(v, 0.0);
        for (double v : g.activation[l]) EXPECT_EQ(v, 0.0);
    }
}

TEST(Backward, MatchesFiniteDifferencesForEveryParameter) {
    for (Family fam : {Family::Hermite, Family::Fourier, Family::Tropical, Family::GELU}) {
        CounterRng rng(40 + static_cast<std::uint64_t>(fam));
        for (int net = 0; net < 20; ++net) {
            auto m = make_mlp({2, 3, 3, 2}, random_activation(fam, rng), rng());
            randomize(m, rng);
            for (auto& layer : m.layers) {
                if (layer.activation) layer.activation = random_activation(fam, rng);
                for (double& w : layer.weight.data) w *= 0.5;
            }
            const std::vector<double> x{rng.normal(), rng.normal()};
            const std::vector<double> c{rng.normal(), rng.normal()};

            ForwardCache cache;
            forward(m, x, cache);
            Gradients g(m);
            backward(m, cache, c, g);
            const auto f = [&] { return objective(m, x, c); };
            auto check = [&](double analytic, double numeric, const char* what) {
                EXPECT_LE(std::abs(analytic - numeric), 1e-5 * std::max(1.0, std::abs(numeric)))
                    << family_name(fam) << " net " << net << " " << what << " analytic " << analytic << " fd "
                    << numeric;
            };
            for (std::size_t l = 0; l < m.layers.size(); ++l) {
                auto& layer = m.layers[l];
                for (std::size_t i = 0; i < layer.weight.data.size(); ++i)
                    check(g.weight[l].data[i], central_difference(layer.weight.data[i], f), "weight");
                for (std::size_t i = 0; i < layer.bias.size(); ++i)
                    check(g.bias[l][i], central_difference(layer.bias[i], f), "bias");
                if (!layer.activation) continue;
                auto params = get_parameters(*layer.activation);
                ASSERT_EQ(params.size(), g.activation[l].size());
                for (std::size_t p = 0; p < params.size(); ++p) {
                    const double saved = params[p];
                    auto at = [&](double v) {
                        params[p] = v;
                        set_parameters(*layer.activation, params);
                        return f();
                    };
                    const double numeric = (at(saved + 1e-5) - at(saved - 1e-5)) / 2e-5;
                    at(saved);
                    check(g.activation[l][p], numeric, "activation parameter");
                }
            }
        }
    }
}

TEST(Backward, LinearHermiteMatchesClosedForm) {
    // F(x) = He_1(x) = x turns the model into y = W2 (W1 x + b1) + b2
    CounterRng rng(8);
    auto m = make_mlp({2, 3, 1}, HermiteActivation{{0.0, 1.0}}, 8);
    randomize(m, rng);
    const std::vector<double> x{0.7, -1.3};
    const double gy = 1.7;
    ForwardCache cache;
    forward(m, x, cache);
    Gradients g(m);
    backward(m, cache, std::vector<double>{gy}, g);

    const auto& W1 = m.layers[0].weight;
    const auto& W2 = m.layers[1].weight;
    double da0 = 0.0, da1 = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
        const double z = W1(i, 0) * x[0] + W1(i, 1) * x[1] + m.layers[0].bias[i];
        const double delta = W2(0, i) * gy;
        EXPECT_NEAR(g.weight[1](0, i), gy * z, 1e-14);
        EXPECT_NEAR(g.bias[0][i], delta, 1e-14);
        EXPECT_NEAR(g.weight[0](i, 0), delta * x[0], 1e-14);
        EXPECT_NEAR(g.weight[0](i, 1), delta * x[1], 1e-14);
        da0 += delta;
        da1 += delta * z;
    }
    EXPECT_NEAR(g.bias[1][0], gy, 1e-15);
    EXPECT_NEAR(g.activation[0][0], da0, 1e-13);
    EXPECT_NEAR(g.activation[0][1], da1, 1e-13);
}

namespace {

// Root-mean-square pre-activation of every hidden layer over a standard-normal batch.
std::vector<double> hidden_rms(const Activation& act, std::size_t depth, std::uint64_t seed) {
    const std::size_t width = 256;
    std::vector<std::size_t> widths(depth + 1, width);
    widths.push_back(1);
    const auto m = make_mlp(widths, act, seed);
    CounterRng rng(seed, 1);
    std::vector<double> sq(depth, 0.0);
    const int batch = 128;
    ForwardCache cache;
    std::vector<double> x(width);
    for (int b = 0; b < batch; ++b) {
        for (double& v : x) v = rng.normal();
        forward(m, x, cache);
        for (std::size_t l = 0; l < depth; ++l)
            for (double z : cache.pre[l]) sq[l] += z * z;
    }
    for (double& v : sq) v = std::sqrt(v / (batch * width));
    return sq;
}

}  // namespace

TEST(Init, VariancePropagatesThroughTenLayers) {
    for (const Activation& act : {init_theorem(Family::Fourier, 6, InitVariant::UnitGain), init_theorem(Family::Tropical, 6),
                                  Activation{ClassicalActivation{ClassicalKind::ReLU}},
                                  Activation{ClassicalActivation{ClassicalKind::GELU}}}) {
        for (std::uint64_t seed : {21, 22, 23}) {
            const auto rms = hidden_rms(act, 10, seed);
            for (std::size_t l = 0; l < rms.size(); ++l) {
                EXPECT_GE(rms[l], 0.5) << family_name(family_of(act)) << " layer " << l;
                EXPECT_LE(rms[l], 2.0) << family_name(family_of(act)) << " layer " << l;
            }
        }
    }
}

// Unit gain fixes q = 1 as a point of the variance map q -> E[F(sqrt(q) Z)^2] / E[F(Z)^2],
// but for Hermite activations the map has slope near 2 there, so finite-width
// fluctuations double per layer. Shallow stacks stay in range, deep ones do not.
TEST(Init, HermiteVarianceMapIsExpanding) {
    const Activation act = init_theorem(Family::Hermite, 8, InitVariant::UnitGain);
    const double gain = forward_gain_for_init(act);
    auto v = [&](double q) {
        CounterRng rng(5);
        double s = 0.0;
        const int n = 200000;
        for (int i = 0; i < n; ++i) s += std::pow(eval(act, std::sqrt(q) * rng.normal()), 2);
        return gain * s / n;
    };
    const double slope = (v(1.05) - v(0.95)) / 0.1;
    EXPECT_GT(slope, 1.8);
    EXPECT_LT(slope, 2.2);

    const auto rms = hidden_rms(act, 10, 21);
    for (std::size_t l = 0; l < 3; ++l) {
        EXPECT_GE(rms[l], 0.5) << l;
        EXPECT_LE(rms[l], 2.0) << l;
    }
    EXPECT_FALSE(std::isfinite(rms.back()) && rms.back() <= 2.0);
}

TEST(Optimizer, DecayNeverTouchesActivationCoefficients) {
    const auto data = small_moons();
    auto base = make_mlp({2, 6, 2}, init_theorem(Family::Fourier, 4), 4);
    Gradients g(base);
    ForwardCache cache;
    std::vector<double> lg(2);
    for (std::size_t i = 0; i < 16; ++i) {
        forward(base, std::vector<double>(data.features[i].begin(), data.features[i].end()), cache);
        softmax_cross_entropy(cache.output, data.labels[i], lg);
        backward(base, cache, lg, g);
    }
    for (Optimizer kind : {Optimizer::AdamW, Optimizer::SGD}) {
        TrainConfig with, without;
        with.optimizer = without.optimizer = kind;
        with.weight_decay = 0.5;
        without.weight_decay = 0.0;
        MlpModel a = base, b = base;
        ModelOptimizer(a, with).step(a, g);
        ModelOptimizer(b, without).step(b, g);
        const auto pa = get_parameters(*a.layers[0].activation);
        const auto pb = get_parameters(*b.layers[0].activation);
        const auto p0 = get_parameters(*base.layers[0].activation);
        for (std::size_t p = 0; p < pa.size(); ++p) EXPECT_NEAR(pa[p] - p0[p], pb[p] - p0[p], 1e-12);
        for (std::size_t l = 0; l < base.layers.size(); ++l) {
            for (std::size_t i = 0; i < base.layers[l].bias.size(); ++i)
                EXPECT_NEAR(a.layers[l].bias[i], b.layers[l].bias[i], 1e-12);
            // decoupled decay: the weight difference is exactly lr * decay * w
            for (std::size_t i = 0; i < base.layers[l].weight.data.size(); ++i) {
                const double w = base.layers[l].weight.data[i];
                EXPECT_NEAR(b.layers[l].weight.data[i] - a.layers[l].weight.data[i], 1e-2 * 0.5 * w, 1e-12);
            }
        }
    }
}

TEST(Train, ZeroEpochsLeavesParametersUnchanged) {
    const auto data = small_moons();
    auto m = make_mlp({2, 8, 2}, init_theorem(Family::Hermite, 3), 2);
    const auto before = m;
    TrainConfig cfg;
    cfg.epochs = 0;
    const auto trace = train(m, data, cfg);
    ASSERT_EQ(trace.epochs.size(), 1u);
    EXPECT_EQ(trace.epochs[0].train_loss, trace.initial_loss);
    EXPECT_GT(trace.initial_loss, 0.0);
    for (std::size_t l = 0; l < m.layers.size(); ++l) {
        EXPECT_EQ(m.layers[l].weight.data, before.layers[l].weight.data);
        EXPECT_EQ(m.layers[l].bias, before.layers[l].bias);
    }
}

TEST(Train, IsDeterministicGivenSeed) {
    const auto data = small_moons();
    TrainConfig cfg;
    cfg.epochs = 5;
    cfg.seed = 9;
    auto a = make_mlp({2, 8, 2}, init_theorem(Family::Fourier, 3), 9);
    auto b = a;
    const auto ta = train(a, data, cfg);
    const auto tb = train(b, data, cfg);
    ASSERT_EQ(ta.epochs.size(), 6u);
    for (std::size_t e = 0; e < ta.epochs.size(); ++e) EXPECT_EQ(ta.epochs[e].train_loss, tb.epochs[e].train_loss);
    EXPECT_EQ(to_json_value(a).dump(), to_json_value(b).dump());
}

TEST(Train, LossDecreasesOnMoons) {
    const auto data = generate("moons", 400, 0.1, 1);
    auto m = make_mlp({2, 16, 2}, init_theorem(Family::Hermite, 3), 1);
    TrainConfig cfg;
    cfg.epochs = 60;
    const auto trace = train(m, data, cfg);
    EXPECT_LT(trace.epochs.back().train_loss, 0.5 * trace.initial_loss);
    EXPECT_GE(trace.final_test_acc, 0.9);
}

TEST(Train, FrozenGroupsStayFixed) {
    const auto data = small_moons();
    auto m = make_mlp({2, 8, 2}, init_theorem(Family::Hermite, 3), 6);
    const auto before = m;
    TrainConfig cfg;
    cfg.epochs = 3;
    cfg.freeze.hidden_weights = true;
    cfg.freeze.hidden_biases = true;
    (void)train(m, data, cfg);
    EXPECT_EQ(m.layers[0].weight.data, before.layers[0].weight.data);
    EXPECT_EQ(m.layers[0].bias, before.layers[0].bias);
    EXPECT_NE(m.layers[1].weight.data, before.layers[1].weight.data);
    EXPECT_NE(get_parameters(*m.layers[0].activation), get_parameters(*before.layers[0].activation));

    auto n = before;
    cfg.freeze = Freeze{false, false, true, true};
    (void)train(n, data, cfg);
    EXPECT_EQ(n.layers[1].weight.data, before.layers[1].weight.data);
    EXPECT_EQ(n.layers[1].bias, before.layers[1].bias);
    EXPECT_EQ(get_parameters(*n.layers[0].activation), get_parameters(*before.layers[0].activation));
    EXPECT_NE(n.layers[0].weight.data, before.layers[0].weight.data);
}

TEST(Train, NonFiniteLossReportsTheStep) {
    const auto data = small_moons();
    auto m = make_mlp({2, 4, 2}, init_theorem(Family::Hermite, 3), 0);
    m.layers[1].bias[0] = NAN;
    TrainConfig cfg;
    cfg.epochs = 2;
    try {
        (void)train(m, data, cfg);
        FAIL() << "expected NonFiniteLoss";
    } catch (const NonFiniteLossError& e) {
        EXPECT_EQ(e.code(), ErrorCode::NonFiniteLoss);
        EXPECT_EQ(e.step(), 0);
    }
}

TEST(Train, RejectsInvalidConfig) {
    const auto data = small_moons();
    auto m = make_mlp({2, 4, 2}, init_theorem(Family::Hermite, 3), 0);
    TrainConfig cfg;
    cfg.batch_size = 0;
    EXPECT_THROW(train(m, data, cfg), Error);
    cfg = TrainConfig{};
    cfg.learning_rate = 0.0;
    EXPECT_THROW(train(m, data, cfg), Error);
    auto wide = make_mlp({3, 4, 2}, init_theorem(Family::Hermite, 3), 0);
    EXPECT_THROW(train(wide, data, TrainConfig{}), Error);
}

TEST(Checkpoint, RoundTripPreservesPredictions) {
    const auto data = small_moons();
    auto m = make_mlp({2, 5, 2}, init_theorem(Family::Fourier, 3), 3);
    TrainConfig cfg;
    cfg.epochs = 2;
    (void)train(m, data, cfg);
    const auto back = model_from_json(Json::parse(to_json_value(m).dump()));
    EXPECT_EQ(back.input_norm.mean, m.input_norm.mean);
    for (const auto& x : data.features) EXPECT_EQ(predict_proba(back, x), predict_proba(m, x));
    EXPECT_THROW(model_from_json(Json::parse(R"({"layers": []})")), Error);
    EXPECT_THROW(model_from_json(Json::parse(R"({"nope": 1})")), Error);
}

TEST(Boundary, GridHasHeaderAndResolutionSquaredRows) {
    const auto data = small_moons();
    auto m = make_mlp({2, 4, 2}, init_theorem(Family::Hermite, 3), 0);
    std::ostringstream out;
    write_boundary_csv(m, data, out, 10);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "x,y,predicted_class,class_1_probability");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    EXPECT_EQ(rows, 100);
}

TEST(Polymap, DegreeBoundHoldsForSmallNetworks) {
    const std::pair<int, int> cases[] = {{1, 1}, {1, 2}, {2, 2}, {2, 3}, {3, 2}, {1, 3}, {3, 1}};
    for (auto [layers, d] : cases) {
        CounterRng rng(100 + static_cast<std::uint64_t>(layers * 10 + d));
        std::vector<double> a(static_cast<std::size_t>(d + 1));
        for (double& v : a) v = rng.normal();
        a.back() = 1.0;
        std::vector<std::size_t> widths{2};
        for (int l = 0; l < layers; ++l) widths.push_back(4);
        widths.push_back(2);
        const auto m = make_mlp(widths, HermiteActivation{a}, rng());
        const std::vector<double> dir{1.8, -2.4};  // wide enough that the top coefficient is visible
        const int bound = static_cast<int>(std::pow(d, layers));
        const auto r = verify_polynomial_mapping(m, dir, bound);
        EXPECT_TRUE(r.passed) << layers << "," << d << " err " << r.max_rel_error;
        EXPECT_LE(r.effective_degree, bound);
        EXPECT_LE(r.max_rel_error, 1e-6);
        EXPECT_EQ(r.nodes, bound + 1);
        EXPECT_EQ(r.held_out, 100);
        if (bound >= 2) {
            // a generic network reaches the bound, so one degree fewer must fail
            const auto under = verify_polynomial_mapping(m, dir, bound - 1);
            EXPECT_FALSE(under.passed) << layers << "," << d;
            EXPECT_EQ(under.effective_degree, bound) << layers << "," << d;
        }
    }
}

TEST(Polymap, RejectsNonPolynomialActivations) {
    const auto m = make_mlp({2, 4, 1}, init_theorem(Family::Fourier, 3), 0);
    try {
        (void)verify_polynomial_mapping(m, std::vector<double>{1.0, 0.0}, 4);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::UnsupportedFamily);
    }
}

TEST(Polymap, HugeDegreeIsAConditioningFailure) {
    const auto m = make_mlp({2, 4, 1}, init_theorem(Family::Hermite, 2), 0);
    try {
        (void)verify_polynomial_mapping(m, std::vector<double>{1.0, 0.0}, 1 << 20);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ConditioningFailure);
    }
}
