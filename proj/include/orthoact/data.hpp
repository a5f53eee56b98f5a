#pragma once

/// Two-dimensional toy classification datasets (moons, circles, blobs) with a
/// stratified train/test split, CSV round-tripping and train-split standardization.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "orthoact/error.hpp"
#include "orthoact/rng.hpp"

namespace orthoact {

enum class Split : std::uint8_t { Train, Test };

struct Dataset {
    std::string name;
    double noise = 0.0;
    std::uint64_t seed = 0;
    std::vector<std::array<double, 2>> features;
    std::vector<int> labels;
    std::vector<Split> split;

    std::size_t size() const noexcept { return labels.size(); }
    int num_classes() const { return labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1; }

    std::vector<std::size_t> indices(Split which) const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < split.size(); ++i)
            if (split[i] == which) out.push_back(i);
        return out;
    }
};

namespace detail {

inline void assign_stratified_split(Dataset& d, double test_fraction) {
    CounterRng rng(d.seed, 2);
    d.split.assign(d.size(), Split::Train);
    for (int c = 0; c < d.num_classes(); ++c) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < d.size(); ++i)
            if (d.labels[i] == c) members.push_back(i);
        if (members.size() < 2) continue;
        shuffle(members.begin(), members.end(), rng);
        const auto want = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(members.size())));
        const std::size_t n_test = std::clamp<std::size_t>(want, 1, members.size() - 1);
        for (std::size_t k = 0; k < n_test; ++k) d.split[members[k]] = Split::Test;
    }
}

}  // namespace detail

/// Generates `name` in {"moons", "circles", "blobs"} with n points split evenly
/// between two classes. The same (name, n, noise, seed) always yields the same data.
inline Dataset generate(std::string_view name, int n, double noise, std::uint64_t seed) {
    require(n >= 4 && n % 2 == 0, "dataset size must be even and >= 4");
    require(noise >= 0.0 && std::isfinite(noise), "noise must be >= 0");
    Dataset d;
    d.name = std::string(name);
    d.noise = noise;
    d.seed = seed;
    const int half = n / 2;
    CounterRng rng(seed, 1);
    constexpr double pi = std::numbers::pi;

    if (name == "moons") {
        for (int i = 0; i < half; ++i) {
            const double t = pi * i / (half - 1);
            d.features.push_back({std::cos(t), std::sin(t)});
            d.labels.push_back(0);
        }
        for (int i = 0; i < half; ++i) {
            const double t = pi * i / (half - 1);
            d.features.push_back({1.0 - std::cos(t), 0.5 - std::sin(t)});
            d.labels.push_back(1);
        }
        for (auto& p : d.features) {
            p[0] += noise * rng.normal();
            p[1] += noise * rng.normal();
        }
    } else if (name == "circles") {
        for (int ring = 0; ring < 2; ++ring) {
            const double radius = ring == 0 ? 1.0 : 0.5;
            for (int i = 0; i < half; ++i) {
                const double t = 2.0 * pi * i / half;
                d.features.push_back({radius * std::cos(t), radius * std::sin(t)});
                d.labels.push_back(ring);
            }
        }
        for (auto& p : d.features) {
            p[0] += noise * rng.normal();
            p[1] += noise * rng.normal();
        }
    } else if (name == "blobs" || name == "blobs-classification") {
        const double spread = 0.5 + noise;
        for (int c = 0; c < 2; ++c) {
            const double center = c == 0 ? -1.0 : 1.0;
            for (int i = 0; i < half; ++i) {
                d.features.push_back({center + spread * rng.normal(), center + spread * rng.normal()});
                d.labels.push_back(c);
            }
        }
    } else {
        fail(ErrorCode::InvalidArgument, "unknown dataset '" + std::string(name) + "' (moons|circles|blobs)");
    }
    detail::assign_stratified_split(d, 0.2);
    return d;
}

// ---------------------------------------------------------------------------
// CSV: x1,x2,label,split

inline void write_csv(const Dataset& d, std::ostream& out) {
    out << "x1,x2,label,split\n" << std::setprecision(17);
    for (std::size_t i = 0; i < d.size(); ++i) {
        out << d.features[i][0] << ',' << d.features[i][1] << ',' << d.labels[i] << ','
            << (d.split[i] == Split::Train ? "train" : "test") << '\n';
    }
}

inline void write_csv(const Dataset& d, const std::string& path) {
    std::ofstream out(path);
    if (!out) fail(ErrorCode::Io, "cannot write " + path);
    write_csv(d, out);
    if (!out) fail(ErrorCode::Io, "write failed for " + path);
}

inline Dataset read_csv(std::istream& in, std::string name = "csv") {
    Dataset d;
    d.name = std::move(name);
    std::string line;
    if (!std::getline(in, line) || line.rfind("x1,x2,label,split", 0) != 0) {
        fail(ErrorCode::InvalidArgument, "dataset CSV must start with the header x1,x2,label,split");
    }
    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string f[4];
        for (auto& field : f) std::getline(ss, field, ',');
        try {
            const double x1 = std::stod(f[0]);
            const double x2 = std::stod(f[1]);
            const int label = std::stoi(f[2]);
            require(label >= 0, "negative label");
            require(f[3] == "train" || f[3] == "test", "split must be train or test");
            d.features.push_back({x1, x2});
            d.labels.push_back(label);
            d.split.push_back(f[3] == "train" ? Split::Train : Split::Test);
        } catch (const std::exception& e) {
            fail(ErrorCode::InvalidArgument, "bad dataset row " + std::to_string(row) + ": " + e.what());
        }
    }
    return d;
}

inline Dataset read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::Io, "cannot read " + path);
    return read_csv(in, path);
}

// ---------------------------------------------------------------------------

/// Per-feature affine standardization fitted on the training split only.
struct Standardizer {
    std::array<double, 2> mean{0.0, 0.0};
    std::array<double, 2> scale{1.0, 1.0};

    static Standardizer fit(const Dataset& d) {
        Standardizer s;
        const auto train = d.indices(Split::Train);
        require(!train.empty(), "standardizer needs training rows");
        for (int j = 0; j < 2; ++j) {
            double sum = 0.0, sq = 0.0;
            for (auto i : train) sum += d.features[i][j];
            const double m = sum / static_cast<double>(train.size());
            for (auto i : train) sq += (d.features[i][j] - m) * (d.features[i][j] - m);
            const double sd = std::sqrt(sq / static_cast<double>(train.size()));
            s.mean[j] = m;
            s.scale[j] = sd > 0.0 ? sd : 1.0;
        }
        return s;
    }

    std::array<double, 2> apply(const std::array<double, 2>& x) const {
        return {(x[0] - mean[0]) / scale[0], (x[1] - mean[1]) / scale[1]};
    }

    Dataset apply(Dataset d) const {
        for (auto& x : d.features) x = apply(x);
        return d;
    }
};

}  // namespace orthoact
