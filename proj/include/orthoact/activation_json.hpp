#pragma once

// JSON documents for activations. nlohmann/json writes doubles with the
// shortest representation that round-trips, so save/load is lossless.

#include <string>

#include "json.hpp"
#include "orthoact/activations.hpp"

namespace orthoact {

using Json = nlohmann::json;

inline Json to_json_value(const TropicalPolynomial& p) {
    return Json{{"coefficients", p.coeffs}, {"powers", p.powers}};
}

inline TropicalPolynomial tropical_polynomial_from_json(const Json& j) {
    return TropicalPolynomial{j.at("coefficients").get<std::vector<double>>(), j.at("powers").get<std::vector<double>>()};
}

inline Json to_json_value(const Activation& act) {
    Json j;
    j["family"] = std::string(family_name(family_of(act)));
    j["degree"] = degree_of(act);
    if (const auto* h = std::get_if<HermiteActivation>(&act)) {
        j["coefficients"] = h->a;
    } else if (const auto* f = std::get_if<FourierActivation>(&act)) {
        j["a0"] = f->a0;
        j["amplitudes"] = f->amplitude;
        j["frequencies"] = f->frequency;
        j["phases"] = f->phase;
        j["fundamental_scale"] = f->fundamental_scale;
        j["learn_frequencies"] = f->learn_frequencies;
    } else if (const auto* t = std::get_if<TropicalActivation>(&act)) {
        j["coefficients"] = t->a;
        j["scale"] = t->scale;
    } else if (const auto* r = std::get_if<TropicalRationalActivation>(&act)) {
        j["numerator"] = to_json_value(r->numerator);
        j["denominator"] = to_json_value(r->denominator);
        j["learn_powers"] = r->learn_powers;
    }
    return j;
}

inline Activation activation_from_json(const Json& j) {
    try {
        const Family family = parse_family(j.at("family").get<std::string>());
        Activation act;
        switch (family) {
            case Family::Hermite:
                act = HermiteActivation{j.at("coefficients").get<std::vector<double>>()};
                break;
            case Family::Fourier: {
                FourierActivation f;
                f.a0 = j.at("a0").get<double>();
                f.amplitude = j.at("amplitudes").get<std::vector<double>>();
                f.frequency = j.at("frequencies").get<std::vector<double>>();
                f.phase = j.at("phases").get<std::vector<double>>();
                f.fundamental_scale = j.value("fundamental_scale", 1.0);
                f.learn_frequencies = j.value("learn_frequencies", true);
                act = std::move(f);
                break;
            }
            case Family::Tropical:
                act = TropicalActivation{j.at("coefficients").get<std::vector<double>>(), j.at("scale").get<double>()};
                break;
            case Family::TropicalRational:
                act = TropicalRationalActivation{tropical_polynomial_from_json(j.at("numerator")),
                                                 tropical_polynomial_from_json(j.at("denominator")),
                                                 j.value("learn_powers", false)};
                break;
            default:
                act = ClassicalActivation{classical_kind(family)};
        }
        validate(act);
        return act;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::InvalidArgument, std::string("malformed activation document: ") + e.what());
    }
}

}  // namespace orthoact
