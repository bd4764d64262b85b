#include "rmtspec/json_io.hpp"

namespace rmtspec {
namespace {

using nlohmann::json;

double number_field(const json& j, const char* key, const char* context) {
    if (!j.contains(key) || !j.at(key).is_number())
        throw InvalidScenario(std::string(context) + ": missing numeric field '" + key + "'");
    return j.at(key).get<double>();
}

double number_field_or(const json& j, const char* key, double fallback, const char* context) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number())
        throw InvalidScenario(std::string(context) + ": field '" + key + "' must be numeric");
    return j.at(key).get<double>();
}

}  // namespace

SpectralMeasure measure_from_json(const json& j) {
    if (!j.is_object()) throw InvalidMeasure("measure must be a JSON object");
    if (j.contains("atoms")) {
        const json& arr = j.at("atoms");
        if (!arr.is_array()) throw InvalidMeasure("measure atoms must be an array");
        std::vector<Atom> atoms;
        for (const json& a : arr) {
            if (!a.is_array() || a.size() != 2 || !a[0].is_number() || !a[1].is_number())
                throw InvalidMeasure("each atom must be a [location, weight] pair");
            atoms.push_back({a[0].get<double>(), a[1].get<double>()});
        }
        return SpectralMeasure(std::move(atoms));
    }
    if (!j.contains("family") || !j.at("family").is_string())
        throw InvalidMeasure("measure needs either 'atoms' or a 'family' name");
    std::string family = j.at("family").get<std::string>();
    std::size_t atom_count = 256;
    if (j.contains("atom_count")) {
        if (!j.at("atom_count").is_number_unsigned() || j.at("atom_count").get<std::size_t>() == 0)
            throw InvalidMeasure("atom_count must be a positive integer");
        atom_count = j.at("atom_count").get<std::size_t>();
    }
    if (family == "exponential")
        return discretize_family(ExponentialFamily{number_field(j, "mean", "exponential family")},
                                 atom_count);
    if (family == "uniform")
        return discretize_family(UniformFamily{number_field(j, "a", "uniform family"),
                                               number_field(j, "b", "uniform family")},
                                 atom_count);
    if (family == "semicircle")
        return discretize_family(
            SemicircleFamily{number_field(j, "variance", "semicircle family")}, atom_count);
    if (family == "bernoulli")
        return discretize_family(BernoulliFamily{number_field(j, "p", "bernoulli family"),
                                                 number_field(j, "lo", "bernoulli family"),
                                                 number_field(j, "hi", "bernoulli family")},
                                 atom_count);
    throw InvalidMeasure("unknown family: " + family);
}

json measure_to_json(const SpectralMeasure& m) {
    json atoms = json::array();
    for (const Atom& a : m.atoms()) atoms.push_back(json::array({a.location, a.weight}));
    return json{{"atoms", std::move(atoms)}};
}

JointChannelMeasure joint_from_json(const json& j) {
    if (!j.is_object()) throw InvalidMeasure("channel must be a JSON object");
    if (j.contains("marginals")) {
        const json& arr = j.at("marginals");
        if (!arr.is_array() || arr.empty())
            throw InvalidMeasure("channel marginals must be a nonempty array");
        std::vector<SpectralMeasure> marginals;
        for (const json& m : arr) marginals.push_back(measure_from_json(m));
        std::size_t cap = 1000000;
        if (j.contains("max_atoms")) {
            if (!j.at("max_atoms").is_number_unsigned())
                throw InvalidMeasure("max_atoms must be a positive integer");
            cap = j.at("max_atoms").get<std::size_t>();
        }
        return joint_independent(marginals, cap);
    }
    if (!j.contains("dimension") || !j.contains("atoms"))
        throw InvalidMeasure("channel needs either 'marginals' or 'dimension' plus 'atoms'");
    if (!j.at("dimension").is_number_unsigned())
        throw InvalidMeasure("channel dimension must be a positive integer");
    std::size_t dim = j.at("dimension").get<std::size_t>();
    const json& arr = j.at("atoms");
    if (!arr.is_array()) throw InvalidMeasure("channel atoms must be an array");
    std::vector<JointAtom> atoms;
    for (const json& a : arr) {
        if (!a.is_array() || a.size() != 2 || !a[0].is_array() || !a[1].is_number())
            throw InvalidMeasure("each joint atom must be a [[gains...], weight] pair");
        JointAtom atom;
        for (const json& h : a[0]) {
            if (!h.is_number()) throw InvalidMeasure("channel gains must be numeric");
            atom.h.push_back(h.get<double>());
        }
        atom.weight = a[1].get<double>();
        atoms.push_back(std::move(atom));
    }
    return JointChannelMeasure(dim, std::move(atoms));
}

CdmaScenario scenario_from_json(const json& j) {
    if (!j.is_object()) throw InvalidScenario("scenario must be a JSON object");
    if (!j.contains("transmitters") || !j.at("transmitters").is_array() ||
        j.at("transmitters").empty())
        throw InvalidScenario("scenario needs a nonempty 'transmitters' array");
    if (!j.contains("channel")) throw InvalidScenario("scenario needs a 'channel' object");
    std::vector<TransmitterSpec> transmitters;
    for (const json& t : j.at("transmitters")) {
        if (!t.is_object()) throw InvalidScenario("each transmitter must be a JSON object");
        if (!t.contains("power")) throw InvalidScenario("transmitter needs a 'power' measure");
        std::string kind = "iid";
        if (t.contains("signature_kind")) {
            if (!t.at("signature_kind").is_string())
                throw InvalidScenario("signature_kind must be a string");
            kind = t.at("signature_kind").get<std::string>();
        }
        transmitters.push_back({number_field(t, "alpha", "transmitter"),
                                signature_kind_from_string(kind),
                                measure_from_json(t.at("power"))});
    }
    CdmaScenario scenario{std::move(transmitters), joint_from_json(j.at("channel")),
                          number_field_or(j, "noise_variance", 0.0, "scenario")};
    validate(scenario);
    return scenario;
}

SolverConfig solver_from_json(const json& j) {
    SolverConfig cfg;
    if (j.is_null()) return cfg;
    if (!j.is_object()) throw InvalidScenario("solver config must be a JSON object");
    cfg.tolerance = number_field_or(j, "tolerance", cfg.tolerance, "solver config");
    if (j.contains("max_iterations")) {
        if (!j.at("max_iterations").is_number_integer())
            throw InvalidScenario("solver config: max_iterations must be an integer");
        cfg.max_iterations = j.at("max_iterations").get<int>();
    }
    cfg.damping = number_field_or(j, "damping", cfg.damping, "solver config");
    if (j.contains("check_ambiguity")) {
        if (!j.at("check_ambiguity").is_boolean())
            throw InvalidScenario("solver config: check_ambiguity must be a boolean");
        cfg.check_ambiguity = j.at("check_ambiguity").get<bool>();
    }
    validate(cfg);
    return cfg;
}

std::vector<HalfPlanePoint> z_grid_from_json(const json& j) {
    if (!j.is_array() || j.empty()) throw InvalidGrid("z_grid must be a nonempty array");
    std::vector<HalfPlanePoint> grid;
    grid.reserve(j.size());
    for (const json& p : j) {
        if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
            throw InvalidGrid("each z_grid entry must be a [re, im] pair");
        grid.emplace_back(p[0].get<double>(), p[1].get<double>());
    }
    return grid;
}

}  // namespace rmtspec
