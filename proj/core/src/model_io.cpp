#include "tmfrac/model_io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "tmfrac/errors.hpp"

namespace tmfrac {

namespace {

using json = nlohmann::json;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

const json& field(const json& obj, const char* key, const std::string& path) {
    if (!obj.is_object()) throw ModelError(path + ": expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) throw ModelError(path + ": missing key '" + key + "'");
    return *it;
}

double number(const json& v, const std::string& path) {
    if (!v.is_number()) throw ModelError(path + ": expected a number");
    return v.get<double>();
}

int integer(const json& v, const std::string& path) {
    if (!v.is_number_integer()) throw ModelError(path + ": expected an integer");
    return v.get<int>();
}

const json& array(const json& v, const std::string& path) {
    if (!v.is_array()) throw ModelError(path + ": expected an array");
    return v;
}

std::string tag(const json& obj, const std::string& path) {
    const auto& t = field(obj, "type", path);
    if (!t.is_string()) throw ModelError(path + ".type: expected a string");
    return t.get<std::string>();
}

std::vector<double> numbers(const json& v, const std::string& path) {
    std::vector<double> out;
    const auto& a = array(v, path);
    for (std::size_t i = 0; i < a.size(); ++i) out.push_back(number(a[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

StateVector states(const json& v, const std::string& path) {
    StateVector out;
    const auto& a = array(v, path);
    for (std::size_t i = 0; i < a.size(); ++i) {
        int x = integer(a[i], path + "[" + std::to_string(i) + "]");
        if (x != 0 && x != 1) throw ModelError(path + "[" + std::to_string(i) + "]: state must be 0 or 1");
        out.push_back(static_cast<std::uint8_t>(x));
    }
    return out;
}

// Small rounding drift in hand-written files is absorbed here; anything larger
// than the tolerance is kept as is so that validation reports it.
template <class Get>
void renormalize(std::size_t n, Get weight_ref) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += weight_ref(i);
    double dev = std::abs(total - 1.0);
    double noise = 4.0 * static_cast<double>(n) * std::numeric_limits<double>::epsilon();
    if (dev > noise && dev <= kWeightTolerance) {
        for (std::size_t i = 0; i < n; ++i) weight_ref(i) /= total;
    }
}

RatioLaw parse_ratio_law(const json& j, const std::string& path) {
    std::string t = tag(j, path);
    if (t == "point_mass") return PointMassRatios{numbers(field(j, "ratios", path), path + ".ratios")};
    if (t == "discrete") {
        DiscreteRatios law;
        const auto& atoms = array(field(j, "atoms", path), path + ".atoms");
        for (std::size_t i = 0; i < atoms.size(); ++i) {
            std::string ap = path + ".atoms[" + std::to_string(i) + "]";
            law.atoms.push_back({numbers(field(atoms[i], "ratios", ap), ap + ".ratios"),
                                 number(field(atoms[i], "weight", ap), ap + ".weight")});
        }
        renormalize(law.atoms.size(), [&](std::size_t i) -> double& { return law.atoms[i].weight; });
        return law;
    }
    if (t == "product") {
        ProductRatios law;
        const auto& coords = array(field(j, "coords", path), path + ".coords");
        for (std::size_t k = 0; k < coords.size(); ++k) {
            std::string cp = path + ".coords[" + std::to_string(k) + "]";
            ScalarLaw c{numbers(field(coords[k], "values", cp), cp + ".values"),
                        numbers(field(coords[k], "weights", cp), cp + ".weights")};
            renormalize(c.weights.size(), [&](std::size_t i) -> double& { return c.weights[i]; });
            law.coords.push_back(std::move(c));
        }
        return law;
    }
    throw ModelError(path + ".type: unknown ratio law '" + t + "'");
}

TransitionLaw parse_transition(const json& j, const std::string& path) {
    std::string t = tag(j, path);
    if (t == "bernoulli") return ProductBernoulli{number(field(j, "p", path), path + ".p")};
    if (t == "microcanonical") return Microcanonical{integer(field(j, "count", path), path + ".count")};
    if (t == "discrete") {
        DiscreteStates law;
        const auto& atoms = array(field(j, "atoms", path), path + ".atoms");
        for (std::size_t i = 0; i < atoms.size(); ++i) {
            std::string ap = path + ".atoms[" + std::to_string(i) + "]";
            law.atoms.push_back({states(field(atoms[i], "states", ap), ap + ".states"),
                                 number(field(atoms[i], "weight", ap), ap + ".weight")});
        }
        renormalize(law.atoms.size(), [&](std::size_t i) -> double& { return law.atoms[i].weight; });
        return law;
    }
    throw ModelError(path + ".type: unknown transition law '" + t + "'");
}

JointLaw parse_joint(const json& j, const std::string& path) {
    JointLaw law;
    const auto& atoms = array(field(j, "atoms", path), path + ".atoms");
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        std::string ap = path + ".atoms[" + std::to_string(i) + "]";
        law.atoms.push_back({states(field(atoms[i], "states", ap), ap + ".states"),
                             numbers(field(atoms[i], "ratios", ap), ap + ".ratios"),
                             number(field(atoms[i], "weight", ap), ap + ".weight")});
    }
    renormalize(law.atoms.size(), [&](std::size_t i) -> double& { return law.atoms[i].weight; });
    return law;
}

StageSpec parse_stage(const json& j, const std::string& path) {
    StageSpec s;
    s.m = integer(field(j, "m", path), path + ".m");
    bool separated = j.contains("ratios") || j.contains("trans0") || j.contains("trans1");
    bool joint = j.contains("joint0") || j.contains("joint1");
    if (separated && joint) throw ModelError(path + ": stage is both separated and joint");
    if (joint) {
        s.kernels = JointKernels{parse_joint(field(j, "joint0", path), path + ".joint0"),
                                 parse_joint(field(j, "joint1", path), path + ".joint1")};
    } else {
        s.kernels = SeparatedKernels{parse_ratio_law(field(j, "ratios", path), path + ".ratios"),
                                     parse_transition(field(j, "trans0", path), path + ".trans0"),
                                     parse_transition(field(j, "trans1", path), path + ".trans1")};
    }
    return s;
}

std::vector<int> ints(const json& v, const std::string& path) {
    std::vector<int> out;
    const auto& a = array(v, path);
    for (std::size_t i = 0; i < a.size(); ++i) out.push_back(integer(a[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

json states_json(const StateVector& v) {
    json a = json::array();
    for (auto x : v) a.push_back(static_cast<int>(x));
    return a;
}

json ratio_json(const RatioLaw& law) {
    return std::visit(overloaded{
                          [](const PointMassRatios& pm) { return json{{"type", "point_mass"}, {"ratios", pm.ratios}}; },
                          [](const DiscreteRatios& d) {
                              json atoms = json::array();
                              for (const auto& a : d.atoms) atoms.push_back({{"ratios", a.ratios}, {"weight", a.weight}});
                              return json{{"type", "discrete"}, {"atoms", atoms}};
                          },
                          [](const ProductRatios& p) {
                              json coords = json::array();
                              for (const auto& c : p.coords) coords.push_back({{"values", c.values}, {"weights", c.weights}});
                              return json{{"type", "product"}, {"coords", coords}};
                          },
                      },
                      law);
}

json transition_json(const TransitionLaw& law) {
    return std::visit(overloaded{
                          [](const ProductBernoulli& b) { return json{{"type", "bernoulli"}, {"p", b.p}}; },
                          [](const Microcanonical& m) { return json{{"type", "microcanonical"}, {"count", m.count}}; },
                          [](const DiscreteStates& d) {
                              json atoms = json::array();
                              for (const auto& a : d.atoms) atoms.push_back({{"states", states_json(a.states)}, {"weight", a.weight}});
                              return json{{"type", "discrete"}, {"atoms", atoms}};
                          },
                      },
                      law);
}

json joint_json(const JointLaw& law) {
    json atoms = json::array();
    for (const auto& a : law.atoms) {
        atoms.push_back({{"states", states_json(a.states)}, {"ratios", a.ratios}, {"weight", a.weight}});
    }
    return json{{"atoms", atoms}};
}

json stage_json(const StageSpec& s) {
    json out{{"m", s.m}};
    if (const auto* j = std::get_if<JointKernels>(&s.kernels)) {
        out["joint0"] = joint_json(j->from0);
        out["joint1"] = joint_json(j->from1);
    } else {
        const auto& k = std::get<SeparatedKernels>(s.kernels);
        out["ratios"] = ratio_json(k.ratios);
        out["trans0"] = transition_json(k.from0);
        out["trans1"] = transition_json(k.from1);
    }
    return out;
}

}  // namespace

EnvironmentModel parse_model(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ModelError(std::string("model document is not valid JSON: ") + e.what());
    }
    int version = integer(field(doc, "version", "$"), "version");
    if (version != kModelFormatVersion) {
        throw ModelError("version: unsupported model format version " + std::to_string(version));
    }

    EnvironmentModel model;
    model.initial_one_prob = number(field(doc, "initial_one_prob", "$"), "initial_one_prob");
    model.ambient_dim = integer(field(doc, "ambient_dim", "$"), "ambient_dim");
    const auto& prefix = array(field(doc, "prefix", "$"), "prefix");
    for (std::size_t j = 0; j < prefix.size(); ++j) {
        model.prefix.push_back(parse_stage(prefix[j], "prefix[" + std::to_string(j) + "]"));
    }

    const auto& tail = field(doc, "tail", "$");
    std::string tail_type = tag(tail, "tail");
    if (tail_type == "constant") {
        model.tail = ConstantTail{parse_stage(field(tail, "stage", "tail"), "tail.stage")};
    } else if (tail_type == "periodic") {
        PeriodicTail p;
        const auto& stages = array(field(tail, "stages", "tail"), "tail.stages");
        for (std::size_t i = 0; i < stages.size(); ++i) {
            p.stages.push_back(parse_stage(stages[i], "tail.stages[" + std::to_string(i) + "]"));
        }
        model.tail = std::move(p);
    } else {
        throw ModelError("tail.type: unknown tail rule '" + tail_type + "'");
    }

    if (doc.contains("geometry") && !doc["geometry"].is_null()) {
        const auto& g = doc["geometry"];
        std::string gt = tag(g, "geometry");
        if (gt == "cube") {
            model.geometry = CubeSubdivision{ints(field(g, "prefix_sides", "geometry"), "geometry.prefix_sides"),
                                             ints(field(g, "tail_sides", "geometry"), "geometry.tail_sides")};
        } else if (gt == "interval_split") {
            model.geometry = IntervalSplit{};
        } else {
            throw ModelError("geometry.type: unknown geometry '" + gt + "'");
        }
    }
    return model;
}

EnvironmentModel model_from_json(const std::string& json_text) {
    auto model = parse_model(json_text);
    require_valid(model);
    return model;
}

std::string model_to_json(const EnvironmentModel& model, int indent) {
    json doc;
    doc["version"] = kModelFormatVersion;
    doc["initial_one_prob"] = model.initial_one_prob;
    doc["ambient_dim"] = model.ambient_dim;
    doc["prefix"] = json::array();
    for (const auto& s : model.prefix) doc["prefix"].push_back(stage_json(s));
    std::visit(overloaded{
                   [&](const ConstantTail& c) { doc["tail"] = {{"type", "constant"}, {"stage", stage_json(c.stage)}}; },
                   [&](const PeriodicTail& p) {
                       json stages = json::array();
                       for (const auto& s : p.stages) stages.push_back(stage_json(s));
                       doc["tail"] = {{"type", "periodic"}, {"stages", stages}};
                   },
               },
               model.tail);
    if (!model.geometry) {
        doc["geometry"] = nullptr;
    } else if (const auto* cube = std::get_if<CubeSubdivision>(&*model.geometry)) {
        doc["geometry"] = {{"type", "cube"}, {"prefix_sides", cube->prefix_sides}, {"tail_sides", cube->tail_sides}};
    } else {
        doc["geometry"] = {{"type", "interval_split"}};
    }
    return doc.dump(indent) + "\n";
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingArtifact("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

EnvironmentModel load_model(const std::filesystem::path& path) {
    std::string text;
    try {
        text = read_text(path);
    } catch (const MissingArtifact&) {
        throw ModelError("cannot open model file " + path.string());
    }
    return model_from_json(text);
}

void save_model(const EnvironmentModel& model, const std::filesystem::path& path) {
    write_text_atomic(path, model_to_json(model));
}

void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw Error("short write to " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace tmfrac
