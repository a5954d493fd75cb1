#include "herdlab/scenario.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "herdlab/errors.hpp"
#include "json.hpp"

namespace herdlab {

using nlohmann::json;

namespace {

void reject_unknown_keys(const json& obj, const std::string& where,
                         const std::set<std::string>& allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key()))
            throw ParseError("scenario: unknown field '" + it.key() + "' in " + where);
}

double get_num(const json& obj, const std::string& where, const std::string& key,
               double fallback, bool required = false) {
    if (!obj.contains(key)) {
        if (required) throw ParseError("scenario: missing field '" + key + "' in " + where);
        return fallback;
    }
    if (!obj[key].is_number())
        throw ParseError("scenario: field '" + key + "' in " + where + " must be a number");
    return obj[key].get<double>();
}

std::vector<double> get_vec(const json& obj, const std::string& where, const std::string& key) {
    if (!obj.contains(key) || !obj[key].is_array())
        throw ParseError("scenario: field '" + key + "' in " + where + " must be an array");
    std::vector<double> out;
    for (const auto& v : obj[key]) {
        if (!v.is_number())
            throw ParseError("scenario: '" + key + "' in " + where + " must hold numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

Vec to_vec(const std::vector<double>& v, int d, const std::string& where) {
    if (static_cast<int>(v.size()) != d)
        throw ParseError("scenario: vector in " + where + " must have d entries");
    Vec x(d);
    for (int j = 0; j < d; ++j) x[j] = v[j];
    return x;
}

Mat parse_matrix(const json& obj, int d, const std::string& where) {
    if (!obj.is_array() || static_cast<int>(obj.size()) != d)
        throw ParseError("scenario: matrix in " + where + " must be d rows");
    Mat m(d);
    for (int i = 0; i < d; ++i) {
        if (!obj[i].is_array() || static_cast<int>(obj[i].size()) != d)
            throw ParseError("scenario: matrix row in " + where + " must have d entries");
        for (int j = 0; j < d; ++j) m(i, j) = obj[i][j].get<double>();
    }
    return m;
}

TabulatedField parse_table(const json& obj, int d, int value_dim, const std::string& where) {
    reject_unknown_keys(obj, where, {"family", "lo", "hi", "shape", "values"});
    Vec lo = to_vec(get_vec(obj, where, "lo"), d, where);
    Vec hi = to_vec(get_vec(obj, where, "hi"), d, where);
    std::vector<int> shape;
    for (double s : get_vec(obj, where, "shape")) shape.push_back(static_cast<int>(s));
    std::vector<double> values = get_vec(obj, where, "values");
    return TabulatedField(lo, hi, shape, values, value_dim);
}

Kernel parse_kernel(const json& obj, int d, const std::string& where) {
    if (!obj.is_object() || !obj.contains("family"))
        throw ParseError("scenario: kernel " + where + " needs a 'family'");
    std::string family = obj["family"].get<std::string>();
    if (family == "zero") {
        reject_unknown_keys(obj, where, {"family"});
        return Kernel::zero(d);
    }
    if (family == "linear") {
        reject_unknown_keys(obj, where, {"family", "matrix"});
        return Kernel::linear(parse_matrix(obj.at("matrix"), d, where));
    }
    if (family == "clipped_linear") {
        reject_unknown_keys(obj, where, {"family", "matrix", "clip"});
        return Kernel::clipped_linear(parse_matrix(obj.at("matrix"), d, where),
                                      get_num(obj, where, "clip", 1.0, true));
    }
    if (family == "bounded_radial") {
        reject_unknown_keys(obj, where, {"family", "amplitude", "width"});
        return Kernel::bounded_radial(d, get_num(obj, where, "amplitude", 1.0, true),
                                      get_num(obj, where, "width", 1.0, true));
    }
    if (family == "tabulated") return Kernel::tabulated(d, parse_table(obj, d, d, where));
    throw ParseError("scenario: unknown kernel family '" + family + "' in " + where);
}

NoiseCoefficient parse_noise(const json& obj, int d, const std::string& where) {
    if (!obj.is_object() || !obj.contains("family"))
        throw ParseError("scenario: noise " + where + " needs a 'family'");
    std::string family = obj["family"].get<std::string>();
    if (family == "zero") {
        reject_unknown_keys(obj, where, {"family"});
        return NoiseCoefficient::zero(d);
    }
    if (family == "constant") {
        reject_unknown_keys(obj, where, {"family", "matrix"});
        return NoiseCoefficient::constant(parse_matrix(obj.at("matrix"), d, where));
    }
    if (family == "isotropic_affine") {
        reject_unknown_keys(obj, where,
                            {"family", "base", "coef_t", "coef_x", "coef_y", "coef_feat",
                             "clip"});
        std::vector<double> coef_feat;
        if (obj.contains("coef_feat")) coef_feat = get_vec(obj, where, "coef_feat");
        return NoiseCoefficient::isotropic_affine(
            d, get_num(obj, where, "base", 0.0), get_num(obj, where, "coef_t", 0.0),
            get_num(obj, where, "coef_x", 0.0), get_num(obj, where, "coef_y", 0.0),
            std::move(coef_feat), get_num(obj, where, "clip", 1e9));
    }
    if (family == "tabulated_isotropic")
        return NoiseCoefficient::tabulated_isotropic(d, parse_table(obj, d, 1, where));
    throw ParseError("scenario: unknown noise family '" + family + "' in " + where);
}

InitialLaw parse_initial(const json& obj, int d) {
    const std::string where = "initial.herd";
    if (!obj.is_object() || !obj.contains("family"))
        throw ParseError("scenario: " + where + " needs a 'family'");
    std::string family = obj["family"].get<std::string>();
    if (family == "gaussian") {
        reject_unknown_keys(obj, where, {"family", "mean", "stddev"});
        return InitialLaw::gaussian(to_vec(get_vec(obj, where, "mean"), d, where),
                                    to_vec(get_vec(obj, where, "stddev"), d, where));
    }
    if (family == "uniform") {
        reject_unknown_keys(obj, where, {"family", "lo", "hi"});
        return InitialLaw::uniform(to_vec(get_vec(obj, where, "lo"), d, where),
                                   to_vec(get_vec(obj, where, "hi"), d, where));
    }
    if (family == "point_mixture") {
        reject_unknown_keys(obj, where, {"family", "points", "weights"});
        if (!obj.contains("points") || !obj["points"].is_array())
            throw ParseError("scenario: point_mixture needs 'points'");
        std::vector<Vec> points;
        for (const auto& p : obj["points"]) {
            std::vector<double> coords;
            for (const auto& c : p) coords.push_back(c.get<double>());
            points.push_back(to_vec(coords, d, where));
        }
        std::vector<double> weights(points.size(), 1.0);
        if (obj.contains("weights")) weights = get_vec(obj, where, "weights");
        return InitialLaw::point_mixture(std::move(points), std::move(weights));
    }
    throw ParseError("scenario: unknown initial family '" + family + "'");
}

RunningCost parse_running_cost(const json& obj) {
    const std::string where = "costs.psi_rho";
    if (!obj.is_object() || !obj.contains("family"))
        throw ParseError("scenario: " + where + " needs a 'family'");
    std::string family = obj["family"].get<std::string>();
    if (family == "zero") {
        reject_unknown_keys(obj, where, {"family"});
        return RunningCost::zero();
    }
    if (family == "quadratic") {
        reject_unknown_keys(obj, where, {"family", "weight_h", "weight_g"});
        return RunningCost::quadratic(get_num(obj, where, "weight_h", 1.0),
                                      get_num(obj, where, "weight_g", 0.0));
    }
    if (family == "h_target") {
        reject_unknown_keys(obj, where, {"family", "target", "weight"});
        return RunningCost::h_target(get_vec(obj, where, "target"),
                                     get_num(obj, where, "weight", 1.0));
    }
    throw ParseError("scenario: unknown psi_rho family '" + family + "'");
}

StateCost parse_state_cost(const json& obj, int d, int M, const std::string& where) {
    if (!obj.is_object() || !obj.contains("family"))
        throw ParseError("scenario: " + where + " needs a 'family'");
    std::string family = obj["family"].get<std::string>();
    if (family == "zero") {
        reject_unknown_keys(obj, where, {"family"});
        return StateCost::zero();
    }
    if (family == "constant") {
        reject_unknown_keys(obj, where, {"family", "value"});
        return StateCost::constant(get_num(obj, where, "value", 0.0, true));
    }
    if (family == "mean_to_target") {
        reject_unknown_keys(obj, where, {"family", "target", "weight"});
        return StateCost::mean_to_target(to_vec(get_vec(obj, where, "target"), d, where),
                                         get_num(obj, where, "weight", 1.0));
    }
    if (family == "second_moment") {
        reject_unknown_keys(obj, where, {"family", "weight"});
        return StateCost::second_moment(get_num(obj, where, "weight", 1.0));
    }
    if (family == "herder_to_target") {
        reject_unknown_keys(obj, where, {"family", "targets", "weight", "clip"});
        if (!obj.contains("targets") || !obj["targets"].is_array() ||
            static_cast<int>(obj["targets"].size()) != M)
            throw ParseError("scenario: herder_to_target needs M targets in " + where);
        std::vector<Vec> targets;
        for (const auto& t : obj["targets"]) {
            std::vector<double> coords;
            for (const auto& c : t) coords.push_back(c.get<double>());
            targets.push_back(to_vec(coords, d, where));
        }
        return StateCost::herder_to_target(std::move(targets), get_num(obj, where, "weight", 1.0),
                                           get_num(obj, where, "clip", 1e9));
    }
    throw ParseError("scenario: unknown cost family '" + family + "' in " + where);
}

}  // namespace

ControlParams Scenario::make_control() const {
    ControlParams p = ControlParams::default_init(spec, control_pieces);
    if (!h_init.empty()) {
        const std::size_t hdim = static_cast<std::size_t>(spec.d) * spec.bounds.ell;
        if (h_init.size() != hdim)
            throw ParseError("scenario: control.h_init must have d*ell entries");
        for (auto& hm : p.h)
            for (std::size_t i = 0; i < hm.size(); ++i) hm[i] = h_init[i % hdim];
    }
    if (!g_bias_init.empty()) {
        if (g_bias_init.size() != static_cast<std::size_t>(spec.bounds.ell))
            throw ParseError("scenario: control.g_bias_init must have ell entries");
        for (auto& gm : p.g) gm.bias = g_bias_init;
    }
    project_admissible(spec, p);
    return p;
}

Scenario parse_scenario_text(const std::string& text, const std::string& origin) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError("scenario " + origin + ": " + e.what());
    }
    reject_unknown_keys(root, "top level",
                        {"name", "system", "bounds", "kernels", "noises", "initial", "costs",
                         "control", "experiment"});

    Scenario s;
    s.name = root.value("name", "scenario");

    if (!root.contains("system")) throw ParseError("scenario: missing 'system' section");
    const json& sys = root["system"];
    reject_unknown_keys(sys, "system", {"d", "N", "M", "T", "p", "dt", "seed", "feature_clip"});
    s.spec.d = static_cast<int>(get_num(sys, "system", "d", 1, true));
    s.spec.N = static_cast<int>(get_num(sys, "system", "N", 256));
    s.spec.M = static_cast<int>(get_num(sys, "system", "M", 1));
    s.spec.T = get_num(sys, "system", "T", 1.0, true);
    s.spec.p = get_num(sys, "system", "p", 4.0);
    s.spec.dt = get_num(sys, "system", "dt", 0.02, true);
    s.spec.feature_clip = get_num(sys, "system", "feature_clip", 0.0);
    s.seed = static_cast<std::uint64_t>(get_num(sys, "system", "seed", 1));
    const int d = s.spec.d;

    if (!root.contains("bounds")) throw ParseError("scenario: missing 'bounds' section");
    const json& bounds = root["bounds"];
    reject_unknown_keys(bounds, "bounds", {"L", "Mprime", "ell", "U_lo", "U_hi"});
    s.spec.bounds.L = get_num(bounds, "bounds", "L", 1.0, true);
    s.spec.bounds.Mprime = get_num(bounds, "bounds", "Mprime", 1.0);
    s.spec.bounds.ell = static_cast<int>(get_num(bounds, "bounds", "ell", 1));
    s.spec.bounds.U_lo = get_vec(bounds, "bounds", "U_lo");
    s.spec.bounds.U_hi = get_vec(bounds, "bounds", "U_hi");

    if (!root.contains("kernels")) throw ParseError("scenario: missing 'kernels' section");
    const json& kernels = root["kernels"];
    reject_unknown_keys(kernels, "kernels", {"H1", "H2", "K1", "K2"});
    for (const char* name : {"H1", "H2", "K1", "K2"})
        if (!kernels.contains(name))
            throw ParseError(std::string("scenario: kernels.") + name + " missing");
    s.spec.kernels.H1 = parse_kernel(kernels["H1"], d, "kernels.H1");
    s.spec.kernels.H2 = parse_kernel(kernels["H2"], d, "kernels.H2");
    s.spec.kernels.K1 = parse_kernel(kernels["K1"], d, "kernels.K1");
    s.spec.kernels.K2 = parse_kernel(kernels["K2"], d, "kernels.K2");

    if (!root.contains("noises")) throw ParseError("scenario: missing 'noises' section");
    const json& noises = root["noises"];
    reject_unknown_keys(noises, "noises", {"sigma_i", "sigma_c"});
    if (!noises.contains("sigma_i") || !noises.contains("sigma_c"))
        throw ParseError("scenario: noises must define sigma_i and sigma_c");
    s.spec.noises.sigma_i = parse_noise(noises["sigma_i"], d, "noises.sigma_i");
    s.spec.noises.sigma_c = parse_noise(noises["sigma_c"], d, "noises.sigma_c");

    if (!root.contains("initial")) throw ParseError("scenario: missing 'initial' section");
    const json& initial = root["initial"];
    reject_unknown_keys(initial, "initial", {"herd", "herders"});
    if (!initial.contains("herd")) throw ParseError("scenario: initial.herd missing");
    s.spec.initial = parse_initial(initial["herd"], d);
    if (!initial.contains("herders") || !initial["herders"].is_array())
        throw ParseError("scenario: initial.herders must list M positions");
    for (const auto& y : initial["herders"]) {
        std::vector<double> coords;
        for (const auto& c : y) coords.push_back(c.get<double>());
        s.spec.herder_start.push_back(to_vec(coords, d, "initial.herders"));
    }

    const json costs = root.value("costs", json::object());
    reject_unknown_keys(costs, "costs", {"psi_rho", "psi_tau", "psi_eps"});
    s.spec.costs.psi_rho = costs.contains("psi_rho") ? parse_running_cost(costs["psi_rho"])
                                                     : RunningCost::zero();
    s.spec.costs.psi_tau = costs.contains("psi_tau")
                               ? parse_state_cost(costs["psi_tau"], d, s.spec.M, "costs.psi_tau")
                               : StateCost::zero();
    s.spec.costs.psi_eps = costs.contains("psi_eps")
                               ? parse_state_cost(costs["psi_eps"], d, s.spec.M, "costs.psi_eps")
                               : StateCost::zero();

    const json control = root.value("control", json::object());
    reject_unknown_keys(control, "control", {"pieces", "h_init", "g_bias_init"});
    s.control_pieces = static_cast<int>(get_num(control, "control", "pieces", 4));
    if (control.contains("h_init")) s.h_init = get_vec(control, "control", "h_init");
    if (control.contains("g_bias_init"))
        s.g_bias_init = get_vec(control, "control", "g_bias_init");

    const json exp = root.value("experiment", json::object());
    reject_unknown_keys(exp, "experiment",
                        {"N_list", "N_ref", "N_star", "replicas", "inner_replicas", "budget",
                         "grid_size", "q", "seeds", "bank_scale", "binary_export",
                         "crn_replicas"});
    if (exp.contains("N_list")) {
        s.exp.N_list.clear();
        for (double v : get_vec(exp, "experiment", "N_list"))
            s.exp.N_list.push_back(static_cast<int>(v));
    }
    s.exp.N_ref = static_cast<int>(get_num(exp, "experiment", "N_ref", s.exp.N_ref));
    s.exp.N_star = static_cast<int>(get_num(exp, "experiment", "N_star", s.exp.N_star));
    s.exp.replicas = static_cast<int>(get_num(exp, "experiment", "replicas", s.exp.replicas));
    s.exp.inner_replicas =
        static_cast<int>(get_num(exp, "experiment", "inner_replicas", s.exp.inner_replicas));
    s.exp.budget = static_cast<int>(get_num(exp, "experiment", "budget", s.exp.budget));
    s.exp.grid_size = static_cast<int>(get_num(exp, "experiment", "grid_size", s.exp.grid_size));
    s.exp.q = get_num(exp, "experiment", "q", s.exp.q);
    if (exp.contains("seeds")) {
        s.exp.seeds.clear();
        for (double v : get_vec(exp, "experiment", "seeds"))
            s.exp.seeds.push_back(static_cast<std::uint64_t>(v));
    }
    s.exp.bank_scale = get_num(exp, "experiment", "bank_scale", s.exp.bank_scale);
    if (exp.contains("binary_export")) {
        if (!exp["binary_export"].is_boolean())
            throw ParseError("scenario: experiment.binary_export must be a boolean");
        s.exp.binary_export = exp["binary_export"].get<bool>();
    }
    s.exp.crn_replicas =
        static_cast<int>(get_num(exp, "experiment", "crn_replicas", s.exp.crn_replicas));

    s.spec.check_basic();
    ValidationReport report = validate_assumptions(s.spec, s.exp.grid_size);
    if (!report.pass())
        throw ValidationError("scenario: assumption validation failed\n" + report.summary());
    return s;
}

Scenario parse_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("scenario: cannot open " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_scenario_text(buffer.str(), path);
}

namespace {

json table_to_json(const TabulatedField& t, int d) {
    json out;
    json lo = json::array(), hi = json::array();
    for (int j = 0; j < d; ++j) {
        lo.push_back(t.lo()[j]);
        hi.push_back(t.hi()[j]);
    }
    out["lo"] = lo;
    out["hi"] = hi;
    out["shape"] = t.shape();
    out["values"] = t.values();
    return out;
}

json kernel_to_json(const Kernel& k) {
    json out;
    switch (k.family()) {
        case Kernel::Family::Zero:
            out["family"] = "zero";
            break;
        case Kernel::Family::Linear: {
            out["family"] = "linear";
            json rows = json::array();
            for (int i = 0; i < k.dim(); ++i) {
                json row = json::array();
                for (int j = 0; j < k.dim(); ++j) row.push_back(k.matrix()(i, j));
                rows.push_back(row);
            }
            out["matrix"] = rows;
            break;
        }
        case Kernel::Family::ClippedLinear: {
            out["family"] = "clipped_linear";
            json rows = json::array();
            for (int i = 0; i < k.dim(); ++i) {
                json row = json::array();
                for (int j = 0; j < k.dim(); ++j) row.push_back(k.matrix()(i, j));
                rows.push_back(row);
            }
            out["matrix"] = rows;
            out["clip"] = k.clip_radius();
            break;
        }
        case Kernel::Family::BoundedRadial:
            out["family"] = "bounded_radial";
            out["amplitude"] = k.amplitude();
            out["width"] = k.width();
            break;
        case Kernel::Family::Tabulated:
            out = table_to_json(k.table(), k.dim());
            out["family"] = "tabulated";
            break;
    }
    return out;
}

json noise_to_json(const NoiseCoefficient& n) {
    json out;
    switch (n.family()) {
        case NoiseCoefficient::Family::Zero:
            out["family"] = "zero";
            break;
        case NoiseCoefficient::Family::Constant: {
            out["family"] = "constant";
            json rows = json::array();
            for (int i = 0; i < n.matrix().dim(); ++i) {
                json row = json::array();
                for (int j = 0; j < n.matrix().dim(); ++j) row.push_back(n.matrix()(i, j));
                rows.push_back(row);
            }
            out["matrix"] = rows;
            break;
        }
        case NoiseCoefficient::Family::IsotropicAffine:
            out["family"] = "isotropic_affine";
            out["base"] = n.base();
            out["coef_t"] = n.coef_t();
            out["coef_x"] = n.coef_x();
            out["coef_y"] = n.coef_y();
            out["coef_feat"] = n.coef_feat();
            out["clip"] = n.clip_radius();
            break;
        case NoiseCoefficient::Family::TabulatedIsotropic:
            // lo/hi carry d coordinates even though values are scalar
            out = table_to_json(n.table(), n.table().lo().dim());
            out["family"] = "tabulated_isotropic";
            break;
    }
    return out;
}

json initial_to_json(const InitialLaw& law) {
    json out;
    switch (law.family()) {
        case InitialLaw::Family::Gaussian: {
            out["family"] = "gaussian";
            json mean = json::array(), stddev = json::array();
            for (int j = 0; j < law.dim(); ++j) {
                mean.push_back(law.mean()[j]);
                stddev.push_back(law.stddev()[j]);
            }
            out["mean"] = mean;
            out["stddev"] = stddev;
            break;
        }
        case InitialLaw::Family::Uniform: {
            out["family"] = "uniform";
            json lo = json::array(), hi = json::array();
            for (int j = 0; j < law.dim(); ++j) {
                lo.push_back(law.lo()[j]);
                hi.push_back(law.hi()[j]);
            }
            out["lo"] = lo;
            out["hi"] = hi;
            break;
        }
        case InitialLaw::Family::PointMixture: {
            out["family"] = "point_mixture";
            json pts = json::array();
            for (const auto& p : law.points()) {
                json pt = json::array();
                for (int j = 0; j < law.dim(); ++j) pt.push_back(p[j]);
                pts.push_back(pt);
            }
            out["points"] = pts;
            out["weights"] = law.weights();
            break;
        }
    }
    return out;
}

json running_cost_to_json(const RunningCost& c) {
    json out;
    switch (c.family()) {
        case RunningCost::Family::Zero:
            out["family"] = "zero";
            break;
        case RunningCost::Family::Quadratic:
            out["family"] = "quadratic";
            out["weight_h"] = c.weight_h();
            out["weight_g"] = c.weight_g();
            break;
        case RunningCost::Family::HTarget:
            out["family"] = "h_target";
            out["target"] = c.target();
            out["weight"] = c.weight_h();
            break;
    }
    return out;
}

json state_cost_to_json(const StateCost& c, int d) {
    json out;
    switch (c.family()) {
        case StateCost::Family::Zero:
            out["family"] = "zero";
            break;
        case StateCost::Family::Constant:
            out["family"] = "constant";
            out["value"] = c.value();
            break;
        case StateCost::Family::MeanToTarget: {
            out["family"] = "mean_to_target";
            json t = json::array();
            for (int j = 0; j < d; ++j) t.push_back(c.target()[j]);
            out["target"] = t;
            out["weight"] = c.weight();
            break;
        }
        case StateCost::Family::SecondMoment:
            out["family"] = "second_moment";
            out["weight"] = c.weight();
            break;
        case StateCost::Family::HerderToTarget: {
            out["family"] = "herder_to_target";
            json ts = json::array();
            for (const auto& t : c.herder_targets()) {
                json tv = json::array();
                for (int j = 0; j < d; ++j) tv.push_back(t[j]);
                ts.push_back(tv);
            }
            out["targets"] = ts;
            out["weight"] = c.weight();
            out["clip"] = c.clip_radius();
            break;
        }
    }
    return out;
}

}  // namespace

std::string serialize_scenario(const Scenario& s) {
    json root;
    root["name"] = s.name;
    root["system"] = {{"d", s.spec.d},   {"N", s.spec.N},   {"M", s.spec.M},
                      {"T", s.spec.T},   {"p", s.spec.p},   {"dt", s.spec.dt},
                      {"seed", s.seed},  {"feature_clip", s.spec.feature_clip}};
    root["bounds"] = {{"L", s.spec.bounds.L},
                      {"Mprime", s.spec.bounds.Mprime},
                      {"ell", s.spec.bounds.ell},
                      {"U_lo", s.spec.bounds.U_lo},
                      {"U_hi", s.spec.bounds.U_hi}};
    root["kernels"] = {{"H1", kernel_to_json(s.spec.kernels.H1)},
                       {"H2", kernel_to_json(s.spec.kernels.H2)},
                       {"K1", kernel_to_json(s.spec.kernels.K1)},
                       {"K2", kernel_to_json(s.spec.kernels.K2)}};
    root["noises"] = {{"sigma_i", noise_to_json(s.spec.noises.sigma_i)},
                      {"sigma_c", noise_to_json(s.spec.noises.sigma_c)}};
    json herders = json::array();
    for (const auto& y : s.spec.herder_start) {
        json yv = json::array();
        for (int j = 0; j < s.spec.d; ++j) yv.push_back(y[j]);
        herders.push_back(yv);
    }
    root["initial"] = {{"herd", initial_to_json(s.spec.initial)}, {"herders", herders}};
    root["costs"] = {{"psi_rho", running_cost_to_json(s.spec.costs.psi_rho)},
                     {"psi_tau", state_cost_to_json(s.spec.costs.psi_tau, s.spec.d)},
                     {"psi_eps", state_cost_to_json(s.spec.costs.psi_eps, s.spec.d)}};
    json control = {{"pieces", s.control_pieces}};
    if (!s.h_init.empty()) control["h_init"] = s.h_init;
    if (!s.g_bias_init.empty()) control["g_bias_init"] = s.g_bias_init;
    root["control"] = control;
    root["experiment"] = {{"N_list", s.exp.N_list},
                          {"N_ref", s.exp.N_ref},
                          {"N_star", s.exp.N_star},
                          {"replicas", s.exp.replicas},
                          {"inner_replicas", s.exp.inner_replicas},
                          {"budget", s.exp.budget},
                          {"grid_size", s.exp.grid_size},
                          {"q", s.exp.q},
                          {"seeds", s.exp.seeds},
                          {"bank_scale", s.exp.bank_scale},
                          {"binary_export", s.exp.binary_export},
                          {"crn_replicas", s.exp.crn_replicas}};
    return root.dump(2);
}

std::uint64_t scenario_hash(const Scenario& s) {
    std::string text = serialize_scenario(s);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace herdlab
