#include "gapbound/scenario.hpp"

#include "gapbound/linalg.hpp"
#include "gapbound/sensitivity.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <utility>

namespace gapbound {

namespace {

constexpr const char* kToolVersion = "1.0.0";

using Json = nlohmann::ordered_json;

[[noreturn]] void fail_field(const std::string& where, const std::string& what) {
    throw std::invalid_argument("scenario config: " + where + ": " + what);
}

void check_known_keys(const Json& obj, const std::string& where,
                      const std::set<std::string>& allowed) {
    for (const auto& item : obj.items()) {
        if (!allowed.count(item.key())) {
            fail_field(where, "unknown field '" + item.key() + "'");
        }
    }
}

double get_number(const Json& obj, const std::string& key, const std::string& where,
                  double fallback) {
    if (!obj.contains(key)) {
        return fallback;
    }
    if (!obj[key].is_number()) {
        fail_field(where, "field '" + key + "' must be a number");
    }
    return obj[key].get<double>();
}

bool get_bool(const Json& obj, const std::string& key, const std::string& where, bool fallback) {
    if (!obj.contains(key)) {
        return fallback;
    }
    if (!obj[key].is_boolean()) {
        fail_field(where, "field '" + key + "' must be a boolean");
    }
    return obj[key].get<bool>();
}

std::string get_string(const Json& obj, const std::string& key, const std::string& where,
                       const std::string& fallback) {
    if (!obj.contains(key)) {
        return fallback;
    }
    if (!obj[key].is_string()) {
        fail_field(where, "field '" + key + "' must be a string");
    }
    return obj[key].get<std::string>();
}

GeneratorParams parse_generator_params(const Json& obj) {
    GeneratorParams p;
    check_known_keys(obj, "params",
                     {"M", "f", "Omega_b", "xd_p", "xq_p", "xl", "V", "ed_p", "eq_p", "ra", "Pm",
                      "D"});
    p.M = get_number(obj, "M", "params", p.M);
    p.f = get_number(obj, "f", "params", p.f);
    p.Omega_b = get_number(obj, "Omega_b", "params", p.Omega_b);
    p.xd_p = get_number(obj, "xd_p", "params", p.xd_p);
    p.xq_p = get_number(obj, "xq_p", "params", p.xq_p);
    p.xl = get_number(obj, "xl", "params", p.xl);
    p.V = get_number(obj, "V", "params", p.V);
    p.ed_p = get_number(obj, "ed_p", "params", p.ed_p);
    p.eq_p = get_number(obj, "eq_p", "params", p.eq_p);
    p.ra = get_number(obj, "ra", "params", p.ra);
    p.Pm = get_number(obj, "Pm", "params", p.Pm);
    p.D = get_number(obj, "D", "params", p.D);
    return p;
}

GovernorParams parse_governor_params(const Json& obj) {
    GovernorParams g;
    check_known_keys(obj, "governor",
                     {"omega_ref", "R", "T_max", "T_min", "Ts", "Tc", "T3", "T4", "T5", "T_order"});
    g.omega_ref = get_number(obj, "omega_ref", "governor", g.omega_ref);
    g.R = get_number(obj, "R", "governor", g.R);
    g.T_max = get_number(obj, "T_max", "governor", g.T_max);
    g.T_min = get_number(obj, "T_min", "governor", g.T_min);
    g.Ts = get_number(obj, "Ts", "governor", g.Ts);
    g.Tc = get_number(obj, "Tc", "governor", g.Tc);
    g.T3 = get_number(obj, "T3", "governor", g.T3);
    g.T4 = get_number(obj, "T4", "governor", g.T4);
    g.T5 = get_number(obj, "T5", "governor", g.T5);
    g.T_order = get_number(obj, "T_order", "governor", g.T_order);
    return g;
}

EnvelopeSpec parse_envelope_spec(const Json& obj, const std::string& where) {
    EnvelopeSpec e;
    if (!obj.is_object()) {
        fail_field(where, "must be an object");
    }
    check_known_keys(obj, where, {"C", "k", "S", "omega", "phi", "zero"});
    e.zero = get_bool(obj, "zero", where, false);
    e.C = get_number(obj, "C", where, 0.0);
    e.k = get_number(obj, "k", where, 0.0);
    e.S = get_number(obj, "S", where, 0.0);
    e.omega = get_number(obj, "omega", where, 0.0);
    e.phi = get_number(obj, "phi", where, 0.0);
    return e;
}

Json envelope_spec_json(const EnvelopeSpec& e) {
    Json j;
    if (e.zero) {
        j["zero"] = true;
        return j;
    }
    j["C"] = e.C;
    j["k"] = e.k;
    j["S"] = e.S;
    j["omega"] = e.omega;
    j["phi"] = e.phi;
    return j;
}

std::string kind_name(BoundKind k) {
    switch (k) {
    case BoundKind::bound1:
        return "bound1";
    case BoundKind::bound1_tight:
        return "bound1_tight";
    case BoundKind::bound2:
        return "bound2";
    case BoundKind::theorem2:
        return "theorem2";
    }
    return "bound1";
}

BoundKind kind_from_name(const std::string& s, const std::string& where) {
    if (s == "bound1") {
        return BoundKind::bound1;
    }
    if (s == "bound1_tight") {
        return BoundKind::bound1_tight;
    }
    if (s == "bound2") {
        return BoundKind::bound2;
    }
    if (s == "theorem2") {
        return BoundKind::theorem2;
    }
    fail_field(where, "unknown bound kind '" + s + "'");
}

} // namespace

Scenario parse_scenario(const std::string& text) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw std::invalid_argument(std::string("scenario config: ") + e.what());
    }
    if (!j.is_object()) {
        fail_field("document", "top level must be an object");
    }
    check_known_keys(j, "document",
                     {"name", "model", "params", "governor", "disturbance", "horizon", "grid_step",
                      "bounds", "envelope", "integrator", "partition_pieces", "K2inf"});

    Scenario cfg;
    cfg.name = get_string(j, "name", "document", "");
    if (cfg.name.empty()) {
        fail_field("name", "required non-empty string");
    }

    const std::string model = get_string(j, "model", "document", "generator2");
    if (model == "generator2") {
        cfg.model = ModelKind::generator2;
    } else if (model == "generator_governor") {
        cfg.model = ModelKind::generator_governor;
    } else {
        fail_field("model", "must be 'generator2' or 'generator_governor'");
    }

    if (j.contains("params")) {
        if (!j["params"].is_object()) {
            fail_field("params", "must be an object");
        }
        cfg.params = parse_generator_params(j["params"]);
    }
    if (j.contains("governor")) {
        if (!j["governor"].is_object()) {
            fail_field("governor", "must be an object");
        }
        cfg.governor = parse_governor_params(j["governor"]);
    }

    if (!j.contains("disturbance") || !j["disturbance"].is_object()) {
        fail_field("disturbance", "required object");
    }
    {
        const Json& d = j["disturbance"];
        check_known_keys(d, "disturbance",
                         {"kind", "epsilon", "magnitude", "frequency", "known_input"});
        const std::string kind = get_string(d, "kind", "disturbance", "");
        if (kind == "constant") {
            cfg.disturbance.kind = DisturbanceKind::constant;
            cfg.disturbance.magnitude = get_number(d, "epsilon", "disturbance", 0.1);
        } else if (kind == "sine") {
            cfg.disturbance.kind = DisturbanceKind::sine;
            cfg.disturbance.magnitude = get_number(d, "magnitude", "disturbance", 0.1);
            cfg.disturbance.known_input = get_bool(d, "known_input", "disturbance", false);
            if (d.contains("frequency")) {
                if (d["frequency"].is_string()) {
                    if (d["frequency"].get<std::string>() != "resonant") {
                        fail_field("disturbance.frequency", "must be a number or 'resonant'");
                    }
                    cfg.disturbance.resonant = true;
                    cfg.disturbance.frequency = 0.0;
                } else if (d["frequency"].is_number()) {
                    cfg.disturbance.resonant = false;
                    cfg.disturbance.frequency = d["frequency"].get<double>();
                } else {
                    fail_field("disturbance.frequency", "must be a number or 'resonant'");
                }
            }
        } else if (kind == "governor_mismatch") {
            cfg.disturbance.kind = DisturbanceKind::governor_mismatch;
            cfg.disturbance.magnitude = 0.0; // estimated from the governed run
        } else {
            fail_field("disturbance.kind",
                       "must be 'constant', 'sine' or 'governor_mismatch'");
        }
    }

    cfg.horizon = get_number(j, "horizon", "document", cfg.horizon);
    cfg.grid_step = get_number(j, "grid_step", "document", cfg.grid_step);

    if (j.contains("bounds")) {
        if (!j["bounds"].is_array()) {
            fail_field("bounds", "must be an array of bound kinds");
        }
        for (const Json& b : j["bounds"]) {
            if (!b.is_string()) {
                fail_field("bounds", "entries must be strings");
            }
            cfg.bounds.push_back(kind_from_name(b.get<std::string>(), "bounds"));
        }
    } else if (cfg.disturbance.kind == DisturbanceKind::constant ||
               cfg.disturbance.known_input) {
        cfg.bounds = {BoundKind::bound1, BoundKind::bound1_tight, BoundKind::bound2,
                      BoundKind::theorem2};
    } else {
        cfg.bounds = {BoundKind::theorem2};
    }

    if (j.contains("envelope")) {
        const Json& e = j["envelope"];
        if (!e.is_object()) {
            fail_field("envelope", "must be an object");
        }
        check_known_keys(e, "envelope", {"kind", "inflation", "grid_step", "exp", "dA"});
        const std::string kind = get_string(e, "kind", "envelope", "fit");
        if (kind == "fit") {
            cfg.envelope.mode = EnvelopeMode::fit;
        } else if (kind == "lemma3") {
            cfg.envelope.mode = EnvelopeMode::lemma3;
        } else if (kind == "explicit") {
            cfg.envelope.mode = EnvelopeMode::explicit_pair;
            if (!e.contains("exp") || !e.contains("dA")) {
                fail_field("envelope", "explicit mode needs 'exp' and 'dA' objects");
            }
            cfg.envelope.exp_spec = parse_envelope_spec(e["exp"], "envelope.exp");
            cfg.envelope.dA_spec = parse_envelope_spec(e["dA"], "envelope.dA");
        } else {
            fail_field("envelope.kind", "must be 'fit', 'lemma3' or 'explicit'");
        }
        cfg.envelope.inflation = get_number(e, "inflation", "envelope", cfg.envelope.inflation);
        cfg.envelope.fit_step = get_number(e, "grid_step", "envelope", cfg.envelope.fit_step);
    }

    if (j.contains("integrator")) {
        const Json& it = j["integrator"];
        if (!it.is_object()) {
            fail_field("integrator", "must be an object");
        }
        check_known_keys(it, "integrator", {"mode", "step", "abs_tol", "rel_tol", "max_step"});
        const std::string mode = get_string(it, "mode", "integrator", "adaptive");
        if (mode == "adaptive") {
            cfg.integrator.mode = IntegratorMode::adaptive;
        } else if (mode == "fixed") {
            cfg.integrator.mode = IntegratorMode::fixed;
        } else {
            fail_field("integrator.mode", "must be 'adaptive' or 'fixed'");
        }
        cfg.integrator.fixed_step = get_number(it, "step", "integrator", cfg.integrator.fixed_step);
        cfg.integrator.opts.abs_tol =
            get_number(it, "abs_tol", "integrator", cfg.integrator.opts.abs_tol);
        cfg.integrator.opts.rel_tol =
            get_number(it, "rel_tol", "integrator", cfg.integrator.opts.rel_tol);
        cfg.integrator.opts.max_step =
            get_number(it, "max_step", "integrator", cfg.integrator.opts.max_step);
    }

    if (j.contains("partition_pieces")) {
        if (!j["partition_pieces"].is_number_integer()) {
            fail_field("partition_pieces", "must be an integer");
        }
        cfg.partition_pieces = j["partition_pieces"].get<int>();
    }
    cfg.K2inf = get_number(j, "K2inf", "document", cfg.K2inf);

    validate_scenario(cfg);
    return cfg;
}

std::string serialize_scenario(const Scenario& cfg) {
    Json j;
    j["name"] = cfg.name;
    j["model"] = cfg.model == ModelKind::generator2 ? "generator2" : "generator_governor";
    Json p;
    p["M"] = cfg.params.M;
    p["f"] = cfg.params.f;
    p["Omega_b"] = cfg.params.Omega_b;
    p["xd_p"] = cfg.params.xd_p;
    p["xq_p"] = cfg.params.xq_p;
    p["xl"] = cfg.params.xl;
    p["V"] = cfg.params.V;
    p["ed_p"] = cfg.params.ed_p;
    p["eq_p"] = cfg.params.eq_p;
    p["ra"] = cfg.params.ra;
    p["Pm"] = cfg.params.Pm;
    p["D"] = cfg.params.D;
    j["params"] = p;
    if (cfg.model == ModelKind::generator_governor) {
        Json g;
        g["omega_ref"] = cfg.governor.omega_ref;
        g["R"] = cfg.governor.R;
        g["T_max"] = cfg.governor.T_max;
        g["T_min"] = cfg.governor.T_min;
        g["Ts"] = cfg.governor.Ts;
        g["Tc"] = cfg.governor.Tc;
        g["T3"] = cfg.governor.T3;
        g["T4"] = cfg.governor.T4;
        g["T5"] = cfg.governor.T5;
        g["T_order"] = cfg.governor.T_order;
        j["governor"] = g;
    }
    Json d;
    switch (cfg.disturbance.kind) {
    case DisturbanceKind::constant:
        d["kind"] = "constant";
        d["epsilon"] = cfg.disturbance.magnitude;
        break;
    case DisturbanceKind::sine:
        d["kind"] = "sine";
        d["magnitude"] = cfg.disturbance.magnitude;
        if (cfg.disturbance.resonant) {
            d["frequency"] = "resonant";
        } else {
            d["frequency"] = cfg.disturbance.frequency;
        }
        d["known_input"] = cfg.disturbance.known_input;
        break;
    case DisturbanceKind::governor_mismatch:
        d["kind"] = "governor_mismatch";
        break;
    }
    j["disturbance"] = d;
    j["horizon"] = cfg.horizon;
    j["grid_step"] = cfg.grid_step;
    Json blist = Json::array();
    for (BoundKind k : cfg.bounds) {
        blist.push_back(kind_name(k));
    }
    j["bounds"] = blist;
    Json e;
    switch (cfg.envelope.mode) {
    case EnvelopeMode::fit:
        e["kind"] = "fit";
        break;
    case EnvelopeMode::lemma3:
        e["kind"] = "lemma3";
        break;
    case EnvelopeMode::explicit_pair:
        e["kind"] = "explicit";
        e["exp"] = envelope_spec_json(cfg.envelope.exp_spec);
        e["dA"] = envelope_spec_json(cfg.envelope.dA_spec);
        break;
    }
    e["inflation"] = cfg.envelope.inflation;
    e["grid_step"] = cfg.envelope.fit_step;
    j["envelope"] = e;
    Json it;
    it["mode"] = cfg.integrator.mode == IntegratorMode::adaptive ? "adaptive" : "fixed";
    it["step"] = cfg.integrator.fixed_step;
    it["abs_tol"] = cfg.integrator.opts.abs_tol;
    it["rel_tol"] = cfg.integrator.opts.rel_tol;
    it["max_step"] = cfg.integrator.opts.max_step;
    j["integrator"] = it;
    j["partition_pieces"] = cfg.partition_pieces;
    j["K2inf"] = cfg.K2inf;
    return j.dump(2) + "\n";
}

void validate_scenario(const Scenario& cfg) {
    if (cfg.name.empty()) {
        fail_field("name", "required non-empty string");
    }
    if (!(cfg.horizon > 0.0)) {
        fail_field("horizon", "must be positive");
    }
    if (!(cfg.grid_step > 0.0) || cfg.grid_step > cfg.horizon) {
        fail_field("grid_step", "must be positive and no larger than the horizon");
    }
    if (!(cfg.disturbance.magnitude >= 0.0)) {
        fail_field("disturbance", "magnitude must be nonnegative");
    }
    validate_params(cfg.params);
    const bool governor_model = cfg.model == ModelKind::generator_governor;
    const bool governor_dist = cfg.disturbance.kind == DisturbanceKind::governor_mismatch;
    if (governor_model != governor_dist) {
        fail_field("disturbance",
                   "governor_mismatch and model generator_governor go together");
    }
    if (governor_model) {
        validate_params(cfg.governor);
    }
    if (cfg.disturbance.kind == DisturbanceKind::sine && !cfg.disturbance.resonant &&
        !(cfg.disturbance.frequency > 0.0)) {
        fail_field("disturbance.frequency", "must be positive");
    }
    if (cfg.bounds.empty()) {
        fail_field("bounds", "at least one bound kind is required");
    }
    const bool magnitude_only =
        governor_dist ||
        (cfg.disturbance.kind == DisturbanceKind::sine && !cfg.disturbance.known_input);
    if (magnitude_only) {
        for (BoundKind k : cfg.bounds) {
            if (k != BoundKind::theorem2) {
                fail_field("bounds", "'" + kind_name(k) +
                                         "' needs the input trajectory; only theorem2 applies "
                                         "when just the magnitude is known");
            }
        }
    }
    if (!(cfg.envelope.inflation >= 0.0)) {
        fail_field("envelope.inflation", "must be nonnegative");
    }
    if (!(cfg.envelope.fit_step > 0.0)) {
        fail_field("envelope.grid_step", "must be positive");
    }
    if (cfg.envelope.mode == EnvelopeMode::explicit_pair) {
        for (const EnvelopeSpec* e : {&cfg.envelope.exp_spec, &cfg.envelope.dA_spec}) {
            if (e->zero) {
                continue;
            }
            if (!(e->C >= 0.0) || !(e->k >= 0.0) || e->S < 0.0 || e->S >= 1.0) {
                fail_field("envelope", "explicit spec needs C >= 0, k >= 0, 0 <= S < 1");
            }
        }
    }
    if (cfg.integrator.mode == IntegratorMode::fixed && !(cfg.integrator.fixed_step > 0.0)) {
        fail_field("integrator.step", "must be positive");
    }
    if (!(cfg.integrator.opts.abs_tol > 0.0) || !(cfg.integrator.opts.rel_tol > 0.0) ||
        !(cfg.integrator.opts.max_step > 0.0)) {
        fail_field("integrator", "tolerances and max_step must be positive");
    }
    if (cfg.partition_pieces < 1) {
        fail_field("partition_pieces", "must be at least 1");
    }
    if (cfg.K2inf != 0.0 && !(cfg.K2inf >= 1.0)) {
        fail_field("K2inf", "must be 0 (default) or at least 1");
    }
}

std::vector<std::string> builtin_scenario_names() {
    return {"generator-constant", "generator-sine-resonant", "generator-governor"};
}

Scenario builtin_scenario(const std::string& name) {
    Scenario cfg;
    cfg.name = name;
    if (name == "generator-constant") {
        cfg.disturbance.kind = DisturbanceKind::constant;
        cfg.disturbance.magnitude = 0.1;
        cfg.bounds = {BoundKind::bound1, BoundKind::bound1_tight, BoundKind::bound2,
                      BoundKind::theorem2};
    } else if (name == "generator-sine-resonant") {
        cfg.disturbance.kind = DisturbanceKind::sine;
        cfg.disturbance.magnitude = 0.1;
        cfg.disturbance.resonant = true;
        cfg.bounds = {BoundKind::theorem2};
    } else if (name == "generator-governor") {
        cfg.model = ModelKind::generator_governor;
        cfg.disturbance.kind = DisturbanceKind::governor_mismatch;
        cfg.disturbance.magnitude = 0.0;
        cfg.bounds = {BoundKind::theorem2};
    } else {
        throw std::invalid_argument("builtin_scenario: unknown name '" + name + "'");
    }
    validate_scenario(cfg);
    return cfg;
}

namespace {

ParametricModel scenario_model(const GeneratorParams& base) {
    ParametricModel m;
    m.dimension = 2;
    m.param_count = 1;
    m.rhs = [base](double t, const Vector& x, const Vector& lambda) {
        GeneratorParams p = base;
        p.Pm = lambda[0];
        return generator_rhs(t, x, p);
    };
    m.jac_x = [base](double t, const Vector& x, const Vector& lambda) {
        GeneratorParams p = base;
        p.Pm = lambda[0];
        return generator_jacobians(t, x, p).A;
    };
    m.jac_lambda = [base](double t, const Vector& x, const Vector& lambda) {
        GeneratorParams p = base;
        p.Pm = lambda[0];
        Matrix b(2, 1);
        b.col(0) = generator_jacobians(t, x, p).B_Pm;
        return b;
    };
    return m;
}

Trajectory run_plain(const OdeSystem& sys, const Vector& x0, double horizon,
                     const IntegratorChoice& ic) {
    if (ic.mode == IntegratorMode::fixed) {
        return integrate_fixed(sys, x0, 0.0, horizon, Vector(), ic.fixed_step);
    }
    return integrate(sys, x0, 0.0, horizon, Vector(), ic.opts);
}

Trajectory run_comparison(const LTVSystem& sys, const IntegratorChoice& ic) {
    if (ic.mode == IntegratorMode::fixed) {
        const Matrix a = sys.A_inf;
        auto u = sys.u_of_t;
        OdeSystem frozen{sys.dimension, [a, u](double t, const Vector& x, const Vector&) {
                             return Vector(a * x + u(t));
                         }};
        return integrate_fixed(frozen, Vector::Zero(sys.dimension), sys.t0, sys.t_end, Vector(),
                               ic.fixed_step);
    }
    return z_lti(sys, ic.opts);
}

Vector start_state() {
    Vector x0(2);
    x0 << -M_PI / 2.0 - 0.5, 0.95;
    return x0;
}

} // namespace

RunReport run_scenario(const Scenario& cfg) {
    validate_scenario(cfg);
    RunReport rep;
    rep.config = cfg;
    rep.provenance = std::string("gapbound ") + kToolVersion + "\n" + serialize_scenario(cfg);
    rep.grid = make_grid(0.0, cfg.horizon, cfg.grid_step);

    const ParametricModel model = scenario_model(cfg.params);
    Vector lambda(1);
    lambda << cfg.params.Pm;
    const GeneratorParams nominal_params = cfg.params;
    OdeSystem nominal_sys{2, [nominal_params](double t, const Vector& x, const Vector&) {
                              return generator_rhs(t, x, nominal_params);
                          }};
    rep.nominal = run_plain(nominal_sys, start_state(), cfg.horizon, cfg.integrator);

    LTVSystem sys = build_param_sensitivity(model, rep.nominal, lambda);

    // Decay envelopes for the limit dynamics and the matrix drift.
    EnvelopeSpec env_exp;
    EnvelopeSpec env_dA;
    if (cfg.envelope.mode == EnvelopeMode::explicit_pair) {
        env_exp = cfg.envelope.exp_spec;
        env_dA = cfg.envelope.dA_spec;
    } else {
        const Grid fit = make_grid(0.0, cfg.horizon, cfg.envelope.fit_step);
        std::vector<double> drift(fit.size());
        for (std::size_t i = 0; i < fit.size(); ++i) {
            drift[i] = spectral_norm(Matrix(sys.A_of_t(fit[i]) - sys.A_inf));
        }
        env_dA = fit_envelope(drift, fit, cfg.envelope.inflation);
        if (cfg.envelope.mode == EnvelopeMode::lemma3) {
            env_exp = lemma3_envelope(sys.A_inf).spec;
        } else {
            env_exp = fit_envelope(sample_expm_norm(sys.A_inf, fit), fit, cfg.envelope.inflation);
        }
    }

    // Forcing magnitude per unit of disturbance, uniform over the run.
    const double M_u = build_bounded_disturbance_sensitivity(model, rep.nominal, lambda).M_u;

    // Resolve the sine frequency before any trajectory-based work.
    double sine_w = cfg.disturbance.frequency;
    if (cfg.disturbance.kind == DisturbanceKind::sine && cfg.disturbance.resonant) {
        sine_w = resonant_frequency(sys.A_inf, sys.u_of_t(sys.t_end));
    }

    // The trajectory-based bounds need the sensitivity forcing explicitly.
    const bool wants_trajectory_bounds =
        std::any_of(cfg.bounds.begin(), cfg.bounds.end(),
                    [](BoundKind k) { return k != BoundKind::theorem2; });
    LTVSystem traj_sys = sys;
    if (cfg.disturbance.kind == DisturbanceKind::sine) {
        auto base = sys.u_of_t;
        const double w = sine_w;
        traj_sys.u_of_t = [base, w](double t) { return Vector(base(t) * std::sin(w * t)); };
    }
    Trajectory zlti;
    std::vector<double> g;
    if (wants_trajectory_bounds) {
        zlti = run_comparison(traj_sys, cfg.integrator);
        g = g_of_t(traj_sys, zlti, env_exp, env_dA, rep.grid);
    }

    // Perturbed plant.
    try {
        switch (cfg.disturbance.kind) {
        case DisturbanceKind::constant: {
            GeneratorParams p = cfg.params;
            p.Pm += cfg.disturbance.magnitude;
            OdeSystem bumped{2, [p](double t, const Vector& x, const Vector&) {
                                 return generator_rhs(t, x, p);
                             }};
            rep.perturbed = run_plain(bumped, start_state(), cfg.horizon, cfg.integrator);
            break;
        }
        case DisturbanceKind::sine: {
            const GeneratorParams p = cfg.params;
            const double m = cfg.disturbance.magnitude;
            const double w = sine_w;
            OdeSystem wobbled{2, [p, m, w](double t, const Vector& x, const Vector&) {
                                  GeneratorParams q = p;
                                  q.Pm += m * std::sin(w * t);
                                  return generator_rhs(t, x, q);
                              }};
            rep.perturbed = run_plain(wobbled, start_state(), cfg.horizon, cfg.integrator);
            break;
        }
        case DisturbanceKind::governor_mismatch: {
            const GeneratorParams p = cfg.params;
            const GovernorParams gp = cfg.governor;
            OdeSystem governed{5, [p, gp](double t, const Vector& x, const Vector&) {
                                   return governor_rhs(t, x, gp, p);
                               }};
            Vector x0(5);
            x0 << start_state(), 1.0, 1.0, 1.0 - gp.T4 / gp.T5;
            rep.perturbed = run_plain(governed, x0, cfg.horizon, cfg.integrator);
            break;
        }
        }
    } catch (const std::exception& e) {
        rep.failed = true;
        rep.failure = e.what();
    }

    // Disturbance scale: configured magnitude, or the measured mechanical
    // power mismatch for the governed plant.
    double eps = cfg.disturbance.magnitude;
    if (cfg.disturbance.kind == DisturbanceKind::governor_mismatch) {
        eps = 0.0;
        if (!rep.failed) {
            for (double t : rep.grid) {
                const double pm = governor_mechanical_power(rep.perturbed.sample(t), cfg.governor);
                eps = std::max(eps, std::abs(pm - cfg.params.Pm));
            }
        }
    }
    rep.disturbance_scale = eps;

    if (!rep.failed) {
        rep.gap.resize(rep.grid.size());
        for (std::size_t i = 0; i < rep.grid.size(); ++i) {
            rep.gap[i] = rep.perturbed.sample(rep.grid[i]).head(2) - rep.nominal.sample(rep.grid[i]);
        }
    }

    double max_gap = 0.0;
    for (const Vector& v : rep.gap) {
        max_gap = std::max(max_gap, v.cwiseAbs().maxCoeff());
    }

    for (BoundKind k : cfg.bounds) {
        BoundResult raw;
        switch (k) {
        case BoundKind::bound1:
            raw = bound1(traj_sys, zlti, g, env_exp, env_dA, rep.grid);
            break;
        case BoundKind::bound1_tight:
            raw = bound1_tight(traj_sys, zlti, g, env_exp, env_dA, rep.grid,
                               make_grid(0.0, cfg.horizon, cfg.horizon / cfg.partition_pieces));
            break;
        case BoundKind::bound2:
            raw = bound2(traj_sys, zlti, env_exp, env_dA, rep.grid);
            break;
        case BoundKind::theorem2:
            raw = theorem2_bound(sys, M_u, cfg.K2inf, env_exp, env_dA, rep.grid);
            break;
        }
        BoundReport br;
        br.result = scale_to_gap(raw, eps);
        if (!rep.failed) {
            // Banded containment: the first-order prediction carries an
            // allowance of two percent of the steady-state band edge (the
            // second-order remainder the sensitivity cannot represent), plus
            // an integration noise floor. The edge, not the center, so the
            // symmetric kinds get the same allowance as the centered ones.
            br.containment.assign(2, true);
            for (int entry = 0; entry < 2; ++entry) {
                double slack = 1e-9 + 0.02 * std::max(std::abs(br.result.lower.back()[entry]),
                                                      std::abs(br.result.upper.back()[entry]));
                for (std::size_t i = 0; i < rep.grid.size(); ++i) {
                    const double v = rep.gap[i][entry];
                    if (v < br.result.lower[i][entry] - slack ||
                        v > br.result.upper[i][entry] + slack) {
                        br.containment[entry] = false;
                        break;
                    }
                }
            }
            double max_r = 0.0;
            for (double r : br.result.radius) {
                max_r = std::max(max_r, r);
            }
            br.looseness = max_gap > 0.0 ? max_r / max_gap : 0.0;
        }
        rep.bounds.push_back(std::move(br));
    }
    return rep;
}

} // namespace gapbound
