#pragma once

#include "gapbound/bounds.hpp"
#include "gapbound/envelopes.hpp"
#include "gapbound/ode.hpp"
#include "gapbound/powermodels.hpp"

#include <string>
#include <vector>

namespace gapbound {

enum class ModelKind { generator2, generator_governor };
enum class DisturbanceKind { constant, sine, governor_mismatch };
enum class EnvelopeMode { fit, lemma3, explicit_pair };
enum class IntegratorMode { adaptive, fixed };

/// How the mechanical power input deviates from the modeled constant.
/// frequency <= 0 with resonant=true means "place the sine at the gain peak
/// of the limit dynamics". known_input marks a sine whose exact waveform may
/// feed the trajectory-based bounds; otherwise only its magnitude is used.
struct DisturbanceSpec {
    DisturbanceKind kind = DisturbanceKind::constant;
    double magnitude = 0.1;
    double frequency = 0.0; // rad/s, sine only
    bool resonant = true;   // sine only: pick the resonant frequency
    bool known_input = false;
};

struct EnvelopeChoice {
    EnvelopeMode mode = EnvelopeMode::fit;
    double inflation = 0.05;
    double fit_step = 0.01; // sampling step for the fit grid, seconds
    EnvelopeSpec exp_spec;  // explicit_pair only
    EnvelopeSpec dA_spec;   // explicit_pair only
};

struct IntegratorChoice {
    IntegratorMode mode = IntegratorMode::adaptive;
    double fixed_step = 0.001; // fixed mode only
    IntegratorOptions opts;
};

/// One end-to-end case study: which plant, how it is disturbed, which
/// bounds to evaluate and how the decay envelopes are obtained.
struct Scenario {
    std::string name;
    ModelKind model = ModelKind::generator2;
    GeneratorParams params;
    GovernorParams governor;
    DisturbanceSpec disturbance;
    double horizon = 20.0;
    double grid_step = 0.005;
    std::vector<BoundKind> bounds;
    EnvelopeChoice envelope;
    IntegratorChoice integrator;
    int partition_pieces = 10; // uniform pieces for the partitioned bound
    double K2inf = 0.0;        // 0 selects the sqrt(dimension) default
};

/// Parse a JSON scenario document. Unknown keys, wrong types and violated
/// invariants raise std::invalid_argument naming the offending field.
Scenario parse_scenario(const std::string& text);

/// Canonical JSON echo of a scenario; parse_scenario round-trips it.
std::string serialize_scenario(const Scenario& cfg);

/// Structural checks shared by parse_scenario and run_scenario.
void validate_scenario(const Scenario& cfg);

/// The three built-in case studies: "generator-constant",
/// "generator-sine-resonant", "generator-governor".
std::vector<std::string> builtin_scenario_names();
Scenario builtin_scenario(const std::string& name);

/// One evaluated bound, already scaled from sensitivity space into gap
/// space: per-entry containment of the measured gap (within the steady-band
/// allowance) and the bound-to-gap looseness ratio.
struct BoundReport {
    BoundResult result;
    std::vector<bool> containment;
    double looseness = 0.0;
};

struct RunReport {
    Scenario config;
    Trajectory nominal;
    Trajectory perturbed;
    Grid grid;
    std::vector<Vector> gap; // perturbed minus nominal on the shared states
    std::vector<BoundReport> bounds;
    double disturbance_scale = 0.0; // epsilon folded into the bound bands
    bool failed = false;            // perturbed integration failed
    std::string failure;
    std::string provenance; // config echo plus tool version
};

/// Full pipeline: nominal run, sensitivity system, envelopes, requested
/// bounds, perturbed run, gap, containment and looseness. Structural
/// violations (non-settling or non-Hurwitz dynamics) propagate as
/// assumption_error; a perturbed-run integration failure yields a partial
/// report with the failed flag set instead of throwing.
RunReport run_scenario(const Scenario& cfg);

} // namespace gapbound
