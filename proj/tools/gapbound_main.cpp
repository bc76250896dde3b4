#include "gapbound/report_io.hpp"
#include "gapbound/scenario.hpp"
#include "gapbound/types.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

namespace fs = std::filesystem;

std::string default_out_dir() {
    const char* env = std::getenv("GAPBOUND_OUT_DIR");
    return env != nullptr && env[0] != '\0' ? std::string(env) : std::string("out");
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::invalid_argument("cannot read config file '" + path + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// 0 on success, 1 when the perturbed run failed, 4 when containment is
// demanded but violated.
int finalize_one(const gapbound::RunReport& report, const std::string& out_dir, bool svg,
                 bool assert_containment) {
    const gapbound::Scenario& cfg = report.config;
    if (report.failed) {
        std::cerr << cfg.name << ": perturbed run failed: " << report.failure << "\n";
        return 1;
    }

    fs::create_directories(out_dir);
    const std::string csv_path = (fs::path(out_dir) / (cfg.name + ".csv")).string();
    gapbound::emit_csv(report, csv_path);
    std::cout << cfg.name << ": wrote " << csv_path << "\n";
    if (svg) {
        const std::string svg_path = (fs::path(out_dir) / (cfg.name + ".svg")).string();
        gapbound::emit_svg(report, svg_path);
        std::cout << cfg.name << ": wrote " << svg_path << "\n";
    }

    std::cout << cfg.name << ": disturbance scale " << report.disturbance_scale << "\n";
    bool all_contained = true;
    for (const gapbound::BoundReport& b : report.bounds) {
        bool contained = true;
        for (bool c : b.containment) {
            contained = contained && c;
        }
        all_contained = all_contained && contained;
        std::cout << cfg.name << ": " << gapbound::bound_kind_name(b.result.kind)
                  << " containment " << (contained ? "yes" : "NO") << ", looseness "
                  << b.looseness << "\n";
    }
    if (assert_containment && !all_contained) {
        std::cerr << cfg.name << ": containment assertion failed\n";
        return 4;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Model-gap bound evaluation for the generator case studies"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = default_out_dir();
    bool svg = false;
    long long seed = 0;
    bool assert_containment = false;

    CLI::App* run = app.add_subcommand("run", "Evaluate one scenario config");
    run->add_option("--config", config_path, "Scenario JSON file")->required();
    run->add_option("--out", out_dir, "Output directory");
    run->add_flag("--svg", svg, "Also render the SVG plot");
    run->add_option("--seed", seed, "Recorded for provenance; the pipeline is deterministic");
    run->add_flag("--assert-containment", assert_containment,
                  "Exit 4 when the measured gap escapes any requested band");

    std::string figs_out = default_out_dir();
    CLI::App* figs = app.add_subcommand("paper-figs", "Run the three built-in case studies");
    figs->add_option("--out", figs_out, "Output directory");

    std::string validate_path;
    CLI::App* validate = app.add_subcommand("validate", "Parse and check a scenario config");
    validate->add_option("--config", validate_path, "Scenario JSON file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (validate->parsed()) {
            const gapbound::Scenario cfg = gapbound::parse_scenario(read_text_file(validate_path));
            std::cout << "ok: " << cfg.name << "\n";
            return 0;
        }
        if (run->parsed()) {
            const gapbound::Scenario cfg = gapbound::parse_scenario(read_text_file(config_path));
            if (seed != 0) {
                std::cout << cfg.name << ": seed " << seed << " (informational)\n";
            }
            return finalize_one(gapbound::run_scenario(cfg), out_dir, svg, assert_containment);
        }
        // paper-figs: the three built-ins evaluated concurrently (immutable
        // configs, independent outputs), then written and summarized in order.
        std::vector<std::future<gapbound::RunReport>> jobs;
        for (const std::string& name : gapbound::builtin_scenario_names()) {
            jobs.push_back(std::async(std::launch::async, [cfg = gapbound::builtin_scenario(
                                                               name)] {
                return gapbound::run_scenario(cfg);
            }));
        }
        int worst = 0;
        for (auto& job : jobs) {
            worst = std::max(worst, finalize_one(job.get(), figs_out, true, false));
        }
        return worst;
    } catch (const gapbound::assumption_error& e) {
        std::cerr << "assumption violated: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
