// Command-line front end. Exit status: 0 when every verification check
// passes, 1 when a check fails, 2 on invalid input or a numerical error.

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"

#include "relmaup/pipeline.hpp"

using namespace relmaup;

namespace {

struct Common {
    std::string job;
    std::string out = "out";
    std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
    std::string profile = "default";
};

void add_common(CLI::App* app, Common& c, bool job_required) {
    auto* opt = app->add_option("--job", c.job, "job file (JSON)");
    if (job_required) opt->required()->check(CLI::ExistingFile);
    else opt->check(CLI::ExistingFile);
    app->add_option("--out", c.out, "output directory")->capture_default_str();
    app->add_option("--workers", c.workers, "worker threads for sweeps")->capture_default_str()->check(CLI::PositiveNumber);
    app->add_option("--tolerance-profile", c.profile, "default, strict or fast")
        ->capture_default_str()
        ->check(CLI::IsMember({"default", "strict", "fast"}));
}

int report(const RunOutcome& out, const std::string& dir) {
    write_artifacts(out, dir);
    for (const auto& c : out.report["checks"]) {
        std::printf("%-4s %-36s %-.6g %s %-.6g\n", c["pass"].get<bool>() ? "ok" : "FAIL",
                    c["name"].get<std::string>().c_str(), c["value"].get<double>(),
                    c["relation"].get<std::string>().c_str(), c["threshold"].get<double>());
    }
    if (out.report.contains("error")) std::printf("error: %s\n", out.report["error"].get<std::string>().c_str());
    std::printf("%s: %s (artifacts in %s)\n", out.report["command"].get<std::string>().c_str(),
                out.passed ? "passed" : "FAILED", dir.c_str());
    return out.passed ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Periodic orbits of relativistic charged particles in singular potentials"};
    app.require_subcommand(1);

    Common solve_opts, integ_opts, circ_opts, limit_opts, classify_opts, sweep_opts;
    auto* solve = app.add_subcommand("solve", "minimize in a homotopy class and verify the orbit");
    add_common(solve, solve_opts, true);

    auto* integ = app.add_subcommand("integrate", "integrate Hamilton's equations from an initial state");
    add_common(integ, integ_opts, false);
    double kappa = 1.0, alpha = 2.0, mass = 1.0, light = 1.0, t_end = 0.0;
    std::vector<double> x0, p0;
    integ->add_option("--kappa", kappa, "single-center strength (without --job)")->capture_default_str();
    integ->add_option("--alpha", alpha, "exponent (without --job)")->capture_default_str();
    integ->add_option("--m", mass, "rest mass (without --job)")->capture_default_str();
    integ->add_option("--c", light, "speed of light (without --job)")->capture_default_str();
    integ->add_option("--x", x0, "initial position x y")->expected(2);
    integ->add_option("--p", p0, "initial momentum px py")->expected(2);
    integ->add_option("--t-end", t_end, "final time");

    auto* circ = app.add_subcommand("circular", "closed-form circular orbits");
    circ->require_subcommand(1);
    std::string circ_mode;
    for (const char* mode : {"profile", "radius", "classify"}) {
        auto* sub = circ->add_subcommand(mode, std::string("circular ") + mode);
        add_common(sub, circ_opts, true);
        sub->callback([&circ_mode, mode] { circ_mode = mode; });
    }

    auto* limit = app.add_subcommand("limit", "r_h(c) table towards the classical limit");
    add_common(limit, limit_opts, true);
    auto* classify = app.add_subcommand("classify", "effective-potential verdicts on an (E, L) grid");
    add_common(classify, classify_opts, true);
    auto* sweep = app.add_subcommand("sweep", "run a job over a parameter grid");
    add_common(sweep, sweep_opts, true);

    CLI11_PARSE(app, argc, argv);

    try {
        const Common* opts = nullptr;
        std::string command;
        if (*solve) opts = &solve_opts, command = "solve";
        else if (*integ) opts = &integ_opts, command = "integrate";
        else if (*circ) opts = &circ_opts, command = "circular";
        else if (*limit) opts = &limit_opts, command = "limit";
        else if (*classify) opts = &classify_opts, command = "classify";
        else opts = &sweep_opts, command = "sweep";

        JobSpec spec;
        if (!opts->job.empty()) {
            spec = parse_job(io::read_file(opts->job), opts->job, command);
        } else {
            // integrate without a job file: single center at the origin
            if (x0.size() != 2 || p0.size() != 2 || !(t_end > 0.0))
                throw InvalidConfig("integrate needs --job, or --x, --p and --t-end");
            json body = {{"command", "integrate"},
                         {"model", {{"kappa", kappa}, {"alpha", alpha}, {"m", mass}, {"c", light}}},
                         {"initial", {{"x", x0}, {"p", p0}}},
                         {"t_end", t_end}};
            spec = JobSpec{"integrate", body, "<flags>"};
        }
        if (command == "circular") {
            if (spec.body.contains("mode") && spec.body["mode"] != circ_mode)
                throw InvalidConfig(opts->job + ": field /mode: job is '" + spec.body["mode"].get<std::string>() +
                                    "' but the subcommand is '" + circ_mode + "'");
            spec.body["mode"] = circ_mode;
        }
        const auto out = run_job(spec, tolerance_profile(opts->profile), opts->workers);
        return report(out, opts->out);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
