// Regenerates fixtures/returns.json, runs.json and exclude.json.
// Deterministic for a fixed seed; the shipped files were written with the defaults.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include <CLI11.hpp>

#include "quadlab/audit.hpp"
#include "quadlab/config.hpp"
#include "quadlab/distortion.hpp"
#include "quadlab/dynamics.hpp"
#include "quadlab/errors.hpp"

using namespace quadlab;

namespace {

// |xi_nu| >= 1 / (3 nu) up to maxNu, and a positive exponent over 60 steps
bool screened(double a, int maxNu) {
    const auto xi = critical_orbit(Parameter(a), maxNu);
    for (int nu = 1; nu <= maxNu; ++nu) {
        if (std::abs(xi[nu]) < 1.0 / (3.0 * nu)) {
            return false;
        }
    }
    return ce_estimate(Parameter(a), 60).gammaHat > 0.05;
}

Experiment base_experiment(double a0) {
    Experiment e;
    e.a0 = a0;
    e.run.cfg = PartitionConfig(3.0, 0.2);
    e.run.m0 = 6;
    e.run.epsilon = 0.01;
    e.run.maxGenerations = 10;
    return e;
}

void write(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p);
    out << text;
    if (!out) {
        throw IoError("cannot write " + p.string());
    }
    std::printf("wrote %s\n", p.string().c_str());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"quadlab fixture generator"};
    std::string dir = "fixtures";
    unsigned long seed = 20240917;
    int count = 32;
    app.add_option("--out", dir, "fixture directory");
    app.add_option("--seed", seed, "mt19937_64 seed");
    app.add_option("--count", count, "number of fixture returns");
    CLI11_PARSE(app, argc, argv);

    try {
        std::filesystem::create_directories(dir);
        std::mt19937_64 rng(seed);

        ReturnFixtures rf;
        const PartitionConfig cfg = rf.partition();
        std::uniform_real_distribution<double> pickA(1.75, 2.0);
        std::uniform_int_distribution<int> pickR(10, 25);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        while (static_cast<int>(rf.returns.size()) < count) {
            const double a = pickA(rng);
            const int depth = pickR(rng);
            const int r = unit(rng) < 0.5 ? depth : -depth;
            const double u = unit(rng);
            if (!screened(a, rf.maxNu)) {
                continue;
            }
            const Interval I = interval_of(r, cfg);
            FixtureReturn fr;
            fr.a = a;
            fr.r = r;
            fr.eta = I.lo + u * (I.hi - I.lo);
            fr.p = bounded_period({a}, 0, r, cfg, rf.maxNu, rf.eta).p;
            fr.checksum = critical_orbit(Parameter(a), kChecksumSteps).back();
            rf.returns.push_back(fr);
        }
        write(std::filesystem::path(dir) / "returns.json", return_fixtures_to_json(rf));

        // Runs alternate between calibration and held-out; a0 candidates that
        // fail startup are skipped.
        const double candidates[] = {1.55, 1.6, 1.8, 1.62, 1.57, 1.78, 1.66, 1.74, 1.52, 1.83};
        RunFixtures runs;
        std::vector<RunResult> calibration;
        for (double a0 : candidates) {
            if (runs.calibration.size() >= 3 && runs.heldOut.size() >= 3) {
                break;
            }
            const Experiment e = base_experiment(a0);
            RunResult res;
            try {
                res = run(e.run, Parameter(a0));
            } catch (const Error& err) {
                std::printf("skip a0=%g: %s\n", a0, err.what());
                continue;
            }
            if (static_cast<int>(res.generations.size()) - 1 < e.run.maxGenerations ||
                res.generations.back().intervals.empty()) {
                std::printf("skip a0=%g: no survivors after %zu generations\n", a0, res.generations.size() - 1);
                continue;
            }
            if (runs.calibration.size() <= runs.heldOut.size()) {
                runs.calibration.push_back(e);
                calibration.push_back(std::move(res));
            } else {
                runs.heldOut.push_back(e);
            }
        }
        write(std::filesystem::path(dir) / "runs.json", run_fixtures_to_json(runs));

        Experiment ex = runs.heldOut.empty() ? base_experiment(1.6) : runs.heldOut.front();
        ex.run.tau = fit_tau(calibration, AuditOptions{}.headroom);
        ex.outputDir = "out";
        std::printf("calibrated tau %.17g\n", ex.run.tau);
        write(std::filesystem::path(dir) / "exclude.json", experiment_to_json(ex) + "\n");
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
