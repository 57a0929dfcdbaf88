// quadlab command-line front end.
// Exit codes: 0 ok, 1 audit failure, 2 usage/config, 3 domain, 4 IO.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "quadlab/audit.hpp"
#include "quadlab/config.hpp"
#include "quadlab/dynamics.hpp"
#include "quadlab/errors.hpp"
#include "quadlab/exclusion.hpp"
#include "quadlab/numeric.hpp"
#include "quadlab/partition.hpp"
#include "quadlab/rates.hpp"

#ifndef QUADLAB_DEFAULT_FIXTURES
#define QUADLAB_DEFAULT_FIXTURES "fixtures"
#endif

using namespace quadlab;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kAuditFailed = 1, kUsage = 2, kDomain = 3, kIo = 4 };

std::string location_name(double x, const PartitionConfig& cfg) {
    const Location loc = locate(x, cfg);
    if (const auto* idx = std::get_if<PartitionIndex>(&loc)) {
        return "I(" + std::to_string(idx->r) + "," + std::to_string(idx->l) + ")";
    }
    return std::holds_alternative<Outside>(loc) ? "outside" : "critical";
}

json number(double v) { return json::parse(format_double(v)); }

std::string iso_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

void write_file(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) {
        throw IoError("cannot write " + p.string());
    }
    out << text;
    if (!out) {
        throw IoError("cannot write " + p.string());
    }
}

// ---- orbit -----------------------------------------------------------------

struct OrbitArgs {
    double a = 2.0;
    int n = 20;
    std::string emit = "csv";
    double Delta = 3.0;
    double epsilon1 = 0.2;
};

int cmd_orbit(const OrbitArgs& args) {
    const Parameter a(args.a);
    detail::check<DomainError>(args.n >= 0, "--n must be >= 0");
    const PartitionConfig cfg(args.Delta, args.epsilon1);
    const auto states = orbit_states(a, args.n);
    if (args.emit == "json") {
        json rows = json::array();
        for (const OrbitState& s : states) {
            rows.push_back({{"n", s.n},
                            {"x", number(s.x)},
                            {"log_deriv", number(s.logDerivMag)},
                            {"deriv_sign", s.derivSign},
                            {"location", location_name(s.x, cfg)}});
        }
        std::cout << rows.dump(2) << '\n';
        return kOk;
    }
    std::cout << "n,x,log_deriv,deriv_sign,location\n";
    for (const OrbitState& s : states) {
        std::cout << s.n << ',' << format_double(s.x) << ',' << format_double(s.logDerivMag) << ','
                  << s.derivSign << ',' << location_name(s.x, cfg) << '\n';
    }
    return kOk;
}

// ---- exclude ---------------------------------------------------------------

struct ExcludeArgs {
    std::string config;
    std::string out;
};

int cmd_exclude(const ExcludeArgs& args) {
    Experiment e = load_experiment(args.config);
    if (!args.out.empty()) {
        e.outputDir = args.out;
    }
    if (const char* env = std::getenv("QUADLAB_THREADS")) {
        char* end = nullptr;
        const long cap = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || cap < 1) {
            throw ConfigError("QUADLAB_THREADS", "expected a positive integer");
        }
        e.run.sampling.threads = std::min<int>(e.run.sampling.threads, static_cast<int>(cap));
    }
    const std::filesystem::path dir(e.outputDir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir)) {
        throw IoError("cannot create output directory " + dir.string());
    }
    const std::string started = iso_now();
    const RunResult res = run(e.run, Parameter(e.a0));
    write_file(dir / "generations.csv", generations_csv(res));
    write_file(dir / "summary.json", summary_json(res));
    const json manifest = {{"configPath", args.config},
                           {"outputDir", e.outputDir},
                           {"seed", e.run.seed},
                           {"toolVersion", QUADLAB_VERSION},
                           {"started", started},
                           {"finished", iso_now()}};
    write_file(dir / "manifest.json", manifest.dump(2) + "\n");
    std::printf("generations %zu, final measure %s, retired on budget %ld\n", res.generations.size() - 1,
                format_double(res.generations.back().measure).c_str(), res.budgetRetirements);
    return kOk;
}

// ---- rates -----------------------------------------------------------------

struct RatesArgs {
    double x = 0.0;
    std::string rate = "power:1";
    double tau = 0.5;
    long N = 100000;
    long horizon = 100000;
    bool profile = false;
    std::string aSpec = "inv_square";
    std::string qSpec = "pow2";
    int K = 20;
};

int cmd_logstar(const RatesArgs& args) {
    std::printf("%d\n", log_star(args.x));
    return kOk;
}

int cmd_admissible(const RatesArgs& args) {
    const RateSequence rate = parse_rate(args.rate);
    const Admissibility adm = is_admissible(rate, args.horizon);
    if (const auto* yes = std::get_if<AdmissibleYes>(&adm)) {
        std::printf("admissible  eBar=%s  N=%ld%s\n", format_double(yes->eBar).c_str(), yes->N,
                    yes->provisional ? "  (eBar fitted)" : "");
    } else {
        const auto& no = std::get<AdmissibleNo>(adm);
        std::printf("not admissible  witness=%ld  %s\n", no.witness, no.reason.c_str());
    }
    return kOk;
}

int cmd_partialsum(const RatesArgs& args) {
    const RateSequence rate = parse_rate(args.rate);
    detail::check<DomainError>(args.tau > 0.0 && args.tau < 1.0, "--tau must lie in (0, 1)");
    detail::check<DomainError>(args.N >= 2, "--N must be >= 2");
    std::printf("%-12s %s\n", "N", "partial_sum");
    std::printf("%-12ld %s\n", args.N, format_double(summability_partial(rate, args.tau, args.N)).c_str());
    if (args.profile) {
        std::printf("\n%-12s %-12s %s\n", "from", "to", "increment");
        long lo = 10;
        double last = -1.0;
        bool growing = true;
        while (lo * 10 <= args.N) {
            const double inc = summability_increment(rate, args.tau, lo, lo * 10);
            std::printf("%-12ld %-12ld %s\n", lo, lo * 10, format_double(inc).c_str());
            if (last >= 0.0 && inc < last) {
                growing = false;
            }
            last = inc;
            lo *= 10;
        }
        std::printf("%s\n", growing ? "increments non-decreasing: consistent with divergence"
                                    : "increments shrinking: consistent with convergence");
    }
    return kOk;
}

std::function<double(long)> sequence_named(const std::string& s) {
    if (s == "inv_square") {
        return [](long n) { return 1.0 / (static_cast<double>(n) * static_cast<double>(n)); };
    }
    if (s == "inv") {
        return [](long n) { return 1.0 / static_cast<double>(n); };
    }
    if (s == "one") {
        return [](long) { return 1.0; };
    }
    throw ConfigError("--a", "unknown sequence '" + s + "' (use inv_square, inv, one)");
}

std::vector<long> times_named(const std::string& s, int K) {
    std::vector<long> q;
    if (s == "pow2") {
        detail::check<DomainError>(K <= 61, "--K too large for pow2");
        for (int k = 0; k <= K; ++k) {
            q.push_back(1L << k);
        }
        return q;
    }
    if (s == "linear") {
        for (int k = 0; k <= K; ++k) {
            q.push_back(k + 1);
        }
        return q;
    }
    if (s.rfind("mseq:", 0) == 0) {
        long m0 = 0;
        double kappa = 0.0;
        char tail = 0;
        if (std::sscanf(s.c_str() + 5, "%ld:%lf%c", &m0, &kappa, &tail) != 2) {
            throw ConfigError("--q", "expected mseq:<m0>:<kappa>");
        }
        return m_sequence(m0, kappa, K).m;
    }
    throw ConfigError("--q", "unknown times '" + s + "' (use pow2, linear, mseq:<m0>:<kappa>)");
}

int cmd_condense(const RatesArgs& args) {
    detail::check<DomainError>(args.K >= 1, "--K must be >= 1");
    const auto a = sequence_named(args.aSpec);
    const auto q = times_named(args.qSpec, args.K);
    const CondensationResult c = condensation(a, q, args.K);
    std::printf("direct=%s\ncondensed=%s\nalpha=%s\nlower=%s\nsandwichHolds=%s\n", format_double(c.direct).c_str(),
                format_double(c.condensed).c_str(), format_double(c.alpha).c_str(), format_double(c.lower).c_str(),
                c.sandwichHolds ? "true" : "false");
    return kOk;
}

// ---- audit -----------------------------------------------------------------

struct AuditArgs {
    std::string fixtures = QUADLAB_DEFAULT_FIXTURES;
    std::vector<std::string> checks;
};

int cmd_audit(const AuditArgs& args) {
    const auto results = run_audit(args.fixtures, args.checks);
    std::cout << audit_table(results);
    for (const CheckResult& r : results) {
        if (!r.passed) {
            return kAuditFailed;
        }
    }
    return kOk;
}

template <typename F>
int guarded(F&& body) {
    try {
        return body();
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kUsage;
    } catch (const FixtureError& e) {
        std::fprintf(stderr, "fixture error: %s\n", e.what());
        return kUsage;
    } catch (const IoError& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return kIo;
    } catch (const Error& e) {
        std::fprintf(stderr, "domain error: %s\n", e.what());
        return kDomain;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"quadlab: critical-orbit recurrence laboratory for x -> 1 - a x^2"};
    app.require_subcommand(1);

    OrbitArgs orbit;
    auto* orbitCmd = app.add_subcommand("orbit", "print xi_0..xi_n with log-derivatives and locations");
    orbitCmd->add_option("--a", orbit.a, "parameter in [1, 2]")->required();
    orbitCmd->add_option("--n", orbit.n, "last step");
    orbitCmd->add_option("--emit", orbit.emit, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    orbitCmd->add_option("--Delta", orbit.Delta, "partition Delta");
    orbitCmd->add_option("--epsilon1", orbit.epsilon1, "partition epsilon1");

    ExcludeArgs exclude;
    auto* excludeCmd = app.add_subcommand("exclude", "run the exclusion simulator from a config file");
    excludeCmd->add_option("config", exclude.config, "experiment JSON")->required();
    excludeCmd->add_option("--out", exclude.out, "override outputDir");

    RatesArgs rates;
    auto* ratesCmd = app.add_subcommand("rates", "rate sequences, log*, summability, condensation");
    ratesCmd->require_subcommand(1);
    auto* logstarCmd = ratesCmd->add_subcommand("logstar", "iterated logarithm");
    logstarCmd->add_option("--x", rates.x, "argument")->required();
    auto* admCmd = ratesCmd->add_subcommand("admissible", "admissibility on [N, horizon]");
    admCmd->add_option("--rate", rates.rate, "power:<theta>, loglog or nlogn");
    admCmd->add_option("--horizon", rates.horizon, "last index checked");
    auto* psCmd = ratesCmd->add_subcommand("partialsum", "summability partial sum");
    psCmd->add_option("--rate", rates.rate, "power:<theta>, loglog or nlogn");
    psCmd->add_option("--tau", rates.tau, "tau in (0, 1)");
    psCmd->add_option("--N", rates.N, "last index");
    psCmd->add_flag("--profile", rates.profile, "decade increments");
    auto* condCmd = ratesCmd->add_subcommand("condense", "condensation sandwich");
    condCmd->add_option("--a", rates.aSpec, "inv_square, inv or one");
    condCmd->add_option("--q", rates.qSpec, "pow2, linear or mseq:<m0>:<kappa>");
    condCmd->add_option("--K", rates.K, "number of blocks");

    AuditArgs audit;
    auto* auditCmd = app.add_subcommand("audit", "fit constants on calibration fixtures, test held-out ones");
    auditCmd->add_option("--fixtures", audit.fixtures, "directory with returns.json and runs.json");
    auditCmd->add_option("--check", audit.checks, "run only these checks")
        ->check(CLI::IsMember(audit_checks()));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    if (orbitCmd->parsed()) {
        return guarded([&] { return cmd_orbit(orbit); });
    }
    if (excludeCmd->parsed()) {
        return guarded([&] { return cmd_exclude(exclude); });
    }
    if (logstarCmd->parsed()) {
        return guarded([&] { return cmd_logstar(rates); });
    }
    if (admCmd->parsed()) {
        return guarded([&] { return cmd_admissible(rates); });
    }
    if (psCmd->parsed()) {
        return guarded([&] { return cmd_partialsum(rates); });
    }
    if (condCmd->parsed()) {
        return guarded([&] { return cmd_condense(rates); });
    }
    if (auditCmd->parsed()) {
        return guarded([&] { return cmd_audit(audit); });
    }
    return kUsage;
}
