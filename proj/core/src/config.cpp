#include "quadlab/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "internal/json_io.hpp"

namespace quadlab {

using internal::get_integer;
using internal::get_number;
using internal::get_string;
using internal::join_path;
using internal::json;

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& known, const std::string& path) {
    if (!obj.is_object()) {
        throw ConfigError(path, "expected an object");
    }
    for (const auto& [key, value] : obj.items()) {
        if (known.count(key) == 0) {
            throw ConfigError(join_path(path, key), "unknown field");
        }
    }
}

template <typename T>
void read_int(const json& obj, const char* key, const std::string& path, T& out) {
    if (obj.contains(key)) {
        out = static_cast<T>(get_integer(obj[key], join_path(path, key)));
    }
}

void read_double(const json& obj, const char* key, const std::string& path, double& out) {
    if (obj.contains(key)) {
        out = get_number(obj[key], join_path(path, key));
    }
}

json sampling_to_json(const SamplingSpec& s) {
    return json{{"initialSamples", s.initialSamples}, {"maxSamples", s.maxSamples},
                {"paramSamples", s.paramSamples},     {"etaSamples", s.eta.samples},
                {"etaPerOctave", s.eta.perOctave},    {"maxNu", s.maxNu},
                {"bisectIterations", s.bisectIterations}, {"maxIntervals", s.maxIntervals},
                {"maxPieces", s.maxPieces},           {"threads", s.threads}};
}

json run_to_json(const RunConfig& c) {
    return json{{"partition", {{"Delta", c.cfg.Delta()}, {"epsilon1", c.cfg.epsilon1()}, {"rMax", c.cfg.rMax()}}},
                {"rate", internal::rate_to_json_value(c.rate)},
                {"tau", c.tau},
                {"gammaB", c.gammaB},
                {"CB", c.CB},
                {"gamma", c.gamma},
                {"C", c.C},
                {"m0", c.m0},
                {"kappa", c.kappa},
                {"sampling", sampling_to_json(c.sampling)},
                {"maxGenerations", c.maxGenerations},
                {"maxSteps", c.maxSteps},
                {"epsilon", c.epsilon},
                {"D1", c.D1},
                {"seed", c.seed}};
}

}  // namespace

Experiment experiment_from_json(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("", std::string("malformed JSON: ") + e.what());
    }
    reject_unknown(root,
                   {"a0", "outputDir", "partition", "rate", "tau", "gammaB", "CB", "gamma", "C", "m0", "kappa",
                    "sampling", "maxGenerations", "maxSteps", "epsilon", "D1", "seed"},
                   "");
    Experiment e;
    RunConfig& c = e.run;
    e.a0 = get_number(internal::require(root, "a0", ""), "a0");
    if (root.contains("outputDir")) {
        e.outputDir = get_string(root["outputDir"], "outputDir");
    }
    if (root.contains("partition")) {
        const json& p = root["partition"];
        reject_unknown(p, {"Delta", "epsilon1", "rMax"}, "partition");
        double Delta = c.cfg.Delta();
        double eps1 = c.cfg.epsilon1();
        int rMax = c.cfg.rMax();
        read_double(p, "Delta", "partition", Delta);
        read_double(p, "epsilon1", "partition", eps1);
        read_int(p, "rMax", "partition", rMax);
        try {
            c.cfg = PartitionConfig(Delta, eps1, rMax);
        } catch (const ConfigError& err) {
            throw ConfigError(join_path("partition", err.field()), err.what());
        }
    }
    if (root.contains("rate")) {
        c.rate = internal::rate_from_json_value(root["rate"], "rate");
    }
    read_double(root, "tau", "", c.tau);
    read_double(root, "gammaB", "", c.gammaB);
    read_double(root, "CB", "", c.CB);
    read_double(root, "gamma", "", c.gamma);
    read_double(root, "C", "", c.C);
    read_int(root, "m0", "", c.m0);
    read_double(root, "kappa", "", c.kappa);
    read_int(root, "maxGenerations", "", c.maxGenerations);
    read_int(root, "maxSteps", "", c.maxSteps);
    read_double(root, "epsilon", "", c.epsilon);
    read_double(root, "D1", "", c.D1);
    if (root.contains("seed")) {
        const long s = get_integer(root["seed"], "seed");
        if (s < 0) {
            throw ConfigError("seed", "must be >= 0");
        }
        c.seed = static_cast<unsigned long>(s);
    }
    if (root.contains("sampling")) {
        const json& s = root["sampling"];
        const std::string path = "sampling";
        reject_unknown(s,
                       {"initialSamples", "maxSamples", "paramSamples", "etaSamples", "etaPerOctave", "maxNu",
                        "bisectIterations", "maxIntervals", "maxPieces", "threads"},
                       path);
        SamplingSpec& sp = c.sampling;
        read_int(s, "initialSamples", path, sp.initialSamples);
        read_int(s, "maxSamples", path, sp.maxSamples);
        read_int(s, "paramSamples", path, sp.paramSamples);
        read_int(s, "etaSamples", path, sp.eta.samples);
        read_int(s, "etaPerOctave", path, sp.eta.perOctave);
        read_int(s, "maxNu", path, sp.maxNu);
        read_int(s, "bisectIterations", path, sp.bisectIterations);
        read_int(s, "maxIntervals", path, sp.maxIntervals);
        read_int(s, "maxPieces", path, sp.maxPieces);
        read_int(s, "threads", path, sp.threads);
    }
    if (!(e.a0 >= kParamMin && e.a0 <= kParamMax)) {
        throw ConfigError("a0", "must lie in [1, 2]");
    }
    validate(c);
    return e;
}

Experiment load_experiment(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot read " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return experiment_from_json(buf.str());
}

std::string run_config_to_json(const RunConfig& conf, int indent) { return run_to_json(conf).dump(indent); }

std::string experiment_to_json(const Experiment& e, int indent) {
    json j = run_to_json(e.run);
    j["a0"] = e.a0;
    j["outputDir"] = e.outputDir;
    return j.dump(indent);
}

}  // namespace quadlab
