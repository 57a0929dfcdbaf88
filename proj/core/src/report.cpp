#include <sstream>

#include "internal/json_io.hpp"
#include "quadlab/config.hpp"
#include "quadlab/exclusion.hpp"
#include "quadlab/numeric.hpp"

namespace quadlab {

std::string generations_csv(const RunResult& res) {
    std::ostringstream out;
    out << "# schema: quadlab.generations/1\n";
    out << "k,measure,excluded_len,retired_len,n_intervals,max_m,n_inessential,n_essential,n_escape,"
           "n_complete,n_bound,decay_bound\n";
    for (std::size_t i = 0; i < res.generations.size(); ++i) {
        const GenerationState& g = res.generations[i];
        const double bound = i < res.decay.size() ? res.decay[i].bound : 1.0;
        out << g.k << ',' << format_double(g.measure) << ',' << format_double(g.excluded) << ','
            << format_double(g.retired) << ',' << g.intervals.size() << ',' << g.maxM << ','
            << g.counts.inessential << ',' << g.counts.essential << ',' << g.counts.escape << ','
            << g.counts.complete << ',' << g.counts.bound << ',' << format_double(bound) << '\n';
    }
    return out.str();
}

std::string summary_json(const RunResult& res) {
    using internal::json;
    const auto num = [](double v) { return json::parse(format_double(v), nullptr, false); };
    json j;
    j["schema"] = "quadlab.summary/1";
    j["config"] = json::parse(run_config_to_json(res.config));
    const StartupResult& s = res.start;
    j["startup"] = {{"m0", s.m0},
                    {"epsilon", num(s.epsilon)},
                    {"lo", num(s.omega0.lo)},
                    {"hi", num(s.omega0.hi)},
                    {"degenerate", s.degenerate},
                    {"monotone", s.monotone}};
    json decay = json::array();
    for (const DecayRow& r : res.decay) {
        decay.push_back({{"k", r.k},
                         {"maxM", r.maxM},
                         {"measured", num(r.measuredRatio)},
                         {"corrected", num(r.correctedRatio)},
                         {"bound", num(r.bound)}});
    }
    j["decay"] = decay;
    j["generations"] = static_cast<long>(res.generations.size()) - 1;
    j["completions"] = res.completions.size();
    j["budgetRetirements"] = res.budgetRetirements;
    j["capRetirements"] = res.capRetirements;
    j["resolutionRetirements"] = res.resolutionRetirements;
    j["restoreRemovals"] = res.restoreRemovals;
    j["restoreViolations"] = res.restoreViolations;
    j["budgetWarnings"] = res.budgetWarnings;
    j["maxSplitError"] = num(res.maxSplitError);
    return j.dump(2) + "\n";
}

}  // namespace quadlab
