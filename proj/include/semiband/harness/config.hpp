#pragma once

// Experiment configuration: a single JSON document. d, m and T are required;
// every other field has a default. Validation errors name the offending key
// and the line it appears on.
//
//   {
//     "d": 8, "m": 2, "T": 1000,
//     "perturbation": {"family": "frechet", "alpha": 2},
//     "estimator": "cgr",                  // or "gr"
//     "eta": "theoretical",                // or a positive number
//     "environment": {"kind": "bernoulli", "gap": 0.2},
//     "replications": 10, "base_seed": 0, "output": "results",
//     "resample_cap": 10000000, "regret_reference": "realized",
//     "checkpoints": 100, "timing": false
//   }
//
// Environment kinds: bernoulli (mu, or gap/base), constant_gap, switching
// (gap, base), sinusoidal (period, amplitude), schedule (path), reactive
// (gap, base; penalizes the arms played in the previous round).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "semiband/environment.hpp"
#include "semiband/perturbation.hpp"
#include "semiband/resampling.hpp"

namespace semiband {

/// A configuration problem, located in the source text.
class ConfigError : public std::invalid_argument {
public:
    ConfigError(const std::string& source, std::size_t line, const std::string& msg)
        : std::invalid_argument(source + ":" + std::to_string(line) + ": " + msg), line_(line)
    {
    }
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

struct EnvironmentConfig {
    std::string kind = "bernoulli";
    std::vector<double> mu; ///< bernoulli: explicit means (overrides gap/base)
    double gap = 0.2;
    double base = 0.5;
    double period = 0.0; ///< sinusoidal: 0 means T/4
    double amplitude = 0.4;
    std::string path; ///< schedule CSV
};

enum class RegretReference {
    Realized, ///< the loss vectors actually drawn
    Expected  ///< mean losses where the environment has them (stochastic, schedules)
};

struct ExperimentConfig {
    std::size_t d = 0;
    std::size_t m = 0;
    std::size_t T = 0;
    PerturbationSpec spec = PerturbationSpec::frechet(2.0);
    EstimatorKind estimator = EstimatorKind::CGR;
    std::optional<double> eta; ///< empty: the tuned rate for (spec, m, d, T)
    EnvironmentConfig environment;
    std::size_t replications = 1;
    std::uint64_t base_seed = 0;
    std::string output_path = "results";
    std::uint64_t resample_cap = ResamplingBudget{}.cap;
    RegretReference regret_reference = RegretReference::Realized;
    std::size_t checkpoints = 100;
    bool timing = false;

    void validate() const
    {
        if (m < 1 || m > d)
            throw std::invalid_argument("config: need 1 <= m <= d");
        if (T < 1)
            throw std::invalid_argument("config: T must be >= 1");
        if (replications < 1)
            throw std::invalid_argument("config: replications must be >= 1");
        if (eta && !(*eta > 0.0 && std::isfinite(*eta)))
            throw std::invalid_argument("config: eta must be finite and > 0");
        if (resample_cap < 1)
            throw std::invalid_argument("config: resample_cap must be >= 1");
    }
};

namespace detail {

/// Line of the first `"key"` at or after `from`, plus the offset found.
inline std::pair<std::size_t, std::size_t> locate_key(const std::string& text, const std::string& key,
                                                      std::size_t from = 0)
{
    const std::size_t pos = text.find('"' + key + '"', from);
    const std::size_t at = pos == std::string::npos ? from : pos;
    const auto line = static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(
                                                                                    std::min(at, text.size())),
                                                          '\n')) +
                      1;
    return {line, at};
}

class ConfigReader {
public:
    ConfigReader(const std::string& text, std::string source) : text_(text), source_(std::move(source)) {}

    [[noreturn]] void fail(const std::string& path, const std::string& msg) const
    {
        // path is "a" or "a.b"; find the parent first so nested keys resolve.
        std::size_t from = 0;
        std::size_t line = 1;
        std::size_t start = 0;
        while (start <= path.size()) {
            const std::size_t dot = path.find('.', start);
            const std::string part = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
            auto [l, at] = locate_key(text_, part, from);
            line = l;
            from = at;
            if (dot == std::string::npos)
                break;
            start = dot + 1;
        }
        throw ConfigError(source_, line, "'" + path + "': " + msg);
    }

    std::size_t count(const nlohmann::json& j, const std::string& path, std::size_t min_value) const
    {
        // The parser stores every non-negative integer literal as unsigned.
        if (!j.is_number_unsigned())
            fail(path, "expected a non-negative integer");
        const auto v = j.get<std::uint64_t>();
        if (v < min_value)
            fail(path, "must be >= " + std::to_string(min_value));
        return static_cast<std::size_t>(v);
    }

    double number(const nlohmann::json& j, const std::string& path) const
    {
        if (!j.is_number())
            fail(path, "expected a number");
        const double v = j.get<double>();
        if (!std::isfinite(v))
            fail(path, "must be finite");
        return v;
    }

    std::string string(const nlohmann::json& j, const std::string& path) const
    {
        if (!j.is_string())
            fail(path, "expected a string");
        return j.get<std::string>();
    }

    void only_keys(const nlohmann::json& obj, const std::string& prefix,
                   std::initializer_list<const char*> allowed) const
    {
        for (const auto& [k, v] : obj.items()) {
            bool ok = false;
            for (const char* a : allowed)
                ok = ok || k == a;
            if (!ok)
                fail(prefix.empty() ? k : prefix + "." + k, "unknown key");
        }
    }

private:
    const std::string& text_;
    std::string source_;
};

} // namespace detail

inline ExperimentConfig parse_config(const std::string& text, const std::string& source = "<config>")
{
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        const auto line = static_cast<std::size_t>(
            std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(std::min(e.byte, text.size())), '\n')) +
                          1;
        throw ConfigError(source, line, std::string("malformed JSON: ") + e.what());
    }
    const detail::ConfigReader rd(text, source);
    if (!doc.is_object())
        throw ConfigError(source, 1, "top level must be a JSON object");
    rd.only_keys(doc, "",
                 {"d", "m", "T", "perturbation", "estimator", "eta", "environment", "replications", "base_seed",
                  "output", "resample_cap", "regret_reference", "checkpoints", "timing"});

    ExperimentConfig c;
    for (const char* key : {"d", "m", "T"})
        if (!doc.contains(key))
            throw ConfigError(source, 1, std::string("missing required key '") + key + "'");
    c.d = rd.count(doc["d"], "d", 1);
    c.m = rd.count(doc["m"], "m", 1);
    c.T = rd.count(doc["T"], "T", 1);
    if (c.m > c.d)
        rd.fail("m", "must not exceed d = " + std::to_string(c.d));

    if (doc.contains("perturbation")) {
        const auto& p = doc["perturbation"];
        if (!p.is_object())
            rd.fail("perturbation", "expected an object");
        rd.only_keys(p, "perturbation", {"family", "alpha"});
        Family fam = Family::Frechet;
        double alpha = 2.0;
        if (p.contains("family")) {
            try {
                fam = family_from_string(rd.string(p["family"], "perturbation.family"));
            } catch (const ConfigError&) {
                throw;
            } catch (const std::invalid_argument& e) {
                rd.fail("perturbation.family", e.what());
            }
        }
        if (p.contains("alpha")) {
            alpha = rd.number(p["alpha"], "perturbation.alpha");
            if (!(alpha > 1.0))
                rd.fail("perturbation.alpha", "must be > 1");
        }
        c.spec = PerturbationSpec(fam, alpha);
    }

    if (doc.contains("estimator")) {
        try {
            c.estimator = estimator_from_string(rd.string(doc["estimator"], "estimator"));
        } catch (const ConfigError&) {
            throw;
        } catch (const std::invalid_argument& e) {
            rd.fail("estimator", e.what());
        }
    }

    if (doc.contains("eta")) {
        const auto& e = doc["eta"];
        if (e.is_string()) {
            if (e.get<std::string>() != "theoretical")
                rd.fail("eta", "expected \"theoretical\" or a positive number");
        } else {
            const double v = rd.number(e, "eta");
            if (!(v > 0.0))
                rd.fail("eta", "must be > 0");
            c.eta = v;
        }
    }

    if (doc.contains("environment")) {
        const auto& e = doc["environment"];
        if (!e.is_object())
            rd.fail("environment", "expected an object");
        rd.only_keys(e, "environment", {"kind", "mu", "gap", "base", "period", "amplitude", "path"});
        auto& env = c.environment;
        if (e.contains("kind"))
            env.kind = rd.string(e["kind"], "environment.kind");
        if (env.kind != "bernoulli" && env.kind != "constant_gap" && env.kind != "switching" &&
            env.kind != "sinusoidal" && env.kind != "schedule" && env.kind != "reactive")
            rd.fail("environment.kind", "unknown kind '" + env.kind +
                                            "' (bernoulli, constant_gap, switching, sinusoidal, schedule, reactive)");
        if (e.contains("mu")) {
            if (!e["mu"].is_array())
                rd.fail("environment.mu", "expected an array");
            for (const auto& v : e["mu"]) {
                const double x = rd.number(v, "environment.mu");
                if (!(x >= 0.0 && x <= 1.0))
                    rd.fail("environment.mu", "entries must lie in [0,1]");
                env.mu.push_back(x);
            }
            if (env.mu.size() != c.d)
                rd.fail("environment.mu", "has " + std::to_string(env.mu.size()) + " entries, expected d = " +
                                              std::to_string(c.d));
        }
        if (e.contains("gap"))
            env.gap = rd.number(e["gap"], "environment.gap");
        if (e.contains("base"))
            env.base = rd.number(e["base"], "environment.base");
        if (env.base - env.gap / 2 < 0.0 || env.base + env.gap / 2 > 1.0 || env.gap < 0.0)
            rd.fail(e.contains("gap") ? "environment.gap" : "environment.base",
                    "base -/+ gap/2 must stay inside [0,1] with gap >= 0");
        if (e.contains("period")) {
            env.period = rd.number(e["period"], "environment.period");
            if (!(env.period > 0.0))
                rd.fail("environment.period", "must be > 0");
        }
        if (e.contains("amplitude")) {
            env.amplitude = rd.number(e["amplitude"], "environment.amplitude");
            if (!(env.amplitude >= 0.0 && env.amplitude <= 0.5))
                rd.fail("environment.amplitude", "must lie in [0, 0.5]");
        }
        if (e.contains("path"))
            env.path = rd.string(e["path"], "environment.path");
        if (env.kind == "schedule" && env.path.empty())
            rd.fail("environment.kind", "schedule environments need 'path'");
    }

    if (doc.contains("replications"))
        c.replications = rd.count(doc["replications"], "replications", 1);
    if (doc.contains("base_seed"))
        c.base_seed = rd.count(doc["base_seed"], "base_seed", 0);
    if (doc.contains("output"))
        c.output_path = rd.string(doc["output"], "output");
    if (doc.contains("resample_cap"))
        c.resample_cap = rd.count(doc["resample_cap"], "resample_cap", 1);
    if (doc.contains("regret_reference")) {
        const std::string r = rd.string(doc["regret_reference"], "regret_reference");
        if (r == "realized")
            c.regret_reference = RegretReference::Realized;
        else if (r == "expected")
            c.regret_reference = RegretReference::Expected;
        else
            rd.fail("regret_reference", "expected \"realized\" or \"expected\"");
    }
    if (doc.contains("checkpoints"))
        c.checkpoints = rd.count(doc["checkpoints"], "checkpoints", 1);
    if (doc.contains("timing")) {
        if (!doc["timing"].is_boolean())
            rd.fail("timing", "expected true or false");
        c.timing = doc["timing"].get<bool>();
    }
    c.validate();
    return c;
}

inline ExperimentConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

/// Builds the environment described by `c`.
inline EnvironmentSpec make_environment(const ExperimentConfig& c)
{
    const auto& e = c.environment;
    if (e.kind == "bernoulli")
        return EnvironmentSpec(StochasticBernoulli{e.mu.empty() ? bernoulli_gap_means(c.d, c.m, e.gap, e.base) : e.mu},
                               c.d, c.T);
    if (e.kind == "constant_gap")
        return EnvironmentSpec(FixedSchedule{constant_gap_schedule(c.d, c.m, c.T, e.gap, e.base)}, c.d, c.T);
    if (e.kind == "switching")
        return EnvironmentSpec(FixedSchedule{switching_schedule(c.d, c.m, c.T, e.gap, e.base)}, c.d, c.T);
    if (e.kind == "sinusoidal")
        return EnvironmentSpec(
            FixedSchedule{sinusoidal_schedule(c.d, c.T, e.period > 0.0 ? e.period : static_cast<double>(c.T) / 4.0,
                                              e.amplitude)},
            c.d, c.T);
    if (e.kind == "schedule") {
        LossTable table = load_schedule_csv(e.path);
        if (!table.empty() && table.front().size() != c.d)
            throw std::invalid_argument("schedule '" + e.path + "' has " + std::to_string(table.front().size()) +
                                        " arms, config says d = " + std::to_string(c.d));
        return EnvironmentSpec(FixedSchedule{std::move(table)}, c.d, c.T);
    }
    if (e.kind == "reactive") {
        const double hi = e.base + e.gap / 2;
        const double lo = e.base - e.gap / 2;
        const std::size_t d = c.d;
        return EnvironmentSpec(AdaptiveHook{[d, hi, lo](std::size_t, const History& h) {
                                   std::vector<double> out(d, lo);
                                   if (!h.empty())
                                       for (auto i : h.back().action.indices())
                                           out[i] = hi;
                                   return out;
                               }},
                               c.d, c.T);
    }
    throw std::invalid_argument("unknown environment kind '" + e.kind + "'");
}

} // namespace semiband
