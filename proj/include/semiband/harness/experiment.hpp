#pragma once

// Seeded replications of the FTPL loop, CSV output and the run summary.
//
// Replication r draws its seed from splitmix64(base_seed + r); the
// environment uses stream 0 of that seed and the policy stream 1. Results
// therefore do not depend on how replications are spread over threads.
//
// Files written under the output directory:
//   trace_<r>.csv     t,action_indices,round_loss,resamples,capped
//   aggregate.csv     replication,pseudo_regret,mean_resamples,cap_events,seconds
//   regret_curve.csv  t,mean_regret,stddev_regret
//   summary.json
// `seconds` is left empty unless timing is enabled, so that repeated runs
// produce identical bytes.

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

#include "json.hpp"

#include "semiband/environment.hpp"
#include "semiband/harness/config.hpp"
#include "semiband/harness/parallel.hpp"
#include "semiband/policy.hpp"
#include "semiband/random.hpp"

namespace semiband {

/// Shortest decimal text that reads back to the same double.
inline std::string format_double(double x)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

struct ReplicationResult {
    std::size_t replication = 0;
    std::uint64_t seed = 0;
    double pseudo_regret = 0.0;
    double mean_resamples = 0.0; ///< average total_rounds per round
    std::uint64_t cap_events = 0;
    double seconds = 0.0;
    std::vector<double> curve; ///< regret at each checkpoint
};

struct RunSummary {
    double mean_regret = 0.0;
    double stddev_regret = 0.0;
    double mean_resamples = 0.0;
    std::uint64_t cap_events = 0;
    double wall_seconds = 0.0;
    double eta = 0.0;
    RegretBound bound;
    std::vector<std::size_t> checkpoints; ///< rounds at which the curve is sampled
    std::vector<ReplicationResult> replications;
};

inline std::uint64_t replication_seed(std::uint64_t base_seed, std::size_t r)
{
    return splitmix64(base_seed + static_cast<std::uint64_t>(r));
}

inline std::vector<std::size_t> checkpoint_rounds(std::size_t T, std::size_t count)
{
    count = std::max<std::size_t>(1, std::min(count, T));
    std::vector<std::size_t> out;
    for (std::size_t k = 1; k <= count; ++k)
        out.push_back((k * T + count - 1) / count);
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

inline double learning_rate(const ExperimentConfig& c)
{
    return c.eta ? *c.eta : theoretical_learning_rate(c.spec, c.m, c.d, c.T);
}

namespace detail {

inline void write_trace_row(std::ostream& out, const TraceRecord& rec)
{
    out << rec.t << ',';
    const auto& idx = rec.action.indices();
    for (std::size_t k = 0; k < idx.size(); ++k)
        out << (k ? ";" : "") << idx[k];
    out << ',' << format_double(rec.round_loss) << ',' << rec.resamples << ',' << (rec.capped ? 1 : 0) << '\n';
}

/// Sum of the m smallest entries.
inline double bottom_m_sum(std::vector<double> v, std::size_t m)
{
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(m - 1), v.end());
    return std::accumulate(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(m), 0.0);
}

} // namespace detail

/// Runs replication r of `c` against `env`. When `trace_path` is set the
/// per-round trace is written there.
inline ReplicationResult run_replication(const ExperimentConfig& c, const EnvironmentSpec& env, std::size_t r,
                                         const std::optional<std::filesystem::path>& trace_path = std::nullopt)
{
    const auto start = std::chrono::steady_clock::now();
    ReplicationResult res;
    res.replication = r;
    res.seed = replication_seed(c.base_seed, r);
    Rng env_rng = make_rng(res.seed, 0);
    Rng pol_rng = make_rng(res.seed, 1);

    PolicyState state(c.d, c.m, learning_rate(c), c.spec, c.estimator, ResamplingBudget(c.resample_cap));
    ResamplingWorkspace ws;
    const bool adaptive = std::holds_alternative<AdaptiveHook>(env.kind());
    History history;

    std::ofstream trace;
    if (trace_path) {
        trace.open(*trace_path, std::ios::binary);
        if (!trace)
            throw std::runtime_error("cannot write trace file '" + trace_path->string() + "'");
        trace << "t,action_indices,round_loss,resamples,capped\n";
    }

    const auto checkpoints = checkpoint_rounds(c.T, c.checkpoints);
    std::size_t next_cp = 0;
    std::vector<double> column_sum(c.d, 0.0);
    double played = 0.0;
    std::uint64_t resamples = 0;

    for (std::size_t t = 1; t <= c.T; ++t) {
        std::vector<double> loss = env.next_loss(t, history, env_rng);
        RoundOutcome out = state.play([&loss](std::size_t i) { return loss[i]; }, pol_rng, &ws);

        TraceRecord rec;
        rec.t = t;
        rec.action = out.action;
        for (double l : out.observed_losses)
            rec.round_loss += l;
        rec.resamples = out.estimate.total_rounds;
        rec.capped = out.estimate.capped;
        resamples += rec.resamples;
        res.cap_events += rec.capped ? 1 : 0;
        if (trace_path)
            detail::write_trace_row(trace, rec);

        std::vector<double> reference;
        if (c.regret_reference == RegretReference::Expected)
            reference = env.expected_loss(t).value_or(loss);
        const std::vector<double>& ref = c.regret_reference == RegretReference::Expected ? reference : loss;
        for (std::size_t i = 0; i < c.d; ++i)
            column_sum[i] += ref[i];
        for (auto i : out.action.indices())
            played += ref[i];
        if (next_cp < checkpoints.size() && checkpoints[next_cp] == t) {
            res.curve.push_back(played - detail::bottom_m_sum(column_sum, c.m));
            ++next_cp;
        }

        if (adaptive)
            history.push_back({std::move(loss), std::move(out.action)});
    }
    res.pseudo_regret = played - detail::bottom_m_sum(column_sum, c.m);
    res.mean_resamples = static_cast<double>(resamples) / static_cast<double>(c.T);
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (trace_path && !trace)
        throw std::runtime_error("error while writing '" + trace_path->string() + "'");
    return res;
}

inline std::string trace_file_name(std::size_t r)
{
    std::string s = std::to_string(r);
    return "trace_" + std::string(s.size() < 4 ? 4 - s.size() : 0, '0') + s + ".csv";
}

inline void write_aggregate_csv(std::ostream& out, const RunSummary& s, bool timing)
{
    out << "replication,pseudo_regret,mean_resamples,cap_events,seconds\n";
    for (const auto& r : s.replications)
        out << r.replication << ',' << format_double(r.pseudo_regret) << ',' << format_double(r.mean_resamples)
            << ',' << r.cap_events << ',' << (timing ? format_double(r.seconds) : std::string()) << '\n';
}

inline void write_curve_csv(std::ostream& out, const RunSummary& s)
{
    out << "t,mean_regret,stddev_regret\n";
    const std::size_t R = s.replications.size();
    for (std::size_t k = 0; k < s.checkpoints.size(); ++k) {
        double mean = 0.0;
        for (const auto& r : s.replications)
            mean += r.curve[k];
        mean /= static_cast<double>(R);
        double var = 0.0;
        for (const auto& r : s.replications)
            var += (r.curve[k] - mean) * (r.curve[k] - mean);
        const double sd = R > 1 ? std::sqrt(var / static_cast<double>(R - 1)) : 0.0;
        out << s.checkpoints[k] << ',' << format_double(mean) << ',' << format_double(sd) << '\n';
    }
}

inline nlohmann::json summary_json(const ExperimentConfig& c, const RunSummary& s)
{
    nlohmann::json j;
    j["d"] = c.d;
    j["m"] = c.m;
    j["T"] = c.T;
    j["family"] = std::string(to_string(c.spec.family()));
    j["alpha"] = c.spec.alpha();
    j["estimator"] = std::string(to_string(c.estimator));
    j["eta"] = s.eta;
    j["replications"] = s.replications.size();
    j["base_seed"] = c.base_seed;
    j["mean_regret"] = s.mean_regret;
    j["stddev_regret"] = s.stddev_regret;
    j["mean_resamples"] = s.mean_resamples;
    j["cap_events"] = s.cap_events;
    j["bound"] = {{"total", s.bound.total},
                  {"penalty_const", s.bound.penalty_const},
                  {"stability_const", s.bound.stability_const}};
    if (c.timing)
        j["wall_seconds"] = s.wall_seconds;
    return j;
}

/// Runs every replication of `c` on `jobs` threads. Output goes to
/// c.output_path unless it is empty.
inline RunSummary run_experiment(const ExperimentConfig& c, std::size_t jobs = 1)
{
    c.validate();
    const auto start = std::chrono::steady_clock::now();
    const EnvironmentSpec env = make_environment(c);

    std::optional<std::filesystem::path> dir;
    if (!c.output_path.empty()) {
        dir = std::filesystem::path(c.output_path);
        std::error_code ec;
        std::filesystem::create_directories(*dir, ec);
        if (ec)
            throw std::runtime_error("cannot create output directory '" + dir->string() + "': " + ec.message());
    }

    RunSummary s;
    s.eta = learning_rate(c);
    s.bound = theoretical_regret_bound(c.spec, c.m, c.d, c.T);
    s.checkpoints = checkpoint_rounds(c.T, c.checkpoints);
    s.replications.resize(c.replications);
    parallel_for(c.replications, jobs, [&](std::size_t r) {
        std::optional<std::filesystem::path> trace;
        if (dir)
            trace = *dir / trace_file_name(r);
        s.replications[r] = run_replication(c, env, r, trace);
    });

    const auto R = static_cast<double>(c.replications);
    for (const auto& r : s.replications) {
        s.mean_regret += r.pseudo_regret / R;
        s.mean_resamples += r.mean_resamples / R;
        s.cap_events += r.cap_events;
    }
    double var = 0.0;
    for (const auto& r : s.replications)
        var += (r.pseudo_regret - s.mean_regret) * (r.pseudo_regret - s.mean_regret);
    s.stddev_regret = c.replications > 1 ? std::sqrt(var / (R - 1.0)) : 0.0;
    s.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    if (dir) {
        auto open = [&](const char* name) {
            std::ofstream f(*dir / name, std::ios::binary);
            if (!f)
                throw std::runtime_error("cannot write '" + (*dir / name).string() + "'");
            return f;
        };
        {
            auto f = open("aggregate.csv");
            write_aggregate_csv(f, s, c.timing);
        }
        {
            auto f = open("regret_curve.csv");
            write_curve_csv(f, s);
        }
        {
            auto f = open("summary.json");
            f << summary_json(c, s).dump(2) << '\n';
        }
    }
    return s;
}

} // namespace semiband
