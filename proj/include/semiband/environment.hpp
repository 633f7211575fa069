#pragma once

// Loss generators and pseudo-regret accounting.
//
// Rounds are numbered from 1. Every produced loss vector lies in [0,1]^d.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <functional>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "semiband/random.hpp"
#include "semiband/selection.hpp"

namespace semiband {

using LossTable = std::vector<std::vector<double>>; ///< T rows of d losses

struct HistoryEntry {
    std::vector<double> losses; ///< full loss vector of that round
    Action action;              ///< what the learner played
};
using History = std::vector<HistoryEntry>;

struct StochasticBernoulli {
    std::vector<double> mu;
};

struct FixedSchedule {
    LossTable table;
};

struct AdaptiveHook {
    /// Called with the round number and the history of earlier rounds.
    std::function<std::vector<double>(std::size_t t, const History& history)> hook;
};

class EnvironmentSpec {
public:
    using Kind = std::variant<StochasticBernoulli, FixedSchedule, AdaptiveHook>;

    EnvironmentSpec(Kind kind, std::size_t d, std::size_t T) : kind_(std::move(kind)), d_(d), T_(T)
    {
        if (d_ < 1 || T_ < 1)
            throw std::invalid_argument("EnvironmentSpec: d and T must be >= 1");
        if (const auto* b = std::get_if<StochasticBernoulli>(&kind_)) {
            if (b->mu.size() != d_)
                throw std::invalid_argument("EnvironmentSpec: mu has " + std::to_string(b->mu.size()) +
                                            " entries, expected d = " + std::to_string(d_));
            for (double p : b->mu)
                if (!(p >= 0.0 && p <= 1.0))
                    throw std::invalid_argument("EnvironmentSpec: Bernoulli mean outside [0,1]");
        } else if (const auto* s = std::get_if<FixedSchedule>(&kind_)) {
            if (s->table.size() < T_)
                throw std::invalid_argument("EnvironmentSpec: schedule has " + std::to_string(s->table.size()) +
                                            " rows, horizon is " + std::to_string(T_));
            for (std::size_t t = 0; t < s->table.size(); ++t)
                check_row(s->table[t], t + 1);
        } else if (!std::get<AdaptiveHook>(kind_).hook) {
            throw std::invalid_argument("EnvironmentSpec: adaptive hook is empty");
        }
    }

    std::size_t dimension() const noexcept { return d_; }
    std::size_t horizon() const noexcept { return T_; }
    const Kind& kind() const noexcept { return kind_; }

    /// Loss vector of round t (1-based).
    template <class Engine>
    std::vector<double> next_loss(std::size_t t, const History& history, Engine& rng) const
    {
        if (t < 1 || t > T_)
            throw std::invalid_argument("next_loss: round " + std::to_string(t) + " outside [1, " +
                                    std::to_string(T_) + "]");
        if (const auto* b = std::get_if<StochasticBernoulli>(&kind_)) {
            std::vector<double> out(d_);
            for (std::size_t i = 0; i < d_; ++i)
                out[i] = uniform_open01(rng) < b->mu[i] ? 1.0 : 0.0;
            return out;
        }
        if (const auto* s = std::get_if<FixedSchedule>(&kind_))
            return s->table[t - 1];
        std::vector<double> out = std::get<AdaptiveHook>(kind_).hook(t, history);
        check_row(out, t);
        return out;
    }

    /// E[l_t] when it does not depend on the learner (stochastic or fixed).
    std::optional<std::vector<double>> expected_loss(std::size_t t) const
    {
        if (const auto* b = std::get_if<StochasticBernoulli>(&kind_))
            return b->mu;
        if (const auto* s = std::get_if<FixedSchedule>(&kind_))
            return s->table.at(t - 1);
        return std::nullopt;
    }

private:
    void check_row(const std::vector<double>& row, std::size_t t) const
    {
        if (row.size() != d_)
            throw std::invalid_argument("loss vector of round " + std::to_string(t) + " has " +
                                        std::to_string(row.size()) + " entries, expected " + std::to_string(d_));
        for (std::size_t i = 0; i < d_; ++i)
            if (!(row[i] >= 0.0 && row[i] <= 1.0))
                throw std::invalid_argument("loss of arm " + std::to_string(i) + " in round " + std::to_string(t) +
                                            " outside [0,1]");
    }

    Kind kind_;
    std::size_t d_;
    std::size_t T_;
};

// ---------------------------------------------------------------------------
// Built-in schedules

/// Arms 0..m-1 cost `base - gap/2`, the rest `base + gap/2`, every round.
inline LossTable constant_gap_schedule(std::size_t d, std::size_t m, std::size_t T, double gap, double base = 0.5)
{
    if (m < 1 || m > d)
        throw std::invalid_argument("constant_gap_schedule: need 1 <= m <= d");
    LossTable out(T, std::vector<double>(d, base + gap / 2));
    for (auto& row : out)
        std::fill_n(row.begin(), m, base - gap / 2);
    return out;
}

/// l_{t,i} = 0.5 + amplitude * sin(2 pi t / period + 2 pi i / d).
inline LossTable sinusoidal_schedule(std::size_t d, std::size_t T, double period, double amplitude = 0.4)
{
    if (!(amplitude >= 0.0 && amplitude <= 0.5) || !(period > 0.0))
        throw std::invalid_argument("sinusoidal_schedule: need period > 0 and amplitude in [0, 0.5]");
    LossTable out(T, std::vector<double>(d));
    for (std::size_t t = 0; t < T; ++t)
        for (std::size_t i = 0; i < d; ++i)
            out[t][i] = 0.5 + amplitude * std::sin(2 * std::numbers::pi * static_cast<double>(t + 1) / period +
                                                   2 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(d));
    return out;
}

/// The cheap set alternates between the first m and the last m arms every
/// max(1, T/10) rounds.
inline LossTable switching_schedule(std::size_t d, std::size_t m, std::size_t T, double gap, double base = 0.5)
{
    if (m < 1 || m > d)
        throw std::invalid_argument("switching_schedule: need 1 <= m <= d");
    const std::size_t epoch = std::max<std::size_t>(1, T / 10);
    LossTable out(T, std::vector<double>(d, base + gap / 2));
    for (std::size_t t = 0; t < T; ++t) {
        const bool flipped = (t / epoch) % 2 == 1;
        for (std::size_t k = 0; k < m; ++k)
            out[t][flipped ? d - 1 - k : k] = base - gap / 2;
    }
    return out;
}

/// Means with the first m arms `gap` cheaper than the rest, centred on `base`.
inline std::vector<double> bernoulli_gap_means(std::size_t d, std::size_t m, double gap, double base = 0.5)
{
    std::vector<double> mu(d, base + gap / 2);
    std::fill_n(mu.begin(), std::min(m, d), base - gap / 2);
    return mu;
}

// ---------------------------------------------------------------------------
// Schedule CSV: header `t,loss_0,...,loss_{d-1}`, one row per round.

inline LossTable read_schedule_csv(std::istream& in, const std::string& source = "<schedule>")
{
    auto fail = [&](std::size_t line, const std::string& msg) {
        throw std::invalid_argument(source + ":" + std::to_string(line) + ": " + msg);
    };
    std::string line;
    if (!std::getline(in, line))
        fail(1, "empty file");
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ','))
            header.push_back(cell);
    }
    if (header.size() < 2 || header[0] != "t")
        fail(1, "header must be t,loss_0,...,loss_{d-1}");
    const std::size_t d = header.size() - 1;
    for (std::size_t i = 0; i < d; ++i)
        if (header[i + 1] != "loss_" + std::to_string(i))
            fail(1, "expected column 'loss_" + std::to_string(i) + "', found '" + header[i + 1] + "'");

    LossTable table;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ss, cell, ','))
            cells.push_back(cell);
        if (cells.size() != d + 1)
            fail(lineno, "expected " + std::to_string(d + 1) + " fields, found " + std::to_string(cells.size()));
        std::size_t t = 0;
        try {
            t = std::stoul(cells[0]);
        } catch (const std::exception&) {
            fail(lineno, "bad round number '" + cells[0] + "'");
        }
        if (t != table.size() + 1)
            fail(lineno, "rounds must be numbered consecutively from 1 (found " + cells[0] + ")");
        std::vector<double> row(d);
        for (std::size_t i = 0; i < d; ++i) {
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(cells[i + 1], &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != cells[i + 1].size() || !(v >= 0.0 && v <= 1.0))
                fail(lineno, "loss_" + std::to_string(i) + " = '" + cells[i + 1] + "' is not a number in [0,1]");
            row[i] = v;
        }
        table.push_back(std::move(row));
    }
    if (table.empty())
        fail(lineno, "no rounds");
    return table;
}

inline LossTable load_schedule_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open schedule file '" + path + "'");
    return read_schedule_csv(in, path);
}

inline void write_schedule_csv(std::ostream& out, const LossTable& table)
{
    if (table.empty())
        return;
    out << "t";
    for (std::size_t i = 0; i < table.front().size(); ++i)
        out << ",loss_" << i;
    out << '\n';
    out.precision(17);
    for (std::size_t t = 0; t < table.size(); ++t) {
        out << t + 1;
        for (double v : table[t])
            out << ',' << v;
        out << '\n';
    }
}

// ---------------------------------------------------------------------------
// Trace and pseudo-regret

struct TraceRecord {
    std::size_t t = 0;
    Action action;
    double round_loss = 0.0; ///< a_t^T l_t
    std::uint64_t resamples = 0;
    bool capped = false;
};

struct RegretTrace {
    std::vector<TraceRecord> records;

    std::size_t size() const noexcept { return records.size(); }

    std::vector<double> cumulative_loss() const
    {
        std::vector<double> out(records.size());
        double acc = 0.0;
        for (std::size_t k = 0; k < records.size(); ++k)
            out[k] = acc += records[k].round_loss;
        return out;
    }
};

/// The m arms with the smallest column sums (ties to the lowest index); this
/// is the hindsight-optimal fixed action because the objective is separable.
inline Action best_fixed_action(const LossTable& table, std::size_t m)
{
    if (table.empty())
        throw std::invalid_argument("best_fixed_action: empty loss table");
    const std::size_t d = table.front().size();
    std::vector<double> neg_sum(d, 0.0);
    for (const auto& row : table) {
        if (row.size() != d)
            throw std::invalid_argument("best_fixed_action: ragged loss table");
        for (std::size_t i = 0; i < d; ++i)
            neg_sum[i] -= row[i];
    }
    return select_top_m(neg_sum, m);
}

/// sum_t a_t^T l_t - min_a sum_t a^T l_t over the recorded rounds.
inline double pseudo_regret(const RegretTrace& trace, const LossTable& table)
{
    if (trace.records.empty())
        throw std::invalid_argument("pseudo_regret: empty trace");
    if (table.size() != trace.records.size())
        throw std::invalid_argument("pseudo_regret: trace has " + std::to_string(trace.records.size()) +
                                    " rounds but loss table has " + std::to_string(table.size()));
    const std::size_t d = table.front().size();
    const std::size_t m = trace.records.front().action.size();
    double played = 0.0;
    for (std::size_t t = 0; t < table.size(); ++t) {
        const auto& a = trace.records[t].action;
        if (a.dimension() != d || table[t].size() != d)
            throw std::invalid_argument("pseudo_regret: dimension mismatch in round " + std::to_string(t + 1));
        for (auto i : a.indices())
            played += table[t][i];
    }
    const Action best = best_fixed_action(table, m);
    double hindsight = 0.0;
    for (const auto& row : table)
        for (auto i : best.indices())
            hindsight += row[i];
    return played - hindsight;
}

} // namespace semiband
