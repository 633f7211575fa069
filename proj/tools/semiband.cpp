// semiband: FTPL semi-bandit experiments from the command line.
//
//   semiband simulate --config run.json [--seed N] [--out DIR] [--jobs N] [--timing]
//   semiband benchmark [--d 64,256] [--m 1,8] [--rounds N] [--seed N] [--out DIR] [--cap N]
//   semiband verify lemmas|estimators|counterexample|penalty [--seed N] [--out DIR] [--cap N] [--jobs N]
//   semiband counterexample [--lo X] [--hi X] [--step X] [--out DIR]
//   semiband render FILE.csv --x COL --y COL[,COL...] [--out FILE.svg] [--title TEXT]
//
// SEMIBAND_LOG sets the log level (trace, debug, info, warn, error, off).

#include <cstdint>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <spdlog/spdlog.h>

#include "CLI11.hpp"

#include "semiband/semiband.hpp"

namespace fs = std::filesystem;
using namespace semiband;

namespace {

std::ofstream open_output(const fs::path& path)
{
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
        if (ec)
            throw std::runtime_error("cannot create '" + path.parent_path().string() + "': " + ec.message());
    }
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw std::runtime_error("cannot write '" + path.string() + "'");
    return f;
}

std::size_t default_jobs()
{
    return std::max(1u, std::thread::hardware_concurrency());
}

void configure_logging()
{
    spdlog::set_pattern("[%l] %v");
    spdlog::set_level(spdlog::level::info);
    if (const char* lvl = std::getenv("SEMIBAND_LOG")) {
        const auto parsed = spdlog::level::from_str(lvl);
        if (parsed == spdlog::level::off && std::string(lvl) != "off")
            spdlog::warn("SEMIBAND_LOG='{}' not recognized, using info", lvl);
        else
            spdlog::set_level(parsed);
    }
}

int run_simulate(const std::string& config_path, std::optional<std::uint64_t> seed, std::optional<std::string> out,
                 std::size_t jobs, bool timing)
{
    ExperimentConfig c = load_config(config_path);
    if (seed)
        c.base_seed = *seed;
    if (out)
        c.output_path = *out;
    c.timing = c.timing || timing;
    spdlog::info("simulate d={} m={} T={} {} alpha={} {} replications={} jobs={}", c.d, c.m, c.T,
                 to_string(c.spec.family()), c.spec.alpha(), to_string(c.estimator), c.replications, jobs);
    const RunSummary s = run_experiment(c, jobs);
    spdlog::info("mean regret {:.4f} (sd {:.4f}), bound {:.4f}, mean resamples {:.3f}, cap events {}",
                 s.mean_regret, s.stddev_regret, s.bound.total, s.mean_resamples, s.cap_events);
    if (s.cap_events > 0)
        spdlog::warn("{} rounds hit the resampling cap", s.cap_events);
    if (!c.output_path.empty())
        spdlog::info("wrote {}", c.output_path);
    return 0;
}

int run_benchmark(const BenchmarkSettings& s, const fs::path& out)
{
    const auto rows = benchmark_resampling(s, [](const BenchmarkRow& r) {
        spdlog::info("d={:5} m={:3} {:3} mean M_t {:10.3f} (se {:.3f}) bound {:10.3f} {:.2f} us/round", r.d, r.m,
                     to_string(r.estimator), r.mean_resamples, r.stderr_resamples, r.bound, r.micros_per_round);
    });
    auto f = open_output(out / "benchmark.csv");
    write_benchmark_csv(f, rows);
    spdlog::info("wrote {}", (out / "benchmark.csv").string());
    return 0;
}

int run_verify(const std::string& suite, const VerifySettings& s, const fs::path& out)
{
    const VerifyReport rep = run_verify_suite(suite, s);
    const fs::path path = out / ("verify_" + suite + ".csv");
    auto f = open_output(path);
    write_check_csv(f, rep.rows);
    for (const auto& r : rep.rows)
        if (!r.ok)
            spdlog::error("{} #{} i={}: lhs {} rhs {}", r.check, r.instance_id, r.i, r.lhs, r.rhs);
    spdlog::info("{}: {} checks, {} failed; wrote {}", suite, rep.rows.size(), rep.failures(), path.string());
    return rep.passed() ? 0 : 1;
}

int run_counterexample(double lo, double hi, double step, const fs::path& out)
{
    const auto scan = counterexample_scan(lo, hi, step);
    const fs::path path = out / "counterexample.csv";
    auto f = open_output(path);
    f << "lambda_q0,ratio,err_estimate\n";
    for (const auto& p : scan)
        f << format_double(p.lambda_q0) << ',' << format_double(p.ratio) << ',' << format_double(p.err_estimate)
          << '\n';
    const auto v = assess_scan(scan);
    spdlog::info("strict rise: {}, strict fall: {}, exceeds value at 0.5 ({:.6f}): {}", v.strict_rise,
                 v.strict_fall, v.baseline, v.exceeds_baseline);
    spdlog::info("wrote {}", path.string());
    return 0;
}

int run_render(const std::string& csv, const std::string& x, const std::vector<std::string>& ys,
               std::optional<std::string> out, const std::string& title)
{
    std::ifstream in(csv, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot read '" + csv + "'");
    const CsvColumns cols = read_numeric_csv(in);
    std::vector<ChartSeries> series;
    const auto& xs = cols.values[cols.index_of(x)];
    for (const auto& y : ys)
        series.push_back({y, xs, cols.values[cols.index_of(y)]});
    ChartOptions opt;
    opt.title = title;
    opt.x_label = x;
    opt.y_label = ys.size() == 1 ? ys.front() : std::string();
    const fs::path path = out ? fs::path(*out) : fs::path(csv).replace_extension(".svg");
    auto f = open_output(path);
    f << render_line_chart(series, opt);
    spdlog::info("wrote {}", path.string());
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    configure_logging();
    CLI::App app{"FTPL semi-bandit experiments"};
    app.require_subcommand(1);

    std::optional<std::uint64_t> seed;
    std::size_t jobs = default_jobs();

    auto* sim = app.add_subcommand("simulate", "run seeded replications of a configured experiment");
    std::string config_path;
    std::optional<std::string> sim_out;
    bool timing = false;
    sim->add_option("--config", config_path, "JSON experiment config")->required()->check(CLI::ExistingFile);
    sim->add_option("--seed", seed, "override base_seed");
    sim->add_option("--out", sim_out, "override the output directory");
    sim->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
    sim->add_flag("--timing", timing, "record wall-clock seconds (output is then not reproducible)");

    auto* bench = app.add_subcommand("benchmark", "resampling cost of GR and CGR over a (d, m) grid");
    BenchmarkSettings bs;
    std::string bench_out = "results";
    bench->add_option("--d", bs.ds, "dimensions")->delimiter(',');
    bench->add_option("--m", bs.ms, "action sizes")->delimiter(',');
    bench->add_option("--rounds", bs.rounds, "rounds per cell")->check(CLI::PositiveNumber);
    bench->add_option("--seed", bs.seed, "seed");
    bench->add_option("--cap", bs.cap, "resampling cap")->check(CLI::PositiveNumber);
    bench->add_option("--out", bench_out, "output directory");

    auto* ver = app.add_subcommand("verify", "run a check suite; exit status 0 iff every check passes");
    std::string suite;
    VerifySettings vs;
    std::string ver_out = "results";
    ver->add_option("suite", suite, "lemmas, estimators, counterexample or penalty")
        ->required()
        ->check(CLI::IsMember(verify_suites()));
    ver->add_option("--seed", vs.seed, "seed");
    ver->add_option("--cap", vs.cap, "resampling cap for the estimator suite")->check(CLI::PositiveNumber);
    ver->add_option("--jobs", vs.jobs, "worker threads")->check(CLI::PositiveNumber);
    ver->add_option("--out", ver_out, "output directory");

    auto* ce = app.add_subcommand("counterexample", "scan the J ratio over lambda_q0");
    double lo = 0.0, hi = 5.0, step = 0.05;
    std::string ce_out = "results";
    ce->add_option("--lo", lo, "first lambda_q0");
    ce->add_option("--hi", hi, "last lambda_q0");
    ce->add_option("--step", step, "grid step")->check(CLI::PositiveNumber);
    ce->add_option("--out", ce_out, "output directory");

    auto* ren = app.add_subcommand("render", "SVG line chart from CSV columns");
    std::string csv, xcol;
    std::vector<std::string> ycols;
    std::optional<std::string> ren_out;
    std::string title;
    ren->add_option("csv", csv, "input CSV")->required()->check(CLI::ExistingFile);
    ren->add_option("--x", xcol, "x column")->required();
    ren->add_option("--y", ycols, "y column(s)")->required()->delimiter(',');
    ren->add_option("--out", ren_out, "output SVG (default: CSV path with .svg)");
    ren->add_option("--title", title, "chart title");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed())
            return run_simulate(config_path, seed, sim_out, jobs, timing);
        if (bench->parsed())
            return run_benchmark(bs, bench_out);
        if (ver->parsed()) {
            vs.jobs = ver->count("--jobs") ? vs.jobs : default_jobs();
            return run_verify(suite, vs, ver_out);
        }
        if (ce->parsed())
            return run_counterexample(lo, hi, step, ce_out);
        if (ren->parsed())
            return run_render(csv, xcol, ycols, ren_out, title);
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return 2;
    }
    return 0;
}
