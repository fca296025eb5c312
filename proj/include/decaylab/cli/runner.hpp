#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "decaylab/cli/config.hpp"
#include "decaylab/cli/svg.hpp"
#include "decaylab/decay.hpp"
#include "decaylab/kernels.hpp"
#include "decaylab/timestep.hpp"

namespace decaylab {

enum ExitStatus { exit_ok = 0, exit_error = 1, exit_fail = 2 };

/// A stage-tagged runtime failure, e.g. "evolution: ..." or "write: ...".
class StageError : public std::runtime_error {
public:
    StageError(std::string stage, const std::string& what)
        : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}
    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

struct RunResult {
    int exit_code = exit_ok;
    nlohmann::ordered_json report;
    std::string summary;  // one line for the terminal
};

inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// t, ell, norm, dissipation; one block of rows per ell, full precision.
inline void write_norms_csv(const NormSeries& s, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw StageError("write", "cannot open " + path.string());
    out << "t,ell,norm,dissipation\n";
    for (std::size_t k = 0; k < s.ells.size(); ++k)
        for (std::size_t i = 0; i < s.times.size(); ++i)
            out << format_double(s.times[i]) << ',' << format_double(s.ells[k]) << ',' << format_double(s.norms[k][i])
                << ',' << format_double(s.dissipation[k][i]) << '\n';
    if (!out) throw StageError("write", "failed writing " + path.string());
}

namespace detail {

// std::stod rejects subnormals, which the writer can emit.
inline double parse_cell(const std::string& text) {
    double v = 0.0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() && ec != std::errc::result_out_of_range) throw std::invalid_argument("bad number '" + text + "'");
    if (end != text.data() + text.size()) throw std::invalid_argument("bad number '" + text + "'");
    return v;
}

}  // namespace detail

inline NormSeries read_norms_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::string line;
    std::getline(in, line);
    require(line == "t,ell,norm,dissipation", path.string() + ": unexpected header");
    NormSeries s;
    while (std::getline(in, line)) {
        std::stringstream row(line);
        std::string cell[4];
        for (auto& c : cell) std::getline(row, c, ',');
        const double t = detail::parse_cell(cell[0]), ell = detail::parse_cell(cell[1]);
        if (s.ells.empty() || s.ells.back() != ell) {
            s.ells.push_back(ell);
            s.norms.emplace_back();
            s.dissipation.emplace_back();
        }
        if (s.ells.size() == 1) s.times.push_back(t);
        s.norms.back().push_back(detail::parse_cell(cell[2]));
        s.dissipation.back().push_back(detail::parse_cell(cell[3]));
    }
    return s;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw StageError("write", "cannot open " + path.string());
    out << text;
    if (!out) throw StageError("write", "failed writing " + path.string());
}

inline void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& j) {
    write_text(path, j.dump(2) + "\n");
}

namespace detail {

inline nlohmann::ordered_json scheme_json(const ExperimentConfig& c) {
    const auto& s = c.scheme;
    nlohmann::ordered_json j;
    j["dt"] = s.dt;
    j["dt_auto"] = c.dt_auto;
    j["T"] = s.horizon;
    j["dt_growth"] = s.dt_growth;
    j["growth_start"] = s.growth_start;
    j["dt_max"] = number_or_null(s.dt_max);
    return j;
}

inline nlohmann::ordered_json grid_json(const Grid& g) {
    nlohmann::ordered_json j;
    j["kind"] = to_string(g.kind());
    j["axes"] = nlohmann::ordered_json::array();
    for (const auto& ax : g.axes()) j["axes"].push_back({{"a", ax.a}, {"b", ax.b}, {"N", ax.points}});
    return j;
}

inline Verdict worst(Verdict a, Verdict b) {
    auto rank = [](Verdict v) { return v == Verdict::fail ? 2 : v == Verdict::inconclusive ? 1 : 0; };
    return rank(a) >= rank(b) ? a : b;
}

inline NormSeries evolve(const ExperimentConfig& c) {
    const Field u0 = make_initial(c);
    const EvolutionOptions opts{.dense_until = c.dense_until, .sample_ratio = c.sample_ratio};
    if (scalar_kind(*c.spec) == ScalarKind::complex) return run_evolution(to_complex(u0), *c.spec, c.scheme, c.ells, opts);
    return run_evolution(u0, *c.spec, c.scheme, c.ells, opts);
}

/// Prediction, fit, verdict and dissipation check for one exponent.
inline Report judge_series(const ExperimentConfig& c, const NormSeries& series, double ell) {
    Report r;
    r.spec = *c.spec;
    r.lambda1 = c.scheme.lambda1;
    r.lambda2 = c.scheme.lambda2();
    r.alpha = c.scheme.alpha;
    r.ell = ell;
    r.predicted = predicted_rate(*c.spec, r.lambda1, r.lambda2, r.alpha, ell, c.dimension);
    try {
        r.fitted = fit_rate(series, ell, c.fit_window);
        r.judgement = judge(r.predicted, *r.fitted, c.tol);
    } catch (const std::invalid_argument& e) {
        r.judgement.verdict = Verdict::inconclusive;
        r.judgement.note = std::string("no fit: ") + e.what();
    }
    r.dissipation = check_dissipation_inequality(series, ell, *c.spec);
    return r;
}

inline RunResult run_evolution_kind(const ExperimentConfig& c, const std::filesystem::path& out) {
    NormSeries series;
    try {
        series = evolve(c);
    } catch (const std::exception& e) {
        throw StageError("evolution", e.what());
    }
    write_norms_csv(series, out / "norms.csv");

    std::vector<Report> reports;
    Verdict overall = Verdict::pass;
    for (double ell : c.ells) {
        reports.push_back(judge_series(c, series, ell));
        overall = worst(overall, reports.back().judgement.verdict);
    }

    nlohmann::ordered_json meta;
    meta["kind"] = to_string(c.kind);
    meta["seed"] = c.seed;
    meta["grid"] = grid_json(c.grid);
    meta["scheme"] = scheme_json(c);
    meta["dimension"] = c.dimension;
    meta["steps"] = series.steps;
    meta["samples"] = series.times.size();
    meta["step_retries"] = series.step_retries;
    meta["max_picard_iterations"] = series.max_picard_iterations;
    meta["negative_dissipation_steps"] = series.negative_dissipation_steps;
    meta["min_dissipation_ratio"] = number_or_null(series.min_dissipation_ratio);
    meta["max_l2_increase"] = number_or_null(series.max_l2_increase);
    reports.front().run_metadata = meta;

    RunResult res;
    res.report = to_json(reports.front());
    if (reports.size() > 1) {
        auto& more = res.report["other_ells"] = nlohmann::ordered_json::array();
        for (std::size_t k = 1; k < reports.size(); ++k) {
            auto j = to_json(reports[k]);
            for (const char* key : {"version", "spec", "regime", "alpha", "run_metadata"}) j.erase(key);
            more.push_back(j);
        }
    }
    write_json(out / "report.json", res.report);
    if (c.svg) write_text(out / "decay.svg", decay_plot_svg(series, reports));

    const auto& head = reports.front();
    res.summary = operator_name(*c.spec) + " ell=" + format_double(head.ell) + ": " + to_string(head.judgement.verdict) +
                  " (" + head.judgement.note + ")";
    if (c.kind == ExperimentKind::catalog_check && overall == Verdict::fail) res.exit_code = exit_fail;
    return res;
}

inline RunResult run_recurrence_kind(const ExperimentConfig& c, const std::filesystem::path& out, int jobs) {
    const auto& rc = c.recurrence;
    RecurrenceEstimate e;
    std::optional<WalkStats> mc;
    try {
        e = escape_product(rc.s, rc.n, rc.rho, rc.K);
        if (rc.trials > 0) mc = walk_return_stats(rc.n, rc.s, rc.rho, rc.K, rc.trials, c.seed, jobs);
    } catch (const std::exception& ex) {
        throw StageError("recurrence", ex.what());
    }
    RunResult res;
    res.report = to_json(e, mc);
    if (mc) {
        // The product assumes independent returns; this is how far the walk disagrees.
        const double diff = mc->q_hat - e.product;
        res.report["mc"]["q_hat_minus_product"] = diff;
        res.report["mc"]["standard_errors"] = mc->stderr_q > 0.0 ? nlohmann::ordered_json(diff / mc->stderr_q)
                                                                   : nlohmann::ordered_json(nullptr);
    }
    write_json(out / "report.json", res.report);
    char buf[256];
    std::snprintf(buf, sizeof buf, "n=%d s=%g rho=%g K=%d: product %.6g, %s", rc.n, rc.s, rc.rho, rc.K, e.product,
                  to_string(e.classification));
    res.summary = buf;
    if (mc) {
        std::snprintf(buf, sizeof buf, "; walk q_hat %.4g +- %.2g over %ld trials", mc->q_hat, mc->stderr_q, mc->trials);
        res.summary += buf;
    }
    return res;
}

inline RunResult run_kernel_validate_kind(const ExperimentConfig& c, const std::filesystem::path& out) {
    std::vector<KernelCheck> checks;
    try {
        checks = validate_kernels(c.seed);
    } catch (const std::exception& e) {
        throw StageError("kernels", e.what());
    }
    RunResult res;
    auto& j = res.report;
    j["version"] = "1";
    j["kind"] = "kernel-validate";
    j["seed"] = c.seed;
    j["checks"] = nlohmann::ordered_json::array();
    int failed = 0;
    for (const auto& k : checks) {
        failed += !k.passed;
        j["checks"].push_back({{"group", k.group},
                               {"name", k.name},
                               {"value", k.value},
                               {"tolerance", k.tolerance},
                               {"passed", k.passed}});
    }
    j["passed"] = failed == 0;
    write_json(out / "report.json", j);
    res.summary = std::to_string(checks.size() - failed) + "/" + std::to_string(checks.size()) + " kernel checks pass";
    if (failed) res.exit_code = exit_fail;
    return res;
}

}  // namespace detail

/// Runs one experiment and writes its artifacts into `out` (created if
/// needed). Output depends only on the config, never on wall-clock time or
/// on `jobs`.
inline RunResult run(const ExperimentConfig& c, const std::filesystem::path& out, int jobs = 1) {
    std::error_code ec;
    std::filesystem::create_directories(out, ec);
    if (ec || !std::filesystem::is_directory(out))
        throw StageError("write", "cannot create output directory " + out.string());
    switch (c.kind) {
        case ExperimentKind::evolution:
        case ExperimentKind::catalog_check: return detail::run_evolution_kind(c, out);
        case ExperimentKind::recurrence: return detail::run_recurrence_kind(c, out, jobs);
        case ExperimentKind::kernel_validate: return detail::run_kernel_validate_kind(c, out);
    }
    throw std::logic_error("unhandled experiment kind");
}

}  // namespace decaylab
