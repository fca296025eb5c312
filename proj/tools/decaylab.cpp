#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <unistd.h>

#include "decaylab/cli.hpp"

using namespace decaylab;

namespace {

struct Flags {
    int jobs = 1;
    std::optional<std::int64_t> seed;
    std::string out;
    std::optional<double> tol;
};

bool use_color() { return std::getenv("NO_COLOR") == nullptr && isatty(fileno(stdout)); }

std::string paint(const std::string& text, const char* code) {
    return use_color() ? std::string("\033[") + code + "m" + text + "\033[0m" : text;
}

std::string painted_verdict(const std::string& v) {
    if (v == "PASS") return paint(v, "32");
    if (v == "FAIL") return paint(v, "31");
    return paint(v, "33");
}

toml::table read_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return toml::parse(ss.str(), path);
    } catch (const toml::parse_error& e) {
        throw ConfigError({{"line " + std::to_string(e.source().begin.line), std::string(e.description())}});
    }
}

/// Command-line flags win over the config file.
void apply_flags(toml::table& t, const Flags& f) {
    if (f.seed) t.insert_or_assign("seed", *f.seed);
    if (f.tol) {
        const auto kind = t["kind"].value_or(std::string("evolution"));
        require(kind == "evolution" || kind == "catalog-check", "--tol applies to evolution and catalog-check configs");
        t.insert_or_assign("tol", *f.tol);
    }
}

std::filesystem::path output_dir(const Flags& f, const ExperimentConfig& c, const std::string& config_path) {
    if (!f.out.empty()) return f.out;
    if (!c.out.empty()) return c.out;
    return std::filesystem::path("out") / std::filesystem::path(config_path).stem();
}

int cmd_run(const std::string& path, const Flags& f) {
    toml::table t = read_table(path);
    apply_flags(t, f);
    const auto config = config_from_table(t);
    const auto out = output_dir(f, config, path);
    const auto res = run(config, out, f.jobs);
    std::string line = res.summary;
    if (res.report.contains("verdict")) {
        const std::string v = res.report["verdict"];
        line = painted_verdict(v) + "  " + line;
    }
    std::cout << line << "\n" << "artifacts in " << out.string() << "\n";
    return res.exit_code;
}

int cmd_sweep(const std::string& path, const std::vector<std::string>& sets, const Flags& f) {
    toml::table t = read_table(path);
    apply_flags(t, f);
    std::vector<SweepAxis> axes;
    for (const auto& s : sets) axes.push_back(parse_set(s));
    const auto base = config_from_table(t);
    const auto out = output_dir(f, base, path);
    const auto res = sweep(t, axes, out, f.jobs);
    for (std::size_t i = 0; i < res.rows.size(); ++i) {
        const auto& row = res.rows[i];
        std::string params;
        for (std::size_t k = 0; k < res.keys.size(); ++k) params += (k ? " " : "") + res.keys[k] + "=" + row.values[k];
        char rates[128];
        std::snprintf(rates, sizeof rates, "predicted %s %.4g, fitted %s %.4g", row.predicted_form.c_str(),
                      row.predicted_rate, row.fitted_form.c_str(), row.fitted_rate);
        std::cout << i << "  " << painted_verdict(row.verdict) << "  " << params << "  "
                  << (row.error.empty() ? std::string(rates) : row.error) << "\n";
    }
    std::cout << "sweep table in " << (out / "sweep.csv").string() << "\n";
    return res.exit_code;
}

int cmd_catalog_list() {
    for (const auto& r : decay_catalog()) {
        std::cout << paint(r.id, "1") << "  " << r.family << "  [" << regime_condition(r.regime) << "]\n"
                  << "    guard: " << (r.guard.empty() ? "-" : r.guard) << "\n"
                  << "    Theta(t) = " << r.theta << "  (" << to_string(r.form) << ")\n"
                  << "    ell: " << r.ell_bound << "\n"
                  << "    cited: " << r.reference << "\n";
        if (r.ambiguous) std::cout << "    ambiguous: verdicts are reported as INCONCLUSIVE\n";
        if (r.supplementary) std::cout << "    supplementary row (not in the tables)\n";
        if (!r.annotation.empty()) std::cout << "    note: " << r.annotation << "\n";
    }
    return exit_ok;
}

int cmd_kernels_validate(const Flags& f) {
    const auto checks = validate_kernels(f.seed ? static_cast<std::uint64_t>(*f.seed) : 1);
    int failed = 0;
    for (const auto& c : checks) {
        failed += !c.passed;
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.3g (tol %.3g)", c.value, c.tolerance);
        std::cout << painted_verdict(c.passed ? "PASS" : "FAIL") << "  " << c.group << "  " << c.name << "  " << buf << "\n";
    }
    std::cout << checks.size() - failed << "/" << checks.size() << " kernel checks pass\n";
    if (!f.out.empty()) {
        ExperimentConfig c;
        c.kind = ExperimentKind::kernel_validate;
        c.seed = f.seed ? static_cast<std::uint64_t>(*f.seed) : 1;
        run(c, f.out);
    }
    return failed ? exit_fail : exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"decaylab: decay-rate experiments for time-fractional and nonlocal diffusion"};
    app.require_subcommand(1);
    Flags flags;
    app.add_option("--jobs", flags.jobs, "parallel sweep members / Monte Carlo threads")->check(CLI::PositiveNumber);
    app.add_option("--seed", flags.seed, "override the config seed");
    app.add_option("--out", flags.out, "output directory");
    app.add_option("--tol", flags.tol, "relative tolerance for rate verdicts")->check(CLI::PositiveNumber);

    std::string config_path;
    std::vector<std::string> sets;
    auto* run_cmd = app.add_subcommand("run", "run one experiment config")->fallthrough();
    run_cmd->add_option("config", config_path, "TOML config")->required();
    auto* sweep_cmd = app.add_subcommand("sweep", "run the Cartesian product of --set ranges")->fallthrough();
    sweep_cmd->add_option("config", config_path, "TOML config template")->required();
    sweep_cmd->add_option("--set", sets, "key=v1,v2,... (repeatable)")->required();
    auto* catalog_cmd = app.add_subcommand("catalog", "decay-rate catalog")->require_subcommand(1);
    auto* catalog_list = catalog_cmd->add_subcommand("list", "print every catalog row");
    auto* kernels_cmd = app.add_subcommand("kernels", "stable heat kernels")->require_subcommand(1)->fallthrough();
    auto* kernels_validate = kernels_cmd->add_subcommand("validate", "run the kernel property suite")->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_error;
    }

    try {
        if (*run_cmd) return cmd_run(config_path, flags);
        if (*sweep_cmd) return cmd_sweep(config_path, sets, flags);
        if (*catalog_list) return cmd_catalog_list();
        if (*kernels_validate) return cmd_kernels_validate(flags);
    } catch (const ConfigError& e) {
        std::cerr << "config error:\n";
        for (const auto& fe : e.errors()) std::cerr << "  " << fe.field << ": " << fe.message << "\n";
        return exit_error;
    } catch (const StageError& e) {
        std::cerr << "error in " << e.what() << "\n";
        return exit_error;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_error;
    }
    return exit_error;
}
