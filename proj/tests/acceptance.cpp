// Acceptance runner: `acceptance N` checks criterion N, `acceptance` checks
// all twelve. One line per criterion; exit 0 only if every checked one passes.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "catalog_cases.hpp"
#include "decaylab/cli.hpp"

using namespace decaylab;
namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

// Per-run wall-clock budget unless a criterion states its own.
constexpr double run_budget_s = 60.0;

struct Outcome {
    bool pass = true;
    std::string detail;

    void check(bool ok, const std::string& what) {
        pass = pass && ok;
        detail += (detail.empty() ? "" : "; ") + what + (ok ? "" : " [miss]");
    }
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

fs::path out_root() { return fs::path(DECAYLAB_ACCEPTANCE_OUT); }

toml::table load_table(const std::string& name, const std::map<std::string, std::string>& overrides = {}) {
    auto t = toml::parse_file((fs::path(DECAYLAB_CONFIG_DIR) / (name + ".toml")).string());
    for (const auto& [k, v] : overrides) detail::apply_override(t, k, v);
    return t;
}

struct Timed {
    RunResult result;
    double seconds;
};

Timed run_config(const std::string& name, const std::string& tag, const std::map<std::string, std::string>& overrides = {}) {
    const auto dir = out_root() / tag;
    fs::remove_all(dir);
    const auto config = config_from_table(load_table(name, overrides));
    Stopwatch w;
    auto res = run(config, dir);
    return {std::move(res), w.seconds()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

double rel_err(double value, double target) { return std::abs(value - target) / std::abs(target); }

/// Polynomial fit within `tol` of `beta`.
void expect_polynomial(Outcome& o, const std::string& label, const Timed& r, double beta, double tol) {
    const auto& f = r.result.report["fitted"];
    const bool poly = !f.is_null() && f["form"] == "polynomial";
    const double rate = poly ? f["rate"].get<double>() : std::nan("");
    o.check(poly && rel_err(rate, beta) <= tol,
            label + " t^-" + fmt("%.4g", rate) + " vs " + fmt("%.4g", beta) + " (rel " + fmt("%.3g", rel_err(rate, beta)) +
                " <= " + fmt("%g", tol) + ")");
    o.check(r.seconds < run_budget_s, label + " " + fmt("%.1fs", r.seconds));
}

void expect_exponential(Outcome& o, const std::string& label, const Timed& r) {
    const auto& f = r.result.report["fitted"];
    const bool ok = !f.is_null() && f["form"] == "exponential";
    o.check(ok, label + (ok ? " exponential, 1/C = " + fmt("%.4g", f["rate"].get<double>())
                            : " fitted " + (f.is_null() ? std::string("nothing") : f["form"].get<std::string>())));
    o.check(r.seconds < run_budget_s, label + " " + fmt("%.1fs", r.seconds));
}

Outcome heat_baseline() {
    Outcome o;
    const auto r = run_config("heat_baseline", "c1_heat");
    const auto& f = r.result.report["fitted"];
    const bool ok = !f.is_null() && f["form"] == "exponential";
    const double rate = ok ? f["rate"].get<double>() : std::nan("");
    o.check(ok && rel_err(rate, 1.0) <= 0.05, "fitted e^-" + fmt("%.5f", rate) + "t vs e^-t (rel <= 0.05)");
    o.check(r.result.report["predicted"]["form"] == "exponential", "predicted exponential");
    o.check(r.result.report["verdict"] == "PASS", "verdict " + r.result.report["verdict"].get<std::string>());
    o.check(r.seconds < run_budget_s, fmt("%.1fs", r.seconds));
    return o;
}

Outcome mittag_leffler() {
    Outcome o;
    Stopwatch w;
    const auto res = sweep(load_table("caputo_heat"), {{"alpha", {"0.3", "0.5", "0.7"}}}, out_root() / "c2_alpha");
    for (const auto& row : res.rows) {
        const double alpha = std::stod(row.values[0]);
        o.check(row.fitted_form == "polynomial" && rel_err(row.fitted_rate, alpha) <= 0.15,
                "alpha " + row.values[0] + ": t^-" + fmt("%.4g", row.fitted_rate) + " (rel " +
                    fmt("%.3g", rel_err(row.fitted_rate, alpha)) + " <= 0.15)");
    }
    o.check(res.rows.size() == 3, "3 runs");
    o.check(w.seconds() <= 300.0, "sweep " + fmt("%.1fs", w.seconds()) + " <= 300s");
    return o;
}

Outcome nonlinear_classical() {
    Outcome o;
    for (const auto& [m, p] : {std::pair{2.0, 2.0}, std::pair{1.0, 3.0}}) {
        const std::string label = "(m,p)=(" + fmt("%g", m) + "," + fmt("%g", p) + ")";
        const auto r = run_config("porous_plap", "c3_m" + fmt("%g", m) + "_p" + fmt("%g", p),
                                  {{"m", fmt("%.1f", m)}, {"p", fmt("%.1f", p)}});
        expect_polynomial(o, label, r, 1.0 / (m * (p - 1.0) - 1.0), 0.15);
    }
    return o;
}

Outcome fractional_p_laplacian() {
    Outcome o;
    expect_polynomial(o, "p=3", run_config("frac_plap", "c4_p3", {{"p", "3.0"}}), 1.0, 0.15);
    expect_exponential(o, "p=1.5", run_config("frac_plap", "c4_p1.5", {{"p", "1.5"}}));
    return o;
}

Outcome kirchhoff_switch() {
    Outcome o;
    expect_exponential(o, "classical M(0)>0", run_config("kirchhoff", "c5_classical_pos"));
    expect_polynomial(o, "classical M=bt", run_config("kirchhoff_linear_m", "c5_classical_lin"), 0.5, 0.20);
    expect_exponential(o, "fractional M(0)>0", run_config("frac_kirchhoff", "c5_fractional_pos"));
    expect_polynomial(o, "fractional M=bt", run_config("frac_kirchhoff_linear_m", "c5_fractional_lin"), 0.5, 0.20);
    return o;
}

Outcome magnetic_decay() {
    Outcome o;
    expect_exponential(o, "classical A=1", run_config("magnetic", "c6_classical"));
    const auto r = run_config("frac_magnetic_caputo", "c6_fractional");
    expect_polynomial(o, "fractional s=0.5 alpha=0.5", r, r.result.report["alpha"].get<double>(), 0.15);
    return o;
}

Outcome dissipation() {
    Outcome o;
    const auto r = run_config("heat_baseline", "c7_heat");
    const auto& g = r.result.report["gamma_hat"];
    const double gamma = g.is_null() ? std::nan("") : g.get<double>();
    o.check(gamma >= 0.95 && gamma <= 1.05, "heat gamma_hat " + fmt("%.4f", gamma) + " in [0.95, 1.05]");

    // 200 steps from a random datum for every operator.
    const std::string common = "initial = \"random\"\ndatum_seed = 11\ndt = 1e-3\nT = 0.2\n";
    const std::vector<std::string> configs = {
        "operator = \"laplacian\"\nN = 31\n",
        "operator = \"bilaplacian\"\nN = 31\n",
        "operator = \"p_laplacian_porous\"\np = 3.0\nm = 2.0\nN = 31\n",
        "operator = \"p_laplacian_porous\"\np = 1.5\nm = 1.0\nN = 31\n",
        "operator = \"mean_curvature\"\nN = 31\n",
        "operator = \"fractional_laplacian\"\ns = 0.4\nN = 31\n",
        "operator = \"fractional_p_laplacian\"\ns = 0.5\np = 3.0\nN = 31\n",
        "operator = \"superposition\"\nterms = [{beta = 1.0, s = 0.3, p = 1.5}, {beta = 2.0, s = 0.6, p = 4.0}]\nN = 31\n",
        "operator = \"anisotropic_fractional\"\ngrid = \"box\"\nbeta = [1.0, 2.0]\nsigma = [0.3, 0.7]\nN = 13\n",
        "operator = \"porous_medium_1\"\ns = 0.5\nm = 2.0\nN = 31\n",
        // the flux u grad R(u) is only dissipative for u >= 0
        "operator = \"porous_medium_2\"\ns = 0.25\nN = 31\ndatum_range = [0.0, 1.0]\n",
        "operator = \"fractional_mean_curvature\"\ns = 0.5\nN = 31\n",
        "operator = \"kirchhoff\"\nM = {a = 0.0, b = 1.0}\nN = 31\n",
        "operator = \"fractional_kirchhoff\"\ns = 0.5\nM = {a = 1.0, b = 1.0}\nN = 31\n",
        "operator = \"magnetic\"\nA = 1.0\nN = 31\n",
        "operator = \"fractional_magnetic\"\ns = 0.5\nA = 1.0\nN = 31\n",
    };
    std::set<std::string> covered;
    int clean = 0;
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& text : configs) {
        const auto c = parse_config(text + common);
        const std::string name = operator_name(*c.spec);
        covered.insert(name);
        NormSeries series;
        try {
            series = detail::evolve(c);
        } catch (const std::exception& e) {
            o.check(false, name + ": " + e.what());
            continue;
        }
        worst = std::min(worst, series.min_dissipation_ratio);
        const bool ok = series.negative_dissipation_steps == 0 && series.steps >= 200;
        clean += ok;
        if (!ok)
            o.check(false, name + ": " + std::to_string(series.negative_dissipation_steps) + " negative steps of " +
                               std::to_string(series.steps));
    }
    o.check(clean == static_cast<int>(configs.size()),
            std::to_string(clean) + "/" + std::to_string(configs.size()) + " operator runs with pairing >= -1e-10 scale " +
                "at every step (min ratio " + fmt("%.3g", worst) + ")");
    o.check(covered.size() == 15, std::to_string(covered.size()) + " operators covered");
    return o;
}

Outcome kernel_suite() {
    Outcome o;
    int mass = 0, mass_ok = 0, scaling = 0, scaling_ok = 0;
    double worst_mass = 0.0, worst_scaling = 0.0;
    std::string missed;
    for (const auto& c : validate_kernels(1)) {
        if (c.group == "unit_mass") {
            ++mass;
            mass_ok += c.passed;
            worst_mass = std::max(worst_mass, c.value);
            if (!c.passed) missed += (missed.empty() ? "" : ", ") + c.name + " " + fmt("%.2g", c.value);
        } else if (c.group == "scaling") {
            ++scaling;
            scaling_ok += c.passed;
            worst_scaling = std::max(worst_scaling, c.value);
        }
    }
    o.check(mass == 12 && mass_ok == mass, "unit mass " + std::to_string(mass_ok) + "/" + std::to_string(mass) +
                                               " within 1e-4 at rho=1e6" + (missed.empty() ? "" : " (" + missed + ")"));
    o.check(scaling == 12 && scaling_ok == scaling, "scaling " + std::to_string(scaling_ok) + "/" + std::to_string(scaling) +
                                                        " pairs, worst " + fmt("%.2g", worst_scaling) + " <= 1e-8");
    const double g = kernel_value(0.5, 1, 0.0, 1.0);
    o.check(std::abs(g - 1.0 / std::numbers::pi) <= 1e-8, "G_1/2(0,1) - 1/pi = " + fmt("%.2g", g - 1.0 / std::numbers::pi));
    return o;
}

Outcome recurrence_dichotomy() {
    Outcome o;
    Stopwatch w;
    struct Statement {
        int n;
        double s;
        Recurrence expected;
    };
    const std::vector<Statement> statements = {
        {1, 0.5, Recurrence::recurrent},   {1, 0.75, Recurrence::recurrent}, {1, 1.0, Recurrence::recurrent},
        {1, 0.25, Recurrence::transient},  {1, 0.45, Recurrence::transient}, {2, 1.0, Recurrence::recurrent},
        {3, 1.0, Recurrence::transient},
    };
    int classified = 0;
    for (const auto& st : statements) classified += classify_recurrence(st.n, st.s) == st.expected;
    o.check(classified == static_cast<int>(statements.size()),
            std::to_string(classified) + "/" + std::to_string(statements.size()) + " classifications");

    constexpr double rho = 0.1;
    constexpr int K = 100000;
    for (const auto& st : statements) {
        if (st.s == 0.45) continue;
        const auto e = escape_product(st.s, st.n, rho, K);
        const std::string label = "(n,s)=(" + std::to_string(st.n) + "," + fmt("%g", st.s) + ")";
        if (st.expected == Recurrence::recurrent) {
            o.check(e.product < 1e-3, label + " product " + fmt("%.3g", e.product) + " < 1e-3");
        } else {
            const int k0 = K / 10;
            const double drift = std::abs(e.log_product() - std::log(e.product_at(k0)));
            const double bound = escape_tail_bound(st.s, st.n, rho, k0);
            o.check(drift <= bound, label + " log-product drift " + fmt("%.2g", drift) + " from K/10 <= tail " +
                                        fmt("%.2g", bound));
        }
    }
    o.check(w.seconds() <= 120.0, fmt("%.1fs", w.seconds()) + " <= 120s");
    return o;
}

Outcome monte_carlo() {
    Outcome o;
    Stopwatch w;
    const auto lo = run_config("walk_s025", "c10_s025").result.report["mc"];
    const auto hi = run_config("walk_s075", "c10_s075").result.report["mc"];
    const double q = lo["q_hat"], se = lo["stderr"];
    o.check(q - 3.0 * se > 0.0, "s=0.25 q_hat " + fmt("%.4f", q) + " +- " + fmt("%.2g", se) + " (3 sigma above 0)");
    const double ratio = hi["mean_returns"].get<double>() / lo["mean_returns"].get<double>();
    o.check(ratio >= 5.0, "mean returns s=0.75/s=0.25 = " + fmt("%.3g", hi["mean_returns"].get<double>()) + "/" +
                              fmt("%.3g", lo["mean_returns"].get<double>()) + " = " + fmt("%.3g", ratio) + " >= 5");
    o.check(lo["trials"] == 10000 && lo["K"] == 10000, "1e4 walks, K=1e4");
    o.check(w.seconds() <= 180.0, fmt("%.1fs", w.seconds()) + " <= 180s");
    return o;
}

Outcome reproducibility() {
    Outcome o;
    for (const auto& name : {"heat_baseline", "walk_s025"}) {
        run_config(name, std::string("c11_") + name + "_a");
        run_config(name, std::string("c11_") + name + "_b");
        const auto a = out_root() / (std::string("c11_") + name + "_a");
        const auto b = out_root() / (std::string("c11_") + name + "_b");
        for (const char* f : {"norms.csv", "report.json"}) {
            if (!fs::exists(a / f)) continue;  // recurrence runs write no series
            o.check(slurp(a / f) == slurp(b / f) && !slurp(a / f).empty(), std::string(name) + "/" + f + " identical");
        }
    }
    return o;
}

Outcome catalog_totality() {
    Outcome o;
    const auto& rows = decay_catalog();
    int t1 = 0, t2 = 0, quoted = 0;
    std::set<std::string> table_ids, ambiguous, restricted;
    for (const auto& r : rows) {
        if (r.supplementary) continue;
        (r.id.rfind("T1.", 0) == 0 ? t1 : t2)++;
        table_ids.insert(r.id);
        quoted += !r.theta.empty() && !r.ell_bound.empty();
        if (r.ambiguous) ambiguous.insert(r.id);
        if (r.annotation.find("intervals") != std::string::npos) restricted.insert(r.id);
    }
    o.check(t1 == 18 && t2 == 16, std::to_string(t1) + " + " + std::to_string(t2) + " table rows");
    o.check(quoted == t1 + t2, std::to_string(quoted) + " rows carry Theta and ell range");

    std::set<std::string> reached;
    for (const auto& c : catalog_cases::row_cases()) {
        const auto p = predicted_rate(c.spec, c.lambda1, 1.0 - c.lambda1, c.alpha, c.ell, c.n);
        if (p.row == c.row && p.form == c.form) reached.insert(p.row);
    }
    int unreached = 0;
    for (const auto& id : table_ids) unreached += !reached.count(id);
    o.check(unreached == 0, std::to_string(table_ids.size() - unreached) + "/" + std::to_string(table_ids.size()) +
                                " rows reachable by a configuration");
    o.check(ambiguous == std::set<std::string>{"T1.3"}, "ambiguous rows: Bi-Laplacian only");
    o.check(restricted == std::set<std::string>{"T2.1", "T2.2"}, "interval restriction: porous medium II rows only");

    // the command itself lists every row with its Theta
    std::string listing;
    if (FILE* pipe = popen((std::string(DECAYLAB_CLI) + " catalog list").c_str(), "r")) {
        char buf[512];
        while (std::fgets(buf, sizeof buf, pipe)) listing += buf;
        pclose(pipe);
    }
    int listed = 0;
    for (const auto& r : rows)
        listed += listing.find(r.id + "  ") != std::string::npos && listing.find(r.theta) != std::string::npos;
    o.check(listed == static_cast<int>(rows.size()),
            "`catalog list` shows " + std::to_string(listed) + "/" + std::to_string(rows.size()) + " rows");
    return o;
}

const std::vector<std::function<Outcome()>> criteria = {
    heat_baseline,  mittag_leffler,       nonlinear_classical, fractional_p_laplacian,
    kirchhoff_switch, magnetic_decay,     dissipation,         kernel_suite,
    recurrence_dichotomy, monte_carlo,    reproducibility,     catalog_totality,
};

}  // namespace

int main(int argc, char** argv) {
    std::vector<int> which;
    for (int i = 1; i < argc; ++i) {
        const int k = std::atoi(argv[i]);
        if (k < 1 || k > static_cast<int>(criteria.size())) {
            std::cerr << "usage: acceptance [criterion 1-12 ...]\n";
            return 1;
        }
        which.push_back(k);
    }
    if (which.empty())
        for (int k = 1; k <= static_cast<int>(criteria.size()); ++k) which.push_back(k);

    fs::create_directories(out_root());
    bool all = true;
    for (int k : which) {
        Outcome o;
        try {
            o = criteria[k - 1]();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("error: ") + e.what();
        }
        all = all && o.pass;
        std::cout << "criterion " << k << ": " << (o.pass ? "PASS" : "FAIL") << "  " << o.detail << std::endl;
    }
    return all ? 0 : 1;
}
