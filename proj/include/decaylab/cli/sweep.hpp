#pragma once

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <string>
#include <thread>
#include <vector>

#include "decaylab/cli/runner.hpp"

namespace decaylab {

/// One `--set key=v1,v2,...` range. Values keep their command-line spelling
/// for the CSV and are typed (bool, integer, float, string) when applied.
struct SweepAxis {
    std::string key;
    std::vector<std::string> values;
};

inline SweepAxis parse_set(const std::string& arg) {
    const auto eq = arg.find('=');
    require(eq != std::string::npos && eq > 0, "--set expects key=v1,v2,... (got '" + arg + "')");
    SweepAxis axis{arg.substr(0, eq), {}};
    const std::string list = arg.substr(eq + 1);
    std::size_t start = 0;
    while (start <= list.size()) {
        const auto comma = list.find(',', start);
        const std::string v = list.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        if (!v.empty()) axis.values.push_back(v);
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    require(!axis.values.empty(), "--set " + axis.key + " has an empty range");
    return axis;
}

namespace detail {

inline void assign_value(toml::table& t, const std::string& key, const std::string& text) {
    const std::string unquoted =
        text.size() >= 2 && (text.front() == '"' || text.front() == '\'') && text.back() == text.front()
            ? text.substr(1, text.size() - 2)
            : text;
    if (unquoted != text) {
        t.insert_or_assign(key, unquoted);
    } else if (text == "true" || text == "false") {
        t.insert_or_assign(key, text == "true");
    } else {
        std::size_t used = 0;
        try {
            const long long i = std::stoll(text, &used);
            if (used == text.size()) {
                t.insert_or_assign(key, static_cast<std::int64_t>(i));
                return;
            }
            const double d = std::stod(text, &used);
            if (used == text.size()) {
                t.insert_or_assign(key, d);
                return;
            }
        } catch (const std::exception&) {
        }
        t.insert_or_assign(key, text);
    }
}

/// Sets `key` (or `table.key` for one level of inline table, e.g. M.b).
inline void apply_override(toml::table& t, const std::string& key, const std::string& value) {
    const auto dot = key.find('.');
    if (dot == std::string::npos) {
        assign_value(t, key, value);
        return;
    }
    const std::string outer = key.substr(0, dot);
    auto* inner = t.get_as<toml::table>(outer);
    require(inner != nullptr, "--set " + key + ": '" + outer + "' is not a table in the config");
    assign_value(*inner, key.substr(dot + 1), value);
}

}  // namespace detail

struct SweepRow {
    std::vector<std::string> values;
    std::string predicted_form, fitted_form, verdict;
    double predicted_rate = std::numeric_limits<double>::quiet_NaN();
    double fitted_rate = std::numeric_limits<double>::quiet_NaN();
    int exit_code = exit_ok;
    std::string error;
};

struct SweepResult {
    std::vector<std::string> keys;
    std::vector<SweepRow> rows;
    int exit_code = exit_ok;
};

inline std::string sweep_csv(const SweepResult& r) {
    auto cell = [](double v) { return std::isfinite(v) ? format_double(v) : std::string(); };
    auto quoted = [](const std::string& s) {
        if (s.find_first_of(",\"\n") == std::string::npos) return s;
        std::string q = "\"";
        for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
        return q + "\"";
    };
    std::string csv = "run";
    for (const auto& k : r.keys) csv += "," + quoted(k);
    csv += ",predicted_form,predicted_rate,fitted_form,fitted_rate,verdict,error\n";
    for (std::size_t i = 0; i < r.rows.size(); ++i) {
        const auto& row = r.rows[i];
        csv += std::to_string(i);
        for (const auto& v : row.values) csv += "," + quoted(v);
        csv += "," + row.predicted_form + "," + cell(row.predicted_rate) + "," + row.fitted_form + "," +
               cell(row.fitted_rate) + "," + row.verdict + "," + quoted(row.error) + "\n";
    }
    return csv;
}

/// Runs the Cartesian product of the ranges over `base`, up to `jobs` members
/// at a time, each in out/run_NNNN; writes out/sweep.csv in product order.
inline SweepResult sweep(const toml::table& base, const std::vector<SweepAxis>& axes, const std::filesystem::path& out,
                         int jobs = 1) {
    require(!axes.empty(), "sweep needs at least one --set range");
    const ExperimentConfig base_config = config_from_table(base);
    require(base_config.kind == ExperimentKind::evolution || base_config.kind == ExperimentKind::catalog_check,
            "sweeps run evolution or catalog-check configs");
    std::size_t total = 1;
    for (const auto& a : axes) {
        require(!a.values.empty(), "--set " + a.key + " has an empty range");
        total *= a.values.size();
        require(total <= static_cast<std::size_t>(base_config.sweep_budget),
                "sweep of " + std::to_string(total) + "+ runs exceeds sweep_budget = " +
                    std::to_string(base_config.sweep_budget));
    }

    SweepResult result;
    for (const auto& a : axes) result.keys.push_back(a.key);
    result.rows.resize(total);
    std::vector<ExperimentConfig> members;
    for (std::size_t i = 0; i < total; ++i) {
        auto& values = result.rows[i].values;
        values.resize(axes.size());
        for (std::size_t a = axes.size(), rest = i; a-- > 0; rest /= axes[a].values.size())
            values[a] = axes[a].values[rest % axes[a].values.size()];
        toml::table t = base;
        for (std::size_t a = 0; a < axes.size(); ++a) detail::apply_override(t, axes[a].key, values[a]);
        try {
            members.push_back(config_from_table(t));
        } catch (const ConfigError& e) {
            throw std::invalid_argument("sweep member " + std::to_string(i) + ": " + e.what());
        }
    }

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next++) < total;) {
            auto& row = result.rows[i];
            char dir[32];
            std::snprintf(dir, sizeof dir, "run_%04zu", i);
            try {
                const auto res = run(members[i], out / dir, 1);
                row.exit_code = res.exit_code;
                const auto& j = res.report;
                row.predicted_form = j["predicted"]["form"];
                if (j["predicted"]["exponent"].is_number()) row.predicted_rate = j["predicted"]["exponent"];
                if (!j["fitted"].is_null()) {
                    row.fitted_form = j["fitted"]["form"];
                    row.fitted_rate = j["fitted"]["rate"];
                }
                row.verdict = j["verdict"];
            } catch (const std::exception& e) {
                row.exit_code = exit_error;
                row.verdict = "ERROR";
                row.error = e.what();
            }
        }
    };
    std::vector<std::thread> pool;
    for (int j = 1; j < std::min<int>(jobs, static_cast<int>(total)); ++j) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    for (const auto& row : result.rows) {
        if (row.exit_code == exit_error) result.exit_code = exit_error;
        else if (row.exit_code == exit_fail && result.exit_code == exit_ok) result.exit_code = exit_fail;
    }
    write_text(out / "sweep.csv", sweep_csv(result));
    return result;
}

}  // namespace decaylab
