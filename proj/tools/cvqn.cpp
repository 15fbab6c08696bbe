// cvqn: secret key rates of multi-user CV-QKD networks.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "cvqn/commands.hpp"

#ifndef CVQN_BUNDLED_SCENARIO_DIR
#define CVQN_BUNDLED_SCENARIO_DIR ""
#endif

namespace {

using namespace cvqn;

cvqn::NetworkScenario load(const std::optional<std::string>& arg) {
    return load_scenario(resolve_scenario_path(arg, CVQN_BUNDLED_SCENARIO_DIR));
}

// Writes CSV to `path`, or to stdout when the path is empty or "-".
template <class Fn>
void emit_csv(const std::string& path, Fn&& write) {
    if (path.empty() || path == "-") {
        write(std::cout);
        return;
    }
    auto out = open_output(path);
    write(out);
    out.flush();
    if (!out) throw Error(ErrorKind::IoError, "failed writing '" + path + "'");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Secret key rates of multi-user continuous-variable QKD networks"};
    app.require_subcommand(1);
    app.footer(std::string("Scenario files are looked up in $") + kScenarioDirEnv +
               " when the given path does not exist; with no path, default.json is used.");

    std::optional<std::string> scenario;

    auto* skr = app.add_subcommand("skr", "per-user and total key rate of a scenario");
    skr->add_option("scenario", scenario, "scenario file (JSON)");

    std::string axis_name = "distance", out_path;
    double from = 0.0, to = 100.0;
    int steps = 21;
    auto* sweep = app.add_subcommand("sweep", "key rate along one parameter axis, as CSV");
    sweep->add_option("scenario", scenario, "scenario file (JSON)");
    sweep->add_option("--axis", axis_name, "distance | n_users | isolation_db")->capture_default_str();
    sweep->add_option("--from", from, "first axis value")->capture_default_str();
    sweep->add_option("--to", to, "last axis value")->capture_default_str();
    sweep->add_option("--steps", steps, "number of points")->capture_default_str();
    sweep->add_option("--out", out_path, "CSV output path (stdout if omitted)");

    int n_max = 19;
    auto* compare = app.add_subcommand("compare", "frequency, temporal and splitter schemes against PLOB-N");
    compare->add_option("scenario", scenario, "scenario file (JSON)");
    compare->add_option("--n-max", n_max, "largest number of users")->capture_default_str();
    compare->add_option("--out", out_path, "CSV output path (stdout if omitted)");

    std::uint64_t n_symbols = 1000000, seed = 1;
    unsigned workers = 1;
    std::string records_path;
    auto* simulate = app.add_subcommand("simulate", "Monte-Carlo run with parameter estimation");
    simulate->add_option("scenario", scenario, "scenario file (JSON)");
    simulate->add_option("--symbols", n_symbols, "symbols per user")->capture_default_str();
    simulate->add_option("--seed", seed, "generator seed")->capture_default_str();
    simulate->add_option("--workers", workers, "worker threads (results do not depend on it)")->capture_default_str();
    simulate->add_option("--out", out_path, "per-user estimates CSV");
    simulate->add_option("--records", records_path, "also write every symbol to this CSV");

    std::optional<double> bound_t;
    std::optional<int> bound_n;
    auto* bounds = app.add_subcommand("bounds", "repeaterless bounds PLOB and PLOB-N");
    bounds->add_option("scenario", scenario, "scenario file (JSON), used when --transmittance is absent");
    bounds->add_option("--transmittance", bound_t, "channel transmittance in (0, 1)");
    bounds->add_option("--users", bound_n, "number of users");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*skr) {
            const auto s = load(scenario);
            std::cout << skr_report(s, network_skr(s));
        } else if (*sweep) {
            const auto s = load(scenario);
            const auto axis = parse_axis(axis_name);
            const auto rows = run_sweep(s, axis, from, to, steps);
            emit_csv(out_path, [&](std::ostream& os) { write_sweep_csv(os, axis, rows); });
        } else if (*compare) {
            const auto s = load(scenario);
            const auto rows = run_compare(s, n_max);
            emit_csv(out_path, [&](std::ostream& os) { write_compare_csv(os, rows); });
            if (!out_path.empty() && out_path != "-") std::cout << compare_report(rows);
        } else if (*simulate) {
            const auto s = load(scenario);
            const auto r = end_to_end_skr(s, n_symbols, seed, workers);
            std::cout << simulate_report(s, r);
            if (!out_path.empty())
                emit_csv(out_path, [&](std::ostream& os) { write_estimates_csv(os, s, r); });
            if (!records_path.empty()) {
                const auto rec = cvqn::simulate(s, n_symbols, seed);
                emit_csv(records_path, [&](std::ostream& os) { write_records_csv(os, rec); });
            }
        } else if (*bounds) {
            TextTable t({"T", "N", "PLOB", "PLOB-N"});
            if (bound_t) {
                const int n = bound_n.value_or(1);
                const auto row = bounds_at(*bound_t, n);
                t.add({table_number(row.transmittance), std::to_string(n), table_number(row.plob),
                       table_number(row.plob_n)});
                std::cout << t.str() << "@result plob=" << csv_number(row.plob) << " plob_n=" << csv_number(row.plob_n)
                          << "\n";
            } else {
                const auto s = load(scenario);
                const int n = bound_n.value_or(s.n_users);
                for (const auto& ch : s.channels) {
                    const auto row = bounds_at(ch.fiber_transmittance(), n);
                    t.add({table_number(row.transmittance), std::to_string(n), table_number(row.plob),
                           table_number(row.plob_n)});
                }
                std::cout << t.str();
            }
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
