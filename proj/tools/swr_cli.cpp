// Command-line front end: solve presets or config files, run parameter
// sweeps, and print stored run summaries.

#include <swr.hpp>

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace {

std::string default_out(const std::string& name) { return "runs/" + name; }

int cmd_solve(const std::string& target, std::optional<int> workers, const std::string& out, std::optional<int> stride,
              const std::vector<std::string>& overrides, bool quiet) {
    swr::RunConfig cfg = swr::load_config(target, overrides);
    if (stride) cfg.dump_stride = *stride;
    const std::string dir = !out.empty() ? out : (!cfg.out_dir.empty() ? cfg.out_dir : default_out(cfg.name));
    const int w = swr::resolve_workers(cfg.workers, workers);
    if (!quiet)
        std::cout << "scenario " << cfg.name << " (" << (cfg.project_only ? std::string("project") : swr::mode_name(cfg.mode)) << "), " << w << " worker(s), output " << dir
                  << std::endl;
    swr::Scenario sc;
    {
        swr::WorkerPool pool(w);
        sc = swr::build_scenario(cfg, pool);
    }
    for (const auto& d : sc.diagnostics) std::cerr << "note: " << d << '\n';
    const swr::RunReport rep = swr::run_scenario(sc, w, dir);
    if (!quiet) {
        for (const auto& h : rep.history) std::cout << "  k=" << h.k << "  Res=" << h.residual << '\n';
        std::cout << (rep.converged ? "converged" : "NOT converged") << " after " << rep.history.size()
                  << " Schwarz iteration(s); linear solves " << rep.counters.solves << '\n';
        if (rep.summary.contains("energy") && cfg.mode == swr::RunMode::ngf)
            std::cout << "energy " << rep.summary["energy"].get<double>() << '\n';
    }
    return rep.converged ? 0 : 2;
}

int cmd_sweep(const std::string& preset, const std::string& axis, const std::vector<std::string>& values,
              std::optional<double> threshold, std::optional<int> workers, const std::string& out,
              const std::vector<std::string>& overrides) {
    const std::string dir = out.empty() ? default_out(preset + "_sweep_" + axis) : out;
    const auto rows = swr::run_sweep(preset, axis, values, threshold, workers, dir, overrides);
    std::cout << axis << ",k_to_threshold,final_residual,converged,iterations\n";
    for (const auto& r : rows)
        std::cout << r.value << ',' << r.k_to_threshold << ',' << r.final_residual << ',' << (r.converged ? 1 : 0) << ','
                  << r.iterations << '\n';
    return 0;
}

int cmd_inspect(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw swr::Error("cannot open " + path);
    nlohmann::json j;
    try {
        is >> j;
    } catch (const nlohmann::json::exception& e) {
        throw swr::Error(path + ": not a valid JSON summary (" + e.what() + ")");
    }
    auto show = [&](const char* key) {
        if (j.contains(key)) std::cout << std::left << std::setw(22) << key << j[key].dump() << '\n';
    };
    for (const char* k : {"scenario", "mode", "workers", "converged", "k_cvg", "iterations", "final_residual", "energy",
                          "energy_antisymmetrized", "final_norm", "norm_drift"})
        show(k);
    if (j.contains("basis")) std::cout << std::left << std::setw(22) << "K_tot" << j["basis"]["K_tot"].dump() << '\n';
    if (j.contains("counters")) {
        std::cout << std::left << std::setw(22) << "linear_solves" << j["counters"]["linear_solves"].dump() << '\n';
        std::cout << std::left << std::setw(22) << "solves_match_log" << j["counters"]["solves_match_log"].dump() << '\n';
    }
    if (j.contains("complexity")) {
        const auto& c = j["complexity"];
        std::cout << std::left << std::setw(22) << "beta_fit" << c["beta_fit"].dump() << '\n';
        std::cout << std::left << std::setw(22) << "attractiveness" << c["attractiveness"].dump() << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Schwarz waveform relaxation solver for the two-electron 1-d Schrodinger equation"};
    app.require_subcommand(1);

    std::optional<int> workers;
    std::string out;
    std::vector<std::string> overrides;

    auto* solve = app.add_subcommand("solve", "run a preset or a config file");
    std::string target;
    std::optional<int> stride;
    bool quiet = false;
    solve->add_option("target", target, "preset name or path to a .ini config")->required();
    solve->add_option("--workers", workers, "worker threads (overrides SWR_WORKERS and the config)")->check(CLI::PositiveNumber);
    solve->add_option("--out", out, "output directory");
    solve->add_option("--dump-stride", stride, "write the reconstructed field every S sweeps")->check(CLI::NonNegativeNumber);
    solve->add_option("--set", overrides, "override a config entry, section.key=value");
    solve->add_flag("--quiet", quiet, "only report failures");

    auto* sweep = app.add_subcommand("sweep", "repeat a preset over values of one parameter");
    std::string preset, axis;
    std::vector<std::string> values;
    std::optional<double> threshold;
    sweep->add_option("preset", preset, "preset name or config path")->required();
    sweep->add_option("--axis", axis, "dt | mu | overlap | L")->required()->check(CLI::IsMember({"dt", "mu", "overlap", "L"}));
    sweep->add_option("--values", values, "parameter values")->required();
    sweep->add_option("--threshold", threshold, "residual level for k_to_threshold (default: swr.delta_sc)");
    sweep->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
    sweep->add_option("--out", out, "output directory");
    sweep->add_option("--set", overrides, "override a config entry, section.key=value");

    auto* inspect = app.add_subcommand("inspect", "print the key fields of a run_summary.json");
    std::string summary;
    inspect->add_option("summary", summary, "path to run_summary.json")->required();

    auto* list = app.add_subcommand("presets", "list the shipped presets");

    CLI11_PARSE(app, argc, argv);
    try {
        if (*solve) return cmd_solve(target, workers, out, stride, overrides, quiet);
        if (*sweep) return cmd_sweep(preset, axis, values, threshold, workers, out, overrides);
        if (*inspect) return cmd_inspect(summary);
        if (*list) {
            for (const auto& p : swr::preset_names()) std::cout << p << '\n';
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
