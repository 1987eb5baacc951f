#include "pani/cli.hpp"

#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "pani/acceptance.hpp"
#include "pani/report.hpp"

namespace pani {

namespace {

namespace fs = std::filesystem;

int env_threads() {
    const char* v = std::getenv("PANI_THREADS");
    if (!v) return 0;
    return std::atoi(v);
}

int effective_threads(int flag) { return flag > 0 ? flag : env_threads(); }

int cmd_theory(const std::string& config_path) {
    auto cfg = parse_config_file(config_path);
    auto rep = full_report(cfg.model, cfg.law);
    std::cout << theory_report_json(rep) << "\n";
    return rep.regime == Regime::boundary ? 2 : 0;
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir,
                 std::uint64_t seed, bool seed_given, int threads) {
    auto cfg = parse_config_file(config_path);
    if (!cfg.run) throw ConfigError("simulate needs a 'run' section");
    RunConfig run = *cfg.run;
    if (seed_given) run.master_seed = seed;
    if (threads > 0) run.threads = threads;
    if (run.threads == 0) run.threads = env_threads();

    fs::create_directories(out_dir);
    auto m = grow(cfg.model, cfg.law, run);
    std::vector<std::string> artifacts{"degrees.csv", "edges.csv", "zpath.csv"};
    write_degrees_csv(out_dir + "/degrees.csv", m);
    write_edges_csv(out_dir + "/edges.csv", m);
    write_zpath_csv(out_dir + "/zpath.csv", m);

    if (cfg.condensation) {
        auto dom = make_dominating(cfg.model, cfg.law);
        auto rows = condensate_probe(cfg.model, dom, cfg.law, cfg.condensation->eps_grid,
                                     cfg.condensation->n_grid, run.replicas,
                                     run.master_seed, run.threads);
        write_condensate_csv(out_dir + "/condensate.csv", rows);
        artifacts.push_back("condensate.csv");
    }
    write_manifest(out_dir + "/manifest.json", cfg, run.master_seed, run.replicas,
                   artifacts);
    return 0;
}

int cmd_urn(const std::string& config_path) {
    auto cfg = parse_config_file(config_path);
    if (!cfg.urn) throw ConfigError("urn needs an 'urn' section");
    auto disc = discretize(cfg.model, cfg.law, cfg.urn->m);
    auto urn_e = build_urn_e(disc);
    auto eig_e = leading_eig(urn_e);
    auto rep_e = check_urn_e_formulas(urn_e, eig_e);
    auto urn_d = build_urn_d(disc, cfg.urn->k_prime);
    auto eig_d = leading_eig(urn_d);
    auto rep_d = check_urn_d_formulas(urn_d, eig_d);
    std::cout << urn_report_json(rep_e, eig_e, urn_e.type_count(), rep_d, eig_d,
                                 urn_d.type_count())
              << "\n";
    return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& out_dir) {
    auto cfg = parse_config_file(config_path);
    if (!cfg.sweep) throw ConfigError("sweep needs a 'sweep' section");
    const auto& sw = *cfg.sweep;
    std::vector<SweepRow> rows;
    for (int i = 0; i < sw.count; ++i) {
        double alpha = sw.from + (sw.to - sw.from) * i / (sw.count - 1);
        auto law = WeightLaw::beta_poly(alpha);
        auto rep = full_report(cfg.model, law);
        SweepRow row;
        row.param = alpha;
        row.criterion = rep.criterion_value;
        row.regime = regime_name(rep.regime);
        row.lambda_or_gstar =
            rep.lambda_star ? *rep.lambda_star : rep.g_tilde_star;
        row.condensate_mass = rep.condensate_mass;
        rows.push_back(row);
    }
    if (out_dir.empty()) {
        std::cout << "param,criterion,regime,lambda_or_gstar,condensate_mass\n";
        for (const auto& r : rows) {
            std::cout << fmt_double(r.param) << ',';
            if (std::isinf(r.criterion))
                std::cout << "inf";
            else
                std::cout << fmt_double(r.criterion);
            std::cout << ',' << r.regime << ',' << fmt_double(r.lambda_or_gstar) << ','
                      << fmt_double(r.condensate_mass) << "\n";
        }
    } else {
        fs::create_directories(out_dir);
        write_sweep_csv(out_dir + "/sweep.csv", rows);
    }
    return 0;
}

int cmd_validate(const std::string& suite_path, int threads) {
    std::ifstream in(suite_path);
    if (!in) throw ConfigError("cannot open suite file: " + suite_path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("suite parse error: ") + e.what());
    }
    if (!j.is_object() || !j.contains("checks") || !j["checks"].is_array())
        throw ConfigError("suite: expected {\"checks\": [...]}");
    if (j["checks"].empty()) {
        std::cerr << "no checks\n";
        return 1;
    }
    AcceptanceOptions opts;
    opts.threads = effective_threads(threads);
    std::vector<std::string> names;
    for (const auto& c : j["checks"]) {
        if (!c.is_object() || !c.contains("name"))
            throw ConfigError("suite: each check needs a 'name'");
        for (auto it = c.begin(); it != c.end(); ++it)
            if (it.key() != "name" && it.key() != "tolerance")
                throw ConfigError("suite: unknown key '" + it.key() + "'");
        std::string name = c["name"].get<std::string>();
        names.push_back(name);
        if (c.contains("tolerance"))
            opts.tolerance_override[name] = c["tolerance"].get<double>();
    }
    auto results = run_acceptance(opts, names);
    std::printf("%-36s %-14s %-12s %s\n", "check", "measured", "tolerance", "verdict");
    bool all_pass = true;
    for (const auto& r : results) {
        std::printf("%-36s %-14.6g %-12.6g %s\n", r.name.c_str(), r.measured,
                    r.tolerance, r.pass ? "PASS" : "FAIL");
        std::printf("    %s\n", r.detail.c_str());
        all_pass = all_pass && r.pass;
    }
    return all_pass ? 0 : 3;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"growth-tree simulator and numeric cross-validator"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    std::uint64_t seed = 0;
    int threads = 0;

    auto* theory = app.add_subcommand("theory", "print the limit predictions as JSON");
    theory->add_option("--config", config_path, "experiment config")->required();

    auto* simulate = app.add_subcommand("simulate", "grow trees and write CSV artifacts");
    simulate->add_option("--config", config_path, "experiment config")->required();
    simulate->add_option("--out", out_dir, "output directory")->required();
    auto* seed_opt = simulate->add_option("--seed", seed, "master seed override");
    simulate->add_option("--threads", threads, "worker threads");

    auto* urn = app.add_subcommand("urn", "finite urn eigen-systems as JSON");
    urn->add_option("--config", config_path, "experiment config")->required();

    auto* sweep = app.add_subcommand("sweep", "phase diagram over a parameter grid");
    sweep->add_option("--config", config_path, "experiment config")->required();
    sweep->add_option("--out", out_dir, "output directory (stdout when omitted)");

    auto* validate = app.add_subcommand("validate", "run the acceptance checks");
    validate->add_option("--config", config_path, "suite file")->required();
    validate->add_option("--threads", threads, "worker threads");

    try {
        app.parse(argc, argv);
        if (theory->parsed()) return cmd_theory(config_path);
        if (simulate->parsed())
            return cmd_simulate(config_path, out_dir, seed, seed_opt->count() > 0,
                                threads);
        if (urn->parsed()) return cmd_urn(config_path);
        if (sweep->parsed()) return cmd_sweep(config_path, out_dir);
        if (validate->parsed()) return cmd_validate(config_path, threads);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const ConfigError& e) {
        if (e.line > 0)
            std::cerr << "config error at line " << e.line << ", column " << e.column
                      << ": " << e.what() << "\n";
        else
            std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

}  // namespace pani
