// gcon: synthesize / simulate / mincost / verify driver over the C API.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>

#include <CLI11.hpp>

#include "gconsensus.h"

namespace {

int exit_code_for(gcon_status s) {
    switch (s) {
        case GCON_OK: return 0;
        case GCON_ERR_NOT_STABILIZABLE: return 2;
        case GCON_ERR_NO_SOLUTION: return 3;
        case GCON_ERR_PARSE:
        case GCON_ERR_VALIDATION: return 4;
        case GCON_ERR_NONFINITE: return 5;
        case GCON_ERR_INFEASIBLE: return 6;
        case GCON_ERR_PROPERTY: return 7;
        default: return 1;
    }
}

int fail(gcon_status s) {
    std::fprintf(stderr, "gcon: error: %s\n", gcon_last_error());
    return exit_code_for(s);
}

struct CommonOpts {
    std::string config_path;
    std::string out_dir = ".";
    double dt = 0.0;
    unsigned long long seed = 0;
    bool has_dt = false;
    bool has_seed = false;
};

using ConfigPtr = std::unique_ptr<gcon_config, decltype(&gcon_config_free)>;

ConfigPtr load_config(const CommonOpts& opts, gcon_status& status) {
    gcon_config* cfg = nullptr;
    status = gcon_config_load(opts.config_path.c_str(), &cfg);
    ConfigPtr ptr(cfg, &gcon_config_free);
    if (status != GCON_OK) return ptr;
    if (opts.has_dt && (status = gcon_config_set_dt(cfg, opts.dt)) != GCON_OK)
        return ptr;
    if (opts.has_seed && (status = gcon_config_set_seed(cfg, opts.seed)) != GCON_OK)
        return ptr;
    std::filesystem::create_directories(opts.out_dir);
    return ptr;
}

bool write_file(const std::string& path, const char* text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        std::fprintf(stderr, "gcon: error: cannot write %s\n", path.c_str());
        return false;
    }
    out << text;
    return true;
}

std::string join(const std::string& dir, const char* name) {
    return (std::filesystem::path(dir) / name).string();
}

int cmd_synthesize(const CommonOpts& opts) {
    gcon_status st;
    ConfigPtr cfg = load_config(opts, st);
    if (st != GCON_OK) return fail(st);

    gcon_synthesis* synth = nullptr;
    if ((st = gcon_synthesize(cfg.get(), &synth)) != GCON_OK) return fail(st);
    std::unique_ptr<gcon_synthesis, decltype(&gcon_synthesis_free)> sp(
        synth, &gcon_synthesis_free);

    char* artifact = nullptr;
    if ((st = gcon_synthesis_json(synth, &artifact)) != GCON_OK) return fail(st);
    const bool ok1 = write_file(join(opts.out_dir, "synthesis.json"), artifact);
    gcon_string_free(artifact);

    char* summary = nullptr;
    if ((st = gcon_summary_json(cfg.get(), synth, nullptr, nullptr, &summary)) !=
        GCON_OK)
        return fail(st);
    std::fputs(summary, stdout);
    const bool ok2 = write_file(join(opts.out_dir, "summary.json"), summary);
    gcon_string_free(summary);
    return (ok1 && ok2) ? 0 : 1;
}

int cmd_simulate(const CommonOpts& opts, const std::string& gain_path) {
    gcon_status st;
    ConfigPtr cfg = load_config(opts, st);
    if (st != GCON_OK) return fail(st);

    gcon_synthesis* gain = nullptr;
    st = gain_path.empty() ? gcon_synthesize(cfg.get(), &gain)
                           : gcon_gain_load(gain_path.c_str(), &gain);
    if (st != GCON_OK) return fail(st);
    std::unique_ptr<gcon_synthesis, decltype(&gcon_synthesis_free)> gp(
        gain, &gcon_synthesis_free);

    gcon_trajectory* traj = nullptr;
    const gcon_status sim_status = gcon_simulate(cfg.get(), gain, &traj);
    std::unique_ptr<gcon_trajectory, decltype(&gcon_trajectory_free)> tp(
        traj, &gcon_trajectory_free);
    if (sim_status != GCON_OK && traj == nullptr) return fail(sim_status);

    if ((st = gcon_trajectory_write_csv(traj, join(opts.out_dir, "trajectory.csv")
                                                  .c_str())) != GCON_OK)
        return fail(st);

    char* summary = nullptr;
    if ((st = gcon_summary_json(cfg.get(), gain, nullptr, traj, &summary)) != GCON_OK)
        return fail(st);
    std::fputs(summary, stdout);
    const bool ok = write_file(join(opts.out_dir, "summary.json"), summary);
    gcon_string_free(summary);

    if (sim_status != GCON_OK) {
        std::fprintf(stderr, "gcon: error: %s\n", gcon_last_error());
        return exit_code_for(sim_status);
    }
    return ok ? 0 : 1;
}

int cmd_mincost(const CommonOpts& opts) {
    gcon_status st;
    ConfigPtr cfg = load_config(opts, st);
    if (st != GCON_OK) return fail(st);

    gcon_mincost* mc = nullptr;
    if ((st = gcon_mincost_solve(cfg.get(), &mc)) != GCON_OK) return fail(st);
    std::unique_ptr<gcon_mincost, decltype(&gcon_mincost_free)> mp(mc,
                                                                   &gcon_mincost_free);

    char* artifact = nullptr;
    if ((st = gcon_mincost_json(mc, &artifact)) != GCON_OK) return fail(st);
    const bool ok1 = write_file(join(opts.out_dir, "mincost.json"), artifact);
    gcon_string_free(artifact);

    char* summary = nullptr;
    if ((st = gcon_summary_json(cfg.get(), nullptr, mc, nullptr, &summary)) != GCON_OK)
        return fail(st);
    std::fputs(summary, stdout);
    const bool ok2 = write_file(join(opts.out_dir, "summary.json"), summary);
    gcon_string_free(summary);
    return (ok1 && ok2) ? 0 : 1;
}

int cmd_verify(const CommonOpts& opts) {
    gcon_status st;
    ConfigPtr cfg = load_config(opts, st);
    if (st != GCON_OK) return fail(st);

    char* report = nullptr;
    const gcon_status verify_status = gcon_verify(cfg.get(), &report);
    if (report == nullptr) return fail(verify_status);
    std::fputs(report, stdout);
    const bool ok = write_file(join(opts.out_dir, "verify.json"), report);
    gcon_string_free(report);

    if (verify_status != GCON_OK) return exit_code_for(verify_status);
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"guaranteed-cost consensus toolkit"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string gain_path;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("config", opts.config_path, "run config (JSON)")->required();
        sub->add_option("--out-dir", opts.out_dir, "artifact output directory");
        sub->add_option("--dt", opts.dt, "override integration step")
            ->each([&](const std::string&) { opts.has_dt = true; });
        sub->add_option("--seed", opts.seed, "override master seed")
            ->each([&](const std::string&) { opts.has_seed = true; });
    };

    CLI::App* synth = app.add_subcommand("synthesize", "solve the Riccati gain design");
    add_common(synth);
    CLI::App* sim = app.add_subcommand("simulate", "closed-loop switching simulation");
    add_common(sim);
    sim->add_option("--gain", gain_path, "gain file (synthesis artifact or {\"K\": ...})");
    CLI::App* mincost =
        app.add_subcommand("mincost", "minimize the guaranteed cost over the LMI pair");
    add_common(mincost);
    CLI::App* verify = app.add_subcommand("verify", "run the invariant property suite");
    add_common(verify);

    CLI11_PARSE(app, argc, argv);

    if (synth->parsed()) return cmd_synthesize(opts);
    if (sim->parsed()) return cmd_simulate(opts, gain_path);
    if (mincost->parsed()) return cmd_mincost(opts);
    if (verify->parsed()) return cmd_verify(opts);
    return 1;
}
