#include "gconsensus.h"

#include <cstring>
#include <new>
#include <optional>
#include <string>

#include "gcon/config.hpp"

using namespace gcon;

// Opaque handle definitions. gcon_synthesis doubles as the gain carrier so a
// file-loaded gain flows through the same simulate entry point.
struct gcon_config {
    RunConfig cfg;
};

struct gcon_synthesis {
    GainInput gain;
    std::optional<SynthesisOutput> synth;  // present when produced by synthesize
};

struct gcon_mincost {
    MinCostOutput out;
    bool paper_literal_lmi = false;
};

struct gcon_trajectory {
    SimulateOutput sim;
};

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& msg) { g_last_error = msg; }

gcon_status status_of(const Error& e) {
    if (dynamic_cast<const ParseError*>(&e)) return GCON_ERR_PARSE;
    if (dynamic_cast<const NotStabilizableError*>(&e)) return GCON_ERR_NOT_STABILIZABLE;
    if (dynamic_cast<const CareError*>(&e)) return GCON_ERR_NO_SOLUTION;
    if (dynamic_cast<const InfeasibleError*>(&e)) return GCON_ERR_INFEASIBLE;
    if (dynamic_cast<const ValidationError*>(&e)) return GCON_ERR_VALIDATION;
    if (dynamic_cast<const DisconnectedError*>(&e)) return GCON_ERR_VALIDATION;
    if (dynamic_cast<const DimensionError*>(&e)) return GCON_ERR_VALIDATION;
    return GCON_ERR_INTERNAL;
}

template <typename Fn>
gcon_status guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const Error& e) {
        set_error(e.what());
        return status_of(e);
    } catch (const std::bad_alloc&) {
        set_error("out of memory");
        return GCON_ERR_INTERNAL;
    } catch (const std::exception& e) {
        set_error(e.what());
        return GCON_ERR_INTERNAL;
    }
}

char* dup_string(const std::string& s) {
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

}  // namespace

extern "C" {

const char* gcon_version(void) { return "0.1.0"; }

const char* gcon_last_error(void) { return g_last_error.c_str(); }

void gcon_string_free(char* s) { delete[] s; }

gcon_status gcon_config_load(const char* path, gcon_config** out) {
    if (!path || !out) {
        set_error("null argument");
        return GCON_ERR_INVALID_ARGUMENT;
    }
    return guarded([&] {
        *out = new gcon_config{parse_config(path)};
        return GCON_OK;
    });
}

gcon_status gcon_config_parse(const char* json_text, gcon_config** out) {
    if (!json_text || !out) {
        set_error("null argument");
        return GCON_ERR_INVALID_ARGUMENT;
    }
    return guarded([&] {
        *out = new gcon_config{parse_config_text(json_text)};
        return GCON_OK;
    });
}

void gcon_config_free(gcon_config* cfg) { delete cfg; }

gcon_status gcon_config_set_dt(gcon_config* cfg, double dt) {
    if (!cfg) {
        set_error("null config");
        return GCON_ERR_INVALID_ARGUMENT;
    }
    if (!(dt > 0.0) || !(cfg->cfg.sim.t_end > dt)) {
        set_error("dt must satisfy 0 < dt < t_end");
        return GCON_ERR_VALIDATION;
    }
    cfg->cfg.sim.dt = dt;
    return GCON_OK;
}

gcon_status gcon_config_set_seed(gcon_config* cfg, unsigned long long seed) {
    if (!cfg) {
        set_error("null config");
        return GCON_ERR_INVALID_ARGUMENT;
    }
    // The switching seed follows the master seed unless the config pinned it.
    const bool follows = cfg->cfg.switching.seed == cfg->cfg.flags.seed;
    cfg->cfg.flags.seed = seed;
    if (follows) cfg->cfg.switching.seed = seed;
    return GCON_OK;
}

gcon_status gcon_synthesize(const gcon_config* cfg, gcon_synthesis** out) {
    if (!cfg || !out) {
        set_error("null argument");
        return GCON_ERR_INVALID_ARGUMENT;
    }
    return guarded([&] {
        SynthesisOutput so = run_synthesize(cfg->cfg);
        auto* h = new gcon_synthesis;
        h->gain = GainInput{so.result.K, so.result.P, so.beta};
        h->synth = std::move(so);
        *out = h;
        return GCON_OK;
    });
}

gcon_status gcon_gain_load(const char* path, gcon_synthesis** out) {
    if (!path || !out) {
        set_error("null argument");
        return GCON_ERR_INVALID_ARGUMENT;
    }
    return guarded([&] {
        auto* h = new gcon_synthesis;
        h->gain = load_gain_json(path);
        *out = h;
        return GCON_OK;
    });
}

gcon_status gcon_synthesis_json(const gcon_synthesis* s, char** out_json) {
    if (!s || !out_json) {
        set_error("null argument");
        return GCON_ERR_INVALID_ARGUMENT;
    }
    if (!s->synth) {
        set_error("gain was loaded from a file; no synthesis artifact available");
        return GCON_ERR_INVALID_ARGUMENT;
    }
    return guarded([&] {
        *out_json = dup_string(synthesis_to_json(*s->synth));
        return GCON_OK;
    });
}

gcon_status gcon_synthesis_beta(const gcon_synthesis* s, double* out_beta) {
    if (!s || !out_beta) {
        set_error("null argument");
        return GCON_ERR_INVALID_ARGUMENT;
    }
    if (!s->gain.beta) {
        set_error("no guaranteed cost attached to this gain");
        return GCON_ERR_INVALID_ARGUMENT;
    }
    *out_beta = *s->gain.beta;
    return GCON_OK;
}

gcon_status gcon_synthesis_residual(const gcon_synthesis* s, double* out_res) {
    if (!s || !out_res) {
        set_error("null argument");
        return GCON_ERR_INVALID_ARGUMENT;
    }
    if (!s->synth) {
        set_error("gain was loaded from a file; no residual available");
        return GCON_ERR_INVALID_ARGUMENT;
    }
    *out_res = s->synth->result.residual;
    return GCON_OK;
}

void gcon_synthesis_free(gcon_synthesis* s) { delete s; }

gcon_status gcon_simulate(const gcon_config* cfg, const gcon_synthesis* gain,
                          gcon_trajectory** out) {
    if (!cfg || !gain || !out) {
        set_error("null argument");
        return GCON_ERR_INVALID_ARGUMENT;
    }
    return guarded([&] {
        auto* h = new gcon_trajectory{run_simulate(cfg->cfg, gain->gain)};
        *out = h;
        if (h->sim.traj.nonfinite) {
            set_error("state blow-up: |entry| exceeded 1e12 (partial trajectory kept)");
            return GCON_ERR_NONFINITE;
        }
        return GCON_OK;
    });
}

gcon_status gcon_trajectory_write_csv(const gcon_trajectory* t, const char* path) {
    if (!t || !path) {
        set_error("null argument");
        return GCON_ERR_INVALID_ARGUMENT;
    }
    return guarded([&] {
        try {
            write_trajectory_csv(t->sim.traj, path);
        } catch (const Error& e) {
            set_error(e.what());
            return GCON_ERR_IO;
        }
        return GCON_OK;
    });
}

gcon_status gcon_trajectory_rows(const gcon_trajectory* t, long long* out) {
    if (!t || !out) {
        set_error("null argument");
        return GCON_ERR_INVALID_ARGUMENT;
    }
    *out = static_cast<long long>(t->sim.traj.times.size());
    return GCON_OK;
}

gcon_status gcon_trajectory_nonfinite(const gcon_trajectory* t, int* out) {
    if (!t || !out) {
        set_error("null argument");
        return GCON_ERR_INVALID_ARGUMENT;
    }
    *out = t->sim.traj.nonfinite ? 1 : 0;
    return GCON_OK;
}

void gcon_trajectory_free(gcon_trajectory* t) { delete t; }

gcon_status gcon_mincost_solve(const gcon_config* cfg, gcon_mincost** out) {
    if (!cfg || !out) {
        set_error("null argument");
        return GCON_ERR_INVALID_ARGUMENT;
    }
    return guarded([&] {
        auto* h = new gcon_mincost{run_mincost(cfg->cfg),
                                   cfg->cfg.flags.paper_literal_lmi};
        *out = h;
        return GCON_OK;
    });
}

gcon_status gcon_mincost_json(const gcon_mincost* m, char** out_json) {
    if (!m || !out_json) {
        set_error("null argument");
        return GCON_ERR_INVALID_ARGUMENT;
    }
    return guarded([&] {
        *out_json = dup_string(mincost_to_json(m->out, m->paper_literal_lmi));
        return GCON_OK;
    });
}

gcon_status gcon_mincost_beta_star(const gcon_mincost* m, double* out) {
    if (!m || !out) {
        set_error("null argument");
        return GCON_ERR_INVALID_ARGUMENT;
    }
    *out = m->out.res.beta_star;
    return GCON_OK;
}

void gcon_mincost_free(gcon_mincost* m) { delete m; }

gcon_status gcon_summary_json(const gcon_config* cfg, const gcon_synthesis* synth,
                              const gcon_mincost* mincost, const gcon_trajectory* traj,
                              char** out_json) {
    if (!cfg || !out_json) {
        set_error("null argument");
        return GCON_ERR_INVALID_ARGUMENT;
    }
    return guarded([&] {
        const SynthesisOutput* so =
            (synth && synth->synth) ? &*synth->synth : nullptr;
        const MinCostOutput* mo = mincost ? &mincost->out : nullptr;
        const SimulateOutput* to = traj ? &traj->sim : nullptr;
        *out_json = dup_string(summary_to_json(cfg->cfg, so, mo, to));
        return GCON_OK;
    });
}

gcon_status gcon_verify(const gcon_config* cfg, char** out_report_json) {
    if (!cfg || !out_report_json) {
        set_error("null argument");
        return GCON_ERR_INVALID_ARGUMENT;
    }
    return guarded([&] {
        const VerifyOutput v = run_verify(cfg->cfg);
        *out_report_json = dup_string(verify_to_json(v));
        if (!v.all_pass) {
            set_error("verification properties failed");
            return GCON_ERR_PROPERTY;
        }
        return GCON_OK;
    });
}

}  // extern "C"
