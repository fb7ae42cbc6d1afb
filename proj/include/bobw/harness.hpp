#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include <json.hpp>

#include "bobw/envs.hpp"
#include "bobw/math/rng.hpp"
#include "bobw/pm/analysis.hpp"
#include "bobw/pm/global.hpp"
#include "bobw/pm/local.hpp"
#include "bobw/semibandit.hpp"

// Experiment runner: declarative JSON configs, seeded multi-replication
// execution (replication r uses seed base_seed + r, split into learner and
// environment streams), regret aggregation at a geometric checkpoint grid,
// and machine-readable artifacts. Everything in the artifact is a pure
// function of the config, so reruns are byte-identical; wall-clock timing
// goes to a separate sidecar file.

namespace bobw::harness {

using env::config_error;

enum class Algorithm { LbinfvLs, LbinfvGd, PmLocal, PmGlobal };

inline const char* to_string(Algorithm a) {
    switch (a) {
    case Algorithm::LbinfvLs: return "lbinfv-ls";
    case Algorithm::LbinfvGd: return "lbinfv-gd";
    case Algorithm::PmLocal: return "pm-local";
    case Algorithm::PmGlobal: return "pm-global";
    }
    return "?";
}

struct ExperimentConfig {
    Algorithm algorithm = Algorithm::PmLocal;
    long T = 0;
    int replications = 1;
    std::uint64_t base_seed = 0;

    // semi-bandit geometry (lbinfv-*)
    int sb_d = 0;
    std::optional<int> sb_m;
    std::optional<std::vector<std::vector<int>>> sb_vertices;

    // partial monitoring (pm-*)
    std::optional<pm::PMGame> game;

    // environment
    bool is_pm() const { return algorithm == Algorithm::PmLocal || algorithm == Algorithm::PmGlobal; }
    std::optional<env::PMRegime> pm_regime;
    std::optional<env::SBRegime> sb_regime;

    // overrides
    double epsilon_sb = 0.1;
    double epsilon_local = 1e-3;
    double eta = 0.25;
    std::optional<double> c1;
    int exo_iteration_cap = 2000;
    int exo_stall_window = 60;

    nlohmann::json echo; // normalized config as parsed
};

namespace detail {

inline double jget_num(const nlohmann::json& j, const std::string& key) {
    if (!j.contains(key) || !j.at(key).is_number())
        throw config_error("config: missing numeric field \"" + key + "\"");
    return j.at(key).get<double>();
}

inline env::CorruptionStrategy parse_strategy(const nlohmann::json& j) {
    const std::string s = j.value("strategy", "flip_to_worst");
    if (s == "flip_to_worst") return env::CorruptionStrategy::FlipToWorst;
    if (s == "targeted_boost") return env::CorruptionStrategy::TargetedArmBoost;
    throw config_error("config: unknown corruption strategy \"" + s + "\"");
}

inline env::BlockSchedule parse_pm_schedule(const nlohmann::json& j) {
    env::BlockSchedule s;
    if (!j.contains("outcomes")) throw config_error("config: schedule needs \"outcomes\"");
    s.items = j.at("outcomes").get<std::vector<int>>();
    s.first_block = j.value("first_block", 1L);
    s.growth = j.value("growth", 2.0);
    return s;
}

} // namespace detail

inline ExperimentConfig parse_config(const nlohmann::json& j) {
    ExperimentConfig cfg;
    cfg.echo = j;

    const std::string alg = j.value("algorithm", "");
    if (alg == "lbinfv-ls")
        cfg.algorithm = Algorithm::LbinfvLs;
    else if (alg == "lbinfv-gd")
        cfg.algorithm = Algorithm::LbinfvGd;
    else if (alg == "pm-local")
        cfg.algorithm = Algorithm::PmLocal;
    else if (alg == "pm-global")
        cfg.algorithm = Algorithm::PmGlobal;
    else
        throw config_error("config: unknown algorithm \"" + alg + "\"");

    cfg.T = static_cast<long>(detail::jget_num(j, "T"));
    if (cfg.T < 8) throw config_error("config: T must be at least 8 (checkpoint grid and "
                                      "gamma = log T >= 2 both require it)");
    cfg.replications = static_cast<int>(j.value("replications", 1));
    if (cfg.replications < 1) throw config_error("config: replications must be positive");
    cfg.base_seed = j.value("base_seed", 0ULL);

    const auto& ov = j.contains("overrides") ? j.at("overrides") : nlohmann::json::object();
    cfg.epsilon_sb = ov.value("epsilon", 0.1);
    cfg.epsilon_local = ov.value("epsilon", 1e-3);
    cfg.eta = ov.value("eta", 0.25);
    if (ov.contains("c1")) cfg.c1 = ov.at("c1").get<double>();
    cfg.exo_iteration_cap = ov.value("exo_iteration_cap", 2000);
    cfg.exo_stall_window = ov.value("exo_stall_window", 60);

    const auto& envj = j.contains("environment") ? j.at("environment") : nlohmann::json::object();
    const std::string etype = envj.value("type", "");

    if (cfg.is_pm()) {
        if (!j.contains("game")) throw config_error("config: pm algorithms need a \"game\"");
        cfg.game = pm::parse_game(j.at("game"));
        const int d = cfg.game->d;
        if (etype == "stochastic") {
            auto nu = envj.at("nu_star").get<std::vector<double>>();
            cfg.pm_regime = env::PMStochastic{std::move(nu)};
        } else if (etype == "adversarial") {
            cfg.pm_regime = env::PMAdversarial{detail::parse_pm_schedule(envj.at("schedule"))};
        } else if (etype == "corrupted") {
            env::PMCorrupted c;
            c.nu = envj.at("nu_star").get<std::vector<double>>();
            c.strategy = detail::parse_strategy(envj);
            c.target_arm = envj.value("target_arm", 0);
            c.budget = detail::jget_num(envj, "budget");
            cfg.pm_regime = std::move(c);
        } else {
            throw config_error("config: unknown environment type \"" + etype + "\"");
        }
        (void)d;
    } else {
        if (!j.contains("semi_bandit"))
            throw config_error("config: lbinfv algorithms need \"semi_bandit\" geometry");
        const auto& sb = j.at("semi_bandit");
        cfg.sb_d = static_cast<int>(detail::jget_num(sb, "d"));
        if (sb.contains("vertices"))
            cfg.sb_vertices = sb.at("vertices").get<std::vector<std::vector<int>>>();
        else
            cfg.sb_m = static_cast<int>(detail::jget_num(sb, "m"));

        const auto parse_law = [&](const nlohmann::json& e) {
            const std::string l = e.value("law", "bernoulli");
            if (l == "bernoulli") return env::LossLaw::Bernoulli;
            if (l == "uniform") return env::LossLaw::UniformInterval;
            throw config_error("config: unknown loss law \"" + l + "\"");
        };
        if (etype == "stochastic") {
            env::SBStochastic s;
            s.means = envj.at("means").get<std::vector<double>>();
            s.law = parse_law(envj);
            cfg.sb_regime = std::move(s);
        } else if (etype == "adversarial") {
            env::SBAdversarial a;
            const auto& sch = envj.at("schedule");
            a.loss_vectors = sch.at("loss_vectors").get<std::vector<std::vector<double>>>();
            a.first_block = sch.value("first_block", 1L);
            a.growth = sch.value("growth", 2.0);
            cfg.sb_regime = std::move(a);
        } else if (etype == "corrupted") {
            env::SBCorrupted c;
            c.base.means = envj.at("means").get<std::vector<double>>();
            c.base.law = parse_law(envj);
            c.strategy = detail::parse_strategy(envj);
            c.target_arm = envj.value("target_arm", 0);
            c.budget = detail::jget_num(envj, "budget");
            cfg.sb_regime = std::move(c);
        } else {
            throw config_error("config: unknown environment type \"" + etype + "\"");
        }
    }
    return cfg;
}

struct ReplicationResult {
    std::uint64_t seed = 0;
    std::vector<double> regret; // at the checkpoint grid
    long exo_fallbacks = 0;
    long exo_nonconverged = 0;
    long gamma_clamps = 0;
    double corruption_spent = 0.0;
};

struct RunArtifact {
    ExperimentConfig config;
    std::vector<long> checkpoints;
    std::vector<ReplicationResult> replications;
    std::vector<double> mean, q10, median, q90;
    pm::Observability observability = pm::Observability::Locally; // pm runs only
};

namespace detail {

inline std::vector<double> quantile_curve(const std::vector<ReplicationResult>& reps,
                                          std::size_t ncp, double p) {
    std::vector<double> out(ncp, 0.0);
    std::vector<double> vals(reps.size());
    for (std::size_t i = 0; i < ncp; ++i) {
        for (std::size_t r = 0; r < reps.size(); ++r) vals[r] = reps[r].regret[i];
        std::sort(vals.begin(), vals.end());
        const double idx = p * static_cast<double>(vals.size() - 1);
        const std::size_t lo = static_cast<std::size_t>(idx);
        const std::size_t hi = std::min(vals.size() - 1, lo + 1);
        out[i] = vals[lo] + (idx - lo) * (vals[hi] - vals[lo]);
    }
    return out;
}

// One semi-bandit replication.
inline ReplicationResult run_sb_replication(const ExperimentConfig& cfg, int rep,
                                            const std::vector<long>& grid) {
    ReplicationResult res;
    res.seed = cfg.base_seed + static_cast<std::uint64_t>(rep);
    Rng learner_rng(res.seed, 0, StreamTag::Learner);
    Rng env_rng(res.seed, 0, StreamTag::Environment);

    SemiBanditActionSet aset = cfg.sb_vertices
                                   ? SemiBanditActionSet{ExplicitVertexActions{*cfg.sb_vertices}}
                                   : SemiBanditActionSet{MSetActions{*cfg.sb_m}};
    SemiBanditPredictor pred = cfg.algorithm == Algorithm::LbinfvLs
                                   ? SemiBanditPredictor{LsPredictor{}}
                                   : SemiBanditPredictor{GdPredictor{cfg.eta}};
    SemiBanditLearner learner(cfg.sb_d, aset, cfg.T, pred, cfg.epsilon_sb);

    const bool adversarial = std::holds_alternative<env::SBAdversarial>(*cfg.sb_regime);
    std::vector<double> means;
    std::vector<int> best_arms;
    double best_value = 0.0;
    if (!adversarial) {
        means = std::holds_alternative<env::SBStochastic>(*cfg.sb_regime)
                    ? std::get<env::SBStochastic>(*cfg.sb_regime).means
                    : std::get<env::SBCorrupted>(*cfg.sb_regime).base.means;
        if (cfg.sb_vertices) {
            double best = 1e300;
            int arg = -1;
            for (std::size_t v = 0; v < cfg.sb_vertices->size(); ++v) {
                double val = 0.0;
                for (int i = 0; i < cfg.sb_d; ++i) val += means[i] * (*cfg.sb_vertices)[v][i];
                if (val < best - 1e-9) {
                    best = val;
                    arg = static_cast<int>(v);
                } else if (std::abs(val - best) <= 1e-9) {
                    throw config_error("stochastic regime requires a unique optimal action");
                }
            }
            best_value = best;
            for (int i = 0; i < cfg.sb_d; ++i)
                if ((*cfg.sb_vertices)[arg][i]) best_arms.push_back(i);
        } else {
            best_arms = env::SemiBanditEnv::best_mset_arms(means, *cfg.sb_m);
            for (int i : best_arms) best_value += means[i];
        }
    }
    env::SemiBanditEnv environment(cfg.sb_d, *cfg.sb_regime, best_arms);

    env::RegretAccountant acc(grid, cfg.sb_d);
    for (long t = 1; t <= cfg.T; ++t) {
        const auto outcome = environment.emit(t, env_rng);
        const auto round = learner.step(outcome.losses, learner_rng);
        if (adversarial) {
            acc.record_realized(t, round.loss_incurred, outcome.losses);
        } else {
            double picked = 0.0;
            for (int i = 0; i < cfg.sb_d; ++i) picked += means[i] * round.action[i];
            acc.record_pseudo(t, picked - best_value);
        }
    }
    res.corruption_spent = environment.corruption_spent();

    if (adversarial) {
        // best fixed action in hindsight: replay the (deterministic) schedule
        // to accumulate per-arm totals at the checkpoints
        std::vector<std::vector<double>> arm_csums;
        {
            std::vector<double> cum(cfg.sb_d, 0.0);
            std::size_t next = 0;
            env::SemiBanditEnv env2(cfg.sb_d, *cfg.sb_regime);
            Rng replay_rng(res.seed, 0, StreamTag::Environment);
            for (long t = 1; t <= cfg.T; ++t) {
                const auto o = env2.emit(t, replay_rng);
                for (int i = 0; i < cfg.sb_d; ++i) cum[i] += o.losses[i];
                if (next < grid.size() && t == grid[next]) {
                    arm_csums.push_back(cum);
                    ++next;
                }
            }
        }
        const auto& last = arm_csums.back();
        std::vector<int> comparator_arms;
        if (cfg.sb_vertices) {
            int arg = 0;
            double best = 1e300;
            for (std::size_t v = 0; v < cfg.sb_vertices->size(); ++v) {
                double val = 0.0;
                for (int i = 0; i < cfg.sb_d; ++i) val += last[i] * (*cfg.sb_vertices)[v][i];
                if (val < best) {
                    best = val;
                    arg = static_cast<int>(v);
                }
            }
            for (int i = 0; i < cfg.sb_d; ++i)
                if ((*cfg.sb_vertices)[arg][i]) comparator_arms.push_back(i);
        } else {
            std::vector<int> order(cfg.sb_d);
            std::iota(order.begin(), order.end(), 0);
            std::stable_sort(order.begin(), order.end(),
                             [&](int i, int j) { return last[i] < last[j]; });
            comparator_arms.assign(order.begin(), order.begin() + *cfg.sb_m);
        }
        const std::vector<double> learner_cp = acc.realized_learner_series();
        res.regret.assign(grid.size(), 0.0);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            double comp = 0.0;
            for (int a : comparator_arms) comp += arm_csums[i][a];
            res.regret[i] = learner_cp[i] - comp;
        }
    } else {
        res.regret = acc.pseudo_series();
    }
    return res;
}

// One partial-monitoring replication.
inline ReplicationResult run_pm_replication(const ExperimentConfig& cfg,
                                            const pm::GameAnalysis& an, int rep,
                                            const std::vector<long>& grid) {
    ReplicationResult res;
    res.seed = cfg.base_seed + static_cast<std::uint64_t>(rep);
    Rng learner_rng(res.seed, 0, StreamTag::Learner);
    Rng env_rng(res.seed, 0, StreamTag::Environment);

    const auto& game = *cfg.game;
    env::PMEnv environment(game.k, game.d, game.loss, *cfg.pm_regime);

    const bool adversarial = std::holds_alternative<env::PMAdversarial>(*cfg.pm_regime);
    std::vector<double> gaps;
    if (!adversarial) {
        const auto& nu = std::holds_alternative<env::PMStochastic>(*cfg.pm_regime)
                             ? std::get<env::PMStochastic>(*cfg.pm_regime).nu
                             : std::get<env::PMCorrupted>(*cfg.pm_regime).nu;
        gaps = env::pm_gaps(game.k, game.d, game.loss, nu).first;
    }

    env::RegretAccountant acc(grid, game.k);

    auto account = [&](long t, int action, int outcome_x) {
        if (adversarial) {
            std::vector<double> comp(game.k);
            for (int a = 0; a < game.k; ++a) comp[a] = game.loss_at(a, outcome_x);
            acc.record_realized(t, game.loss_at(action, outcome_x), comp);
        } else {
            acc.record_pseudo(t, gaps[action]);
        }
    };

    if (cfg.algorithm == Algorithm::PmLocal) {
        pm::LocalPMLearner learner(an, cfg.T, cfg.epsilon_local);
        learner.exo_iteration_cap = cfg.exo_iteration_cap;
        learner.exo_stall_window = cfg.exo_stall_window;
        for (long t = 1; t <= cfg.T; ++t) {
            const auto outcome = environment.emit(t, env_rng);
            const auto log = learner.play_round(outcome.x, learner_rng);
            account(t, log.action, outcome.x);
        }
        res.exo_fallbacks = learner.fallback_count();
        res.exo_nonconverged = learner.nonconverged_count();
    } else {
        pm::GlobalPMLearner learner(an, cfg.T, cfg.c1);
        for (long t = 1; t <= cfg.T; ++t) {
            const auto outcome = environment.emit(t, env_rng);
            const auto log = learner.play_round(outcome.x, learner_rng);
            account(t, log.action, outcome.x);
        }
        res.gamma_clamps = learner.clamp_count();
    }
    res.corruption_spent = environment.corruption_spent();
    res.regret = adversarial ? acc.realized_series() : acc.pseudo_series();
    return res;
}

} // namespace detail

inline int default_worker_count() {
    if (const char* e = std::getenv("BOBW_WORKERS")) {
        const int n = std::atoi(e);
        if (n > 0) return n;
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? static_cast<int>(hc) : 1;
}

inline RunArtifact run(const ExperimentConfig& cfg, int workers = 0) {
    RunArtifact art;
    art.config = cfg;
    art.checkpoints = env::checkpoint_grid(cfg.T);

    std::optional<pm::GameAnalysis> analysis;
    if (cfg.is_pm()) {
        analysis = pm::analyze(*cfg.game); // throws game_error on rejection
        art.observability = analysis->observability;
        if (cfg.algorithm == Algorithm::PmLocal &&
            analysis->observability != pm::Observability::Locally)
            throw config_error(std::string("pm-local requires a locally observable game; "
                                           "this game is ") +
                               pm::to_string(analysis->observability));
        if (cfg.algorithm == Algorithm::PmGlobal &&
            analysis->observability == pm::Observability::NotGlobal)
            throw config_error("pm-global requires a globally observable game");
        if (!std::holds_alternative<env::PMAdversarial>(*cfg.pm_regime)) {
            const auto& nu = std::holds_alternative<env::PMStochastic>(*cfg.pm_regime)
                                 ? std::get<env::PMStochastic>(*cfg.pm_regime).nu
                                 : std::get<env::PMCorrupted>(*cfg.pm_regime).nu;
            env::pm_gaps(cfg.game->k, cfg.game->d, cfg.game->loss, nu); // tie check
        }
    } else if (!std::holds_alternative<env::SBAdversarial>(*cfg.sb_regime)) {
        const auto& means = std::holds_alternative<env::SBStochastic>(*cfg.sb_regime)
                                ? std::get<env::SBStochastic>(*cfg.sb_regime).means
                                : std::get<env::SBCorrupted>(*cfg.sb_regime).base.means;
        if (static_cast<int>(means.size()) != cfg.sb_d)
            throw config_error("config: means length must match d");
        if (!cfg.sb_vertices) env::SemiBanditEnv::best_mset_arms(means, *cfg.sb_m); // tie check
    }

    art.replications.resize(cfg.replications);
    if (workers <= 0) workers = default_worker_count();
    workers = std::min(workers, cfg.replications);

    std::atomic<int> next{0};
    std::atomic<bool> failed{false};
    std::string error_message;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const int r = next.fetch_add(1);
            if (r >= cfg.replications || failed.load()) return;
            try {
                art.replications[r] =
                    cfg.is_pm() ? detail::run_pm_replication(cfg, *analysis, r, art.checkpoints)
                                : detail::run_sb_replication(cfg, r, art.checkpoints);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(error_mutex);
                failed.store(true);
                if (error_message.empty()) error_message = e.what();
            }
        }
    };
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (failed.load()) throw std::runtime_error("replication failed: " + error_message);

    art.mean.assign(art.checkpoints.size(), 0.0);
    for (const auto& rep : art.replications)
        for (std::size_t i = 0; i < art.mean.size(); ++i)
            art.mean[i] += rep.regret[i] / cfg.replications;
    art.q10 = detail::quantile_curve(art.replications, art.checkpoints.size(), 0.10);
    art.median = detail::quantile_curve(art.replications, art.checkpoints.size(), 0.50);
    art.q90 = detail::quantile_curve(art.replications, art.checkpoints.size(), 0.90);
    return art;
}

inline nlohmann::json artifact_to_json(const RunArtifact& art) {
    nlohmann::json j;
    j["schema"] = "bobw-run-artifact-v1";
    j["config"] = art.config.echo;
    j["checkpoints"] = art.checkpoints;
    if (art.config.is_pm()) j["observability"] = pm::to_string(art.observability);
    nlohmann::json reps = nlohmann::json::array();
    long fallbacks = 0, nonconv = 0, clamps = 0;
    double corruption = 0.0;
    for (std::size_t r = 0; r < art.replications.size(); ++r) {
        const auto& rep = art.replications[r];
        reps.push_back({{"replication", r},
                        {"seed", rep.seed},
                        {"regret", rep.regret},
                        {"corruption_spent", rep.corruption_spent}});
        fallbacks += rep.exo_fallbacks;
        nonconv += rep.exo_nonconverged;
        clamps += rep.gamma_clamps;
        corruption += rep.corruption_spent;
    }
    j["replications"] = reps;
    j["aggregate"] = {{"mean", art.mean}, {"q10", art.q10}, {"median", art.median},
                      {"q90", art.q90}};
    j["diagnostics"] = {{"exo_fallbacks", fallbacks},
                        {"exo_nonconverged", nonconv},
                        {"gamma_clamps", clamps},
                        {"corruption_spent_total", corruption}};
    return j;
}

// Structural validation of the documented artifact schema.
inline void validate_artifact(const nlohmann::json& j) {
    auto need = [&](const char* key, bool ok) {
        if (!ok) throw std::runtime_error(std::string("artifact: bad or missing \"") + key + "\"");
    };
    need("schema", j.value("schema", "") == "bobw-run-artifact-v1");
    need("config", j.contains("config") && j.at("config").is_object());
    need("checkpoints", j.contains("checkpoints") && j.at("checkpoints").is_array());
    need("replications", j.contains("replications") && j.at("replications").is_array());
    need("aggregate", j.contains("aggregate") && j.at("aggregate").is_object());
    const auto& agg = j.at("aggregate");
    for (const char* key : {"mean", "q10", "median", "q90"}) {
        need(key, agg.contains(key) && agg.at(key).is_array() &&
                      agg.at(key).size() == j.at("checkpoints").size());
    }
    need("diagnostics", j.contains("diagnostics") && j.at("diagnostics").is_object());
    for (const auto& rep : j.at("replications")) {
        need("replications[].regret",
             rep.contains("regret") && rep.at("regret").size() == j.at("checkpoints").size());
        need("replications[].seed", rep.contains("seed"));
    }
}

// ---------------------------------------------------------------------------
// Growth-rate fitting
// ---------------------------------------------------------------------------

enum class GrowthModel { LogT, SqrtT, T23, Linear };

inline GrowthModel parse_model(const std::string& s) {
    if (s == "logT") return GrowthModel::LogT;
    if (s == "sqrtT") return GrowthModel::SqrtT;
    if (s == "T23") return GrowthModel::T23;
    if (s == "linear") return GrowthModel::Linear;
    throw config_error("slope-check: unknown model \"" + s + "\" (logT|sqrtT|T23|linear)");
}

inline double growth_value(GrowthModel m, double t) {
    switch (m) {
    case GrowthModel::LogT: return std::log(t);
    case GrowthModel::SqrtT: return std::sqrt(t * std::log(t));
    case GrowthModel::T23: return std::pow(t, 2.0 / 3.0);
    case GrowthModel::Linear: return t;
    }
    return 1.0;
}

struct SlopeReport {
    GrowthModel model;
    double fitted_coefficient = 0.0; // least squares over the second half
    std::vector<double> ratios;      // R(t)/f(t) at every checkpoint
    double quotient_last_two = 0.0;  // ratio(T) / ratio(T/2)
    double quotient_quarter = 0.0;   // ratio(T) / ratio(T/4)
};

inline SlopeReport slope_check(const std::vector<long>& checkpoints,
                               const std::vector<double>& regret, GrowthModel model) {
    if (checkpoints.size() < 10)
        throw config_error("slope-check: need at least 10 checkpoints");
    if (checkpoints.size() != regret.size())
        throw config_error("slope-check: checkpoint/regret length mismatch");

    SlopeReport rep;
    rep.model = model;
    rep.ratios.resize(checkpoints.size());
    for (std::size_t i = 0; i < checkpoints.size(); ++i)
        rep.ratios[i] = regret[i] / growth_value(model, static_cast<double>(checkpoints[i]));

    double num = 0.0, den = 0.0;
    for (std::size_t i = checkpoints.size() / 2; i < checkpoints.size(); ++i) {
        const double f = growth_value(model, static_cast<double>(checkpoints[i]));
        num += regret[i] * f;
        den += f * f;
    }
    rep.fitted_coefficient = den > 0 ? num / den : 0.0;

    const std::size_t n = checkpoints.size();
    rep.quotient_last_two = rep.ratios[n - 1] / rep.ratios[n - 2];
    rep.quotient_quarter = rep.ratios[n - 1] / rep.ratios[n - 3];
    return rep;
}

inline nlohmann::json slope_report_to_json(const SlopeReport& rep) {
    const char* names[] = {"logT", "sqrtT", "T23", "linear"};
    return {{"model", names[static_cast<int>(rep.model)]},
            {"fitted_coefficient", rep.fitted_coefficient},
            {"ratios", rep.ratios},
            {"quotient_last_two", rep.quotient_last_two},
            {"quotient_T_vs_quarter", rep.quotient_quarter}};
}

} // namespace bobw::harness
