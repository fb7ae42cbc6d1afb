#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bobw/harness.hpp"
#include "helpers.hpp"

using namespace bobw;
using namespace bobw::harness;

namespace {

nlohmann::json pm_local_config(long T, int reps, std::uint64_t seed) {
    nlohmann::json j;
    j["algorithm"] = "pm-local";
    j["T"] = T;
    j["replications"] = reps;
    j["base_seed"] = seed;
    j["game"] = pm::game_to_json(testgames::apple_tasting());
    j["environment"] = {{"type", "stochastic"}, {"nu_star", {0.3, 0.7}}};
    return j;
}

nlohmann::json sb_config(long T, int reps, std::uint64_t seed) {
    nlohmann::json j;
    j["algorithm"] = "lbinfv-ls";
    j["T"] = T;
    j["replications"] = reps;
    j["base_seed"] = seed;
    j["semi_bandit"] = {{"d", 3}, {"m", 1}};
    j["environment"] = {{"type", "stochastic"}, {"means", {0.2, 0.5, 0.8}}, {"law", "bernoulli"}};
    return j;
}

} // namespace

TEST_CASE("config validation") {
    SUBCASE("unknown algorithm") {
        auto j = sb_config(64, 1, 0);
        j["algorithm"] = "exp3";
        CHECK_THROWS_AS(parse_config(j), config_error);
    }
    SUBCASE("pm-local with too small a horizon") {
        CHECK_THROWS_AS(parse_config(pm_local_config(4, 1, 0)), config_error);
    }
    SUBCASE("pm algorithms require a game") {
        auto j = pm_local_config(64, 1, 0);
        j.erase("game");
        CHECK_THROWS_AS(parse_config(j), config_error);
    }
    SUBCASE("pm-local refuses a globally-only observable game") {
        auto j = pm_local_config(64, 1, 0);
        j["game"] = pm::game_to_json(testgames::spam_filter());
        j["environment"]["nu_star"] = {0.3, 0.7};
        const auto cfg = parse_config(j);
        CHECK_THROWS_AS(run(cfg, 1), config_error);
    }
    SUBCASE("pm-global refuses a hopeless game") {
        auto j = pm_local_config(64, 1, 0);
        j["algorithm"] = "pm-global";
        j["game"] = pm::game_to_json(testgames::hopeless());
        const auto cfg = parse_config(j);
        CHECK_THROWS_AS(run(cfg, 1), config_error);
    }
    SUBCASE("stochastic ties are refused") {
        auto j = pm_local_config(64, 1, 0);
        j["environment"]["nu_star"] = {0.5, 0.5};
        CHECK_THROWS_AS(run(parse_config(j), 1), config_error);
    }
}

TEST_CASE("runs are deterministic given the base seed") {
    SUBCASE("pm-local artifact repeats byte for byte") {
        const auto cfg = parse_config(pm_local_config(64, 2, 11));
        const auto a = artifact_to_json(run(cfg, 1)).dump();
        const auto b = artifact_to_json(run(cfg, 2)).dump(); // worker count must not matter
        CHECK(a == b);
    }
    SUBCASE("semi-bandit artifact repeats byte for byte") {
        const auto cfg = parse_config(sb_config(64, 2, 5));
        const auto a = artifact_to_json(run(cfg, 1)).dump();
        const auto b = artifact_to_json(run(cfg, 1)).dump();
        CHECK(a == b);
    }
    SUBCASE("different seeds give different traces") {
        const auto a = artifact_to_json(run(parse_config(sb_config(64, 1, 1)), 1)).dump();
        const auto b = artifact_to_json(run(parse_config(sb_config(64, 1, 2)), 1)).dump();
        CHECK(a != b);
    }
}

TEST_CASE("artifact schema") {
    const auto art = run(parse_config(sb_config(64, 2, 3)), 1);
    auto j = artifact_to_json(art);
    validate_artifact(j); // must not throw
    j["aggregate"].erase("q10");
    CHECK_THROWS(validate_artifact(j));
}

TEST_CASE("corrupted pm run accounts the budget") {
    auto j = pm_local_config(128, 2, 9);
    j["environment"] = {{"type", "corrupted"},
                        {"nu_star", {0.3, 0.7}},
                        {"budget", 5.0},
                        {"strategy", "flip_to_worst"}};
    const auto art = run(parse_config(j), 1);
    for (const auto& rep : art.replications) {
        CHECK(rep.corruption_spent <= 5.0 + 1e-12);
        CHECK(rep.corruption_spent > 0.0);
    }
}

TEST_CASE("adversarial semi-bandit regret is against the best fixed action") {
    nlohmann::json j = sb_config(64, 1, 4);
    j["environment"] = {{"type", "adversarial"},
                        {"schedule",
                         {{"loss_vectors", {{1.0, 0.0, 1.0}, {0.0, 1.0, 1.0}}},
                          {"first_block", 1},
                          {"growth", 2.0}}}};
    const auto art = run(parse_config(j), 1);
    // arm 2 always loses 1; arms 0/1 alternate -> comparator ~ T/2, regret finite
    CHECK(art.replications[0].regret.back() > -1e-9);
}

TEST_CASE("slope check") {
    std::vector<long> grid = env::checkpoint_grid(1 << 14);

    SUBCASE("exactly linear trace against the linear model has quotient 1") {
        std::vector<double> regret;
        for (long t : grid) regret.push_back(3.5 * static_cast<double>(t));
        const auto rep = slope_check(grid, regret, GrowthModel::Linear);
        CHECK(std::abs(rep.quotient_last_two - 1.0) <= 1e-9);
        CHECK(std::abs(rep.quotient_quarter - 1.0) <= 1e-9);
        CHECK(rep.fitted_coefficient == doctest::Approx(3.5));
    }
    SUBCASE("c log t trace recovers c within 1%") {
        std::vector<double> regret;
        for (long t : grid) regret.push_back(7.25 * std::log(static_cast<double>(t)));
        const auto rep = slope_check(grid, regret, GrowthModel::LogT);
        CHECK(rep.fitted_coefficient == doctest::Approx(7.25).epsilon(0.01));
        CHECK(rep.quotient_quarter == doctest::Approx(1.0).epsilon(1e-9));
    }
    SUBCASE("sqrt model ratio function is sqrt(t log t)") {
        std::vector<double> regret;
        for (long t : grid)
            regret.push_back(2.0 * std::sqrt(static_cast<double>(t) *
                                             std::log(static_cast<double>(t))));
        const auto rep = slope_check(grid, regret, GrowthModel::SqrtT);
        CHECK(rep.quotient_quarter == doctest::Approx(1.0).epsilon(1e-9));
    }
    SUBCASE("too few checkpoints are rejected") {
        std::vector<long> tiny{8, 16, 32};
        std::vector<double> r{1, 2, 3};
        CHECK_THROWS_AS(slope_check(tiny, r, GrowthModel::LogT), config_error);
    }
}

TEST_CASE("small end-to-end regret sanity") {
    // 3-armed bandit with clear gaps: the learner should concentrate and the
    // final pseudo-regret per round should be far below the worst arm's gap
    const auto art = run(parse_config(sb_config(2048, 4, 21)), 0);
    const double final_regret = art.mean.back();
    CHECK(final_regret > 0.0);
    CHECK(final_regret < 0.3 * 2048 * 0.6);
}
