#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bobw/math/rng.hpp"
#include "bobw/pm/analysis.hpp"
#include "bobw/pm/game.hpp"

// Canonical desk games and a rejection-sampling generator for random
// locally observable games used across the tests.

namespace testgames {

inline bobw::pm::PMGame from_lists(const std::vector<std::vector<double>>& loss,
                                   const std::vector<std::vector<std::string>>& feedback) {
    nlohmann::json j;
    j["loss"] = loss;
    j["feedback"] = feedback;
    return bobw::pm::parse_game(j);
}

// Two actions; the second is revealing. Locally observable.
inline bobw::pm::PMGame apple_tasting() {
    return from_lists({{1, 0}, {0, 1}}, {{"a", "a"}, {"b", "c"}});
}

// Two uninformative Pareto actions plus a dominated revealing action:
// globally but not locally observable.
inline bobw::pm::PMGame spam_filter() {
    return from_lists({{0, 1}, {1, 0}, {0.75, 0.75}},
                      {{"a", "a"}, {"a", "a"}, {"b", "c"}});
}

// Two uninformative actions and nothing else: not globally observable.
inline bobw::pm::PMGame hopeless() {
    return from_lists({{0, 1}, {1, 0}}, {{"a", "a"}, {"a", "a"}});
}

// Three Pareto actions, every row revealing; locally observable, m = 3.
inline bobw::pm::PMGame cyclic3() {
    return from_lists({{0, 1, 1}, {1, 0, 1}, {1, 1, 0}},
                      {{"x", "y", "z"}, {"x", "y", "z"}, {"x", "y", "z"}});
}

inline bobw::pm::PMGame random_game(bobw::Rng& rng, int k, int d) {
    std::vector<std::vector<double>> loss(k, std::vector<double>(d));
    std::vector<std::vector<std::string>> fb(k, std::vector<std::string>(d));
    for (int a = 0; a < k; ++a) {
        const bool revealing = rng.bernoulli(0.5);
        for (int x = 0; x < d; ++x) {
            loss[a][x] = rng.next_double();
            const int sym = revealing ? x : static_cast<int>(rng.next_below(d));
            fb[a][x] = std::string(1, static_cast<char>('a' + sym));
        }
    }
    return from_lists(loss, fb);
}

// Draws games until one analyzes as locally observable with at least two
// Pareto actions (so the ExO program is nontrivial).
inline bobw::pm::GameAnalysis random_locally_observable(bobw::Rng& rng, int kmax = 4,
                                                        int dmax = 4) {
    for (int attempt = 0; attempt < 20000; ++attempt) {
        const int k = 2 + static_cast<int>(rng.next_below(kmax - 1));
        const int d = 2 + static_cast<int>(rng.next_below(dmax - 1));
        try {
            auto an = bobw::pm::analyze(random_game(rng, k, d));
            if (an.observability == bobw::pm::Observability::Locally && an.pareto.size() >= 2)
                return an;
        } catch (const bobw::pm::game_error&) {
            // degenerate or duplicate draw; try again
        }
    }
    throw std::runtime_error("random_locally_observable: generator exhausted");
}

} // namespace testgames
