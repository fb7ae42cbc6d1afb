#pragma once

#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

// Partial-monitoring game: a k x d loss matrix with entries in [0,1] and a
// k x d feedback matrix over a string alphabet. Symbols are interned to
// dense ids at load time.

namespace bobw::pm {

struct game_error : std::runtime_error {
    explicit game_error(const std::string& what) : std::runtime_error(what) {}
};

struct PMGame {
    int k = 0; // actions
    int d = 0; // outcomes
    std::vector<double> loss;     // k*d row-major
    std::vector<int> feedback;    // k*d row-major, symbol ids
    std::vector<std::string> symbols; // id -> name

    double loss_at(int a, int x) const { return loss[static_cast<std::size_t>(a) * d + x]; }
    int symbol_at(int a, int x) const { return feedback[static_cast<std::size_t>(a) * d + x]; }
    int sigma_count() const { return static_cast<int>(symbols.size()); }

    std::vector<int> row_symbols(int a) const {
        std::set<int> seen;
        for (int x = 0; x < d; ++x) seen.insert(symbol_at(a, x));
        return {seen.begin(), seen.end()};
    }

    // Maximum number of distinct symbols in a single row.
    int max_symbols_per_row() const {
        int m = 0;
        for (int a = 0; a < k; ++a) m = std::max<int>(m, static_cast<int>(row_symbols(a).size()));
        return m;
    }
};

inline PMGame parse_game(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("loss") || !j.contains("feedback"))
        throw game_error("game: expected an object with \"loss\" and \"feedback\"");
    const auto& jl = j.at("loss");
    const auto& jf = j.at("feedback");
    if (!jl.is_array() || jl.empty()) throw game_error("game: \"loss\" must be a non-empty array of rows");
    if (!jf.is_array() || jf.size() != jl.size())
        throw game_error("game: \"feedback\" must have the same number of rows as \"loss\"");

    PMGame g;
    g.k = static_cast<int>(jl.size());
    g.d = static_cast<int>(jl.at(0).size());
    if (g.d == 0) throw game_error("game: loss rows must be non-empty");
    g.loss.reserve(static_cast<std::size_t>(g.k) * g.d);
    g.feedback.reserve(static_cast<std::size_t>(g.k) * g.d);

    for (int a = 0; a < g.k; ++a) {
        const auto& row = jl.at(a);
        if (!row.is_array() || static_cast<int>(row.size()) != g.d)
            throw game_error("game: loss[" + std::to_string(a) + "] has inconsistent length");
        for (int x = 0; x < g.d; ++x) {
            const auto& cell = row.at(x);
            if (!cell.is_number())
                throw game_error("game: loss[" + std::to_string(a) + "][" + std::to_string(x) +
                                 "]: expected a number");
            const double v = cell.get<double>();
            if (!(v >= 0.0 && v <= 1.0))
                throw game_error("game: loss[" + std::to_string(a) + "][" + std::to_string(x) +
                                 "]: entries must lie in [0,1]");
            g.loss.push_back(v);
        }
    }
    std::vector<std::string> names;
    for (int a = 0; a < g.k; ++a) {
        const auto& row = jf.at(a);
        if (!row.is_array() || static_cast<int>(row.size()) != g.d)
            throw game_error("game: feedback[" + std::to_string(a) + "] has inconsistent length");
        for (int x = 0; x < g.d; ++x) {
            const auto& cell = row.at(x);
            if (!cell.is_string())
                throw game_error("game: feedback[" + std::to_string(a) + "][" + std::to_string(x) +
                                 "]: expected a string symbol");
            const std::string s = cell.get<std::string>();
            int id = -1;
            for (std::size_t i = 0; i < names.size(); ++i)
                if (names[i] == s) id = static_cast<int>(i);
            if (id < 0) {
                id = static_cast<int>(names.size());
                names.push_back(s);
            }
            g.feedback.push_back(id);
        }
    }
    g.symbols = std::move(names);
    return g;
}

inline nlohmann::json game_to_json(const PMGame& g) {
    nlohmann::json jl = nlohmann::json::array(), jf = nlohmann::json::array();
    for (int a = 0; a < g.k; ++a) {
        nlohmann::json rl = nlohmann::json::array(), rf = nlohmann::json::array();
        for (int x = 0; x < g.d; ++x) {
            rl.push_back(g.loss_at(a, x));
            rf.push_back(g.symbols[g.symbol_at(a, x)]);
        }
        jl.push_back(rl);
        jf.push_back(rf);
    }
    return {{"loss", jl}, {"feedback", jf}};
}

} // namespace bobw::pm
