#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <variant>
#include <vector>

#include "bobw/math/rng.hpp"

// Outcome and loss generators for stochastic, adversarial (oblivious), and
// corrupted-stochastic regimes, plus pseudo-regret accounting. Environments
// own their randomness stream; corruption is budgeted in the infinity norm
// of the induced loss-column change and passes through untouched once the
// budget is spent.

namespace bobw::env {

struct config_error : std::runtime_error {
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

enum class LossLaw { Bernoulli, UniformInterval };

enum class CorruptionStrategy { FlipToWorst, TargetedArmBoost };

// Oblivious block schedule: entry i of `items` is played during block i
// (cycling), block lengths start at first_block and are multiplied by
// `growth` after each block.
struct BlockSchedule {
    std::vector<int> items;
    long first_block = 1;
    double growth = 2.0;

    int at(long t) const { // t is 1-based
        if (items.empty()) throw config_error("schedule: no items");
        if (growth == 1.0) {
            const long block = (t - 1) / std::max<long>(1, first_block);
            return items[block % items.size()];
        }
        long start = 1;
        double len = static_cast<double>(first_block);
        for (std::size_t block = 0;; ++block) {
            const long ilen = std::max<long>(1, static_cast<long>(len));
            if (t < start + ilen) return items[block % items.size()];
            start += ilen;
            len *= growth;
        }
    }
};

// ---------------------------------------------------------------------------
// Partial monitoring environments
// ---------------------------------------------------------------------------

struct PMStochastic {
    std::vector<double> nu; // outcome distribution on [d]
};
struct PMAdversarial {
    BlockSchedule schedule; // items are outcome indices
};
struct PMCorrupted {
    std::vector<double> nu;
    CorruptionStrategy strategy = CorruptionStrategy::FlipToWorst;
    int target_arm = 0; // for TargetedArmBoost
    double budget = 0.0;
};
using PMRegime = std::variant<PMStochastic, PMAdversarial, PMCorrupted>;

struct PMOutcome {
    int x = 0;        // outcome the learner is scored and fed back on
    int x_shadow = 0; // pre-corruption outcome
    double corruption_cost = 0.0;
};

class PMEnv {
public:
    PMEnv(int k, int d, std::vector<double> loss_matrix, PMRegime regime)
        : k_(k), d_(d), loss_(std::move(loss_matrix)), regime_(std::move(regime)) {
        if (static_cast<int>(loss_.size()) != k_ * d_)
            throw config_error("PMEnv: loss matrix size mismatch");
        if (const auto* s = std::get_if<PMStochastic>(&regime_)) check_dist(s->nu);
        if (const auto* c = std::get_if<PMCorrupted>(&regime_)) {
            check_dist(c->nu);
            if (c->budget < 0) throw config_error("PMEnv: negative corruption budget");
            budget_left_ = c->budget;
            const auto exp_loss = expected_losses(c->nu);
            const int astar = static_cast<int>(
                std::min_element(exp_loss.begin(), exp_loss.end()) - exp_loss.begin());
            // flip-to-worst pushes outcomes toward the column maximizing the
            // base-optimal action's loss
            flip_target_ = 0;
            for (int x = 1; x < d_; ++x)
                if (loss_at(astar, x) > loss_at(astar, flip_target_)) flip_target_ = x;
            if (c->strategy == CorruptionStrategy::TargetedArmBoost) {
                if (c->target_arm < 0 || c->target_arm >= k_)
                    throw config_error("PMEnv: target arm out of range");
                boost_target_ = 0;
                for (int x = 1; x < d_; ++x)
                    if (loss_at(c->target_arm, x) < loss_at(c->target_arm, boost_target_))
                        boost_target_ = x;
            }
        }
    }

    double loss_at(int a, int x) const { return loss_[static_cast<std::size_t>(a) * d_ + x]; }

    PMOutcome emit(long t, Rng& rng) {
        PMOutcome out;
        if (const auto* s = std::get_if<PMStochastic>(&regime_)) {
            out.x = out.x_shadow = sample(s->nu, rng);
        } else if (const auto* a = std::get_if<PMAdversarial>(&regime_)) {
            out.x = out.x_shadow = a->schedule.at(t);
            if (out.x < 0 || out.x >= d_) throw config_error("PMEnv: schedule outcome out of range");
        } else {
            const auto& c = std::get<PMCorrupted>(regime_);
            out.x_shadow = sample(c.nu, rng);
            out.x = out.x_shadow;
            const int proposal = (c.strategy == CorruptionStrategy::FlipToWorst)
                                     ? flip_target_
                                     : boost_target_;
            double cost = 0.0;
            for (int a2 = 0; a2 < k_; ++a2)
                cost = std::max(cost, std::abs(loss_at(a2, proposal) - loss_at(a2, out.x_shadow)));
            if (cost > 0.0 && cost <= budget_left_) {
                out.x = proposal;
                out.corruption_cost = cost;
                budget_left_ -= cost;
            }
        }
        return out;
    }

    double corruption_spent() const {
        const auto* c = std::get_if<PMCorrupted>(&regime_);
        return c ? c->budget - budget_left_ : 0.0;
    }

    std::vector<double> expected_losses(const std::vector<double>& nu) const {
        std::vector<double> e(k_, 0.0);
        for (int a = 0; a < k_; ++a)
            for (int x = 0; x < d_; ++x) e[a] += loss_at(a, x) * nu[x];
        return e;
    }

private:
    void check_dist(const std::vector<double>& nu) const {
        if (static_cast<int>(nu.size()) != d_) throw config_error("PMEnv: nu size mismatch");
        double s = 0.0;
        for (double p : nu) {
            if (p < 0) throw config_error("PMEnv: negative probability");
            s += p;
        }
        if (std::abs(s - 1.0) > 1e-9) throw config_error("PMEnv: nu does not sum to 1");
    }

    static int sample(const std::vector<double>& nu, Rng& rng) {
        double u = rng.next_double(), acc = 0.0;
        for (std::size_t x = 0; x + 1 < nu.size(); ++x) {
            acc += nu[x];
            if (u < acc) return static_cast<int>(x);
        }
        return static_cast<int>(nu.size()) - 1;
    }

    int k_, d_;
    std::vector<double> loss_;
    PMRegime regime_;
    double budget_left_ = 0.0;
    int flip_target_ = 0, boost_target_ = 0;
};

// Delta_a = (L nu)_a - min_b (L nu)_b; the optimal action must be unique.
inline std::pair<std::vector<double>, int> pm_gaps(int k, int d,
                                                   const std::vector<double>& loss,
                                                   const std::vector<double>& nu) {
    std::vector<double> e(k, 0.0);
    for (int a = 0; a < k; ++a)
        for (int x = 0; x < d; ++x) e[a] += loss[static_cast<std::size_t>(a) * d + x] * nu[x];
    const int astar = static_cast<int>(std::min_element(e.begin(), e.end()) - e.begin());
    for (int a = 0; a < k; ++a)
        if (a != astar && e[a] - e[astar] <= 1e-9)
            throw config_error("stochastic regime requires a unique optimal action");
    std::vector<double> gaps(k);
    for (int a = 0; a < k; ++a) gaps[a] = e[a] - e[astar];
    return {gaps, astar};
}

// ---------------------------------------------------------------------------
// Semi-bandit environments
// ---------------------------------------------------------------------------

struct SBStochastic {
    std::vector<double> means;
    LossLaw law = LossLaw::Bernoulli;
};
struct SBAdversarial {
    std::vector<std::vector<double>> loss_vectors; // cycled by the block schedule
    long first_block = 1;
    double growth = 2.0;
};
struct SBCorrupted {
    SBStochastic base;
    CorruptionStrategy strategy = CorruptionStrategy::FlipToWorst;
    int target_arm = 0;
    double budget = 0.0;
};
using SBRegime = std::variant<SBStochastic, SBAdversarial, SBCorrupted>;

struct SBOutcome {
    std::vector<double> losses;
    std::vector<double> losses_shadow;
    double corruption_cost = 0.0;
};

class SemiBanditEnv {
public:
    // flip_arms: the arms driven to loss 1 by the flip-to-worst corruption;
    // for an m-set geometry these are the base-optimal m arms.
    SemiBanditEnv(int d, SBRegime regime, std::vector<int> flip_arms = {})
        : d_(d), regime_(std::move(regime)), best_arms_(std::move(flip_arms)) {
        if (const auto* s = std::get_if<SBStochastic>(&regime_)) check_means(s->means);
        if (const auto* a = std::get_if<SBAdversarial>(&regime_)) {
            if (a->loss_vectors.empty()) throw config_error("SemiBanditEnv: empty schedule");
            for (const auto& v : a->loss_vectors) check_means(v);
        }
        if (const auto* c = std::get_if<SBCorrupted>(&regime_)) {
            check_means(c->base.means);
            if (c->budget < 0) throw config_error("SemiBanditEnv: negative corruption budget");
            budget_left_ = c->budget;
            if (c->strategy == CorruptionStrategy::FlipToWorst && best_arms_.empty())
                throw config_error("SemiBanditEnv: flip-to-worst corruption needs target arms");
        }
    }

    SBOutcome emit(long t, Rng& rng) {
        SBOutcome out;
        if (const auto* s = std::get_if<SBStochastic>(&regime_)) {
            out.losses = out.losses_shadow = draw(*s, rng);
        } else if (const auto* a = std::get_if<SBAdversarial>(&regime_)) {
            BlockSchedule sched;
            sched.items.resize(a->loss_vectors.size());
            std::iota(sched.items.begin(), sched.items.end(), 0);
            sched.first_block = a->first_block;
            sched.growth = a->growth;
            out.losses = out.losses_shadow = a->loss_vectors[sched.at(t)];
        } else {
            const auto& c = std::get<SBCorrupted>(regime_);
            out.losses_shadow = draw(c.base, rng);
            out.losses = out.losses_shadow;
            std::vector<double> proposal = out.losses_shadow;
            if (c.strategy == CorruptionStrategy::FlipToWorst) {
                for (int i : best_arms_) proposal[i] = 1.0;
            } else {
                proposal[c.target_arm] = 0.0;
            }
            double cost = 0.0;
            for (int i = 0; i < d_; ++i)
                cost = std::max(cost, std::abs(proposal[i] - out.losses_shadow[i]));
            if (cost > 0.0 && cost <= budget_left_) {
                out.losses = std::move(proposal);
                out.corruption_cost = cost;
                budget_left_ -= cost;
            }
        }
        return out;
    }

    double corruption_spent() const {
        const auto* c = std::get_if<SBCorrupted>(&regime_);
        return c ? c->budget - budget_left_ : 0.0;
    }

    static std::vector<int> best_mset_arms(const std::vector<double>& means, int m) {
        std::vector<int> order(means.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](int i, int j) { return means[i] < means[j]; });
        if (static_cast<int>(means.size()) > m &&
            means[order[m]] - means[order[m - 1]] <= 1e-9)
            throw config_error("stochastic regime requires a unique optimal action "
                               "(tie at the m-set boundary)");
        return {order.begin(), order.begin() + m};
    }

private:
    void check_means(const std::vector<double>& v) const {
        if (static_cast<int>(v.size()) != d_) throw config_error("SemiBanditEnv: size mismatch");
        for (double x : v)
            if (!(x >= 0.0 && x <= 1.0))
                throw config_error("SemiBanditEnv: losses/means must lie in [0,1]");
    }

    std::vector<double> draw(const SBStochastic& s, Rng& rng) const {
        std::vector<double> l(d_);
        for (int i = 0; i < d_; ++i) {
            if (s.law == LossLaw::Bernoulli) {
                l[i] = rng.bernoulli(s.means[i]) ? 1.0 : 0.0;
            } else {
                const double r = std::min(s.means[i], 1.0 - s.means[i]);
                l[i] = s.means[i] + (2.0 * rng.next_double() - 1.0) * r;
            }
        }
        return l;
    }

    int d_;
    SBRegime regime_;
    double budget_left_ = 0.0;
    std::vector<int> best_arms_;
};

// ---------------------------------------------------------------------------
// Regret accounting
// ---------------------------------------------------------------------------

// Streams per-round increments and keeps cumulative values at a fixed
// checkpoint grid. Stochastic (and corrupted) regimes record pseudo-regret
// computed from gaps; adversarial regimes record realized regret against the
// best fixed comparator in hindsight at the horizon.
class RegretAccountant {
public:
    RegretAccountant(std::vector<long> checkpoints, int comparator_count, bool keep_full = false)
        : checkpoints_(std::move(checkpoints)), cum_comparators_(comparator_count, 0.0),
          keep_full_(keep_full) {}

    // Stochastic: increment = Delta_{A_t} (PM) or <mu, a - a*> (semi-bandit).
    void record_pseudo(long t, double gap_increment) {
        cum_pseudo_ += gap_increment;
        if (keep_full_) full_.push_back(cum_pseudo_);
        if (next_cp_ < checkpoints_.size() && t == checkpoints_[next_cp_]) {
            cp_pseudo_.push_back(cum_pseudo_);
            cp_comparators_.push_back(cum_comparators_);
            cp_learner_.push_back(cum_learner_);
            ++next_cp_;
        }
    }

    // Adversarial: learner_loss is the realized loss, comparator_losses the
    // per-action true losses this round.
    void record_realized(long t, double learner_loss, const std::vector<double>& comparator_losses) {
        cum_learner_ += learner_loss;
        for (std::size_t a = 0; a < cum_comparators_.size(); ++a)
            cum_comparators_[a] += comparator_losses[a];
        record_pseudo(t, 0.0);
    }

    // Cumulative pseudo-regret at the checkpoint grid.
    std::vector<double> pseudo_series() const { return cp_pseudo_; }

    // Learner's cumulative realized loss at the grid.
    std::vector<double> realized_learner_series() const { return cp_learner_; }

    // Realized regret at the grid against the fixed comparator that is best
    // at the final checkpoint.
    std::vector<double> realized_series() const {
        if (cp_comparators_.empty()) return {};
        const auto& last = cp_comparators_.back();
        const int best = static_cast<int>(std::min_element(last.begin(), last.end()) - last.begin());
        std::vector<double> out(cp_comparators_.size());
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] = cp_learner_[i] - cp_comparators_[i][best];
        return out;
    }

    const std::vector<long>& checkpoints() const { return checkpoints_; }
    const std::vector<double>& full_series() const { return full_; }
    double cumulative_pseudo() const { return cum_pseudo_; }

private:
    std::vector<long> checkpoints_;
    std::size_t next_cp_ = 0;
    double cum_pseudo_ = 0.0;
    double cum_learner_ = 0.0;
    std::vector<double> cum_comparators_;
    std::vector<double> cp_pseudo_, cp_learner_;
    std::vector<std::vector<double>> cp_comparators_;
    bool keep_full_ = false;
    std::vector<double> full_;
};

// Geometric checkpoint grid {ceil(T 2^-j)} down to 8, ascending, always
// containing T.
inline std::vector<long> checkpoint_grid(long T) {
    if (T < 8) throw config_error("checkpoint grid needs T >= 8");
    std::vector<long> grid;
    for (long v = T; v >= 8;) {
        grid.push_back(v);
        if (v == 8 || (v + 1) / 2 < 8) break;
        v = (v + 1) / 2; // ceil(v/2) keeps the geometric spacing of ceil(T 2^-j)
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    return grid;
}

} // namespace bobw::env
