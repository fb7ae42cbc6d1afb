#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

// One-dimensional convex potentials used as separable FTRL regularizers:
// log-barrier, complement negative Shannon entropy, complement log-barrier,
// and the two hybrid combinations
//
//   hybrid(z) = (z - 1 - log z) + gamma * (z + (1-z) log(1-z)),
//
// together with gradients, gradient inverses, Bregman divergences and the
// stability function
//
//   S_q(z) = max_y { (q - y) z - D(y, q) },
//
// whose maximizer solves phi'(y*) = phi'(q) - z.
//
// Public eval/grad/bregman work on (0,1). The stability maximization runs
// over each potential's natural domain ((0,inf) for the log-barrier,
// (-inf,1) for the complement potentials), which is what makes the
// closed-form values (1-q)*xi(-z), zeta(q z) and zeta(-z (1-q)) exact.

namespace bobw {

inline double xi(double x) { return std::exp(-x) + x - 1.0; }

inline double zeta(double x) {
    if (x <= -1.0) throw std::domain_error("zeta: x must be > -1");
    return x - std::log1p(x);
}

enum class PotentialKind {
    LogBarrier,
    CompNegShannon,
    CompLogBarrier,
    HybridLbinfv,
    HybridLocal,
};

inline const char* to_string(PotentialKind k) {
    switch (k) {
    case PotentialKind::LogBarrier: return "log-barrier";
    case PotentialKind::CompNegShannon: return "comp-neg-shannon";
    case PotentialKind::CompLogBarrier: return "comp-log-barrier";
    case PotentialKind::HybridLbinfv: return "hybrid-lbinfv";
    case PotentialKind::HybridLocal: return "hybrid-local";
    }
    return "?";
}

// Thrown by stability() when phi'(q) - z escapes the gradient range, i.e. the
// supremum is attained at the domain boundary and diverges.
struct unbounded_stability_error : std::runtime_error {
    explicit unbounded_stability_error(const std::string& what) : std::runtime_error(what) {}
};

struct StabilityValue {
    double value;
    double slope; // d/dz stability = q - y*(z), by the envelope theorem
};

class Potential {
public:
    explicit Potential(PotentialKind kind, double gamma = 1.0) : kind_(kind), gamma_(gamma) {
        if (is_hybrid() && !(gamma > 0.0))
            throw std::invalid_argument("Potential: hybrid kinds need gamma > 0");
    }

    PotentialKind kind() const { return kind_; }
    double gamma() const { return gamma_; }
    bool is_hybrid() const {
        return kind_ == PotentialKind::HybridLbinfv || kind_ == PotentialKind::HybridLocal;
    }

    double eval(double z) const {
        check01(z, "eval");
        return eval_ext(z);
    }

    double grad(double z) const {
        check01(z, "grad");
        return grad_ext(z);
    }

    double curvature(double z) const {
        check01(z, "curvature");
        return curvature_ext(z);
    }

    // Inverse of the gradient over the natural domain. Closed forms exist for
    // all kinds except the hybrids, which use safeguarded bisection (bracket
    // [1e-15, 1-1e-15], width 1e-12) followed by at most 5 Newton steps; the
    // hybrid gradient diverges at both endpoints, so a sign change is
    // guaranteed.
    double grad_inverse(double g) const {
        switch (kind_) {
        case PotentialKind::LogBarrier:
            if (!(g < 0.0)) throw std::domain_error("grad_inverse: log-barrier needs g < 0");
            return -1.0 / g;
        case PotentialKind::CompNegShannon:
            return 1.0 - std::exp(-(g + 1.0));
        case PotentialKind::CompLogBarrier:
            if (!(g > 0.0)) throw std::domain_error("grad_inverse: comp-log-barrier needs g > 0");
            return 1.0 - 1.0 / g;
        case PotentialKind::HybridLbinfv:
        case PotentialKind::HybridLocal:
            return hybrid_grad_inverse(g);
        }
        throw std::logic_error("grad_inverse: unknown kind");
    }

    double bregman(double x, double y) const {
        check01(x, "bregman");
        check01(y, "bregman");
        return bregman_ext(x, y);
    }

    double stability(double q, double z) const { return stability_with_slope(q, z).value; }

    StabilityValue stability_with_slope(double q, double z) const {
        check01(q, "stability");
        const double target = grad_ext(q) - z;
        switch (kind_) {
        case PotentialKind::LogBarrier:
            if (!(target < 0.0))
                throw unbounded_stability_error("stability: log-barrier unbounded for z <= -1/q");
            break;
        case PotentialKind::CompLogBarrier:
            if (!(target > 0.0))
                throw unbounded_stability_error(
                    "stability: comp-log-barrier unbounded for z >= 1/(1-q)");
            break;
        default:
            break; // gradient range is all of R
        }
        const double y = grad_inverse(target);
        const double value = (q - y) * z - bregman_ext(y, q);
        return {value, q - y};
    }

    // Natural-domain evaluations, used internally by stability() where the
    // maximizer may land outside (0,1).
    double eval_ext(double z) const {
        switch (kind_) {
        case PotentialKind::LogBarrier: return -std::log(z);
        case PotentialKind::CompNegShannon: return (1.0 - z) * std::log1p(-z);
        case PotentialKind::CompLogBarrier: return -std::log1p(-z);
        case PotentialKind::HybridLbinfv:
        case PotentialKind::HybridLocal:
            return z - 1.0 - std::log(z) + gamma_ * (z + (1.0 - z) * std::log1p(-z));
        }
        throw std::logic_error("eval_ext: unknown kind");
    }

    double grad_ext(double z) const {
        switch (kind_) {
        case PotentialKind::LogBarrier: return -1.0 / z;
        case PotentialKind::CompNegShannon: return -std::log1p(-z) - 1.0;
        case PotentialKind::CompLogBarrier: return 1.0 / (1.0 - z);
        case PotentialKind::HybridLbinfv:
        case PotentialKind::HybridLocal:
            return 1.0 - 1.0 / z - gamma_ * std::log1p(-z);
        }
        throw std::logic_error("grad_ext: unknown kind");
    }

    double curvature_ext(double z) const {
        switch (kind_) {
        case PotentialKind::LogBarrier: return 1.0 / (z * z);
        case PotentialKind::CompNegShannon: return 1.0 / (1.0 - z);
        case PotentialKind::CompLogBarrier: return 1.0 / ((1.0 - z) * (1.0 - z));
        case PotentialKind::HybridLbinfv:
        case PotentialKind::HybridLocal:
            return 1.0 / (z * z) + gamma_ / (1.0 - z);
        }
        throw std::logic_error("curvature_ext: unknown kind");
    }

    double bregman_ext(double x, double y) const {
        return eval_ext(x) - eval_ext(y) - grad_ext(y) * (x - y);
    }

private:
    static void check01(double z, const char* who) {
        if (!(z > 0.0) || !(z < 1.0))
            throw std::domain_error(std::string(who) + ": argument must lie in (0,1)");
    }

    // Newton iteration safeguarded by the bracket [1e-15, 1-1e-15], where the
    // diverging hybrid gradient guarantees a sign change. Every evaluation
    // shrinks the bracket; out-of-bracket Newton steps fall back to bisection.
    double hybrid_grad_inverse(double g) const {
        double lo = 1e-15, hi = 1.0 - 1e-15;
        // saturation: the true root sits within 1e-15 of the boundary, which
        // is the closest representable point of the open domain
        if (grad_ext(lo) - g >= 0.0) return lo;
        if (grad_ext(hi) - g <= 0.0) return hi;

        // initial guess from the dominant branch: -1/y for g << 0,
        // -gamma log(1-y) for g >> 0
        double y;
        if (g < -1.0)
            y = std::min(0.5, 1.0 / (1.0 - g));
        else if (g > 1.0 + gamma_)
            y = std::max(0.5, 1.0 - std::exp(-g / gamma_));
        else
            y = 0.5;

        for (int it = 0; it < 200; ++it) {
            const double f = grad_ext(y) - g;
            if (f < 0.0)
                lo = y;
            else
                hi = y;
            const double step = f / curvature_ext(y);
            if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(y)) || hi - lo <= 1e-15)
                return y;
            double next = y - step;
            if (!(next > lo) || !(next < hi)) next = 0.5 * (lo + hi);
            y = next;
        }
        throw std::runtime_error("grad_inverse: hybrid Newton did not converge");
    }

    PotentialKind kind_;
    double gamma_;
};

// Sum of the log-barrier and the complement log-barrier, the per-coordinate
// regularizer of the globally observable learner. Kept outside the Potential
// enum: it is a composite, not one of the five base kinds.
class BarrierPairPotential {
public:
    double eval(double z) const {
        check01(z);
        return -std::log(z) - std::log1p(-z);
    }
    double grad(double z) const {
        check01(z);
        return -1.0 / z + 1.0 / (1.0 - z);
    }
    double curvature(double z) const {
        check01(z);
        return 1.0 / (z * z) + 1.0 / ((1.0 - z) * (1.0 - z));
    }
    // -1/y + 1/(1-y) = g  =>  y = 1/2 + g / (2 (2 + sqrt(g^2 + 4))), written
    // in the cancellation-free form.
    double grad_inverse(double g) const {
        return 0.5 + g / (2.0 * (2.0 + std::sqrt(g * g + 4.0)));
    }

private:
    static void check01(double z) {
        if (!(z > 0.0) || !(z < 1.0))
            throw std::domain_error("BarrierPairPotential: argument must lie in (0,1)");
    }
};

} // namespace bobw
