#include "rr/mis.hpp"

#include <cmath>

namespace rr {

ParamVector find_mis(const PolicyProblem& p, const MISConfig& cfg,
                     std::optional<ParamVector> init) {
    if (cfg.entropy_weight <= 0.0) throw std::invalid_argument("find_mis: entropy_weight must be > 0");
    if (cfg.steps < 1) throw std::invalid_argument("find_mis: steps must be >= 1");

    ParamVector theta = init ? *init : ParamVector(p.base.dim, 0.0);

    auto objective = [&](const ParamVector& t) {
        ParamVector g = p.base.grad(t);
        return dot(g, g) - cfg.entropy_weight * p.entropy(t);
    };
    auto objective_grad = [&](const ParamVector& t) {
        ParamVector g = p.base.grad(t);
        ParamVector hg = p.base.hvp(t, g);
        return hg.scaled(2.0).minus(p.entropy_grad(t).scaled(cfg.entropy_weight));
    };

    double f = objective(theta);
    ParamVector best = theta;
    double best_f = f;
    for (int it = 0; it < cfg.steps; ++it) {
        ParamVector g = objective_grad(theta);
        double gn = norm(g);
        if (gn < 1e-14) break;
        // Backtracking keeps the fixed default learning rate safe on stiff
        // objectives.
        double step = cfg.lr;
        bool accepted = false;
        for (int h = 0; h < 30; ++h) {
            ParamVector cand = theta.minus(g.scaled(step));
            double fc = objective(cand);
            if (fc <= f) {
                theta = cand;
                f = fc;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;
        if (f < best_f) {
            best_f = f;
            best = theta;
        }
    }

    double jn = norm(p.return_grad(best));
    if (jn > cfg.grad_tol) {
        throw MisToleranceError("find_mis: ||grad J|| = " + std::to_string(jn) +
                                    " above tolerance " + std::to_string(cfg.grad_tol),
                                best, jn);
    }
    return best;
}

bool verify_mis_invariance(const ParamVector& theta, const std::vector<SymmetryMap>& maps) {
    for (const auto& phi : maps) {
        ParamVector mapped = phi.apply(theta);
        for (std::size_t i = 0; i < theta.size(); ++i) {
            if (std::abs(mapped[i] - theta[i]) > 1e-8) return false;
        }
    }
    return true;
}

}  // namespace rr
