#pragma once

#include <optional>

#include "rr/policy.hpp"

namespace rr {

struct MISConfig {
    double entropy_weight = 1.0;  // must be > 0
    int steps = 2000;
    double lr = 0.5;
    double grad_tol = 1e-6;       // on ||grad J|| at the returned point
};

class MisToleranceError : public std::runtime_error {
public:
    MisToleranceError(const std::string& msg, ParamVector best, double grad_norm)
        : std::runtime_error(msg), best_iterate(std::move(best)), grad_norm(grad_norm) {}
    ParamVector best_iterate;
    double grad_norm = 0.0;
};

/// Gradient descent on ||grad J||^2 - entropy_weight * H(pi_theta). The
/// squared gradient norm keeps the objective differentiable; minimizers at
/// tolerance coincide with the |grad J| form. Starts from zero logits (the
/// symmetric point) unless an init is given. Throws MisToleranceError when
/// the returned point has ||grad J|| above grad_tol.
ParamVector find_mis(const PolicyProblem& p, const MISConfig& cfg,
                     std::optional<ParamVector> init = std::nullopt);

/// True iff phi(theta) == theta elementwise to 1e-8 for every map.
bool verify_mis_invariance(const ParamVector& theta, const std::vector<SymmetryMap>& maps);

}  // namespace rr
