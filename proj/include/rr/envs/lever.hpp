#pragma once

#include <array>

#include "rr/policy.hpp"

namespace rr::envs {

/// Ten-lever coordination game: players get the lever payoff when they pick
/// the same lever and zero otherwise. Seven levers pay 1.0, two pay 0.8 and
/// one pays 0.6; the ordering below is fixed, only the multiset matters.
struct LeverGame {
    std::array<double, 10> payoffs = {1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 0.8, 0.8, 0.6};
    std::size_t n_levers() const { return payoffs.size(); }
    void validate() const;
};

/// Self-play expected reward of a shared policy: sum_l pi_l^2 payoff_l.
double lever_selfplay_return(const LeverGame& g, const ParamVector& theta);

/// Expected reward when run a's policy plays with run b's policy.
double lever_cross_play(const LeverGame& g, const ParamVector& theta_a, const ParamVector& theta_b);

/// Self-play as a minimization problem (loss = -J) with analytic gradient,
/// Hessian, entropy, and the equal-payoff swap symmetries populated.
PolicyProblem lever_problem(const LeverGame& g);

/// Lever with the highest probability.
int greedy_lever(const ParamVector& theta);

}  // namespace rr::envs
