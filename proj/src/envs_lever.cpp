#include "rr/envs/lever.hpp"

#include <cmath>
#include <memory>

namespace rr::envs {

void LeverGame::validate() const {
    int ones = 0, eights = 0, sixes = 0;
    for (double p : payoffs) {
        if (p == 1.0) ++ones;
        else if (p == 0.8) ++eights;
        else if (p == 0.6) ++sixes;
    }
    if (ones != 7 || eights != 2 || sixes != 1) {
        throw std::invalid_argument("LeverGame: payoff multiset must be {1.0 x7, 0.8 x2, 0.6}");
    }
}

namespace {

std::array<double, 10> policy(const ParamVector& theta) {
    if (theta.size() != 10) throw std::invalid_argument("lever policy: need 10 logits");
    std::array<double, 10> pi{};
    softmax_block(theta, 0, 10, pi.data());
    return pi;
}

}  // namespace

double lever_selfplay_return(const LeverGame& g, const ParamVector& theta) {
    auto pi = policy(theta);
    double j = 0.0;
    for (std::size_t l = 0; l < 10; ++l) j += pi[l] * pi[l] * g.payoffs[l];
    return j;
}

double lever_cross_play(const LeverGame& g, const ParamVector& theta_a,
                        const ParamVector& theta_b) {
    auto pa = policy(theta_a);
    auto pb = policy(theta_b);
    double j = 0.0;
    for (std::size_t l = 0; l < 10; ++l) j += pa[l] * pb[l] * g.payoffs[l];
    return j;
}

PolicyProblem lever_problem(const LeverGame& game) {
    game.validate();
    auto g = std::make_shared<LeverGame>(game);
    const std::size_t dim = 10;

    auto ret = [g](const ParamVector& th) { return lever_selfplay_return(*g, th); };

    auto ret_grad = [g](const ParamVector& th) {
        auto pi = policy(th);
        double j = 0.0;
        for (std::size_t l = 0; l < 10; ++l) j += pi[l] * pi[l] * g->payoffs[l];
        std::vector<double> grad(10);
        for (std::size_t a = 0; a < 10; ++a) grad[a] = 2.0 * pi[a] * (pi[a] * g->payoffs[a] - j);
        return ParamVector(std::move(grad));
    };

    auto hess = [g, ret_grad](const ParamVector& th) {
        auto pi = policy(th);
        double j = 0.0;
        for (std::size_t l = 0; l < 10; ++l) j += pi[l] * pi[l] * g->payoffs[l];
        ParamVector grad_j = ret_grad(th);
        SymMatrix H(10);
        for (std::size_t a = 0; a < 10; ++a) {
            for (std::size_t b = a; b < 10; ++b) {
                double dab = a == b ? 1.0 : 0.0;
                double d2j = 2.0 * pi[a] * (dab - pi[b]) * (2.0 * pi[a] * g->payoffs[a] - j) -
                             2.0 * pi[a] * grad_j[b];
                H.set(a, b, -d2j);  // loss = -J
            }
        }
        return H;
    };

    auto entropy = [](const ParamVector& th) {
        auto pi = policy(th);
        double h = 0.0;
        for (double p : pi)
            if (p > 0.0) h -= p * std::log(p);
        return h;
    };

    auto entropy_grad = [entropy](const ParamVector& th) {
        auto pi = policy(th);
        double h = entropy(th);
        std::vector<double> grad(10);
        for (std::size_t a = 0; a < 10; ++a) {
            grad[a] = pi[a] > 0.0 ? -pi[a] * (std::log(pi[a]) + h) : 0.0;
        }
        return ParamVector(std::move(grad));
    };

    PolicyProblem pp;
    pp.expected_return = ret;
    pp.return_grad = ret_grad;
    pp.entropy = entropy;
    pp.entropy_grad = entropy_grad;
    pp.base = make_problem(
        dim, [ret](const ParamVector& th) { return -ret(th); },
        [ret_grad](const ParamVector& th) { return ret_grad(th).scaled(-1.0); }, nullptr, hess);

    // Swap generators within each equal-payoff class.
    auto add_swap = [&](std::size_t a, std::size_t b) {
        SymmetryMap phi;
        phi.permutation.resize(dim);
        for (std::size_t i = 0; i < dim; ++i) phi.permutation[i] = i;
        std::swap(phi.permutation[a], phi.permutation[b]);
        pp.base.symmetries.push_back(std::move(phi));
    };
    for (std::size_t k = 1; k < 7; ++k) add_swap(0, k);
    add_swap(7, 8);
    return pp;
}

int greedy_lever(const ParamVector& theta) {
    int best = 0;
    for (int l = 1; l < 10; ++l)
        if (theta[l] > theta[best]) best = l;
    return best;
}

}  // namespace rr::envs
