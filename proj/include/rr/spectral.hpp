#pragma once

#include <functional>
#include <limits>
#include <vector>

#include "rr/numvec.hpp"

namespace rr {

using GradFn = std::function<ParamVector(const ParamVector&)>;
using HvpFn = std::function<ParamVector(const ParamVector&, const ParamVector&)>;
using LinOp = std::function<ParamVector(const ParamVector&)>;  // v -> H v at fixed theta

/// One eigenvalue with its unit eigenvector. `index` is the 1-based rank
/// among negative eigenvalues (1 = most negative) when produced by the
/// shifted power method; -1 otherwise.
struct EigenPair {
    double value = 0.0;
    ParamVector vector;
    int index = -1;
};

/// Full eigendecomposition of a symmetric matrix, eigenvalues sorted
/// descending with matching unit eigenvectors.
struct Spectrum {
    std::vector<double> values;
    std::vector<ParamVector> vectors;

    std::size_t size() const { return values.size(); }

    /// Gap to the next larger eigenvalue; +inf above the top one.
    double gap_above(std::size_t i) const {
        if (i == 0) return std::numeric_limits<double>::infinity();
        return values[i - 1] - values[i];
    }
    /// Gap to the next smaller eigenvalue; +inf below the bottom one.
    double gap_below(std::size_t i) const {
        if (i + 1 >= values.size()) return std::numeric_limits<double>::infinity();
        return values[i] - values[i + 1];
    }
};

/// Eigenvalues within 1e-6 * max(1, |lambda|) of each other form one cluster.
/// Input must be sorted (either direction); returns [begin, end) index pairs.
std::vector<std::pair<std::size_t, std::size_t>> cluster_eigenvalues(
    const std::vector<double>& sorted_values);

/// Dense symmetric eigendecomposition by cyclic Jacobi rotations.
/// Converges when the off-diagonal Frobenius norm drops below
/// 1e-12 * ||H||_F; throws after 100 sweeps with the residual in the message.
Spectrum jacobi_eigh(const SymMatrix& H);

/// jacobi_eigh after rotating H into the given orthonormal basis. With the
/// eigenvectors of a nearby matrix this converges in a sweep or two; falls
/// back to the cold start when the basis dimension does not match.
Spectrum jacobi_eigh_warm(const SymMatrix& H, const std::vector<ParamVector>& basis);

/// Hessian-vector product by central differences of the gradient:
/// (grad(x + eps*u) - grad(x - eps*u)) / (2 eps) * ||v||  with u = v/||v||.
/// eps <= 0 selects the default 1e-5 * max(1, ||x||_inf).
ParamVector hvp_fd(const GradFn& grad, const ParamVector& x, const ParamVector& v,
                   double eps = 0.0);

struct PowerOptions {
    int max_iters = 10000;       // per eigenpair
    double tol = 1e-5;           // residual <= tol * max(1, |lambda|)
    bool strict = true;          // throw when the cap is hit above tolerance
    int radius_iters = 200;      // iterations for the spectral-radius estimate
};

/// Error carrying the best pair found when power iteration fails to converge.
class PowerIterationError : public std::runtime_error {
public:
    PowerIterationError(const std::string& msg, EigenPair best, double residual)
        : std::runtime_error(msg), best_pair(std::move(best)), residual(residual) {}
    EigenPair best_pair;
    double residual = 0.0;
};

/// The r most negative eigenpairs of the operator behind `hvp`, most negative
/// first. Spectral radius is estimated by plain power iteration, then each
/// pair comes from power iteration on (c*I - H) with c = 1.1 * radius + 1e-6,
/// deflating previously found pairs.
std::vector<EigenPair> most_negative_eigenpairs(const LinOp& hvp, std::size_t n,
                                                std::size_t r, Rng& rng,
                                                const PowerOptions& opts = {});

/// Coefficients of theta_T - 0 in the eigenbasis of H after T gradient
/// descent steps on the quadratic 1/2 theta^T H theta, starting at theta0.
/// Returned in the eigenbasis order of jacobi_eigh (descending eigenvalues).
std::vector<double> gd_saddle_amplification(const SymMatrix& H, const ParamVector& theta0,
                                            double alpha, int T);

}  // namespace rr
