#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "rr/numvec.hpp"
#include "rr/spectral.hpp"

namespace rr {

/// A loss symmetry given as a permutation of parameter indices:
/// phi(theta)[i] = theta[permutation[i]].
struct SymmetryMap {
    std::vector<std::size_t> permutation;

    ParamVector apply(const ParamVector& theta) const {
        if (theta.size() != permutation.size()) {
            throw std::invalid_argument("SymmetryMap::apply: dimension mismatch");
        }
        std::vector<double> out(theta.size());
        for (std::size_t i = 0; i < permutation.size(); ++i) out[i] = theta[permutation[i]];
        return ParamVector(std::move(out));
    }
};

/// The capability bundle every engine consumes. Construct through
/// make_problem so `hvp` gets its finite-difference default when the caller
/// has nothing better.
struct Problem {
    std::size_t dim = 0;
    std::function<double(const ParamVector&)> loss;
    std::function<ParamVector(const ParamVector&)> grad;
    HvpFn hvp;                                              // (theta, v) -> H(theta) v
    std::function<SymMatrix(const ParamVector&)> full_hessian;  // may be empty
    std::vector<SymmetryMap> symmetries;

    bool has_full_hessian() const { return static_cast<bool>(full_hessian); }
};

Problem make_problem(std::size_t dim, std::function<double(const ParamVector&)> loss,
                     std::function<ParamVector(const ParamVector&)> grad,
                     HvpFn hvp = nullptr,
                     std::function<SymMatrix(const ParamVector&)> full_hessian = nullptr);

/// Assemble the dense Hessian column by column from a problem's hvp.
SymMatrix hessian_from_hvp(const Problem& p, const ParamVector& theta);

/// N disjoint index sets of size m inside a dim-dimensional parameter space.
struct NEquivalentSpec {
    std::size_t N = 0;
    std::size_t m = 0;
    std::size_t dim = 0;
    std::vector<std::vector<std::size_t>> sets;

    void validate() const;  // throws on overlap / out-of-range / size mismatch

    /// Convenience layout: sets fill indices [0, N*m) contiguously.
    static NEquivalentSpec contiguous(std::size_t N, std::size_t m, std::size_t dim);
};

/// Sampled check that |L(theta) - L(phi(theta))| <= 1e-10 * max(1, |L|)
/// on `samples` seeded points.
bool check_symmetry(const Problem& p, const SymmetryMap& phi, int samples, Rng& rng);

/// Number of eigenvalue clusters of the full Hessian at theta. Requires a
/// full_hessian and theta fixed by every listed symmetry (the hypothesis of
/// the repeated-eigenvalue bound); throws otherwise.
int count_distinct_eigenvalues(const Problem& p, const ParamVector& theta);

/// A polynomial loss invariant under all permutations of the spec's sets,
/// with analytic gradient and Hessian and the generator SymmetryMaps
/// populated. `symmetry_breaking` adds a per-set term that destroys the
/// invariance (used to show the eigenvalue bound needs the symmetry).
Problem make_n_equivalent_test_problem(const NEquivalentSpec& spec, Rng& rng,
                                       double symmetry_breaking = 0.0);

/// A theta fixed by all of the spec's set permutations (identical sub-vector
/// across sets, seeded free part).
ParamVector symmetric_point(const NEquivalentSpec& spec, Rng& rng);

}  // namespace rr
