#include "rr/problem.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <set>

namespace rr {

Problem make_problem(std::size_t dim, std::function<double(const ParamVector&)> loss,
                     std::function<ParamVector(const ParamVector&)> grad, HvpFn hvp,
                     std::function<SymMatrix(const ParamVector&)> full_hessian) {
    Problem p;
    p.dim = dim;
    p.loss = std::move(loss);
    p.grad = std::move(grad);
    if (hvp) {
        p.hvp = std::move(hvp);
    } else {
        auto g = p.grad;
        p.hvp = [g](const ParamVector& theta, const ParamVector& v) {
            return hvp_fd(g, theta, v);
        };
    }
    p.full_hessian = std::move(full_hessian);
    return p;
}

SymMatrix hessian_from_hvp(const Problem& p, const ParamVector& theta) {
    const std::size_t n = p.dim;
    std::vector<ParamVector> cols;
    cols.reserve(n);
    for (std::size_t j = 0; j < n; ++j) {
        ParamVector ej(n);
        ej.set(j, 1.0);
        cols.push_back(p.hvp(theta, ej));
    }
    SymMatrix H(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            H.set(i, j, 0.5 * (cols[j][i] + cols[i][j]));
        }
    }
    return H;
}

void NEquivalentSpec::validate() const {
    if (N < 2 || m < 1) throw std::invalid_argument("NEquivalentSpec: need N >= 2, m >= 1");
    if (sets.size() != N) throw std::invalid_argument("NEquivalentSpec: wrong number of sets");
    std::set<std::size_t> seen;
    for (const auto& s : sets) {
        if (s.size() != m) throw std::invalid_argument("NEquivalentSpec: set size mismatch");
        for (std::size_t idx : s) {
            if (idx >= dim) throw std::invalid_argument("NEquivalentSpec: index out of range");
            if (!seen.insert(idx).second) {
                throw std::invalid_argument("NEquivalentSpec: overlapping sets");
            }
        }
    }
}

NEquivalentSpec NEquivalentSpec::contiguous(std::size_t N, std::size_t m, std::size_t dim) {
    NEquivalentSpec spec;
    spec.N = N;
    spec.m = m;
    spec.dim = dim;
    for (std::size_t i = 0; i < N; ++i) {
        std::vector<std::size_t> s(m);
        for (std::size_t l = 0; l < m; ++l) s[l] = i * m + l;
        spec.sets.push_back(std::move(s));
    }
    spec.validate();
    return spec;
}

bool check_symmetry(const Problem& p, const SymmetryMap& phi, int samples, Rng& rng) {
    if (samples < 1) throw std::invalid_argument("check_symmetry: samples must be >= 1");
    for (int s = 0; s < samples; ++s) {
        ParamVector theta = rng.normal_vector(p.dim);
        double l0 = p.loss(theta);
        double l1 = p.loss(phi.apply(theta));
        if (std::abs(l0 - l1) > 1e-10 * std::max(1.0, std::abs(l0))) return false;
    }
    return true;
}

int count_distinct_eigenvalues(const Problem& p, const ParamVector& theta) {
    if (!p.has_full_hessian()) {
        throw std::invalid_argument("count_distinct_eigenvalues: full Hessian unavailable");
    }
    for (const auto& phi : p.symmetries) {
        if (inf_norm(phi.apply(theta).minus(theta)) > 1e-12) {
            throw std::invalid_argument(
                "count_distinct_eigenvalues: theta is not invariant under the problem symmetries");
        }
    }
    Spectrum spec = jacobi_eigh(p.full_hessian(theta));
    return static_cast<int>(cluster_eigenvalues(spec.values).size());
}

namespace {

// Coefficients of the polynomial test loss. Per-position quadratic/quartic
// terms are shared across all sets so set swaps leave the loss unchanged.
struct PolyCoeffs {
    std::vector<double> a, b, w;   // per in-set position
    std::vector<double> d, g, u;   // per free index
    double c1 = 0.0, c2 = 0.0, c3 = 0.0;
    std::vector<std::size_t> free_idx;
};

PolyCoeffs sample_coeffs(const NEquivalentSpec& spec, Rng& rng) {
    PolyCoeffs c;
    c.a.resize(spec.m);
    c.b.resize(spec.m);
    c.w.resize(spec.m);
    for (std::size_t l = 0; l < spec.m; ++l) {
        c.a[l] = rng.uniform(0.5, 2.0);
        c.b[l] = rng.uniform(0.1, 0.5);
        c.w[l] = rng.uniform(-1.0, 1.0);
    }
    c.c1 = rng.uniform(0.1, 0.5);
    c.c2 = rng.uniform(0.2, 0.8);
    c.c3 = rng.uniform(0.2, 0.8);

    std::vector<bool> in_set(spec.dim, false);
    for (const auto& s : spec.sets)
        for (std::size_t idx : s) in_set[idx] = true;
    for (std::size_t i = 0; i < spec.dim; ++i)
        if (!in_set[i]) c.free_idx.push_back(i);
    c.d.resize(c.free_idx.size());
    c.g.resize(c.free_idx.size());
    c.u.resize(c.free_idx.size());
    for (std::size_t j = 0; j < c.free_idx.size(); ++j) {
        c.d[j] = rng.uniform(0.5, 2.0);
        c.g[j] = rng.uniform(0.1, 0.5);
        c.u[j] = rng.uniform(-1.0, 1.0);
    }
    return c;
}

}  // namespace

Problem make_n_equivalent_test_problem(const NEquivalentSpec& spec, Rng& rng,
                                       double symmetry_breaking) {
    spec.validate();
    auto coeffs = std::make_shared<PolyCoeffs>(sample_coeffs(spec, rng));
    auto sets = std::make_shared<std::vector<std::vector<std::size_t>>>(spec.sets);
    const std::size_t N = spec.N;
    const std::size_t m = spec.m;
    const std::size_t dim = spec.dim;
    const double delta = symmetry_breaking;

    auto set_sums = [coeffs, sets, N, m](const ParamVector& t) {
        std::vector<double> s(N, 0.0);
        for (std::size_t i = 0; i < N; ++i)
            for (std::size_t l = 0; l < m; ++l) s[i] += coeffs->w[l] * t[(*sets)[i][l]];
        return s;
    };

    auto loss = [coeffs, sets, N, m, delta, set_sums](const ParamVector& t) {
        const auto& c = *coeffs;
        double L = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            double lin = 0.0;
            for (std::size_t l = 0; l < m; ++l) {
                double x = t[(*sets)[i][l]];
                L += c.a[l] * x * x + c.b[l] * x * x * x * x;
                lin += x;
            }
            L += c.c1 * lin * lin;
            if (delta != 0.0) {
                double x0 = t[(*sets)[i][0]];
                L += delta * static_cast<double>(i + 1) * x0 * x0 * x0;
            }
        }
        std::vector<double> s = set_sums(t);
        double S = 0.0;
        for (double si : s) S += si;
        double pair_sum = 0.0;
        for (std::size_t i = 0; i < N; ++i)
            for (std::size_t j = i + 1; j < N; ++j) pair_sum += s[i] * s[j];
        L += c.c2 * pair_sum;
        double T = 0.0;
        for (std::size_t j = 0; j < c.free_idx.size(); ++j) {
            double x = t[c.free_idx[j]];
            L += c.d[j] * x * x + c.g[j] * x * x * x * x;
            T += c.u[j] * x;
        }
        L += c.c3 * S * T;
        return L;
    };

    auto grad = [coeffs, sets, N, m, dim, delta, set_sums](const ParamVector& t) {
        const auto& c = *coeffs;
        std::vector<double> g(dim, 0.0);
        std::vector<double> s = set_sums(t);
        double S = 0.0;
        for (double si : s) S += si;
        double T = 0.0;
        for (std::size_t j = 0; j < c.free_idx.size(); ++j) T += c.u[j] * t[c.free_idx[j]];
        for (std::size_t i = 0; i < N; ++i) {
            double lin = 0.0;
            for (std::size_t l = 0; l < m; ++l) lin += t[(*sets)[i][l]];
            for (std::size_t l = 0; l < m; ++l) {
                std::size_t idx = (*sets)[i][l];
                double x = t[idx];
                g[idx] = 2.0 * c.a[l] * x + 4.0 * c.b[l] * x * x * x + 2.0 * c.c1 * lin +
                         c.c2 * c.w[l] * (S - s[i]) + c.c3 * c.w[l] * T;
            }
            if (delta != 0.0) {
                std::size_t idx = (*sets)[i][0];
                double x0 = t[idx];
                g[idx] += 3.0 * delta * static_cast<double>(i + 1) * x0 * x0;
            }
        }
        for (std::size_t j = 0; j < c.free_idx.size(); ++j) {
            std::size_t idx = c.free_idx[j];
            double x = t[idx];
            g[idx] = 2.0 * c.d[j] * x + 4.0 * c.g[j] * x * x * x + c.c3 * S * c.u[j];
        }
        return ParamVector(std::move(g));
    };

    auto hess = [coeffs, sets, N, m, dim, delta](const ParamVector& t) {
        const auto& c = *coeffs;
        SymMatrix H(dim);
        for (std::size_t i = 0; i < N; ++i) {
            for (std::size_t l = 0; l < m; ++l) {
                std::size_t il = (*sets)[i][l];
                double x = t[il];
                H.add(il, il, 2.0 * c.a[l] + 12.0 * c.b[l] * x * x);
                for (std::size_t k = 0; k < m; ++k) {
                    std::size_t ik = (*sets)[i][k];
                    if (ik <= il) continue;
                    H.add(il, ik, 2.0 * c.c1);
                }
                H.add(il, il, 2.0 * c.c1);
            }
            if (delta != 0.0) {
                std::size_t idx = (*sets)[i][0];
                H.add(idx, idx, 6.0 * delta * static_cast<double>(i + 1) * t[idx]);
            }
            for (std::size_t j = i + 1; j < N; ++j) {
                for (std::size_t l = 0; l < m; ++l) {
                    for (std::size_t k = 0; k < m; ++k) {
                        H.add((*sets)[i][l], (*sets)[j][k], c.c2 * c.w[l] * c.w[k]);
                    }
                }
            }
            for (std::size_t l = 0; l < m; ++l) {
                for (std::size_t j = 0; j < c.free_idx.size(); ++j) {
                    H.add((*sets)[i][l], c.free_idx[j], c.c3 * c.w[l] * c.u[j]);
                }
            }
        }
        for (std::size_t j = 0; j < c.free_idx.size(); ++j) {
            std::size_t idx = c.free_idx[j];
            double x = t[idx];
            H.add(idx, idx, 2.0 * c.d[j] + 12.0 * c.g[j] * x * x);
        }
        return H;
    };

    Problem p = make_problem(dim, loss, grad, nullptr, hess);
    if (delta == 0.0) {
        // Generators of the set-permutation group: swap set 0 with set k.
        for (std::size_t k = 1; k < N; ++k) {
            SymmetryMap phi;
            phi.permutation.resize(dim);
            for (std::size_t i = 0; i < dim; ++i) phi.permutation[i] = i;
            for (std::size_t l = 0; l < m; ++l) {
                std::size_t a = spec.sets[0][l];
                std::size_t b = spec.sets[k][l];
                phi.permutation[a] = b;
                phi.permutation[b] = a;
            }
            p.symmetries.push_back(std::move(phi));
        }
    }
    return p;
}

ParamVector symmetric_point(const NEquivalentSpec& spec, Rng& rng) {
    spec.validate();
    std::vector<double> theta(spec.dim, 0.0);
    std::vector<double> shared(spec.m);
    for (auto& x : shared) x = rng.uniform(0.3, 1.0);
    std::vector<bool> in_set(spec.dim, false);
    for (const auto& s : spec.sets) {
        for (std::size_t l = 0; l < spec.m; ++l) {
            theta[s[l]] = shared[l];
            in_set[s[l]] = true;
        }
    }
    for (std::size_t i = 0; i < spec.dim; ++i) {
        if (!in_set[i]) theta[i] = rng.uniform(0.3, 1.0);
    }
    return ParamVector(std::move(theta));
}

}  // namespace rr
