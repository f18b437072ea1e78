#include "rr/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rr {

std::vector<std::pair<std::size_t, std::size_t>> cluster_eigenvalues(
    const std::vector<double>& sorted_values) {
    std::vector<std::pair<std::size_t, std::size_t>> clusters;
    std::size_t begin = 0;
    for (std::size_t i = 1; i <= sorted_values.size(); ++i) {
        bool split = i == sorted_values.size();
        if (!split) {
            double a = sorted_values[i - 1];
            double b = sorted_values[i];
            double tol = 1e-6 * std::max(1.0, std::max(std::abs(a), std::abs(b)));
            split = std::abs(a - b) > tol;
        }
        if (split) {
            clusters.emplace_back(begin, i);
            begin = i;
        }
    }
    return clusters;
}

namespace {

// Cyclic Jacobi core. `a` is the matrix to diagonalize, `v` the initial
// basis; rotations accumulate into v, whose columns become eigenvectors.
Spectrum jacobi_core(std::vector<double> a, std::vector<double> v, std::size_t n,
                     double target) {
    auto off_norm = [&]() {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) s += 2.0 * a[i * n + j] * a[i * n + j];
        return std::sqrt(s);
    };

    const int max_sweeps = 100;
    // Rotations on elements this small cannot lift the off-diagonal norm
    // above the target; skipping them makes warm-started solves near-linear.
    const double skip_thr = target / std::max<double>(2.0, static_cast<double>(n));
    int sweep = 0;
    for (; sweep < max_sweeps; ++sweep) {
        if (off_norm() <= target) break;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                double apq = a[p * n + q];
                if (std::abs(apq) <= skip_thr) continue;
                double app = a[p * n + p];
                double aqq = a[q * n + q];
                double tau = (aqq - app) / (2.0 * apq);
                double t = (tau >= 0.0 ? 1.0 : -1.0) /
                           (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                double c = 1.0 / std::sqrt(1.0 + t * t);
                double s = t * c;

                for (std::size_t k = 0; k < n; ++k) {
                    double akp = a[k * n + p];
                    double akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    double apk = a[p * n + k];
                    double aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    double vkp = v[k * n + p];
                    double vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    if (sweep == max_sweeps && off_norm() > target) {
        throw std::runtime_error("jacobi_eigh: no convergence after 100 sweeps, off-diagonal norm " +
                                 std::to_string(off_norm()));
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return a[i * n + i] > a[j * n + j]; });

    Spectrum spec;
    spec.values.resize(n);
    spec.vectors.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t col = order[k];
        spec.values[k] = a[col * n + col];
        std::vector<double> vec(n);
        for (std::size_t i = 0; i < n; ++i) vec[i] = v[i * n + col];
        spec.vectors.push_back(normalize(ParamVector(std::move(vec))));
    }
    return spec;
}

}  // namespace

Spectrum jacobi_eigh(const SymMatrix& H) {
    const std::size_t n = H.dim();
    if (n == 0) throw std::invalid_argument("jacobi_eigh: empty matrix");
    std::vector<double> a(n * n), v(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        v[i * n + i] = 1.0;
        for (std::size_t j = 0; j < n; ++j) a[i * n + j] = H.at(i, j);
    }
    return jacobi_core(std::move(a), std::move(v),
                       n, 1e-12 * std::max(H.frobenius_norm(), 1e-300));
}

Spectrum jacobi_eigh_warm(const SymMatrix& H, const std::vector<ParamVector>& basis) {
    const std::size_t n = H.dim();
    if (basis.size() != n) return jacobi_eigh(H);
    // Rotate into the given basis: B = V^T H V is nearly diagonal when the
    // basis comes from a neighboring point's eigenvectors, so the sweeps
    // terminate almost immediately.
    std::vector<double> v(n * n), hv(n * n), b(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) v[i * n + j] = basis[j][i];
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < n; ++k) acc += H.at(i, k) * v[k * n + j];
            hv[i * n + j] = acc;
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < n; ++k) acc += v[k * n + i] * hv[k * n + j];
            b[i * n + j] = acc;
            b[j * n + i] = acc;
        }
    }
    return jacobi_core(std::move(b), std::move(v),
                       n, 1e-12 * std::max(H.frobenius_norm(), 1e-300));
}

ParamVector hvp_fd(const GradFn& grad, const ParamVector& x, const ParamVector& v, double eps) {
    double vn = norm(v);
    if (vn <= 1e-300) throw std::invalid_argument("hvp_fd: zero direction");
    if (eps <= 0.0) eps = 1e-5 * std::max(1.0, inf_norm(x));
    ParamVector u = v.scaled(1.0 / vn);
    ParamVector gp = grad(x.plus(u.scaled(eps)));
    ParamVector gm = grad(x.minus(u.scaled(eps)));
    return gp.minus(gm).scale(vn / (2.0 * eps));
}

std::vector<EigenPair> most_negative_eigenpairs(const LinOp& apply, std::size_t n, std::size_t r,
                                                Rng& rng, const PowerOptions& opts) {
    if (r < 1) throw std::invalid_argument("most_negative_eigenpairs: r must be >= 1");
    if (r > n) throw std::invalid_argument("most_negative_eigenpairs: r exceeds dimension");

    // Spectral radius estimate by plain power iteration; tracking the running
    // max of ||Hv|| keeps the estimate sane even when opposite-sign extremes
    // make the iterate oscillate.
    double radius = 0.0;
    {
        ParamVector v = rng.unit_vector(n);
        for (int it = 0; it < opts.radius_iters; ++it) {
            ParamVector w = apply(v);
            double wn = norm(w);
            if (wn <= 1e-300) break;  // H ~ 0 in this direction
            radius = std::max(radius, wn);
            v = w.scaled(1.0 / wn);
        }
    }
    double shift = 1.1 * radius + 1e-6;

    std::vector<EigenPair> found;
    for (std::size_t k = 0; k < r; ++k) {
        ParamVector v = rng.unit_vector(n);
        auto deflate = [&](ParamVector& w) {
            for (const auto& p : found) w.add_scaled(-dot(w, p.vector), p.vector);
        };
        deflate(v);
        if (norm(v) <= 1e-12) v = rng.unit_vector(n);
        v = normalize(v);

        double lambda = 0.0;
        double residual = std::numeric_limits<double>::infinity();
        EigenPair best;
        double best_residual = residual;
        // Converge well past the acceptance tolerance: later pairs are
        // deflated against this vector, and the shifted iteration amplifies
        // any error left in it.
        const double inner_tol = 1e-3 * opts.tol;
        int stall = 0;
        double stall_ref = std::numeric_limits<double>::infinity();
        for (int it = 0; it < opts.max_iters; ++it) {
            ParamVector hv = apply(v);
            lambda = dot(v, hv);
            ParamVector res = hv.minus(v.scaled(lambda));
            residual = norm(res);
            if (residual < best_residual) {
                best_residual = residual;
                best = EigenPair{lambda, v, static_cast<int>(k + 1)};
            }
            if (residual <= inner_tol * std::max(1.0, std::abs(lambda))) break;
            if (best_residual < 0.99 * stall_ref) {
                stall_ref = best_residual;
                stall = 0;
            } else if (++stall > 200) {
                break;  // hit the accuracy floor of the deflated operator
            }
            // One step of power iteration on (shift*I - H).
            ParamVector w = v.scaled(shift).minus(hv);
            deflate(w);
            double wn = norm(w);
            if (wn <= 1e-300) {
                w = rng.unit_vector(n);
                deflate(w);
                wn = norm(w);
            }
            v = w.scaled(1.0 / wn);
        }
        if (best_residual > opts.tol * std::max(1.0, std::abs(best.value))) {
            if (opts.strict) {
                throw PowerIterationError(
                    "most_negative_eigenpairs: iteration cap " + std::to_string(opts.max_iters) +
                        " hit with residual " + std::to_string(best_residual),
                    best, best_residual);
            }
        }
        found.push_back(best);
    }
    std::stable_sort(found.begin(), found.end(),
                     [](const EigenPair& a, const EigenPair& b) { return a.value < b.value; });
    for (std::size_t k = 0; k < found.size(); ++k) found[k].index = static_cast<int>(k + 1);
    return found;
}

std::vector<double> gd_saddle_amplification(const SymMatrix& H, const ParamVector& theta0,
                                            double alpha, int T) {
    if (theta0.size() != H.dim()) {
        throw std::invalid_argument("gd_saddle_amplification: dimension mismatch");
    }
    ParamVector theta = theta0;
    for (int t = 0; t < T; ++t) {
        theta = theta.minus(H.apply(theta).scaled(alpha));
    }
    Spectrum spec = jacobi_eigh(H);
    std::vector<double> coeffs(spec.size());
    for (std::size_t i = 0; i < spec.size(); ++i) coeffs[i] = dot(spec.vectors[i], theta);
    return coeffs;
}

}  // namespace rr
