#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace rr {

/// Flat parameter vector. Entries are always finite; the length is fixed at
/// construction. This is the only representation of model state in the
/// library -- every engine, environment and loss speaks ParamVector.
class ParamVector {
public:
    ParamVector() = default;
    explicit ParamVector(std::size_t n, double fill = 0.0);
    explicit ParamVector(std::vector<double> values);
    ParamVector(std::initializer_list<double> values)
        : ParamVector(std::vector<double>(values)) {}

    static ParamVector zeros(std::size_t n) { return ParamVector(n, 0.0); }

    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }
    double operator[](std::size_t i) const { return data_[i]; }
    void set(std::size_t i, double v);

    const std::vector<double>& raw() const { return data_; }
    const double* data() const { return data_.data(); }

    // Arithmetic helpers. Results are validated so the finiteness invariant
    // survives overflow in caller math.
    ParamVector& add_scaled(double s, const ParamVector& other);  // this += s*other
    ParamVector& scale(double s);
    ParamVector plus(const ParamVector& other) const;
    ParamVector minus(const ParamVector& other) const;
    ParamVector scaled(double s) const;
    ParamVector slice(std::size_t begin, std::size_t count) const;

private:
    void validate(const char* op) const;
    std::vector<double> data_;
};

/// Dense symmetric matrix. Writes mirror across the diagonal so
/// A[i][j] == A[j][i] holds exactly by construction.
class SymMatrix {
public:
    SymMatrix() = default;
    explicit SymMatrix(std::size_t n) : n_(n), a_(n * n, 0.0) {}

    static SymMatrix identity(std::size_t n);

    std::size_t dim() const { return n_; }
    double at(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }
    void set(std::size_t i, std::size_t j, double v);
    void add(std::size_t i, std::size_t j, double v);

    ParamVector apply(const ParamVector& v) const;
    SymMatrix minus(const SymMatrix& other) const;
    double frobenius_norm() const;
    double quad_form(const ParamVector& v) const;  // v^T A v

private:
    std::size_t n_ = 0;
    std::vector<double> a_;
};

/// Deterministic RNG used by every stochastic operation in the library.
/// Stream: xoshiro256++ with state expanded from the seed by splitmix64.
/// Identical seeds produce identical streams on every platform; normals come
/// from an explicit Box-Muller transform rather than std::normal_distribution
/// for the same reason.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t next_u64();
    double uniform01();                      // [0, 1)
    double uniform(double lo, double hi);
    double normal(double mean = 0.0, double sd = 1.0);
    std::size_t index(std::size_t n);        // uniform in [0, n)
    ParamVector normal_vector(std::size_t n, double sd = 1.0);
    ParamVector unit_vector(std::size_t n);

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = index(i);
            std::swap(v[i - 1], v[j]);
        }
    }

    /// Independent child stream; derivation depends only on (seed, salt).
    Rng fork(std::uint64_t salt) const;

private:
    std::uint64_t seed_ = 0;
    std::uint64_t s_[4] = {0, 0, 0, 0};
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
};

// Free vector operations.
double dot(const ParamVector& a, const ParamVector& b);
double norm(const ParamVector& v);
double inf_norm(const ParamVector& v);
double distance(const ParamVector& a, const ParamVector& b);
ParamVector normalize(const ParamVector& v);  // throws if ||v|| <= 1e-12

}  // namespace rr
