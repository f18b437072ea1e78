#include "rr/numvec.hpp"

#include <cmath>

namespace rr {

ParamVector::ParamVector(std::size_t n, double fill) : data_(n, fill) {
    validate("construct");
}

ParamVector::ParamVector(std::vector<double> values) : data_(std::move(values)) {
    validate("construct");
}

void ParamVector::set(std::size_t i, double v) {
    if (!std::isfinite(v)) throw std::invalid_argument("ParamVector::set: non-finite value");
    data_.at(i) = v;
}

void ParamVector::validate(const char* op) const {
    for (double x : data_) {
        if (!std::isfinite(x)) {
            throw std::invalid_argument(std::string("ParamVector: non-finite entry in ") + op);
        }
    }
}

ParamVector& ParamVector::add_scaled(double s, const ParamVector& other) {
    if (other.size() != size()) throw std::invalid_argument("ParamVector::add_scaled: length mismatch");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += s * other.data_[i];
    validate("add_scaled");
    return *this;
}

ParamVector& ParamVector::scale(double s) {
    for (double& x : data_) x *= s;
    validate("scale");
    return *this;
}

ParamVector ParamVector::plus(const ParamVector& other) const {
    ParamVector out = *this;
    out.add_scaled(1.0, other);
    return out;
}

ParamVector ParamVector::minus(const ParamVector& other) const {
    ParamVector out = *this;
    out.add_scaled(-1.0, other);
    return out;
}

ParamVector ParamVector::scaled(double s) const {
    ParamVector out = *this;
    out.scale(s);
    return out;
}

ParamVector ParamVector::slice(std::size_t begin, std::size_t count) const {
    if (begin + count > size()) throw std::out_of_range("ParamVector::slice");
    return ParamVector(std::vector<double>(data_.begin() + begin, data_.begin() + begin + count));
}

SymMatrix SymMatrix::identity(std::size_t n) {
    SymMatrix m(n);
    for (std::size_t i = 0; i < n; ++i) m.set(i, i, 1.0);
    return m;
}

void SymMatrix::set(std::size_t i, std::size_t j, double v) {
    if (!std::isfinite(v)) throw std::invalid_argument("SymMatrix::set: non-finite value");
    a_.at(i * n_ + j) = v;
    a_.at(j * n_ + i) = v;
}

void SymMatrix::add(std::size_t i, std::size_t j, double v) {
    set(i, j, at(i, j) + v);
}

ParamVector SymMatrix::apply(const ParamVector& v) const {
    if (v.size() != n_) throw std::invalid_argument("SymMatrix::apply: dimension mismatch");
    std::vector<double> out(n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
        double acc = 0.0;
        const double* row = a_.data() + i * n_;
        for (std::size_t j = 0; j < n_; ++j) acc += row[j] * v[j];
        out[i] = acc;
    }
    return ParamVector(std::move(out));
}

SymMatrix SymMatrix::minus(const SymMatrix& other) const {
    if (other.n_ != n_) throw std::invalid_argument("SymMatrix::minus: dimension mismatch");
    SymMatrix out(n_);
    for (std::size_t i = 0; i < a_.size(); ++i) out.a_[i] = a_[i] - other.a_[i];
    return out;
}

double SymMatrix::frobenius_norm() const {
    double acc = 0.0;
    for (double x : a_) acc += x * x;
    return std::sqrt(acc);
}

double SymMatrix::quad_form(const ParamVector& v) const {
    return dot(v, apply(v));
}

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

}  // namespace

Rng::Rng(std::uint64_t seed) : seed_(seed) {
    std::uint64_t x = seed;
    for (auto& w : s_) w = splitmix64(x);
}

std::uint64_t Rng::next_u64() {
    // xoshiro256++
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double Rng::uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform01();
}

double Rng::normal(double mean, double sd) {
    if (has_spare_) {
        has_spare_ = false;
        return mean + sd * spare_normal_;
    }
    double u1 = 0.0;
    do {
        u1 = uniform01();
    } while (u1 <= 0.0);
    double u2 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * 3.14159265358979323846 * u2;
    spare_normal_ = r * std::sin(a);
    has_spare_ = true;
    return mean + sd * r * std::cos(a);
}

std::size_t Rng::index(std::size_t n) {
    if (n == 0) throw std::invalid_argument("Rng::index: empty range");
    // Rejection keeps the draw exactly uniform.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x = 0;
    do {
        x = next_u64();
    } while (x >= limit);
    return static_cast<std::size_t>(x % n);
}

ParamVector Rng::normal_vector(std::size_t n, double sd) {
    std::vector<double> v(n);
    for (auto& x : v) x = normal(0.0, sd);
    return ParamVector(std::move(v));
}

ParamVector Rng::unit_vector(std::size_t n) {
    while (true) {
        ParamVector v = normal_vector(n);
        if (norm(v) > 1e-12) return normalize(v);
    }
}

Rng Rng::fork(std::uint64_t salt) const {
    std::uint64_t x = seed_ ^ (0xA5A5A5A5DEADBEEFULL + salt * 0x9E3779B97F4A7C15ULL);
    return Rng(splitmix64(x));
}

double dot(const ParamVector& a, const ParamVector& b) {
    if (a.size() != b.size()) throw std::invalid_argument("dot: length mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

double norm(const ParamVector& v) {
    return std::sqrt(dot(v, v));
}

double inf_norm(const ParamVector& v) {
    double m = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) m = std::max(m, std::abs(v[i]));
    return m;
}

double distance(const ParamVector& a, const ParamVector& b) {
    if (a.size() != b.size()) throw std::invalid_argument("distance: length mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        acc += d * d;
    }
    return std::sqrt(acc);
}

ParamVector normalize(const ParamVector& v) {
    double n = norm(v);
    if (n <= 1e-12) throw std::invalid_argument("normalize: vector norm below 1e-12");
    return v.scaled(1.0 / n);
}

}  // namespace rr
