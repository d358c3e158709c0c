#include "corekit/numerics.hpp"

#include <cmath>
#include <cstdio>
#include <string>

namespace corekit {

Matrix::Matrix(std::size_t rows, std::size_t cols, Vector values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
    if (values_.size() != rows_ * cols_)
        throw DimensionError("matrix: rows*cols != number of entries");
}

Matrix Matrix::symmetric(std::size_t n, Vector values) {
    Matrix m(n, n, std::move(values));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (std::abs(m(i, j) - m(j, i)) > 1e-12)
                throw InvalidInputError("matrix: not symmetric within 1e-12 at (" +
                                        std::to_string(i) + "," + std::to_string(j) + ")");
    return m;
}

Vector Matrix::apply(const Vector& x) const {
    if (x.size() != cols_) throw DimensionError("matrix apply: dimension mismatch");
    Vector y(rows_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i) {
        double acc = 0.0;
        const double* r = values_.data() + i * cols_;
        for (std::size_t j = 0; j < cols_; ++j) acc += r[j] * x[j];
        y[i] = acc;
    }
    return y;
}

double Matrix::max_abs_diff(const Matrix& other) const {
    if (rows_ != other.rows_ || cols_ != other.cols_)
        throw DimensionError("matrix diff: shape mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < values_.size(); ++i)
        m = std::max(m, std::abs(values_[i] - other.values_[i]));
    return m;
}

namespace {

inline std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

inline std::uint64_t splitmix64(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9e3779b97f4b7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

SeededRng::SeededRng(std::uint64_t seed) : seed_(seed) {
    std::uint64_t x = seed;
    for (auto& s : state_) s = splitmix64(x);
}

std::uint64_t SeededRng::next_u64() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
}

double SeededRng::next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t SeededRng::next_below(std::uint64_t n) {
    if (n == 0) throw InvalidInputError("next_below: n must be >= 1");
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
        x = next_u64();
    } while (x >= limit);
    return x % n;
}

double SeededRng::next_gaussian() {
    // Box-Muller; u1 nudged away from 0 so log stays finite.
    double u1 = next_double();
    double u2 = next_double();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    constexpr double two_pi = 6.283185307179586476925286766559;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

Vector rademacher(SeededRng& rng, std::size_t d) {
    if (d == 0) throw DimensionError("rademacher: d must be >= 1");
    Vector z(d);
    for (std::size_t i = 0; i < d; ++i) z[i] = (rng.next_u64() >> 63) ? 1.0 : -1.0;
    return z;
}

Vector deterministic_sum(std::span<const Vector> xs, std::size_t dim) {
    Vector acc(dim, 0.0);
    for (const auto& x : xs) {
        if (x.size() != dim) throw DimensionError("deterministic_sum: length mismatch");
        for (std::size_t j = 0; j < dim; ++j) acc[j] += x[j];
    }
    return acc;
}

void check_same_dim(const Vector& a, const Vector& b, const char* what) {
    if (a.size() != b.size()) throw DimensionError(std::string(what) + ": dimension mismatch");
}

void axpy(double alpha, const Vector& x, Vector& y) {
    check_same_dim(x, y, "axpy");
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

double dot(const Vector& a, const Vector& b) {
    check_same_dim(a, b, "dot");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

double norm2(const Vector& a) { return std::sqrt(dot(a, a)); }

Vector sub(const Vector& a, const Vector& b) {
    check_same_dim(a, b, "sub");
    Vector r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

Vector add(const Vector& a, const Vector& b) {
    check_same_dim(a, b, "add");
    Vector r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
}

Vector scaled(const Vector& a, double alpha) {
    Vector r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = alpha * a[i];
    return r;
}

double dist2(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw DimensionError("dist2: dimension mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return std::sqrt(acc);
}

void require_finite(const Vector& v, const char* what) {
    for (double x : v)
        if (!std::isfinite(x))
            throw InvalidInputError(std::string(what) + ": non-finite entry");
}

}  // namespace corekit
