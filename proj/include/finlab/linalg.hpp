#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "finlab/errors.hpp"

namespace finlab {

using Vec = std::vector<double>;

// dense square matrix over an arbitrary scalar ring S (double, long double,
// truncated jets, ...). Sized for n <= 8; nothing here assumes more.
template <class S>
class SquareMat {
public:
    SquareMat() = default;
    SquareMat(int n, const S& fill) : n_(n), a_(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), fill) {}

    static SquareMat identity(int n, const S& exemplar) {
        S zero = exemplar * 0.0;
        SquareMat m(n, zero);
        for (int i = 0; i < n; ++i) m(i, i) = zero + 1.0;
        return m;
    }

    int size() const { return n_; }

    S& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(j)]; }
    const S& operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(j)]; }

    S trace() const {
        S acc = (*this)(0, 0);
        for (int i = 1; i < n_; ++i) acc = acc + (*this)(i, i);
        return acc;
    }

    void add_diag(const S& v) {
        for (int i = 0; i < n_; ++i) (*this)(i, i) = (*this)(i, i) + v;
    }

    friend SquareMat operator*(const SquareMat& x, const SquareMat& y) {
        const int n = x.n_;
        SquareMat r(n, x(0, 0) * 0.0);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                S acc = x(i, 0) * y(0, j);
                for (int k = 1; k < n; ++k) acc = acc + x(i, k) * y(k, j);
                r(i, j) = acc;
            }
        return r;
    }

    friend SquareMat operator+(const SquareMat& x, const SquareMat& y) {
        SquareMat r = x;
        for (std::size_t i = 0; i < r.a_.size(); ++i) r.a_[i] = r.a_[i] + y.a_[i];
        return r;
    }

    friend SquareMat operator-(const SquareMat& x, const SquareMat& y) {
        SquareMat r = x;
        for (std::size_t i = 0; i < r.a_.size(); ++i) r.a_[i] = r.a_[i] - y.a_[i];
        return r;
    }

    friend SquareMat operator*(const SquareMat& x, double c) {
        SquareMat r = x;
        for (auto& v : r.a_) v = v * c;
        return r;
    }

    std::vector<S> operator*(const std::vector<S>& v) const {
        std::vector<S> r;
        r.reserve(static_cast<std::size_t>(n_));
        for (int i = 0; i < n_; ++i) {
            S acc = (*this)(i, 0) * v[0];
            for (int k = 1; k < n_; ++k) acc = acc + (*this)(i, k) * v[static_cast<std::size_t>(k)];
            r.push_back(acc);
        }
        return r;
    }

private:
    int n_ = 0;
    std::vector<S> a_;
};

using Mat = SquareMat<double>;

template <class S>
S dot(const std::vector<S>& x, const std::vector<S>& y) {
    S acc = x[0] * y[0];
    for (std::size_t i = 1; i < x.size(); ++i) acc = acc + x[i] * y[i];
    return acc;
}

double max_abs(const Mat& m);
double frobenius(const Mat& m);
double norm1(const Mat& m);  // max column sum
Mat transpose(const Mat& m);

// LU factorization with partial pivoting
struct Lu {
    Mat lu;
    std::vector<int> perm;
    int parity = 1;
    bool singular = false;  // an exactly-zero pivot was hit

    double det() const;
    Vec solve(const Vec& b) const;  // throws ModelError when singular
    Mat inverse() const;
};

Lu lu_factor(const Mat& m);

// 1-norm condition estimate via the explicit inverse (fine at n <= 8)
double cond1(const Mat& m, const Lu& f);

double binomial(int n, int k);

}  // namespace finlab
