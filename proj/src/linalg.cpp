#include "finlab/linalg.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>

namespace finlab {

double max_abs(const Mat& m) {
    double r = 0.0;
    for (int i = 0; i < m.size(); ++i)
        for (int j = 0; j < m.size(); ++j) r = std::max(r, std::fabs(m(i, j)));
    return r;
}

double frobenius(const Mat& m) {
    double s = 0.0;
    for (int i = 0; i < m.size(); ++i)
        for (int j = 0; j < m.size(); ++j) s += m(i, j) * m(i, j);
    return std::sqrt(s);
}

double norm1(const Mat& m) {
    double r = 0.0;
    for (int j = 0; j < m.size(); ++j) {
        double c = 0.0;
        for (int i = 0; i < m.size(); ++i) c += std::fabs(m(i, j));
        r = std::max(r, c);
    }
    return r;
}

Mat transpose(const Mat& m) {
    Mat r(m.size(), 0.0);
    for (int i = 0; i < m.size(); ++i)
        for (int j = 0; j < m.size(); ++j) r(j, i) = m(i, j);
    return r;
}

Lu lu_factor(const Mat& m) {
    const int n = m.size();
    Lu f;
    f.lu = m;
    f.perm.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) f.perm[static_cast<std::size_t>(i)] = i;

    for (int col = 0; col < n; ++col) {
        int piv = col;
        double best = std::fabs(f.lu(col, col));
        for (int r = col + 1; r < n; ++r) {
            double v = std::fabs(f.lu(r, col));
            if (v > best) { best = v; piv = r; }
        }
        if (piv != col) {
            for (int j = 0; j < n; ++j) std::swap(f.lu(col, j), f.lu(piv, j));
            std::swap(f.perm[static_cast<std::size_t>(col)], f.perm[static_cast<std::size_t>(piv)]);
            f.parity = -f.parity;
        }
        const double d = f.lu(col, col);
        if (d == 0.0) { f.singular = true; continue; }
        for (int r = col + 1; r < n; ++r) {
            const double mult = f.lu(r, col) / d;
            f.lu(r, col) = mult;
            for (int j = col + 1; j < n; ++j) f.lu(r, j) -= mult * f.lu(col, j);
        }
    }
    return f;
}

double Lu::det() const {
    double d = static_cast<double>(parity);
    for (int i = 0; i < lu.size(); ++i) d *= lu(i, i);
    return d;
}

Vec Lu::solve(const Vec& b) const {
    if (singular) throw ModelError("linear solve on a singular matrix");
    const int n = lu.size();
    Vec x(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] = b[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])];
    // forward substitution, unit lower triangle
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < i; ++j) x[static_cast<std::size_t>(i)] -= lu(i, j) * x[static_cast<std::size_t>(j)];
    // back substitution
    for (int i = n - 1; i >= 0; --i) {
        for (int j = i + 1; j < n; ++j) x[static_cast<std::size_t>(i)] -= lu(i, j) * x[static_cast<std::size_t>(j)];
        x[static_cast<std::size_t>(i)] /= lu(i, i);
    }
    return x;
}

Mat Lu::inverse() const {
    const int n = lu.size();
    Mat inv(n, 0.0);
    Vec e(static_cast<std::size_t>(n), 0.0);
    for (int j = 0; j < n; ++j) {
        e[static_cast<std::size_t>(j)] = 1.0;
        Vec col = solve(e);
        e[static_cast<std::size_t>(j)] = 0.0;
        for (int i = 0; i < n; ++i) inv(i, j) = col[static_cast<std::size_t>(i)];
    }
    return inv;
}

double cond1(const Mat& m, const Lu& f) {
    if (f.singular) return std::numeric_limits<double>::infinity();
    return norm1(m) * norm1(f.inverse());
}

double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
    return r;
}

}  // namespace finlab
