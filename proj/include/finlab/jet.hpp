#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "finlab/errors.hpp"

namespace finlab {

// Shared tables for dense truncated Taylor arithmetic in `vars` coordinates up
// to total degree `order` (order <= 3, vars <= 16). Coefficients are stored in
// degree-major monomial order; a monomial is the multiset of coordinate ids it
// differentiates by, so mixed partials are symmetric by construction. Stored
// values are Taylor coefficients: the derivative is coeff * multiplicity
// factorial of the monomial.
class JetSpace {
public:
    static const JetSpace& get(int vars, int order);  // process-wide registry, thread-safe

    int vars() const { return vars_; }
    int order() const { return order_; }
    int size() const { return static_cast<int>(mono_.size()); }

    int degree_of(int idx) const { return mono_[static_cast<std::size_t>(idx)].len; }
    // index of the monomial with the given coordinate multiset (any order, repeats
    // allowed); -1 when the degree exceeds the space order
    int index_of(std::span<const int> coords) const;
    double mult_factorial(int idx) const { return fact_[static_cast<std::size_t>(idx)]; }

    struct MulTerm { std::int32_t a, b, out; };
    std::span<const MulTerm> mul_terms() const { return mul_; }

    struct DivTerm { std::int32_t h, g; };
    // division contributions grouped per output index: for output i the terms are
    // div_terms[div_offsets[i] .. div_offsets[i+1])
    std::span<const DivTerm> div_terms() const { return div_; }
    std::span<const std::int32_t> div_offsets() const { return div_off_; }

private:
    JetSpace(int vars, int order);

    struct Mono {
        std::array<std::int8_t, 3> v{};  // ascending coordinate ids
        int len = 0;
    };

    static std::uint32_t pack(const Mono& m);

    int vars_ = 0, order_ = 0;
    std::vector<Mono> mono_;
    std::vector<double> fact_;
    std::unordered_map<std::uint32_t, int> lookup_;
    std::vector<MulTerm> mul_;
    std::vector<DivTerm> div_;
    std::vector<std::int32_t> div_off_;
};

// One truncated Taylor value. Slot 0 carries the point value and always runs
// the same floating-point operation as a plain double would, so order-0
// evaluation and higher-order value slots agree bit for bit.
class Jet {
public:
    Jet(const JetSpace& space, double value = 0.0)
        : space_(&space), c_(static_cast<std::size_t>(space.size()), 0.0) {
        c_[0] = value;
    }

    static Jet variable(const JetSpace& space, int coord, double value) {
        Jet j(space, value);
        if (space.order() >= 1) j.c_[static_cast<std::size_t>(1 + coord)] = 1.0;
        return j;
    }

    const JetSpace& space() const { return *space_; }
    double value() const { return c_[0]; }
    double coeff(int idx) const { return c_[static_cast<std::size_t>(idx)]; }
    double& coeff(int idx) { return c_[static_cast<std::size_t>(idx)]; }
    std::span<const double> coeffs() const { return c_; }

    // derivative by the given coordinate multiset
    double partial(std::span<const int> coords) const;

    bool is_numerically_constant() const {
        for (std::size_t i = 1; i < c_.size(); ++i)
            if (c_[i] != 0.0) return false;
        return true;
    }

    friend Jet operator+(const Jet& x, const Jet& y);
    friend Jet operator-(const Jet& x, const Jet& y);
    friend Jet operator*(const Jet& x, const Jet& y);
    friend Jet operator/(const Jet& x, const Jet& y);
    friend Jet operator-(const Jet& x);

    friend Jet operator+(const Jet& x, double d);
    friend Jet operator+(double d, const Jet& x);
    friend Jet operator-(const Jet& x, double d);
    friend Jet operator-(double d, const Jet& x);
    friend Jet operator*(const Jet& x, double d);
    friend Jet operator*(double d, const Jet& x);
    friend Jet operator/(const Jet& x, double d);
    friend Jet operator/(double d, const Jet& x);

    // r += s * x, leaving the value slot exact when s*x has zero value slot
    void add_scaled(double s, const Jet& x) {
        for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += s * x.c_[i];
    }

private:
    const JetSpace* space_;
    std::vector<double> c_;
};

Jet sin(const Jet& x);
Jet cos(const Jet& x);
Jet exp(const Jet& x);
Jet log(const Jet& x);
Jet sqrt(const Jet& x);
Jet pow(const Jet& x, double y);

inline double value_of(double x) { return x; }
inline double value_of(const Jet& x) { return x.value(); }

inline double scalar_constant(double v, double /*exemplar*/) { return v; }
inline Jet scalar_constant(double v, const Jet& exemplar) { return Jet(exemplar.space(), v); }

inline double pow_real(double x, double y) { return std::pow(x, y); }
inline Jet pow_real(const Jet& x, double y) { return pow(x, y); }

// integer power by halving; both scalar towers run the same multiplication
// tree, so value slots stay bit-identical across jet orders
template <class S>
S powi_pos(const S& x, long long e) {
    if (e == 1) return x;
    S h = powi_pos(x, e / 2);
    S h2 = h * h;
    if (e & 1) return h2 * x;
    return h2;
}

template <class S>
S powi(const S& x, long long e) {
    if (e == 0) return scalar_constant(1.0, x);
    if (e < 0) return scalar_constant(1.0, x) / powi_pos(x, -e);
    return powi_pos(x, e);
}

}  // namespace finlab
