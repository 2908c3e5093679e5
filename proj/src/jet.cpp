#include "finlab/jet.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>
#include <unordered_map>

namespace finlab {

namespace {

std::vector<int> sorted_ids(std::span<const int> coords) {
    std::vector<int> ids(coords.begin(), coords.end());
    std::sort(ids.begin(), ids.end());
    return ids;
}

}  // namespace

std::uint32_t JetSpace::pack(const Mono& m) {
    // 5 bits per coordinate id (+1 so zero means "absent"), 2 bits of length
    std::uint32_t key = static_cast<std::uint32_t>(m.len);
    for (int i = 0; i < m.len; ++i)
        key |= static_cast<std::uint32_t>(m.v[static_cast<std::size_t>(i)] + 1) << (2 + 5 * i);
    return key;
}

JetSpace::JetSpace(int vars, int order) : vars_(vars), order_(order) {
    if (vars < 1 || vars > 16) throw ModelError("jet space supports 1..16 coordinates");
    if (order < 0 || order > 3) throw ModelError("jet order must be within 0..3");

    // degree-major monomial enumeration
    mono_.push_back(Mono{});
    if (order >= 1)
        for (int a = 0; a < vars; ++a)
            mono_.push_back(Mono{{static_cast<std::int8_t>(a)}, 1});
    if (order >= 2)
        for (int a = 0; a < vars; ++a)
            for (int b = a; b < vars; ++b)
                mono_.push_back(Mono{{static_cast<std::int8_t>(a), static_cast<std::int8_t>(b)}, 2});
    if (order >= 3)
        for (int a = 0; a < vars; ++a)
            for (int b = a; b < vars; ++b)
                for (int c = b; c < vars; ++c)
                    mono_.push_back(Mono{{static_cast<std::int8_t>(a), static_cast<std::int8_t>(b),
                                          static_cast<std::int8_t>(c)}, 3});

    lookup_.reserve(mono_.size() * 2);
    for (std::size_t i = 0; i < mono_.size(); ++i) lookup_[pack(mono_[i])] = static_cast<int>(i);

    fact_.resize(mono_.size(), 1.0);
    for (std::size_t i = 0; i < mono_.size(); ++i) {
        const Mono& m = mono_[i];
        // multiplicity factorial: product over repeated ids
        double f = 1.0;
        int run = 1;
        for (int k = 1; k < m.len; ++k) {
            if (m.v[static_cast<std::size_t>(k)] == m.v[static_cast<std::size_t>(k - 1)]) {
                ++run;
                f *= run;
            } else {
                run = 1;
            }
        }
        fact_[i] = f;
    }

    // multiplication table over all ordered monomial pairs within the degree cap
    std::vector<std::vector<DivTerm>> div_by_out(mono_.size());
    for (std::size_t ia = 0; ia < mono_.size(); ++ia) {
        for (std::size_t ib = 0; ib < mono_.size(); ++ib) {
            const Mono& a = mono_[ia];
            const Mono& b = mono_[ib];
            if (a.len + b.len > order) continue;
            Mono prod;
            prod.len = a.len + b.len;
            std::array<std::int8_t, 6> merged{};
            std::merge(a.v.begin(), a.v.begin() + a.len, b.v.begin(), b.v.begin() + b.len, merged.begin());
            for (int k = 0; k < prod.len; ++k) prod.v[static_cast<std::size_t>(k)] = merged[static_cast<std::size_t>(k)];
            const int out = lookup_.at(pack(prod));
            mul_.push_back(MulTerm{static_cast<std::int32_t>(ia), static_cast<std::int32_t>(ib),
                                   static_cast<std::int32_t>(out)});
            if (ib != 0)  // division: contributions h[ia]*g[ib] with g-part of positive degree
                div_by_out[static_cast<std::size_t>(out)].push_back(
                    DivTerm{static_cast<std::int32_t>(ia), static_cast<std::int32_t>(ib)});
        }
    }
    div_off_.resize(mono_.size() + 1, 0);
    for (std::size_t i = 0; i < mono_.size(); ++i) {
        div_off_[i + 1] = div_off_[i] + static_cast<std::int32_t>(div_by_out[i].size());
        div_.insert(div_.end(), div_by_out[i].begin(), div_by_out[i].end());
    }
}

int JetSpace::index_of(std::span<const int> coords) const {
    if (coords.size() > static_cast<std::size_t>(order_)) return -1;
    std::vector<int> ids = sorted_ids(coords);
    Mono m;
    m.len = static_cast<int>(ids.size());
    for (int i = 0; i < m.len; ++i) {
        if (ids[static_cast<std::size_t>(i)] < 0 || ids[static_cast<std::size_t>(i)] >= vars_)
            throw std::out_of_range("coordinate id out of range for jet space");
        m.v[static_cast<std::size_t>(i)] = static_cast<std::int8_t>(ids[static_cast<std::size_t>(i)]);
    }
    auto it = lookup_.find(pack(m));
    return it == lookup_.end() ? -1 : it->second;
}

const JetSpace& JetSpace::get(int vars, int order) {
    static std::mutex mu;
    static std::map<std::pair<int, int>, std::unique_ptr<JetSpace>> registry;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = registry[{vars, order}];
    if (!slot) slot.reset(new JetSpace(vars, order));
    return *slot;
}

double Jet::partial(std::span<const int> coords) const {
    const int idx = space_->index_of(coords);
    if (idx < 0) throw std::out_of_range("derivative order exceeds jet order");
    return c_[static_cast<std::size_t>(idx)] * space_->mult_factorial(idx);
}

Jet operator+(const Jet& x, const Jet& y) {
    Jet r = x;
    for (std::size_t i = 0; i < r.c_.size(); ++i) r.c_[i] += y.c_[i];
    return r;
}

Jet operator-(const Jet& x, const Jet& y) {
    Jet r = x;
    for (std::size_t i = 0; i < r.c_.size(); ++i) r.c_[i] -= y.c_[i];
    return r;
}

Jet operator*(const Jet& x, const Jet& y) {
    Jet r(*x.space_, 0.0);
    for (const JetSpace::MulTerm& t : x.space_->mul_terms())
        r.c_[static_cast<std::size_t>(t.out)] +=
            x.c_[static_cast<std::size_t>(t.a)] * y.c_[static_cast<std::size_t>(t.b)];
    // keep the value slot the exact double product; the accumulating loop
    // starts from 0.0, which would turn a -0.0 product into +0.0
    r.c_[0] = x.c_[0] * y.c_[0];
    return r;
}

// truncated power-series division: process outputs in degree-major order,
// h[i] = (f[i] - sum h[a]*g[b]) / g0 with every g-contribution of positive degree
Jet operator/(const Jet& f, const Jet& g) {
    const double g0 = g.value();
    if (g0 == 0.0) throw DomainError("division by zero");
    Jet h(*f.space_, 0.0);
    const auto off = f.space_->div_offsets();
    const auto terms = f.space_->div_terms();
    for (int i = 0; i < f.space_->size(); ++i) {
        double acc = f.c_[static_cast<std::size_t>(i)];
        for (std::int32_t t = off[static_cast<std::size_t>(i)]; t < off[static_cast<std::size_t>(i) + 1]; ++t)
            acc -= h.c_[static_cast<std::size_t>(terms[static_cast<std::size_t>(t)].h)] *
                   g.c_[static_cast<std::size_t>(terms[static_cast<std::size_t>(t)].g)];
        h.c_[static_cast<std::size_t>(i)] = acc / g0;
    }
    return h;
}

Jet operator-(const Jet& x) {
    Jet r = x;
    for (auto& v : r.c_) v = -v;
    return r;
}

Jet operator+(const Jet& x, double d) { Jet r = x; r.c_[0] += d; return r; }
Jet operator+(double d, const Jet& x) { Jet r = x; r.c_[0] = d + r.c_[0]; return r; }
Jet operator-(const Jet& x, double d) { Jet r = x; r.c_[0] -= d; return r; }
Jet operator-(double d, const Jet& x) {
    Jet r = -x;
    r.c_[0] = d - x.c_[0];
    return r;
}
Jet operator*(const Jet& x, double d) { Jet r = x; for (auto& v : r.c_) v *= d; return r; }
Jet operator*(double d, const Jet& x) { Jet r = x; for (auto& v : r.c_) v = d * v; return r; }
Jet operator/(const Jet& x, double d) {
    if (d == 0.0) throw DomainError("division by zero");
    Jet r = x;
    for (auto& v : r.c_) v /= d;
    return r;
}
Jet operator/(double d, const Jet& x) { return Jet(*x.space_, d) / x; }

namespace {

// univariate composition f(u) truncated at the space order: with w = u - u0,
// f(u) = c0 + c1 w + c2 w^2 + c3 w^3 where ck = f^(k)(u0)/k!. The value slot is
// exactly c0, the plain-double function value.
Jet compose(const Jet& u, const std::array<double, 4>& c) {
    const JetSpace& s = u.space();
    Jet w = u;
    w.coeff(0) = 0.0;
    Jet r(s, c[0]);
    if (s.order() >= 1) r.add_scaled(c[1], w);
    if (s.order() >= 2) {
        Jet w2 = w * w;
        r.add_scaled(c[2], w2);
        if (s.order() >= 3) {
            Jet w3 = w2 * w;
            r.add_scaled(c[3], w3);
        }
    }
    r.coeff(0) = c[0];  // adding ck * 0.0 must not disturb the value slot's sign
    return r;
}

}  // namespace

Jet sin(const Jet& x) {
    const double s = std::sin(x.value()), c = std::cos(x.value());
    return compose(x, {s, c, -s / 2.0, -c / 6.0});
}

Jet cos(const Jet& x) {
    const double s = std::sin(x.value()), c = std::cos(x.value());
    return compose(x, {c, -s, -c / 2.0, s / 6.0});
}

Jet exp(const Jet& x) {
    const double e = std::exp(x.value());
    return compose(x, {e, e, e / 2.0, e / 6.0});
}

Jet log(const Jet& x) {
    const double v = x.value();
    if (v <= 0.0) throw DomainError("log of a non-positive argument");
    return compose(x, {std::log(v), 1.0 / v, -1.0 / (2.0 * v * v), 1.0 / (3.0 * v * v * v)});
}

Jet sqrt(const Jet& x) {
    const double v = x.value();
    if (v < 0.0) throw DomainError("sqrt of a negative argument");
    const double s = std::sqrt(v);
    if (x.space().order() == 0) return Jet(x.space(), s);
    if (v == 0.0) throw DomainError("sqrt at zero has no finite derivatives");
    return compose(x, {s, 1.0 / (2.0 * s), -1.0 / (8.0 * s * v), 1.0 / (16.0 * s * v * v)});
}

Jet pow(const Jet& x, double y) {
    if (y == std::rint(y) && std::fabs(y) < 1e15)
        return powi(x, static_cast<long long>(y));
    const double v = x.value();
    if (v <= 0.0) throw DomainError("non-integer power of a non-positive base");
    // ck = y(y-1)...(y-k+1)/k! * v^(y-k); the value slot matches std::pow(v, y)
    std::array<double, 4> c{std::pow(v, y), 0.0, 0.0, 0.0};
    double coef = 1.0;
    for (int k = 1; k <= 3; ++k) {
        coef *= (y - static_cast<double>(k - 1)) / static_cast<double>(k);
        c[static_cast<std::size_t>(k)] = coef * std::pow(v, y - static_cast<double>(k));
    }
    return compose(x, c);
}

}  // namespace finlab
