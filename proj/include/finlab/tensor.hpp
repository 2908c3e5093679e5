#pragma once

#include <span>
#include <string>
#include <vector>

#include "finlab/expr.hpp"
#include "finlab/linalg.hpp"
#include "finlab/phase.hpp"

namespace finlab {

// square (1,1) tensor field on phase space, stored entrywise as expressions
class TensorField {
public:
    TensorField() = default;

    // rows of entry expressions, one string per component, row-major
    static TensorField parse(const std::vector<std::vector<std::string>>& rows, int dim);
    static TensorField scaled_identity(double c, int dim);

    int dim() const { return dim_; }
    const Expression& at(int i, int j) const {
        return entries_[static_cast<std::size_t>(i * dim_ + j)];
    }

    bool uses_u() const;
    // largest entrywise polynomial degree in the u-coordinates, -1 when some
    // entry is not polynomial in u
    int max_u_degree() const;

    // the field plus s times the identity
    TensorField shifted(double s) const;

    template <class S>
    SquareMat<S> values_at(std::span<const S> qv, std::span<const S> uv) const {
        SquareMat<S> m(dim_, scalar_constant(0.0, qv[0]));
        for (int i = 0; i < dim_; ++i)
            for (int j = 0; j < dim_; ++j) m(i, j) = at(i, j).template eval<S>(qv, uv);
        return m;
    }

    Mat values_at(const PhasePoint& p) const {
        return values_at<double>(std::span<const double>(p.q), std::span<const double>(p.u));
    }

private:
    int dim_ = 0;
    std::vector<Expression> entries_;
};

}  // namespace finlab
