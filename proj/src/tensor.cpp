#include "finlab/tensor.hpp"

#include <algorithm>

#include "finlab/errors.hpp"

namespace finlab {

TensorField TensorField::parse(const std::vector<std::vector<std::string>>& rows, int dim) {
    if (dim < 1) throw ConfigError("tensor dimension must be at least 1");
    if (rows.size() != static_cast<std::size_t>(dim))
        throw ConfigError("tensor needs " + std::to_string(dim) + " rows, got " +
                          std::to_string(rows.size()));
    TensorField t;
    t.dim_ = dim;
    t.entries_.reserve(static_cast<std::size_t>(dim) * static_cast<std::size_t>(dim));
    for (int i = 0; i < dim; ++i) {
        const auto& row = rows[static_cast<std::size_t>(i)];
        if (row.size() != static_cast<std::size_t>(dim))
            throw ConfigError("tensor row " + std::to_string(i + 1) + " needs " +
                              std::to_string(dim) + " entries, got " + std::to_string(row.size()));
        for (int j = 0; j < dim; ++j) {
            try {
                t.entries_.push_back(Expression::parse(row[static_cast<std::size_t>(j)], dim));
            } catch (const ParseError& e) {
                throw ConfigError("tensor entry (" + std::to_string(i + 1) + "," +
                                  std::to_string(j + 1) + "): " + e.what() + " at offset " +
                                  std::to_string(e.position));
            }
        }
    }
    return t;
}

TensorField TensorField::scaled_identity(double c, int dim) {
    if (dim < 1) throw ConfigError("tensor dimension must be at least 1");
    TensorField t;
    t.dim_ = dim;
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j)
            t.entries_.push_back(Expression::number(i == j ? c : 0.0, dim));
    return t;
}

bool TensorField::uses_u() const {
    return std::any_of(entries_.begin(), entries_.end(),
                       [](const Expression& e) { return e.uses_u(); });
}

int TensorField::max_u_degree() const {
    int deg = 0;
    for (const Expression& e : entries_) {
        const int d = e.u_poly_degree();
        if (d < 0) return -1;
        deg = std::max(deg, d);
    }
    return deg;
}

TensorField TensorField::shifted(double s) const {
    TensorField t = *this;
    for (int i = 0; i < dim_; ++i) {
        Expression& e = t.entries_[static_cast<std::size_t>(i * dim_ + i)];
        e = e + Expression::number(s, dim_);
    }
    return t;
}

}  // namespace finlab
