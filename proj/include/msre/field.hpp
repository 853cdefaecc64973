#pragma once

#include <cstring>
#include <vector>

#include "msre/domain.hpp"

namespace msre {

// n-vector-valued field stored over a domain's storage window (Λ⁺ plus the
// unused corner cells). Boundary rows are explicit: values off Λ are data,
// not convention.
struct LatticeField {
    Box box;  // storage window
    int n = 1;
    std::vector<double> values;  // box.size() * n, vertex-major

    LatticeField() = default;

    LatticeField(const Box& storage_box, int n_)
        : box(storage_box), n(n_),
          values(static_cast<size_t>(storage_box.size()) * n_, 0.0) {}

    static LatticeField zeros(const Domain& dom, int n) {
        return LatticeField(dom.storage(), n);
    }

    bool compatible(const Domain& dom) const { return box == dom.storage(); }

    double* at_rank(int64_t storage_rank) {
        return values.data() + static_cast<size_t>(storage_rank) * n;
    }
    const double* at_rank(int64_t storage_rank) const {
        return values.data() + static_cast<size_t>(storage_rank) * n;
    }

    double* at(const int* v) { return at_rank(box.index(v)); }
    const double* at(const int* v) const { return at_rank(box.index(v)); }

    double& scalar(const int* v) {
        require(n == 1, "LatticeField: scalar access on vector field");
        return values[static_cast<size_t>(box.index(v))];
    }
    double scalar(const int* v) const {
        require(n == 1, "LatticeField: scalar access on vector field");
        return values[static_cast<size_t>(box.index(v))];
    }

    void fill(double c) { std::fill(values.begin(), values.end(), c); }

    // set component c to `value` everywhere
    void fill_component(int c, double value) {
        const int64_t cells = box.size();
        for (int64_t i = 0; i < cells; ++i) values[static_cast<size_t>(i) * n + c] = value;
    }
};

inline double norm2(const double* x, int n) {
    double s = 0.0;
    for (int c = 0; c < n; ++c) s += x[c] * x[c];
    return s;
}

inline double dist2(const double* x, const double* y, int n) {
    double s = 0.0;
    for (int c = 0; c < n; ++c) {
        const double d = x[c] - y[c];
        s += d * d;
    }
    return s;
}

}  // namespace msre
