#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "msre/common.hpp"

namespace msre {

// symmetric height grid {-K*delta, ..., 0, ..., K*delta}^n.
// Linear index: component 0 is the most significant digit, so ascending
// linear index == ascending lexicographic order of the height vector.
struct HeightGrid {
    int n = 1;
    double delta = 1.0;
    int K = 1;

    HeightGrid() = default;
    HeightGrid(int n_, double delta_, int K_) : n(n_), delta(delta_), K(K_) {
        require(n >= 1, "HeightGrid: n >= 1 required");
        require(delta > 0.0, "HeightGrid: delta > 0 required");
        require(K >= 0, "HeightGrid: K >= 0 required");
    }

    int axis_points() const { return 2 * K + 1; }

    int64_t size() const {
        int64_t s = 1;
        for (int i = 0; i < n; ++i) {
            s *= axis_points();
            require(s < (int64_t{1} << 40), "HeightGrid: point count overflow");
        }
        return s;
    }

    int64_t origin() const {
        int64_t idx = 0;
        for (int i = 0; i < n; ++i) idx = idx * axis_points() + K;
        return idx;
    }

    // digit of component c for linear index g, in [0, 2K]
    int digit(int64_t g, int c) const {
        const int M = axis_points();
        for (int i = n - 1; i > c; --i) g /= M;
        return static_cast<int>(g % M);
    }

    double height(int64_t g, int c) const { return (digit(g, c) - K) * delta; }

    void heights(int64_t g, double* out) const {
        const int M = axis_points();
        for (int i = n - 1; i >= 0; --i) {
            out[i] = (static_cast<int>(g % M) - K) * delta;
            g /= M;
        }
    }

    int64_t index_from_digits(const int* digits) const {
        int64_t idx = 0;
        for (int i = 0; i < n; ++i) {
            require(digits[i] >= 0 && digits[i] < axis_points(), "grid digit out of range");
            idx = idx * axis_points() + digits[i];
        }
        return idx;
    }

    // shift a linear index by per-component digit offsets; false if out of range
    bool shifted(int64_t g, const int* offsets, int64_t* out) const {
        const int M = axis_points();
        int64_t idx = 0;
        int64_t mult = 1;
        for (int i = 0; i < n; ++i) mult *= M;
        for (int i = 0; i < n; ++i) {
            mult /= M;
            const int dig = static_cast<int>((g / mult) % M) + offsets[i];
            if (dig < 0 || dig >= M) return false;
            idx = idx * M + dig;
        }
        *out = idx;
        return true;
    }

    // nearest digit offset for a real height shift; exact grid alignment required
    int aligned_offset(double shift, double tol = 1e-9) const {
        const double raw = shift / delta;
        const double rounded = std::round(raw);
        require(std::abs(raw - rounded) <= tol, "height shift is not grid-aligned");
        return static_cast<int>(rounded);
    }

    bool operator==(const HeightGrid& o) const {
        return n == o.n && delta == o.delta && K == o.K;
    }
};

}  // namespace msre
