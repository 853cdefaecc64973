#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <vector>

#include "msre/common.hpp"

namespace msre {

inline constexpr int kMaxDim = 6;

// integer box [lo, hi]^d, linear index with axis 0 fastest
struct Box {
    int d = 1;
    std::array<int, kMaxDim> lo{};
    std::array<int, kMaxDim> hi{};

    static Box cube(int d, int L) {
        require(d >= 1 && d <= kMaxDim, "Box: dimension out of range");
        Box b;
        b.d = d;
        for (int a = 0; a < d; ++a) {
            b.lo[a] = -L;
            b.hi[a] = L;
        }
        return b;
    }

    int64_t extent(int a) const { return int64_t{hi[a]} - lo[a] + 1; }

    int64_t size() const {
        int64_t s = 1;
        for (int a = 0; a < d; ++a) {
            require(hi[a] >= lo[a], "Box: empty axis");
            s *= extent(a);
        }
        return s;
    }

    bool contains(const int* v) const {
        for (int a = 0; a < d; ++a)
            if (v[a] < lo[a] || v[a] > hi[a]) return false;
        return true;
    }

    int64_t index(const int* v) const {
        int64_t idx = 0;
        int64_t stride = 1;
        for (int a = 0; a < d; ++a) {
            idx += (v[a] - lo[a]) * stride;
            stride *= extent(a);
        }
        return idx;
    }

    void decode(int64_t idx, int* v) const {
        for (int a = 0; a < d; ++a) {
            const int64_t e = extent(a);
            v[a] = lo[a] + static_cast<int>(idx % e);
            idx /= e;
        }
    }

    int64_t stride(int axis) const {
        int64_t s = 1;
        for (int a = 0; a < axis; ++a) s *= extent(a);
        return s;
    }

    Box inflated(int by) const {
        Box b = *this;
        for (int a = 0; a < d; ++a) {
            b.lo[a] -= by;
            b.hi[a] += by;
        }
        return b;
    }

    Box intersect(const Box& o) const {
        require(d == o.d, "Box: dimension mismatch");
        Box b;
        b.d = d;
        for (int a = 0; a < d; ++a) {
            b.lo[a] = std::max(lo[a], o.lo[a]);
            b.hi[a] = std::min(hi[a], o.hi[a]);
            require(b.lo[a] <= b.hi[a], "Box: empty intersection");
        }
        return b;
    }

    bool operator==(const Box& o) const {
        if (d != o.d) return false;
        for (int a = 0; a < d; ++a)
            if (lo[a] != o.lo[a] || hi[a] != o.hi[a]) return false;
        return true;
    }
};

// The finite vertex set Λ (a box, optionally restricted to an explicit vertex
// subset), with its closure Λ⁺ = Λ ∪ {v : v has a neighbor in Λ}. Field
// storage covers the bounding box inflated by one (a superset of Λ⁺; the
// never-touched corner cells are zero-filled and ignored by all operations).
class Domain {
  public:
    explicit Domain(const Box& box) : bounds_(box), storage_(box.inflated(1)) {
        build_full_box();
    }

    Domain(const Box& bounding, const std::vector<std::vector<int>>& vertices)
        : bounds_(bounding), storage_(bounding.inflated(1)) {
        mask_.assign(static_cast<size_t>(bounds_.size()), 0);
        for (const auto& v : vertices) {
            require(static_cast<int>(v.size()) == bounds_.d, "Domain: vertex dimension mismatch");
            require(bounds_.contains(v.data()), "Domain: vertex outside bounding box");
            mask_[static_cast<size_t>(bounds_.index(v.data()))] = 1;
        }
        build_masked();
        require(interior_count_ > 0, "Domain: empty vertex set");
    }

    int d() const { return bounds_.d; }
    const Box& bounds() const { return bounds_; }
    const Box& storage() const { return storage_; }
    int64_t interior_count() const { return interior_count_; }
    int64_t storage_count() const { return storage_.size(); }
    bool has_mask() const { return !mask_.empty(); }

    bool is_interior(const int* v) const {
        if (!bounds_.contains(v)) return false;
        return mask_.empty() || mask_[static_cast<size_t>(bounds_.index(v))] != 0;
    }

    bool in_closure(const int* v) const {
        if (is_interior(v)) return true;
        int u[kMaxDim];
        for (int a = 0; a < bounds_.d; ++a) u[a] = v[a];
        for (int a = 0; a < bounds_.d; ++a) {
            for (int dir : {-1, +1}) {
                u[a] = v[a] + dir;
                if (is_interior(u)) return true;
            }
            u[a] = v[a];
        }
        return false;
    }

    bool is_boundary(const int* v) const { return !is_interior(v) && in_closure(v); }

    // dense rank of interior vertices, row-major (axis 0 fastest)
    int64_t interior_rank(const int* v) const {
        require(is_interior(v), "Domain: vertex not in the interior");
        const int64_t bi = bounds_.index(v);
        return mask_.empty() ? bi : rank_table_[static_cast<size_t>(bi)];
    }

    void interior_coord(int64_t rank, int* v) const {
        storage_.decode(interior_storage_ranks_[static_cast<size_t>(rank)], v);
    }

    int64_t storage_rank(const int* v) const {
        require(storage_.contains(v), "Domain: vertex outside storage window");
        return storage_.index(v);
    }

    // storage ranks of interior vertices, in interior-rank order
    const std::vector<int64_t>& interior_storage_ranks() const { return interior_storage_ranks_; }

    int64_t storage_stride(int axis) const { return storage_.stride(axis); }

  private:
    void build_full_box() {
        interior_count_ = bounds_.size();
        interior_storage_ranks_.reserve(static_cast<size_t>(interior_count_));
        int v[kMaxDim];
        for (int64_t i = 0; i < interior_count_; ++i) {
            bounds_.decode(i, v);
            interior_storage_ranks_.push_back(storage_.index(v));
        }
    }

    void build_masked() {
        rank_table_.assign(mask_.size(), -1);
        int64_t rank = 0;
        int v[kMaxDim];
        for (size_t i = 0; i < mask_.size(); ++i) {
            if (!mask_[i]) continue;
            rank_table_[i] = rank++;
            bounds_.decode(static_cast<int64_t>(i), v);
            interior_storage_ranks_.push_back(storage_.index(v));
        }
        interior_count_ = rank;
    }

    Box bounds_;
    Box storage_;
    std::vector<uint8_t> mask_;
    std::vector<int64_t> rank_table_;
    std::vector<int64_t> interior_storage_ranks_;
    int64_t interior_count_ = 0;
};

}  // namespace msre
