#pragma once

#include <cstdint>
#include <cstdlib>
#include <new>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace echonav {

// 64-byte aligned allocator. Keeping every tensor buffer on the same
// alignment pins the vectorized kernel paths, so repeated runs of the same
// computation are bit-identical regardless of heap state.
template <typename T>
struct AlignedAlloc {
    using value_type = T;
    AlignedAlloc() = default;
    template <typename U>
    AlignedAlloc(const AlignedAlloc<U>&) {}

    T* allocate(size_t n) {
        if (n == 0) return nullptr;
        void* p = std::aligned_alloc(64, ((n * sizeof(T) + 63) / 64) * 64);
        if (!p) throw std::bad_alloc();
        return static_cast<T*>(p);
    }
    void deallocate(T* p, size_t) noexcept { std::free(p); }

    template <typename U>
    bool operator==(const AlignedAlloc<U>&) const { return true; }
    template <typename U>
    bool operator!=(const AlignedAlloc<U>&) const { return false; }
};

using AlignedDoubles = std::vector<double, AlignedAlloc<double>>;

// Row-major dense tensor. Heavy math maps this into Eigen internally.
struct Tensor {
    std::vector<int64_t> shape;
    AlignedDoubles v;

    Tensor() = default;
    explicit Tensor(std::vector<int64_t> s) : shape(std::move(s)) {
        v.assign(static_cast<size_t>(numel_of(shape)), 0.0);
    }

    static int64_t numel_of(const std::vector<int64_t>& s) {
        int64_t n = 1;
        for (int64_t d : s) {
            if (d < 0) throw std::runtime_error("Tensor: negative dimension");
            n *= d;
        }
        return n;
    }

    int64_t numel() const { return static_cast<int64_t>(v.size()); }
    int64_t rows() const { return shape.empty() ? 0 : shape[0]; }
    int64_t cols() const { return shape.size() < 2 ? 1 : shape[1]; }

    double& at(int64_t i, int64_t j) { return v[static_cast<size_t>(i) * cols() + j]; }
    double at(int64_t i, int64_t j) const { return v[static_cast<size_t>(i) * cols() + j]; }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }
};

// NaN/Inf anywhere trips an error naming the tensor.
void check_finite(const Tensor& t, const std::string& name);

} // namespace echonav
