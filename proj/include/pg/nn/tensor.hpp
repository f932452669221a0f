#pragma once

#include "pg/core/errors.hpp"
#include "pg/core/rng.hpp"
#include "pg/core/types.hpp"

#include <initializer_list>
#include <sstream>
#include <string>

namespace pg::nn {

// Dense n-d array: flat row-major storage over Eigen, shape carried alongside.
// 2-d tensors {rows, cols} map onto Eigen matrices for matmul; 4-d {N,C,H,W}
// is the feature-map layout used by the convolution kernels.
template <class T>
struct Tensor {
    Shape shape;
    ArrayX<T> data;

    Tensor() = default;
    explicit Tensor(Shape s) : shape(std::move(s)), data(ArrayX<T>::Zero(shape_numel(shape))) {}
    Tensor(Shape s, ArrayX<T> d) : shape(std::move(s)), data(std::move(d)) {
        require(data.size() == shape_numel(shape), ErrorCode::ShapeMismatch,
                "tensor data size does not match shape");
    }

    Index numel() const { return data.size(); }
    Index dim(int i) const { return shape[static_cast<std::size_t>(i)]; }
    int ndim() const { return static_cast<int>(shape.size()); }

    static Tensor zeros(Shape s) { return Tensor(std::move(s)); }

    static Tensor full(Shape s, T v) {
        Tensor t(std::move(s));
        t.data.setConstant(v);
        return t;
    }

    static Tensor scalar(T v) { return full({1}, v); }

    static Tensor from_vector(Shape s, const std::vector<T>& v) {
        Tensor t(std::move(s));
        require(static_cast<Index>(v.size()) == t.numel(), ErrorCode::ShapeMismatch,
                "from_vector size mismatch");
        for (Index i = 0; i < t.numel(); ++i) t.data[i] = v[static_cast<std::size_t>(i)];
        return t;
    }

    static Tensor randn(Shape s, Rng& rng, T stdev = T(1)) {
        Tensor t(std::move(s));
        for (Index i = 0; i < t.numel(); ++i) t.data[i] = static_cast<T>(rng.normal()) * stdev;
        return t;
    }

    T* ptr() { return data.data(); }
    const T* ptr() const { return data.data(); }

    // 2-d element access
    T& at2(Index r, Index c) { return data[r * shape[1] + c]; }
    T at2(Index r, Index c) const { return data[r * shape[1] + c]; }

    // 4-d element access {N,C,H,W}
    T& at4(Index n, Index c, Index h, Index w) {
        return data[((n * shape[1] + c) * shape[2] + h) * shape[3] + w];
    }
    T at4(Index n, Index c, Index h, Index w) const {
        return data[((n * shape[1] + c) * shape[2] + h) * shape[3] + w];
    }

    bool all_finite() const { return data.isFinite().all(); }

    template <class U>
    Tensor<U> cast() const {
        Tensor<U> out;
        out.shape = shape;
        out.data = data.template cast<U>();
        return out;
    }

    std::string shape_str() const {
        std::ostringstream os;
        os << "[";
        for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
        os << "]";
        return os.str();
    }
};

template <class T>
void check_same_shape(const Tensor<T>& a, const Tensor<T>& b, const char* where) {
    require(shape_equal(a.shape, b.shape), ErrorCode::ShapeMismatch,
            std::string(where) + ": " + a.shape_str() + " vs " + b.shape_str());
}

}  // namespace pg::nn
