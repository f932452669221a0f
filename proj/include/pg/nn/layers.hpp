#pragma once

#include "pg/nn/ops.hpp"

#include <string>
#include <utility>
#include <vector>

namespace pg::nn {

template <class T>
using ParamList = std::vector<std::pair<std::string, Var<T>>>;

template <class T>
Var<T> new_param(Shape s, Rng& rng, T stdev) {
    return Var<T>::leaf(Tensor<T>::randn(std::move(s), rng, stdev), true);
}

template <class T>
Var<T> zero_param(Shape s) {
    return Var<T>::leaf(Tensor<T>::zeros(std::move(s)), true);
}

template <class T>
struct LinearT {
    Var<T> w;  // {in, out}
    Var<T> b;  // {out}

    LinearT() = default;
    LinearT(Index in, Index out, Rng rng, T gain = T(1)) {
        T stdev = gain * std::sqrt(T(2) / static_cast<T>(in));
        w = new_param<T>({in, out}, rng, stdev);
        b = zero_param<T>({out});
    }

    Var<T> forward(const Var<T>& x) const {
        return add(matmul(x, w), broadcast_rows(b, x.shape()[0]));
    }

    void collect(const std::string& prefix, ParamList<T>& out) const {
        out.emplace_back(prefix + ".w", w);
        out.emplace_back(prefix + ".b", b);
    }
};

template <class T>
struct Conv2dT {
    Var<T> w;  // {out, in, k, k}
    Var<T> b;  // {out}
    Index stride = 1;
    Index pad = 0;

    Conv2dT() = default;
    Conv2dT(Index c_in, Index c_out, Index k, Index stride_, Index pad_, Rng rng,
            T gain = T(1))
        : stride(stride_), pad(pad_) {
        T stdev = gain * std::sqrt(T(2) / static_cast<T>(c_in * k * k));
        w = new_param<T>({c_out, c_in, k, k}, rng, stdev);
        b = zero_param<T>({c_out});
    }

    Var<T> forward(const Var<T>& x) const {
        Var<T> y = conv2d(x, w, stride, pad);
        return add(y, broadcast_c(b, y.shape()[0], y.shape()[2], y.shape()[3]));
    }

    void collect(const std::string& prefix, ParamList<T>& out) const {
        out.emplace_back(prefix + ".w", w);
        out.emplace_back(prefix + ".b", b);
    }
};

// Per-sample per-channel normalization over the spatial dims.
template <class T>
Var<T> instance_norm(const Var<T>& x, T eps = T(1e-5)) {
    Index h = x.shape()[2], w = x.shape()[3];
    T inv_hw = T(1) / static_cast<T>(h * w);
    Var<T> m = mul_scalar(sum_hw(x), inv_hw);
    Var<T> xc = sub(x, tile_hw(m, h, w));
    Var<T> v = mul_scalar(sum_hw(square(xc)), inv_hw);
    Var<T> denom = sqrt_(add_scalar(v, eps));
    return div(xc, tile_hw(denom, h, w));
}

// Row-wise normalization of {N,D} latents to unit RMS.
template <class T>
Var<T> pixel_norm(const Var<T>& x, T eps = T(1e-8)) {
    Index d = x.shape()[1];
    Var<T> ms = mul_scalar(sum_cols(square(x)), T(1) / static_cast<T>(d));
    Var<T> denom = tile_cols(sqrt_(add_scalar(ms, eps)), d);
    return div(x, denom);
}

// Adaptive-moment gradient descent over one parameter group.
template <class T>
class AdamT {
public:
    AdamT() = default;
    AdamT(std::vector<Var<T>> params, T lr, T beta1 = T(0), T beta2 = T(0.99),
          T eps = T(1e-8))
        : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
        slots_.resize(params_.size());
        for (std::size_t i = 0; i < params_.size(); ++i) {
            slots_[i].m = ArrayX<T>::Zero(params_[i].numel());
            slots_[i].v = ArrayX<T>::Zero(params_[i].numel());
        }
    }

    void step(const std::vector<Tensor<T>>& grads) {
        require(grads.size() == params_.size(), ErrorCode::InvalidArgument,
                "Adam: grad count mismatch");
        ++t_;
        T bc1 = T(1) - std::pow(beta1_, static_cast<T>(t_));
        T bc2 = T(1) - std::pow(beta2_, static_cast<T>(t_));
        for (std::size_t i = 0; i < params_.size(); ++i) {
            auto& s = slots_[i];
            const auto& g = grads[i].data;
            s.m = beta1_ * s.m + (T(1) - beta1_) * g;
            s.v = beta2_ * s.v + (T(1) - beta2_) * g.square();
            params_[i].val().data -= lr_ * (s.m / bc1) / ((s.v / bc2).sqrt() + eps_);
        }
    }

    const std::vector<Var<T>>& params() const { return params_; }
    std::int64_t step_count() const { return t_; }

    // state accessors for checkpoint resume
    void export_state(std::vector<ArrayX<T>>& ms, std::vector<ArrayX<T>>& vs,
                      std::int64_t& t) const {
        ms.clear();
        vs.clear();
        for (const auto& s : slots_) {
            ms.push_back(s.m);
            vs.push_back(s.v);
        }
        t = t_;
    }
    void import_state(const std::vector<ArrayX<T>>& ms, const std::vector<ArrayX<T>>& vs,
                      std::int64_t t) {
        require(ms.size() == slots_.size() && vs.size() == slots_.size(),
                ErrorCode::InvalidArgument, "Adam: state size mismatch");
        for (std::size_t i = 0; i < slots_.size(); ++i) {
            slots_[i].m = ms[i];
            slots_[i].v = vs[i];
        }
        t_ = t;
    }

private:
    struct Slot {
        ArrayX<T> m, v;
    };
    std::vector<Var<T>> params_;
    std::vector<Slot> slots_;
    T lr_ = T(1e-3), beta1_ = T(0), beta2_ = T(0.99), eps_ = T(1e-8);
    std::int64_t t_ = 0;
};

}  // namespace pg::nn
