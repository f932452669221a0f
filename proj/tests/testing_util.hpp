#pragma once

#include "pg/nn/ops.hpp"

#include <functional>

namespace pg::testing {

// Central finite differences of a scalar-valued function of one leaf tensor.
// The leaf's value is perturbed in place; the function must rebuild its graph
// on each call (define-by-run makes that the natural style anyway).
template <class T>
nn::Tensor<T> numeric_grad(nn::Var<T>& leaf, const std::function<nn::Var<T>()>& f,
                           T h = T(1e-5)) {
    nn::Tensor<T> g(leaf.shape());
    for (Index i = 0; i < leaf.numel(); ++i) {
        T orig = leaf.val().data[i];
        T step = h * std::max(T(1), std::abs(orig));
        leaf.val().data[i] = orig + step;
        T fp = f().val().data[0];
        leaf.val().data[i] = orig - step;
        T fm = f().val().data[0];
        leaf.val().data[i] = orig;
        g.data[i] = (fp - fm) / (2 * step);
    }
    return g;
}

template <class T>
T max_rel_err(const nn::Tensor<T>& a, const nn::Tensor<T>& b, T floor = T(1e-8)) {
    T worst = 0;
    for (Index i = 0; i < a.numel(); ++i) {
        T denom = std::max({std::abs(a.data[i]), std::abs(b.data[i]), floor});
        worst = std::max(worst, std::abs(a.data[i] - b.data[i]) / denom);
    }
    return worst;
}

}  // namespace pg::testing
