#pragma once

#include "pg/nn/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

namespace pg::nn {

// ---------------------------------------------------------------------------
// elementwise
// ---------------------------------------------------------------------------

template <class T>
Var<T> add(const Var<T>& a, const Var<T>& b) {
    check_same_shape(a.val(), b.val(), "add");
    Tensor<T> out(a.shape(), a.val().data + b.val().data);
    return make_op<T>("add", std::move(out), {a, b},
                      [](const Var<T>& g, const std::vector<Var<T>>&, const Var<T>&) {
                          return std::vector<Var<T>>{g, g};
                      });
}

template <class T>
Var<T> sub(const Var<T>& a, const Var<T>& b) {
    check_same_shape(a.val(), b.val(), "sub");
    Tensor<T> out(a.shape(), a.val().data - b.val().data);
    return make_op<T>("sub", std::move(out), {a, b},
                      [](const Var<T>& g, const std::vector<Var<T>>&, const Var<T>&) {
                          return std::vector<Var<T>>{g, neg(g)};
                      });
}

template <class T>
Var<T> neg(const Var<T>& a) {
    Tensor<T> out(a.shape(), -a.val().data);
    return make_op<T>("neg", std::move(out), {a},
                      [](const Var<T>& g, const std::vector<Var<T>>&, const Var<T>&) {
                          return std::vector<Var<T>>{neg(g)};
                      });
}

template <class T>
Var<T> mul(const Var<T>& a, const Var<T>& b) {
    check_same_shape(a.val(), b.val(), "mul");
    Tensor<T> out(a.shape(), a.val().data * b.val().data);
    return make_op<T>("mul", std::move(out), {a, b},
                      [](const Var<T>& g, const std::vector<Var<T>>& in, const Var<T>&) {
                          Var<T> ga = in[0].requires_grad() ? mul(g, in[1]) : Var<T>();
                          Var<T> gb = in[1].requires_grad() ? mul(g, in[0]) : Var<T>();
                          return std::vector<Var<T>>{ga, gb};
                      });
}

template <class T>
Var<T> div(const Var<T>& a, const Var<T>& b) {
    check_same_shape(a.val(), b.val(), "div");
    Tensor<T> out(a.shape(), a.val().data / b.val().data);
    return make_op<T>("div", std::move(out), {a, b},
                      [](const Var<T>& g, const std::vector<Var<T>>& in, const Var<T>& out_v) {
                          Var<T> ga = in[0].requires_grad() ? div(g, in[1]) : Var<T>();
                          Var<T> gb = in[1].requires_grad() ? neg(div(mul(g, out_v), in[1]))
                                                            : Var<T>();
                          return std::vector<Var<T>>{ga, gb};
                      });
}

template <class T>
Var<T> add_scalar(const Var<T>& a, T s) {
    Tensor<T> out(a.shape(), a.val().data + s);
    return make_op<T>("add_scalar", std::move(out), {a},
                      [](const Var<T>& g, const std::vector<Var<T>>&, const Var<T>&) {
                          return std::vector<Var<T>>{g};
                      });
}

template <class T>
Var<T> mul_scalar(const Var<T>& a, T s) {
    Tensor<T> out(a.shape(), a.val().data * s);
    return make_op<T>("mul_scalar", std::move(out), {a},
                      [s](const Var<T>& g, const std::vector<Var<T>>&, const Var<T>&) {
                          return std::vector<Var<T>>{mul_scalar(g, s)};
                      });
}

template <class T>
Var<T> abs_(const Var<T>& a) {
    Tensor<T> out(a.shape(), a.val().data.abs());
    return make_op<T>("abs", std::move(out), {a},
                      [](const Var<T>& g, const std::vector<Var<T>>& in, const Var<T>&) {
                          Tensor<T> sign(in[0].shape());
                          sign.data = in[0].val().data.sign();
                          return std::vector<Var<T>>{mul(g, constant(std::move(sign)))};
                      });
}

template <class T>
Var<T> leaky_relu(const Var<T>& a, T alpha) {
    Tensor<T> out(a.shape());
    out.data = (a.val().data > T(0)).select(a.val().data, a.val().data * alpha);
    return make_op<T>("leaky_relu", std::move(out), {a},
                      [alpha](const Var<T>& g, const std::vector<Var<T>>& in, const Var<T>&) {
                          Tensor<T> mask(in[0].shape());
                          mask.data = (in[0].val().data > T(0))
                                          .select(ArrayX<T>::Constant(mask.numel(), T(1)),
                                                  ArrayX<T>::Constant(mask.numel(), alpha));
                          return std::vector<Var<T>>{mul(g, constant(std::move(mask)))};
                      });
}

template <class T>
Var<T> relu(const Var<T>& a) {
    return leaky_relu(a, T(0));
}

template <class T>
Var<T> clamp(const Var<T>& a, T lo, T hi = std::numeric_limits<T>::max()) {
    Tensor<T> out(a.shape(), a.val().data.max(lo).min(hi));
    return make_op<T>("clamp", std::move(out), {a},
                      [lo, hi](const Var<T>& g, const std::vector<Var<T>>& in, const Var<T>&) {
                          const auto& x = in[0].val().data;
                          Tensor<T> mask(in[0].shape());
                          mask.data = ((x >= lo) && (x <= hi))
                                          .select(ArrayX<T>::Constant(mask.numel(), T(1)),
                                                  ArrayX<T>::Constant(mask.numel(), T(0)));
                          return std::vector<Var<T>>{mul(g, constant(std::move(mask)))};
                      });
}

template <class T>
Var<T> sigmoid(const Var<T>& a) {
    Tensor<T> out(a.shape());
    const auto& x = a.val().data;
    out.data = (x >= T(0)).select(T(1) / (T(1) + (-x).exp()), x.exp() / (T(1) + x.exp()));
    return make_op<T>("sigmoid", std::move(out), {a},
                      [](const Var<T>& g, const std::vector<Var<T>>&, const Var<T>& out_v) {
                          Var<T> one_minus = add_scalar(neg(out_v), T(1));
                          return std::vector<Var<T>>{mul(g, mul(out_v, one_minus))};
                      });
}

template <class T>
Var<T> tanh_(const Var<T>& a) {
    Tensor<T> out(a.shape(), a.val().data.tanh());
    return make_op<T>("tanh", std::move(out), {a},
                      [](const Var<T>& g, const std::vector<Var<T>>&, const Var<T>& out_v) {
                          Var<T> d = add_scalar(neg(square(out_v)), T(1));
                          return std::vector<Var<T>>{mul(g, d)};
                      });
}

template <class T>
Var<T> exp_(const Var<T>& a) {
    Tensor<T> out(a.shape(), a.val().data.exp());
    return make_op<T>("exp", std::move(out), {a},
                      [](const Var<T>& g, const std::vector<Var<T>>&, const Var<T>& out_v) {
                          return std::vector<Var<T>>{mul(g, out_v)};
                      });
}

template <class T>
Var<T> log_(const Var<T>& a) {
    Tensor<T> out(a.shape(), a.val().data.log());
    return make_op<T>("log", std::move(out), {a},
                      [](const Var<T>& g, const std::vector<Var<T>>& in, const Var<T>&) {
                          return std::vector<Var<T>>{div(g, in[0])};
                      });
}

template <class T>
Var<T> sqrt_(const Var<T>& a) {
    Tensor<T> out(a.shape(), a.val().data.sqrt());
    return make_op<T>("sqrt", std::move(out), {a},
                      [](const Var<T>& g, const std::vector<Var<T>>&, const Var<T>& out_v) {
                          return std::vector<Var<T>>{div(mul_scalar(g, T(0.5)), out_v)};
                      });
}

template <class T>
Var<T> square(const Var<T>& a) {
    Tensor<T> out(a.shape(), a.val().data.square());
    return make_op<T>("square", std::move(out), {a},
                      [](const Var<T>& g, const std::vector<Var<T>>& in, const Var<T>&) {
                          return std::vector<Var<T>>{mul(mul_scalar(g, T(2)), in[0])};
                      });
}

// ---------------------------------------------------------------------------
// 2-d linear algebra
// ---------------------------------------------------------------------------

namespace detail {
template <class T>
Eigen::Map<const RowMajorMatrixX<T>> as_matrix(const Tensor<T>& t) {
    return Eigen::Map<const RowMajorMatrixX<T>>(t.ptr(), t.dim(0), t.dim(1));
}
template <class T>
Eigen::Map<RowMajorMatrixX<T>> as_matrix(Tensor<T>& t) {
    return Eigen::Map<RowMajorMatrixX<T>>(t.ptr(), t.dim(0), t.dim(1));
}
}  // namespace detail

template <class T>
Var<T> matmul(const Var<T>& a, const Var<T>& b) {
    require(a.val().ndim() == 2 && b.val().ndim() == 2 && a.val().dim(1) == b.val().dim(0),
            ErrorCode::ShapeMismatch,
            "matmul: " + a.val().shape_str() + " x " + b.val().shape_str());
    Tensor<T> out({a.val().dim(0), b.val().dim(1)});
    detail::as_matrix(out) = detail::as_matrix(a.val()) * detail::as_matrix(b.val());
    return make_op<T>("matmul", std::move(out), {a, b},
                      [](const Var<T>& g, const std::vector<Var<T>>& in, const Var<T>&) {
                          Var<T> ga = in[0].requires_grad() ? matmul(g, transpose2d(in[1]))
                                                            : Var<T>();
                          Var<T> gb = in[1].requires_grad() ? matmul(transpose2d(in[0]), g)
                                                            : Var<T>();
                          return std::vector<Var<T>>{ga, gb};
                      });
}

template <class T>
Var<T> transpose2d(const Var<T>& a) {
    require(a.val().ndim() == 2, ErrorCode::ShapeMismatch, "transpose2d: need 2-d");
    Tensor<T> out({a.val().dim(1), a.val().dim(0)});
    detail::as_matrix(out) = detail::as_matrix(a.val()).transpose();
    return make_op<T>("transpose2d", std::move(out), {a},
                      [](const Var<T>& g, const std::vector<Var<T>>&, const Var<T>&) {
                          return std::vector<Var<T>>{transpose2d(g)};
                      });
}

// ---------------------------------------------------------------------------
// shape ops
// ---------------------------------------------------------------------------

template <class T>
Var<T> reshape(const Var<T>& a, Shape s) {
    require(shape_numel(s) == a.numel(), ErrorCode::ShapeMismatch,
            "reshape: numel mismatch " + a.val().shape_str());
    Tensor<T> out(s, a.val().data);
    Shape prev = a.shape();
    return make_op<T>("reshape", std::move(out), {a},
                      [prev](const Var<T>& g, const std::vector<Var<T>>&, const Var<T>&) {
                          return std::vector<Var<T>>{reshape(g, prev)};
                      });
}

template <class T>
Var<T> slice_cols(const Var<T>& a, Index off, Index len) {
    require(a.val().ndim() == 2 && off >= 0 && len >= 0 && off + len <= a.val().dim(1),
            ErrorCode::ShapeMismatch, "slice_cols: out of range");
    Index rows = a.val().dim(0);
    Tensor<T> out({rows, len});
    detail::as_matrix(out) = detail::as_matrix(a.val()).middleCols(off, len);
    Index total = a.val().dim(1);
    return make_op<T>("slice_cols", std::move(out), {a},
                      [off, total](const Var<T>& g, const std::vector<Var<T>>&, const Var<T>&) {
                          return std::vector<Var<T>>{pad_cols(g, off, total)};
                      });
}

// Places g into columns [off, off+len) of a zero {rows, total} tensor.
template <class T>
Var<T> pad_cols(const Var<T>& a, Index off, Index total) {
    require(a.val().ndim() == 2 && off + a.val().dim(1) <= total, ErrorCode::ShapeMismatch,
            "pad_cols: out of range");
    Index rows = a.val().dim(0), len = a.val().dim(1);
    Tensor<T> out({rows, total});
    detail::as_matrix(out).middleCols(off, len) = detail::as_matrix(a.val());
    return make_op<T>("pad_cols", std::move(out), {a},
                      [off, len](const Var<T>& g, const std::vector<Var<T>>&, const Var<T>&) {
                          return std::vector<Var<T>>{slice_cols(g, off, len)};
                      });
}

template <class T>
Var<T> concat_cols(const std::vector<Var<T>>& parts) {
    require(!parts.empty(), ErrorCode::InvalidArgument, "concat_cols: empty");
    Index rows = parts[0].val().dim(0);
    Index total = 0;
    for (const auto& p : parts) {
        require(p.val().ndim() == 2 && p.val().dim(0) == rows, ErrorCode::ShapeMismatch,
                "concat_cols: row mismatch");
        total += p.val().dim(1);
    }
    Tensor<T> out({rows, total});
    std::vector<Index> offs;
    Index off = 0;
    for (const auto& p : parts) {
        detail::as_matrix(out).middleCols(off, p.val().dim(1)) = detail::as_matrix(p.val());
        offs.push_back(off);
        off += p.val().dim(1);
    }
    std::vector<Index> lens;
    for (const auto& p : parts) lens.push_back(p.val().dim(1));
    return make_op<T>("concat_cols", std::move(out), parts,
                      [offs, lens](const Var<T>& g, const std::vector<Var<T>>& in, const Var<T>&) {
                          std::vector<Var<T>> gs(in.size());
                          for (std::size_t i = 0; i < in.size(); ++i) {
                              if (in[i].requires_grad()) gs[i] = slice_cols(g, offs[i], lens[i]);
                          }
                          return gs;
                      });
}

// ---------------------------------------------------------------------------
// reductions and broadcasts (each with its adjoint partner)
// ---------------------------------------------------------------------------

template <class T>
Var<T> sum_all(const Var<T>& a) {
    Tensor<T> out = Tensor<T>::scalar(a.val().data.sum());
    return make_op<T>("sum_all", std::move(out), {a},
                      [](const Var<T>& g, const std::vector<Var<T>>& in, const Var<T>&) {
                          return std::vector<Var<T>>{fill_like(g, in[0].shape())};
                      });
}

// Broadcasts a scalar {1} to `s`.
template <class T>
Var<T> fill_like(const Var<T>& scalar_v, Shape s) {
    require(scalar_v.numel() == 1, ErrorCode::ShapeMismatch, "fill_like: scalar expected");
    Tensor<T> out(s);
    out.data.setConstant(scalar_v.val().data[0]);
    return make_op<T>("fill_like", std::move(out), {scalar_v},
                      [](const Var<T>& g, const std::vector<Var<T>>&, const Var<T>&) {
                          return std::vector<Var<T>>{sum_all(g)};
                      });
}

template <class T>
Var<T> mean_all(const Var<T>& a) {
    return mul_scalar(sum_all(a), T(1) / static_cast<T>(a.numel()));
}

// {N,D} -> {D}
template <class T>
Var<T> sum_rows(const Var<T>& a) {
    require(a.val().ndim() == 2, ErrorCode::ShapeMismatch, "sum_rows: need 2-d");
    Tensor<T> out({a.val().dim(1)});
    Eigen::Map<VectorX<T>>(out.ptr(), out.numel()) =
        detail::as_matrix(a.val()).colwise().sum().transpose();
    return make_op<T>("sum_rows", std::move(out), {a},
                      [rows = a.val().dim(0)](const Var<T>& g, const std::vector<Var<T>>&,
                                              const Var<T>&) {
                          return std::vector<Var<T>>{broadcast_rows(g, rows)};
                      });
}

// b{D} -> {N,D}
template <class T>
Var<T> broadcast_rows(const Var<T>& b, Index rows) {
    require(b.val().ndim() == 1, ErrorCode::ShapeMismatch, "broadcast_rows: need 1-d");
    Index d = b.val().dim(0);
    Tensor<T> out({rows, d});
    detail::as_matrix(out).rowwise() =
        Eigen::Map<const VectorX<T>>(b.val().ptr(), d).transpose();
    return make_op<T>("broadcast_rows", std::move(out), {b},
                      [](const Var<T>& g, const std::vector<Var<T>>&, const Var<T>&) {
                          return std::vector<Var<T>>{sum_rows(g)};
                      });
}

// {N,D} -> {N}
template <class T>
Var<T> sum_cols(const Var<T>& a) {
    require(a.val().ndim() == 2, ErrorCode::ShapeMismatch, "sum_cols: need 2-d");
    Tensor<T> out({a.val().dim(0)});
    Eigen::Map<VectorX<T>>(out.ptr(), out.numel()) = detail::as_matrix(a.val()).rowwise().sum();
    return make_op<T>("sum_cols", std::move(out), {a},
                      [cols = a.val().dim(1)](const Var<T>& g, const std::vector<Var<T>>&,
                                              const Var<T>&) {
                          return std::vector<Var<T>>{tile_cols(g, cols)};
                      });
}

// v{N} -> {N,D}
template <class T>
Var<T> tile_cols(const Var<T>& v, Index cols) {
    require(v.val().ndim() == 1, ErrorCode::ShapeMismatch, "tile_cols: need 1-d");
    Index n = v.val().dim(0);
    Tensor<T> out({n, cols});
    detail::as_matrix(out).colwise() = Eigen::Map<const VectorX<T>>(v.val().ptr(), n);
    return make_op<T>("tile_cols", std::move(out), {v},
                      [](const Var<T>& g, const std::vector<Var<T>>&, const Var<T>&) {
                          return std::vector<Var<T>>{sum_cols(g)};
                      });
}

// {N,C,H,W} -> {N,C}
template <class T>
Var<T> sum_hw(const Var<T>& a) {
    require(a.val().ndim() == 4, ErrorCode::ShapeMismatch, "sum_hw: need 4-d");
    Index n = a.val().dim(0), c = a.val().dim(1), hw = a.val().dim(2) * a.val().dim(3);
    Tensor<T> out({n, c});
    const T* src = a.val().ptr();
    for (Index i = 0; i < n * c; ++i) {
        out.data[i] = Eigen::Map<const ArrayX<T>>(src + i * hw, hw).sum();
    }
    return make_op<T>("sum_hw", std::move(out), {a},
                      [h = a.val().dim(2), w = a.val().dim(3)](
                          const Var<T>& g, const std::vector<Var<T>>&, const Var<T>&) {
                          return std::vector<Var<T>>{tile_hw(g, h, w)};
                      });
}

// s{N,C} -> {N,C,H,W}
template <class T>
Var<T> tile_hw(const Var<T>& s, Index h, Index w) {
    require(s.val().ndim() == 2, ErrorCode::ShapeMismatch, "tile_hw: need 2-d");
    Index n = s.val().dim(0), c = s.val().dim(1), hw = h * w;
    Tensor<T> out({n, c, h, w});
    T* dst = out.ptr();
    for (Index i = 0; i < n * c; ++i) {
        Eigen::Map<ArrayX<T>>(dst + i * hw, hw).setConstant(s.val().data[i]);
    }
    return make_op<T>("tile_hw", std::move(out), {s},
                      [](const Var<T>& g, const std::vector<Var<T>>&, const Var<T>&) {
                          return std::vector<Var<T>>{sum_hw(g)};
                      });
}

// {N,C,H,W} -> {C}
template <class T>
Var<T> sum_to_c(const Var<T>& a) {
    require(a.val().ndim() == 4, ErrorCode::ShapeMismatch, "sum_to_c: need 4-d");
    Index n = a.val().dim(0), c = a.val().dim(1), hw = a.val().dim(2) * a.val().dim(3);
    Tensor<T> out({c});
    const T* src = a.val().ptr();
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < c; ++j)
            out.data[j] += Eigen::Map<const ArrayX<T>>(src + (i * c + j) * hw, hw).sum();
    return make_op<T>("sum_to_c", std::move(out), {a},
                      [n, h = a.val().dim(2), w = a.val().dim(3)](
                          const Var<T>& g, const std::vector<Var<T>>&, const Var<T>&) {
                          return std::vector<Var<T>>{broadcast_c(g, n, h, w)};
                      });
}

// b{C} -> {N,C,H,W}
template <class T>
Var<T> broadcast_c(const Var<T>& b, Index n, Index h, Index w) {
    require(b.val().ndim() == 1, ErrorCode::ShapeMismatch, "broadcast_c: need 1-d");
    Index c = b.val().dim(0), hw = h * w;
    Tensor<T> out({n, c, h, w});
    T* dst = out.ptr();
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < c; ++j)
            Eigen::Map<ArrayX<T>>(dst + (i * c + j) * hw, hw).setConstant(b.val().data[j]);
    return make_op<T>("broadcast_c", std::move(out), {b},
                      [](const Var<T>& g, const std::vector<Var<T>>&, const Var<T>&) {
                          return std::vector<Var<T>>{sum_to_c(g)};
                      });
}

// ---------------------------------------------------------------------------
// convolution kernels (im2col + gemm); fwd/dgrad/wgrad close under their vjps
// ---------------------------------------------------------------------------

namespace detail {

inline Index conv_out_dim(Index in, Index k, Index stride, Index pad) {
    return (in + 2 * pad - k) / stride + 1;
}

// cols: row-major (C*kh*kw) x (oH*oW) for one sample
template <class T>
void im2col(const T* x, Index c_in, Index h, Index w, Index kh, Index kw, Index stride,
            Index pad, Index oh, Index ow, RowMajorMatrixX<T>& cols) {
    cols.setZero(c_in * kh * kw, oh * ow);
    for (Index c = 0; c < c_in; ++c) {
        const T* xc = x + c * h * w;
        for (Index ky = 0; ky < kh; ++ky) {
            for (Index kx = 0; kx < kw; ++kx) {
                T* row = cols.data() + ((c * kh + ky) * kw + kx) * (oh * ow);
                for (Index oy = 0; oy < oh; ++oy) {
                    Index iy = oy * stride - pad + ky;
                    if (iy < 0 || iy >= h) continue;
                    T* dst = row + oy * ow;
                    const T* src = xc + iy * w;
                    if (stride == 1) {
                        Index ox0 = std::max<Index>(0, pad - kx);
                        Index ox1 = std::min<Index>(ow, w + pad - kx);
                        if (ox1 > ox0)
                            std::memcpy(dst + ox0, src + ox0 - pad + kx,
                                        static_cast<std::size_t>(ox1 - ox0) * sizeof(T));
                    } else {
                        for (Index ox = 0; ox < ow; ++ox) {
                            Index ix = ox * stride - pad + kx;
                            if (ix >= 0 && ix < w) dst[ox] = src[ix];
                        }
                    }
                }
            }
        }
    }
}

template <class T>
void col2im_add(const RowMajorMatrixX<T>& cols, Index c_in, Index h, Index w, Index kh,
                Index kw, Index stride, Index pad, Index oh, Index ow, T* x) {
    for (Index c = 0; c < c_in; ++c) {
        T* xc = x + c * h * w;
        for (Index ky = 0; ky < kh; ++ky) {
            for (Index kx = 0; kx < kw; ++kx) {
                const T* row = cols.data() + ((c * kh + ky) * kw + kx) * (oh * ow);
                for (Index oy = 0; oy < oh; ++oy) {
                    Index iy = oy * stride - pad + ky;
                    if (iy < 0 || iy >= h) continue;
                    const T* src = row + oy * ow;
                    T* dst = xc + iy * w;
                    for (Index ox = 0; ox < ow; ++ox) {
                        Index ix = ox * stride - pad + kx;
                        if (ix >= 0 && ix < w) dst[ix] += src[ox];
                    }
                }
            }
        }
    }
}

template <class T>
Tensor<T> conv2d_fwd(const Tensor<T>& x, const Tensor<T>& w, Index stride, Index pad) {
    Index n = x.dim(0), c_in = x.dim(1), h = x.dim(2), ww = x.dim(3);
    Index c_out = w.dim(0), kh = w.dim(2), kw = w.dim(3);
    require(w.dim(1) == c_in, ErrorCode::ShapeMismatch, "conv2d: channel mismatch");
    Index oh = conv_out_dim(h, kh, stride, pad), ow = conv_out_dim(ww, kw, stride, pad);
    require(oh > 0 && ow > 0, ErrorCode::ShapeMismatch, "conv2d: empty output");
    Tensor<T> out({n, c_out, oh, ow});
    Eigen::Map<const RowMajorMatrixX<T>> wm(w.ptr(), c_out, c_in * kh * kw);
    RowMajorMatrixX<T> cols;
    for (Index i = 0; i < n; ++i) {
        im2col(x.ptr() + i * c_in * h * ww, c_in, h, ww, kh, kw, stride, pad, oh, ow, cols);
        Eigen::Map<RowMajorMatrixX<T>> om(out.ptr() + i * c_out * oh * ow, c_out, oh * ow);
        om.noalias() = wm * cols;
    }
    return out;
}

template <class T>
Tensor<T> conv2d_dgrad(const Tensor<T>& g, const Tensor<T>& w, Index h, Index ww,
                       Index stride, Index pad) {
    Index n = g.dim(0), c_out = g.dim(1), oh = g.dim(2), ow = g.dim(3);
    Index c_in = w.dim(1), kh = w.dim(2), kw = w.dim(3);
    Tensor<T> dx({n, c_in, h, ww});
    Eigen::Map<const RowMajorMatrixX<T>> wm(w.ptr(), c_out, c_in * kh * kw);
    RowMajorMatrixX<T> colsg;
    for (Index i = 0; i < n; ++i) {
        Eigen::Map<const RowMajorMatrixX<T>> gm(g.ptr() + i * c_out * oh * ow, c_out, oh * ow);
        colsg.noalias() = wm.transpose() * gm;
        col2im_add(colsg, c_in, h, ww, kh, kw, stride, pad, oh, ow,
                   dx.ptr() + i * c_in * h * ww);
    }
    return dx;
}

template <class T>
Tensor<T> conv2d_wgrad(const Tensor<T>& x, const Tensor<T>& g, Index kh, Index kw,
                       Index stride, Index pad) {
    Index n = x.dim(0), c_in = x.dim(1), h = x.dim(2), ww = x.dim(3);
    Index c_out = g.dim(1), oh = g.dim(2), ow = g.dim(3);
    Tensor<T> dw({c_out, c_in, kh, kw});
    Eigen::Map<RowMajorMatrixX<T>> dwm(dw.ptr(), c_out, c_in * kh * kw);
    RowMajorMatrixX<T> cols;
    for (Index i = 0; i < n; ++i) {
        im2col(x.ptr() + i * c_in * h * ww, c_in, h, ww, kh, kw, stride, pad, oh, ow, cols);
        Eigen::Map<const RowMajorMatrixX<T>> gm(g.ptr() + i * c_out * oh * ow, c_out, oh * ow);
        dwm.noalias() += gm * cols.transpose();
    }
    return dw;
}

}  // namespace detail

template <class T>
Var<T> conv2d_dgrad_op(const Var<T>& g, const Var<T>& w, Index h, Index ww, Index stride,
                       Index pad);
template <class T>
Var<T> conv2d_wgrad_op(const Var<T>& x, const Var<T>& g, Index kh, Index kw, Index stride,
                       Index pad);

// x{N,Cin,H,W} * w{Cout,Cin,kh,kw} -> {N,Cout,oH,oW}
template <class T>
Var<T> conv2d(const Var<T>& x, const Var<T>& w, Index stride = 1, Index pad = 0) {
    Tensor<T> out = detail::conv2d_fwd(x.val(), w.val(), stride, pad);
    Index h = x.val().dim(2), ww = x.val().dim(3);
    Index kh = w.val().dim(2), kw = w.val().dim(3);
    return make_op<T>(
        "conv2d", std::move(out), {x, w},
        [h, ww, kh, kw, stride, pad](const Var<T>& g, const std::vector<Var<T>>& in,
                                     const Var<T>&) {
            Var<T> gx = in[0].requires_grad()
                            ? conv2d_dgrad_op(g, in[1], h, ww, stride, pad)
                            : Var<T>();
            Var<T> gw = in[1].requires_grad()
                            ? conv2d_wgrad_op(in[0], g, kh, kw, stride, pad)
                            : Var<T>();
            return std::vector<Var<T>>{gx, gw};
        });
}

template <class T>
Var<T> conv2d_dgrad_op(const Var<T>& g, const Var<T>& w, Index h, Index ww, Index stride,
                       Index pad) {
    Tensor<T> out = detail::conv2d_dgrad(g.val(), w.val(), h, ww, stride, pad);
    Index kh = w.val().dim(2), kw = w.val().dim(3);
    return make_op<T>(
        "conv2d_dgrad", std::move(out), {g, w},
        [kh, kw, stride, pad](const Var<T>& u, const std::vector<Var<T>>& in, const Var<T>&) {
            Var<T> gg = in[0].requires_grad() ? conv2d(u, in[1], stride, pad) : Var<T>();
            Var<T> gw = in[1].requires_grad()
                            ? conv2d_wgrad_op(u, in[0], kh, kw, stride, pad)
                            : Var<T>();
            return std::vector<Var<T>>{gg, gw};
        });
}

template <class T>
Var<T> conv2d_wgrad_op(const Var<T>& x, const Var<T>& g, Index kh, Index kw, Index stride,
                       Index pad) {
    Tensor<T> out = detail::conv2d_wgrad(x.val(), g.val(), kh, kw, stride, pad);
    Index h = x.val().dim(2), ww = x.val().dim(3);
    return make_op<T>(
        "conv2d_wgrad", std::move(out), {x, g},
        [h, ww, stride, pad](const Var<T>& u, const std::vector<Var<T>>& in, const Var<T>&) {
            Var<T> gx = in[0].requires_grad()
                            ? conv2d_dgrad_op(in[1], u, h, ww, stride, pad)
                            : Var<T>();
            Var<T> gg = in[1].requires_grad() ? conv2d(in[0], u, stride, pad) : Var<T>();
            return std::vector<Var<T>>{gx, gg};
        });
}

// ---------------------------------------------------------------------------
// resampling
// ---------------------------------------------------------------------------

template <class T>
Var<T> upsample2x(const Var<T>& a);

template <class T>
Var<T> avg_pool2x(const Var<T>& a) {
    require(a.val().ndim() == 4 && a.val().dim(2) % 2 == 0 && a.val().dim(3) % 2 == 0,
            ErrorCode::ShapeMismatch, "avg_pool2x: need even 4-d");
    Index n = a.val().dim(0), c = a.val().dim(1), h = a.val().dim(2), w = a.val().dim(3);
    Tensor<T> out({n, c, h / 2, w / 2});
    const T* src = a.val().ptr();
    T* dst = out.ptr();
    for (Index i = 0; i < n * c; ++i) {
        const T* sp = src + i * h * w;
        T* dp = dst + i * (h / 2) * (w / 2);
        for (Index y = 0; y < h / 2; ++y)
            for (Index x = 0; x < w / 2; ++x)
                dp[y * (w / 2) + x] =
                    (sp[(2 * y) * w + 2 * x] + sp[(2 * y) * w + 2 * x + 1] +
                     sp[(2 * y + 1) * w + 2 * x] + sp[(2 * y + 1) * w + 2 * x + 1]) *
                    T(0.25);
    }
    return make_op<T>("avg_pool2x", std::move(out), {a},
                      [](const Var<T>& g, const std::vector<Var<T>>&, const Var<T>&) {
                          return std::vector<Var<T>>{mul_scalar(upsample2x(g), T(0.25))};
                      });
}

template <class T>
Var<T> upsample2x(const Var<T>& a) {
    require(a.val().ndim() == 4, ErrorCode::ShapeMismatch, "upsample2x: need 4-d");
    Index n = a.val().dim(0), c = a.val().dim(1), h = a.val().dim(2), w = a.val().dim(3);
    Tensor<T> out({n, c, h * 2, w * 2});
    const T* src = a.val().ptr();
    T* dst = out.ptr();
    for (Index i = 0; i < n * c; ++i) {
        const T* sp = src + i * h * w;
        T* dp = dst + i * 4 * h * w;
        for (Index y = 0; y < h; ++y)
            for (Index x = 0; x < w; ++x) {
                T v = sp[y * w + x];
                dp[(2 * y) * 2 * w + 2 * x] = v;
                dp[(2 * y) * 2 * w + 2 * x + 1] = v;
                dp[(2 * y + 1) * 2 * w + 2 * x] = v;
                dp[(2 * y + 1) * 2 * w + 2 * x + 1] = v;
            }
    }
    return make_op<T>("upsample2x", std::move(out), {a},
                      [](const Var<T>& g, const std::vector<Var<T>>&, const Var<T>&) {
                          return std::vector<Var<T>>{mul_scalar(avg_pool2x(g), T(4))};
                      });
}

// ---------------------------------------------------------------------------
// composed helpers
// ---------------------------------------------------------------------------

template <class T>
Var<T> softplus(const Var<T>& x) {
    // max(x,0) + log(1 + exp(-|x|)), stable in both tails
    return add(relu(x), log_(add_scalar(exp_(neg(abs_(x))), T(1))));
}

template <class T>
Var<T> operator+(const Var<T>& a, const Var<T>& b) { return add(a, b); }
template <class T>
Var<T> operator-(const Var<T>& a, const Var<T>& b) { return sub(a, b); }
template <class T>
Var<T> operator*(const Var<T>& a, const Var<T>& b) { return mul(a, b); }

}  // namespace pg::nn
