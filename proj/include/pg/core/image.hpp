#pragma once

#include "pg/core/errors.hpp"
#include "pg/core/types.hpp"
#include "pg/nn/tensor.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace pg::img {

// 8-bit RGB image, interleaved row-major.
struct ImageU8 {
    Index width = 0;
    Index height = 0;
    std::vector<std::uint8_t> data;  // size = width*height*3

    ImageU8() = default;
    ImageU8(Index w, Index h) : width(w), height(h), data(static_cast<std::size_t>(w * h * 3), 0) {}

    static ImageU8 filled(Index w, Index h, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
        ImageU8 im(w, h);
        for (Index i = 0; i < w * h; ++i) {
            im.data[static_cast<std::size_t>(3 * i)] = r;
            im.data[static_cast<std::size_t>(3 * i + 1)] = g;
            im.data[static_cast<std::size_t>(3 * i + 2)] = b;
        }
        return im;
    }

    std::uint8_t at(Index x, Index y, int c) const {
        return data[static_cast<std::size_t>(3 * (y * width + x) + c)];
    }
    std::uint8_t& at(Index x, Index y, int c) {
        return data[static_cast<std::size_t>(3 * (y * width + x) + c)];
    }
    void set(Index x, Index y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
        at(x, y, 0) = r;
        at(x, y, 1) = g;
        at(x, y, 2) = b;
    }
    bool in_bounds(Index x, Index y) const { return x >= 0 && x < width && y >= 0 && y < height; }
    Index pixels() const { return width * height; }
};

// single-channel 8-bit plane (class labels or binary masks)
struct PlaneU8 {
    Index width = 0;
    Index height = 0;
    std::vector<std::uint8_t> data;

    PlaneU8() = default;
    PlaneU8(Index w, Index h, std::uint8_t fill = 0)
        : width(w), height(h), data(static_cast<std::size_t>(w * h), fill) {}

    std::uint8_t at(Index x, Index y) const { return data[static_cast<std::size_t>(y * width + x)]; }
    std::uint8_t& at(Index x, Index y) { return data[static_cast<std::size_t>(y * width + x)]; }
    Index count(std::uint8_t v) const {
        Index n = 0;
        for (auto b : data) n += (b == v);
        return n;
    }
};

// Class-labeled segmentation with a name->label table (mirrors the
// single-channel PNG + class-name sidecar on disk).
struct SegMap {
    PlaneU8 labels;
    std::map<std::string, int> classes;  // name -> label value

    bool has_class(const std::string& name) const { return classes.count(name) > 0; }
    int label_of(const std::string& name) const {
        auto it = classes.find(name);
        require(it != classes.end(), ErrorCode::InvalidArgument,
                "segmentation has no class '" + name + "'");
        return it->second;
    }
};

// [-1,1] float tensor {1,3,H,W} <-> 8-bit image
template <class T>
nn::Tensor<T> to_tensor(const ImageU8& im) {
    nn::Tensor<T> t({1, 3, im.height, im.width});
    for (int c = 0; c < 3; ++c)
        for (Index y = 0; y < im.height; ++y)
            for (Index x = 0; x < im.width; ++x)
                t.at4(0, c, y, x) = static_cast<T>(im.at(x, y, c)) / T(127.5) - T(1);
    return t;
}

template <class T>
ImageU8 from_tensor(const nn::Tensor<T>& t, Index n = 0) {
    require(t.ndim() == 4 && t.dim(1) == 3, ErrorCode::ShapeMismatch,
            "from_tensor: expected {N,3,H,W}");
    ImageU8 im(t.dim(3), t.dim(2));
    for (int c = 0; c < 3; ++c)
        for (Index y = 0; y < im.height; ++y)
            for (Index x = 0; x < im.width; ++x) {
                double v = (static_cast<double>(t.at4(n, c, y, x)) + 1.0) * 127.5;
                v = v < 0 ? 0 : (v > 255 ? 255 : v);
                im.at(x, y, c) = static_cast<std::uint8_t>(v + 0.5);
            }
    return im;
}

// Batch of images -> {N,3,H,W} tensor in [-1,1].
template <class T>
nn::Tensor<T> to_batch_tensor(const std::vector<const ImageU8*>& ims) {
    require(!ims.empty(), ErrorCode::InvalidArgument, "to_batch_tensor: empty batch");
    Index h = ims[0]->height, w = ims[0]->width;
    nn::Tensor<T> t({static_cast<Index>(ims.size()), 3, h, w});
    for (std::size_t i = 0; i < ims.size(); ++i) {
        require(ims[i]->height == h && ims[i]->width == w, ErrorCode::ShapeMismatch,
                "to_batch_tensor: mixed sizes");
        for (int c = 0; c < 3; ++c)
            for (Index y = 0; y < h; ++y)
                for (Index x = 0; x < w; ++x)
                    t.at4(static_cast<Index>(i), c, y, x) =
                        static_cast<T>(ims[i]->at(x, y, c)) / T(127.5) - T(1);
    }
    return t;
}

// Box-filter downscale by an integer factor; exact and deterministic.
ImageU8 downscale_box(const ImageU8& im, Index factor);

// General bilinear resize.
ImageU8 resize_bilinear(const ImageU8& im, Index out_w, Index out_h);

}  // namespace pg::img
