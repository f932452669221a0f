#include "pg/core/image.hpp"

#include <algorithm>
#include <cmath>

namespace pg::img {

ImageU8 downscale_box(const ImageU8& im, Index factor) {
    require(factor >= 1 && im.width % factor == 0 && im.height % factor == 0,
            ErrorCode::InvalidArgument, "downscale_box: factor must divide dimensions");
    ImageU8 out(im.width / factor, im.height / factor);
    const double inv = 1.0 / static_cast<double>(factor * factor);
    for (Index y = 0; y < out.height; ++y)
        for (Index x = 0; x < out.width; ++x)
            for (int c = 0; c < 3; ++c) {
                double acc = 0;
                for (Index dy = 0; dy < factor; ++dy)
                    for (Index dx = 0; dx < factor; ++dx)
                        acc += im.at(x * factor + dx, y * factor + dy, c);
                out.at(x, y, c) = static_cast<std::uint8_t>(acc * inv + 0.5);
            }
    return out;
}

ImageU8 resize_bilinear(const ImageU8& im, Index out_w, Index out_h) {
    require(out_w > 0 && out_h > 0, ErrorCode::InvalidArgument, "resize: empty output");
    ImageU8 out(out_w, out_h);
    const double sx = static_cast<double>(im.width) / static_cast<double>(out_w);
    const double sy = static_cast<double>(im.height) / static_cast<double>(out_h);
    for (Index y = 0; y < out_h; ++y) {
        double fy = (static_cast<double>(y) + 0.5) * sy - 0.5;
        Index y0 = static_cast<Index>(std::floor(fy));
        double wy = fy - static_cast<double>(y0);
        Index y1 = std::min(y0 + 1, im.height - 1);
        y0 = std::max<Index>(y0, 0);
        for (Index x = 0; x < out_w; ++x) {
            double fx = (static_cast<double>(x) + 0.5) * sx - 0.5;
            Index x0 = static_cast<Index>(std::floor(fx));
            double wx = fx - static_cast<double>(x0);
            Index x1 = std::min(x0 + 1, im.width - 1);
            x0 = std::max<Index>(x0, 0);
            for (int c = 0; c < 3; ++c) {
                double v = (1 - wy) * ((1 - wx) * im.at(x0, y0, c) + wx * im.at(x1, y0, c)) +
                           wy * ((1 - wx) * im.at(x0, y1, c) + wx * im.at(x1, y1, c));
                out.at(x, y, c) = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0) + 0.5);
            }
        }
    }
    return out;
}

}  // namespace pg::img
