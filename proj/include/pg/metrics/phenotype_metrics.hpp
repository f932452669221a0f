#pragma once

#include "pg/core/errors.hpp"
#include "pg/core/geometry.hpp"
#include "pg/core/image.hpp"
#include "pg/core/types.hpp"

#include <functional>
#include <string>
#include <vector>

namespace pg::metrics {

enum class RegionKind { skin, hair, left_eye, right_eye, nose, mouth };

const char* region_kind_name(RegionKind k);
RegionKind region_kind_from_name(const std::string& name);

// Mean color statistics over a masked region: HSV value (melanin proxy),
// HSV saturation (greyness proxy) and YCrCb Cr (redness proxy), all in [0,1].
struct ColorStats {
    double v_mean = 0;
    double s_mean = 0;
    double cr_mean = 0;
};

struct RegionMask {
    img::PlaneU8 bits;  // 0/1 membership
    RegionKind kind = RegionKind::skin;

    Index width() const { return bits.width; }
    Index height() const { return bits.height; }
    Index count() const { return bits.count(1); }
};

struct FacePatch {
    static constexpr Index kSize = 64;
    img::ImageU8 pixels;  // exactly 64x64
    RegionKind kind = RegionKind::nose;
    geom::Point2 source_center;
};

// The 512-entry supervised parameter vector, partitioned per attribute.
struct PhenotypeVector {
    Eigen::Vector3d skin;
    Eigen::Vector3d hair;
    VectorX<double> left_eye;   // 125
    VectorX<double> right_eye;  // 125
    VectorX<double> nose;       // 128
    VectorX<double> mouth;      // 128

    static constexpr Index kTotalDim = 512;

    VectorX<double> flatten() const;
    static PhenotypeVector from_flat(const VectorX<double>& v);
    void validate() const;
};

// 68-point landmark layout with configurable index subsets. The skin hull is
// spanned by the jaw and brow points; eye and mouth hulls are subtracted to
// keep lashes and lips out of the skin color estimate.
struct LandmarkScheme {
    std::vector<int> skin_hull;
    std::vector<int> left_eye;
    std::vector<int> right_eye;
    std::vector<int> nose;
    std::vector<int> mouth;

    static LandmarkScheme ibug68();
    int max_index() const;
    const std::vector<int>& region_indices(RegionKind k) const;
};

// Per-pixel conversions fixed to: V = max(R,G,B)/255; S = (max-min)/max with
// S = 0 at black; Cr per full-range BT.601 with clamping.
ColorStats region_color_stats(const img::ImageU8& image, const RegionMask& mask);

RegionMask skin_region(const img::SegMap& seg, const geom::PointList& landmarks,
                       const LandmarkScheme& scheme = LandmarkScheme::ibug68());

RegionMask hair_region(const img::SegMap& seg);

FacePatch extract_patch(const img::ImageU8& image, const geom::PointList& landmarks,
                        RegionKind kind,
                        const LandmarkScheme& scheme = LandmarkScheme::ibug68());

// Patch -> feature-vector callables supplied by the embedder module; keeping
// the coupling behind std::function avoids a dependency cycle.
struct RegionEmbedders {
    using EmbedFn = std::function<VectorX<double>(const FacePatch&)>;
    EmbedFn left_eye;
    EmbedFn right_eye;
    EmbedFn nose;
    EmbedFn mouth;
};

PhenotypeVector compute_phenotype(const img::ImageU8& image, const img::SegMap& seg,
                                  const geom::PointList& landmarks,
                                  const RegionEmbedders& embedders,
                                  const LandmarkScheme& scheme = LandmarkScheme::ibug68());

}  // namespace pg::metrics
