#include "pg/metrics/phenotype_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace pg::metrics {

const char* region_kind_name(RegionKind k) {
    switch (k) {
        case RegionKind::skin: return "skin";
        case RegionKind::hair: return "hair";
        case RegionKind::left_eye: return "left_eye";
        case RegionKind::right_eye: return "right_eye";
        case RegionKind::nose: return "nose";
        case RegionKind::mouth: return "mouth";
    }
    return "?";
}

RegionKind region_kind_from_name(const std::string& name) {
    if (name == "skin") return RegionKind::skin;
    if (name == "hair") return RegionKind::hair;
    if (name == "left_eye") return RegionKind::left_eye;
    if (name == "right_eye") return RegionKind::right_eye;
    if (name == "nose") return RegionKind::nose;
    if (name == "mouth") return RegionKind::mouth;
    raise(ErrorCode::UnknownAttribute, "unknown region '" + name + "'");
}

VectorX<double> PhenotypeVector::flatten() const {
    VectorX<double> v(kTotalDim);
    v.segment(0, 3) = skin;
    v.segment(3, 3) = hair;
    v.segment(6, 125) = left_eye;
    v.segment(131, 125) = right_eye;
    v.segment(256, 128) = nose;
    v.segment(384, 128) = mouth;
    return v;
}

PhenotypeVector PhenotypeVector::from_flat(const VectorX<double>& v) {
    require(v.size() == kTotalDim, ErrorCode::LengthMismatch,
            "phenotype vector must have 512 entries");
    PhenotypeVector p;
    p.skin = v.segment(0, 3);
    p.hair = v.segment(3, 3);
    p.left_eye = v.segment(6, 125);
    p.right_eye = v.segment(131, 125);
    p.nose = v.segment(256, 128);
    p.mouth = v.segment(384, 128);
    return p;
}

void PhenotypeVector::validate() const {
    require(left_eye.size() == 125 && right_eye.size() == 125 && nose.size() == 128 &&
                mouth.size() == 128,
            ErrorCode::LengthMismatch, "phenotype block sizes must be 3/3/125/125/128/128");
    auto in01 = [](const Eigen::Vector3d& c) {
        return c.minCoeff() >= 0.0 && c.maxCoeff() <= 1.0;
    };
    require(in01(skin) && in01(hair), ErrorCode::InvalidArgument,
            "color blocks must lie in [0,1]^3");
}

LandmarkScheme LandmarkScheme::ibug68() {
    LandmarkScheme s;
    for (int i = 0; i <= 26; ++i) s.skin_hull.push_back(i);  // jaw 0-16, brows 17-26
    for (int i = 36; i <= 41; ++i) s.left_eye.push_back(i);
    for (int i = 42; i <= 47; ++i) s.right_eye.push_back(i);
    for (int i = 27; i <= 35; ++i) s.nose.push_back(i);
    for (int i = 48; i <= 67; ++i) s.mouth.push_back(i);
    return s;
}

int LandmarkScheme::max_index() const {
    int m = -1;
    for (const auto* v : {&skin_hull, &left_eye, &right_eye, &nose, &mouth})
        for (int i : *v) m = std::max(m, i);
    return m;
}

const std::vector<int>& LandmarkScheme::region_indices(RegionKind k) const {
    switch (k) {
        case RegionKind::left_eye: return left_eye;
        case RegionKind::right_eye: return right_eye;
        case RegionKind::nose: return nose;
        case RegionKind::mouth: return mouth;
        default: raise(ErrorCode::UnknownAttribute, "no patch landmark subset for region");
    }
}

namespace {

geom::PointList gather(const geom::PointList& landmarks, const std::vector<int>& idx) {
    geom::PointList out;
    out.reserve(idx.size());
    for (int i : idx) {
        require(i >= 0 && static_cast<std::size_t>(i) < landmarks.size(),
                ErrorCode::MissingLandmarks,
                "landmark index " + std::to_string(i) + " out of range");
        out.push_back(landmarks[static_cast<std::size_t>(i)]);
    }
    return out;
}

void subtract_hull(img::PlaneU8& mask, const geom::PointList& pts) {
    if (pts.size() < 3) return;
    auto hull = geom::convex_hull(pts);
    if (hull.size() < 3) return;
    img::PlaneU8 cut(mask.width, mask.height, 0);
    geom::fill_polygon(hull, cut, 1);
    for (std::size_t i = 0; i < mask.data.size(); ++i)
        if (cut.data[i]) mask.data[i] = 0;
}

}  // namespace

ColorStats region_color_stats(const img::ImageU8& image, const RegionMask& mask) {
    require(image.width == mask.width() && image.height == mask.height(),
            ErrorCode::DimensionMismatch, "image/mask dimensions differ");
    double v_acc = 0, s_acc = 0, cr_acc = 0;
    Index n = 0;
    for (Index y = 0; y < image.height; ++y) {
        for (Index x = 0; x < image.width; ++x) {
            if (!mask.bits.at(x, y)) continue;
            const double r = image.at(x, y, 0);
            const double g = image.at(x, y, 1);
            const double b = image.at(x, y, 2);
            const double mx = std::max({r, g, b});
            const double mn = std::min({r, g, b});
            v_acc += mx / 255.0;
            s_acc += mx > 0 ? (mx - mn) / mx : 0.0;
            const double cr = std::clamp(0.5 * r - 0.4187 * g - 0.0813 * b + 128.0, 0.0, 255.0);
            cr_acc += cr / 255.0;
            ++n;
        }
    }
    require(n > 0, ErrorCode::EmptyMask, "region mask has no set pixels");
    return {v_acc / static_cast<double>(n), s_acc / static_cast<double>(n),
            cr_acc / static_cast<double>(n)};
}

RegionMask skin_region(const img::SegMap& seg, const geom::PointList& landmarks,
                       const LandmarkScheme& scheme) {
    require(static_cast<int>(landmarks.size()) > scheme.max_index(),
            ErrorCode::MissingLandmarks,
            "need " + std::to_string(scheme.max_index() + 1) + " landmarks, got " +
                std::to_string(landmarks.size()));
    const int skin_label = seg.label_of("skin");

    auto hull_pts = geom::convex_hull(gather(landmarks, scheme.skin_hull));
    require(hull_pts.size() >= 3, ErrorCode::DegenerateInput,
            "skin hull landmarks are collinear");
    img::PlaneU8 hull(seg.labels.width, seg.labels.height, 0);
    geom::fill_polygon(hull_pts, hull, 1);

    RegionMask mask;
    mask.kind = RegionKind::skin;
    mask.bits = img::PlaneU8(seg.labels.width, seg.labels.height, 0);
    for (std::size_t i = 0; i < mask.bits.data.size(); ++i)
        mask.bits.data[i] = (seg.labels.data[i] == skin_label && hull.data[i]) ? 1 : 0;

    subtract_hull(mask.bits, gather(landmarks, scheme.left_eye));
    subtract_hull(mask.bits, gather(landmarks, scheme.right_eye));
    subtract_hull(mask.bits, gather(landmarks, scheme.mouth));

    require(mask.count() > 0, ErrorCode::EmptyMask, "restricted skin region is empty");
    return mask;
}

RegionMask hair_region(const img::SegMap& seg) {
    const int hair_label = seg.label_of("hair");
    RegionMask mask;
    mask.kind = RegionKind::hair;
    mask.bits = img::PlaneU8(seg.labels.width, seg.labels.height, 0);
    for (std::size_t i = 0; i < mask.bits.data.size(); ++i)
        mask.bits.data[i] = seg.labels.data[i] == hair_label ? 1 : 0;
    require(mask.count() > 0, ErrorCode::EmptyMask, "hair region is empty");
    return mask;
}

FacePatch extract_patch(const img::ImageU8& image, const geom::PointList& landmarks,
                        RegionKind kind, const LandmarkScheme& scheme) {
    require(image.width >= FacePatch::kSize && image.height >= FacePatch::kSize,
            ErrorCode::ImageTooSmall, "image smaller than 64x64");
    const auto& idx = scheme.region_indices(kind);
    auto pts = gather(landmarks, idx);
    auto c = geom::centroid(pts);

    Index x0 = static_cast<Index>(std::lround(c.x)) - FacePatch::kSize / 2;
    Index y0 = static_cast<Index>(std::lround(c.y)) - FacePatch::kSize / 2;
    x0 = std::clamp<Index>(x0, 0, image.width - FacePatch::kSize);
    y0 = std::clamp<Index>(y0, 0, image.height - FacePatch::kSize);

    FacePatch patch;
    patch.kind = kind;
    patch.source_center = c;
    patch.pixels = img::ImageU8(FacePatch::kSize, FacePatch::kSize);
    for (Index y = 0; y < FacePatch::kSize; ++y)
        for (Index x = 0; x < FacePatch::kSize; ++x)
            for (int ch = 0; ch < 3; ++ch)
                patch.pixels.at(x, y, ch) = image.at(x0 + x, y0 + y, ch);
    return patch;
}

PhenotypeVector compute_phenotype(const img::ImageU8& image, const img::SegMap& seg,
                                  const geom::PointList& landmarks,
                                  const RegionEmbedders& embedders,
                                  const LandmarkScheme& scheme) {
    PhenotypeVector theta;

    auto skin_mask = skin_region(seg, landmarks, scheme);
    auto skin_stats = region_color_stats(image, skin_mask);
    theta.skin << skin_stats.v_mean, skin_stats.s_mean, skin_stats.cr_mean;

    auto hair_mask = hair_region(seg);
    auto hair_stats = region_color_stats(image, hair_mask);
    theta.hair << hair_stats.v_mean, hair_stats.s_mean, hair_stats.cr_mean;

    auto run_embed = [&](RegionKind kind, const RegionEmbedders::EmbedFn& fn,
                         Index expect) -> VectorX<double> {
        require(static_cast<bool>(fn), ErrorCode::InvalidArgument,
                std::string("missing embedder for ") + region_kind_name(kind));
        auto patch = extract_patch(image, landmarks, kind, scheme);
        VectorX<double> e = fn(patch);
        require(e.size() == expect, ErrorCode::EmbedderDimensionMismatch,
                std::string(region_kind_name(kind)) + " embedding has length " +
                    std::to_string(e.size()) + ", expected " + std::to_string(expect));
        return e;
    };

    theta.left_eye = run_embed(RegionKind::left_eye, embedders.left_eye, 125);
    theta.right_eye = run_embed(RegionKind::right_eye, embedders.right_eye, 125);
    theta.nose = run_embed(RegionKind::nose, embedders.nose, 128);
    theta.mouth = run_embed(RegionKind::mouth, embedders.mouth, 128);

    theta.validate();
    return theta;
}

}  // namespace pg::metrics
