#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "ofm/errors.hpp"
#include "ofm/lab/rng.hpp"

namespace ofm::lab {

// Factor-labeled 3x8x8 images: a colored glyph on a gray background.
// 3 shapes x 6 hues x 4 quadrant positions x 2 scales = 144 combinations.

inline constexpr int image_channels = 3;
inline constexpr int image_side = 8;
inline constexpr int image_dim = image_channels * image_side * image_side; // 192

inline constexpr int n_shapes = 3;    // square, circle, bar
inline constexpr int n_hues = 6;      // 60-degree steps around the RGB wheel
inline constexpr int n_positions = 4; // quadrants
inline constexpr int n_scales = 2;    // small (3x3), large (4x4)
inline constexpr int n_factor_combinations = n_shapes * n_hues * n_positions * n_scales;

enum class Factor { shape, hue, position, scale };

inline const char* to_string(Factor f) {
    switch (f) {
    case Factor::shape: return "shape";
    case Factor::hue: return "hue";
    case Factor::position: return "position";
    case Factor::scale: return "scale";
    }
    return "?";
}

inline Factor factor_from_string(const std::string& s) {
    if (s == "shape") return Factor::shape;
    if (s == "hue") return Factor::hue;
    if (s == "position") return Factor::position;
    if (s == "scale") return Factor::scale;
    throw parse_error("unknown factor '" + s + "'");
}

inline int factor_classes(Factor f) {
    switch (f) {
    case Factor::shape: return n_shapes;
    case Factor::hue: return n_hues;
    case Factor::position: return n_positions;
    case Factor::scale: return n_scales;
    }
    return 0;
}

// hue index -> RGB color on the wheel: R, RG, G, GB, B, BR
inline std::array<double, 3> hue_color(int hue) {
    static constexpr std::array<std::array<double, 3>, 6> wheel{{
        {1, 0, 0}, {1, 1, 0}, {0, 1, 0}, {0, 1, 1}, {0, 0, 1}, {1, 0, 1},
    }};
    return wheel[static_cast<std::size_t>(hue)];
}

struct SyntheticDataset {
    int n = 0;
    std::uint64_t seed = 0;
    std::vector<double> pixels; // n * image_dim, CHW, values in [0, 1]
    std::vector<int> shape, hue, position, scale;
    std::vector<int> train_idx, eval_idx; // disjoint split

    const double* image(int i) const { return pixels.data() + i * image_dim; }

    int label(Factor f, int i) const {
        switch (f) {
        case Factor::shape: return shape[i];
        case Factor::hue: return hue[i];
        case Factor::position: return position[i];
        case Factor::scale: return scale[i];
        }
        return 0;
    }
};

namespace detail {

// Glyph masks inside a 4x4 quadrant cell. Small glyphs are 3x3 anchored at
// the cell origin, large glyphs fill the cell.
inline bool glyph_pixel(int shape, int scale, int r, int c) {
    if (scale == 0) { // 3x3
        if (r > 2 || c > 2) return false;
        switch (shape) {
        case 0: return true;                                   // square
        case 1: return (r == 1 || c == 1);                     // circle -> plus at this size
        case 2: return r == 1;                                 // horizontal bar
        }
    } else { // 4x4
        switch (shape) {
        case 0: return true;                                   // square
        case 1: return !((r == 0 || r == 3) && (c == 0 || c == 3)); // disc: box minus corners
        case 2: return r == 1 || r == 2;                       // horizontal bar, 2 rows
        }
    }
    return false;
}

inline void render(double* img, int shape, int hue, int position, int scale, Rng& rng) {
    const double bg = 0.12 + 0.06 * rng.u01();
    for (int i = 0; i < image_dim; ++i)
        img[i] = bg + 0.02 * (rng.u01() - 0.5);

    const auto color = hue_color(hue);
    const double intensity = 0.75 + 0.25 * rng.u01();
    const int qr = (position / 2) * 4; // quadrant row origin
    const int qc = (position % 2) * 4;
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) {
            if (!glyph_pixel(shape, scale, r, c)) continue;
            const int row = qr + r, col = qc + c;
            for (int ch = 0; ch < image_channels; ++ch)
                img[(ch * image_side + row) * image_side + col] = color[ch] * intensity;
        }
    }
}

} // namespace detail

/// Deterministic, factor-balanced dataset: every factor combination appears
/// exactly n / 144 times. Identical seeds give identical bytes.
inline SyntheticDataset generate_dataset(std::uint64_t seed, int n,
                                         double eval_fraction = 0.2) {
    if (n <= 0 || n % n_factor_combinations != 0)
        throw validation_error("dataset size must be a positive multiple of " +
                               std::to_string(n_factor_combinations) + ", got " +
                               std::to_string(n));

    SyntheticDataset ds;
    ds.n = n;
    ds.seed = seed;
    ds.pixels.resize(static_cast<std::size_t>(n) * image_dim);
    ds.shape.resize(n);
    ds.hue.resize(n);
    ds.position.resize(n);
    ds.scale.resize(n);

    std::vector<std::array<int, 4>> combos;
    combos.reserve(n);
    const int repeats = n / n_factor_combinations;
    for (int rep = 0; rep < repeats; ++rep)
        for (int sh = 0; sh < n_shapes; ++sh)
            for (int h = 0; h < n_hues; ++h)
                for (int p = 0; p < n_positions; ++p)
                    for (int sc = 0; sc < n_scales; ++sc)
                        combos.push_back({sh, h, p, sc});

    Rng order_rng(derive_seed(seed, 0xDA7A));
    order_rng.shuffle(combos);

    for (int i = 0; i < n; ++i) {
        const auto [sh, h, p, sc] = combos[i];
        ds.shape[i] = sh;
        ds.hue[i] = h;
        ds.position[i] = p;
        ds.scale[i] = sc;
        Rng pixel_rng(derive_seed(seed, 0x1111, static_cast<std::uint64_t>(i)));
        detail::render(ds.pixels.data() + static_cast<std::size_t>(i) * image_dim, sh, h,
                       p, sc, pixel_rng);
    }

    const int n_eval = static_cast<int>(n * eval_fraction);
    for (int i = 0; i < n; ++i)
        (i < n_eval ? ds.eval_idx : ds.train_idx).push_back(i);
    return ds;
}

/// Rotates an 8x8 CHW image counter-clockwise by 90 * k degrees. Exact: four
/// applications return the original array bit for bit.
inline void rotate90(const double* src, double* dst, int k) {
    k = ((k % 4) + 4) % 4;
    for (int ch = 0; ch < image_channels; ++ch) {
        const double* s = src + ch * image_side * image_side;
        double* d = dst + ch * image_side * image_side;
        for (int r = 0; r < image_side; ++r) {
            for (int c = 0; c < image_side; ++c) {
                int rr = r, cc = c;
                switch (k) {
                case 1: rr = image_side - 1 - c; cc = r; break;
                case 2: rr = image_side - 1 - r; cc = image_side - 1 - c; break;
                case 3: rr = c; cc = image_side - 1 - r; break;
                default: break;
                }
                d[rr * image_side + cc] = s[r * image_side + c];
            }
        }
    }
}

/// Mirrors an image left-right.
inline void flip_horizontal(const double* src, double* dst) {
    for (int ch = 0; ch < image_channels; ++ch)
        for (int r = 0; r < image_side; ++r)
            for (int c = 0; c < image_side; ++c)
                dst[(ch * image_side + r) * image_side + c] =
                    src[(ch * image_side + r) * image_side + (image_side - 1 - c)];
}

/// Applies one of the six channel permutations (hue jitter: permuting RGB
/// maps the six wheel hues among themselves and leaves equal-weight
/// luminance untouched).
inline void permute_channels(const double* src, double* dst, int perm) {
    static constexpr std::array<std::array<int, 3>, 6> perms{{
        {0, 1, 2}, {1, 2, 0}, {2, 0, 1}, {0, 2, 1}, {1, 0, 2}, {2, 1, 0},
    }};
    const auto& p = perms[static_cast<std::size_t>(((perm % 6) + 6) % 6)];
    constexpr int plane = image_side * image_side;
    for (int ch = 0; ch < image_channels; ++ch)
        for (int i = 0; i < plane; ++i)
            dst[ch * plane + i] = src[p[ch] * plane + i];
}

/// Equal-weight luminance, one 8x8 plane. Invariant under channel
/// permutation, which is what makes hue structurally useless to a
/// grayscale-reconstruction pretext.
inline void luminance(const double* src, double* dst) {
    constexpr int plane = image_side * image_side;
    for (int i = 0; i < plane; ++i)
        dst[i] = (src[i] + src[plane + i] + src[2 * plane + i]) / 3.0;
}

} // namespace ofm::lab
