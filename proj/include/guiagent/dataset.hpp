#pragma once

#include "guiagent/hash.hpp"
#include "guiagent/ui_model.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace guiagent {

using Rgb = std::array<std::uint8_t, 3>;

/// Row-major RGB image.
class Raster {
public:
    Raster() = default;
    Raster(int width, int height, Rgb fill = {0, 0, 0});

    int width() const { return width_; }
    int height() const { return height_; }
    const std::vector<std::uint8_t>& data() const { return data_; }
    std::vector<std::uint8_t>& data() { return data_; }

    Rgb at(int x, int y) const;
    void set(int x, int y, Rgb c);
    /// Fills [left,right) x [top,bottom), clipped to the image.
    void fill(const BBox& box, Rgb c);

    bool operator==(const Raster&) const = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> data_;
};

inline constexpr Rgb kBackground = {246, 246, 246};

/// Flat-style rendering of an observation; elements with visible=false are not drawn.
Raster render_screen(const Observation& obs);

/// Throws std::out_of_range unless 0 <= left < right <= width and 0 <= top < bottom <= height.
void check_box(const Raster& img, const BBox& box);

struct SemiMaskOptions {
    double darken = 0.4;
    int outline_px = 2;
    Rgb outline_color = {0, 255, 0};
};

/// Pixels inside [left,right) x [top,bottom) are kept, a ring of `outline_px`
/// just outside is painted, and every other pixel is scaled by `darken`.
Raster semi_mask(const Raster& img, const BBox& box, const SemiMaskOptions& options = {});

/// Scaled channel value used by semi_mask.
std::uint8_t darken_channel(std::uint8_t value, double factor);

inline constexpr Rgb kXBoxFill = {128, 128, 128};
inline constexpr Rgb kXBoxLine = {0, 0, 0};

/// Fills the box and draws both corner-to-corner diagonals; the exterior is unchanged.
Raster xbox_mask(const Raster& img, const BBox& box);

/// Integer line points from (x0,y0) to (x1,y1), endpoints included.
std::vector<std::pair<int, int>> bresenham(int x0, int y0, int x1, int y1);

struct Sample {
    Raster image;
    std::vector<UiElement> annotations;
    std::string family;
    std::int64_t seed = 0;
    int step = 0;
    int variant = 0; // 0 original, 1.. augmented copies
};

struct AugmentConfig {
    double color_shift = 0.10;
    int jitter_px = 2;
    double noise_sigma = 4.0;
    int copies = 2;
};

/// Each sample followed by `copies` augmented variants. Deterministic for a fixed rng state.
std::vector<Sample> augment_dataset(const std::vector<Sample>& samples, SplitMix64& rng,
                                    const AugmentConfig& config = {});

/// Moves each edge by up to `jitter_px`, keeping the box non-empty and inside width x height.
BBox jitter_box(const BBox& box, int width, int height, int jitter_px, SplitMix64& rng);

struct TrainingPair {
    Raster image;
    std::string target;
    std::size_t sample = 0;
    std::size_t annotation = 0;
};

/// One semi-masked image and attribute text (no coordinates) per annotation.
std::vector<TrainingPair> export_pairs(const std::vector<Sample>& samples, const SemiMaskOptions& options = {});

/// Screens visited by the oracle for each (family, seed); up to `max_per_episode` each.
std::vector<Sample> collect_screens(const std::vector<std::string>& families, const std::vector<std::int64_t>& seeds,
                                    int max_per_episode = 8, std::size_t min_annotations = 1);

void write_png(const Raster& img, const std::filesystem::path& path);
Raster read_png(const std::filesystem::path& path);

struct DatasetWriteResult {
    std::size_t samples = 0;
    std::size_t pairs = 0;
};

/// Writes images/, pairs/ and manifest.json under `dir`.
DatasetWriteResult write_dataset(const std::vector<Sample>& samples, const std::filesystem::path& dir,
                                 const SemiMaskOptions& mask = {});

} // namespace guiagent
