#include "guiagent/dataset.hpp"

#include "guiagent/executor.hpp"
#include "guiagent/sim_env.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <fstream>

namespace guiagent {

namespace {

std::uint8_t clamp_byte(double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); }

Rgb shade(Rgb c, double f) { return {clamp_byte(c[0] * f), clamp_byte(c[1] * f), clamp_byte(c[2] * f)}; }

Rgb kind_color(ElementKind kind)
{
    switch (kind) {
    case ElementKind::button:
        return {214, 222, 235};
    case ElementKind::hyperlink:
        return {235, 240, 252};
    case ElementKind::input_field:
    case ElementKind::text_area:
        return {255, 255, 255};
    case ElementKind::dropdown:
        return {232, 232, 232};
    case ElementKind::tabled_text:
        return {250, 250, 250};
    case ElementKind::resize_handle:
    case ElementKind::scrollbar:
        return {170, 170, 170};
    case ElementKind::shape:
        return {60, 110, 200};
    case ElementKind::icon:
        return {90, 90, 90};
    case ElementKind::image:
        return {180, 160, 120};
    default:
        return kBackground;
    }
}

void outline(Raster& img, const BBox& b, Rgb c)
{
    img.fill({b.left, b.right, b.top, b.top + 1}, c);
    img.fill({b.left, b.right, b.bottom - 1, b.bottom}, c);
    img.fill({b.left, b.left + 1, b.top, b.bottom}, c);
    img.fill({b.right - 1, b.right, b.top, b.bottom}, c);
}

/// Blocky stand-in glyphs: one 4x6 cell per character, varying by character code.
void draw_text(Raster& img, int x, int y, int right, int bottom, const std::string& text, Rgb c)
{
    for (const char ch : text) {
        if (x + 4 > right)
            break;
        if (ch != ' ') {
            const auto bits = static_cast<unsigned>(static_cast<unsigned char>(ch)) * 2654435761u;
            for (int dy = 0; dy < 6 && y + dy < bottom; ++dy)
                for (int dx = 0; dx < 4; ++dx)
                    if ((bits >> ((dy * 4 + dx) % 31)) & 1u)
                        img.set(x + dx, y + dy, c);
        }
        x += 6;
    }
}

void draw_shape(Raster& img, const BBox& b, ElementSubtype sub, Rgb c)
{
    const double cx = (b.left + b.right) / 2.0;
    const double cy = (b.top + b.bottom) / 2.0;
    const double rx = b.width() / 2.0;
    const double ry = b.height() / 2.0;
    for (int y = b.top; y < b.bottom; ++y) {
        for (int x = b.left; x < b.right; ++x) {
            const double px = x + 0.5;
            const double py = y + 0.5;
            bool in = true;
            if (sub == ElementSubtype::circle)
                in = std::pow((px - cx) / rx, 2) + std::pow((py - cy) / ry, 2) <= 1.0;
            else if (sub == ElementSubtype::triangle)
                in = std::abs(px - cx) <= rx * (py - b.top) / b.height();
            if (in)
                img.set(x, y, c);
        }
    }
}

} // namespace

Raster::Raster(int width, int height, Rgb fill) : width_(width), height_(height)
{
    if (width <= 0 || height <= 0)
        throw std::invalid_argument("raster dimensions must be positive");
    data_.resize(static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3);
    for (std::size_t i = 0; i < data_.size(); i += 3) {
        data_[i] = fill[0];
        data_[i + 1] = fill[1];
        data_[i + 2] = fill[2];
    }
}

Rgb Raster::at(int x, int y) const
{
    const auto i = (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x)) * 3;
    return {data_[i], data_[i + 1], data_[i + 2]};
}

void Raster::set(int x, int y, Rgb c)
{
    if (x < 0 || y < 0 || x >= width_ || y >= height_)
        return;
    const auto i = (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x)) * 3;
    data_[i] = c[0];
    data_[i + 1] = c[1];
    data_[i + 2] = c[2];
}

void Raster::fill(const BBox& box, Rgb c)
{
    for (int y = std::max(0, box.top); y < std::min(height_, box.bottom); ++y)
        for (int x = std::max(0, box.left); x < std::min(width_, box.right); ++x)
            set(x, y, c);
}

Raster render_screen(const Observation& obs)
{
    Raster img(obs.width(), obs.height(), kBackground);
    for (const auto& [id, el] : obs.elements()) {
        if (!el.visible)
            continue;
        const auto& b = el.bbox;
        Rgb base = kind_color(el.kind);
        if (el.highlighted && *el.highlighted)
            base = {255, 236, 150};
        const Rgb ink = {30, 30, 30};
        switch (el.kind) {
        case ElementKind::shape:
            draw_shape(img, b, *el.subtype, base);
            break;
        case ElementKind::icon:
            img.fill(b, shade(base, 0.6 + 0.04 * static_cast<int>(*el.subtype)));
            break;
        case ElementKind::radio:
        case ElementKind::checkbox: {
            const int s = std::min(10, b.height() - 2);
            const BBox mark{b.left + 1, b.left + 1 + s, b.top + (b.height() - s) / 2, b.top + (b.height() - s) / 2 + s};
            img.fill(mark, {255, 255, 255});
            outline(img, mark, {100, 100, 100});
            if (el.checked && *el.checked)
                img.fill({mark.left + 3, mark.right - 3, mark.top + 3, mark.bottom - 3}, ink);
            if (el.text)
                draw_text(img, mark.right + 3, b.top + (b.height() - 6) / 2, b.right, b.bottom, *el.text, ink);
            break;
        }
        default:
            if (base != kBackground)
                img.fill(b, base);
            if (el.kind != ElementKind::text && el.kind != ElementKind::draggable_text)
                outline(img, b, shade(base, 0.6));
            if (el.text) {
                const Rgb c = el.kind == ElementKind::hyperlink ? Rgb{20, 60, 200} : ink;
                draw_text(img, b.left + 3, b.top + (b.height() - 6) / 2, b.right - 2, b.bottom, *el.text, c);
            }
            break;
        }
        if (el.focused && *el.focused)
            outline(img, b, {40, 120, 255});
    }
    return img;
}

void check_box(const Raster& img, const BBox& b)
{
    if (b.left < 0 || b.top < 0 || b.left >= b.right || b.top >= b.bottom || b.right > img.width() ||
        b.bottom > img.height())
        throw std::out_of_range("box [" + std::to_string(b.left) + "-" + std::to_string(b.right) + "]x[" +
                                std::to_string(b.top) + "-" + std::to_string(b.bottom) + "] is not inside the " +
                                std::to_string(img.width()) + "x" + std::to_string(img.height()) + " image");
}

std::uint8_t darken_channel(std::uint8_t value, double factor) { return clamp_byte(value * factor); }

Raster semi_mask(const Raster& img, const BBox& b, const SemiMaskOptions& options)
{
    check_box(img, b);
    if (!(options.darken > 0.0 && options.darken <= 1.0))
        throw std::invalid_argument("darken factor must lie in (0, 1]");
    if (options.outline_px < 0)
        throw std::invalid_argument("outline width must be non-negative");
    Raster out = img;
    const int o = options.outline_px;
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            const bool inside = x >= b.left && x < b.right && y >= b.top && y < b.bottom;
            if (inside)
                continue;
            const bool ring = x >= b.left - o && x < b.right + o && y >= b.top - o && y < b.bottom + o;
            if (ring) {
                out.set(x, y, options.outline_color);
            } else {
                const auto c = img.at(x, y);
                out.set(x, y,
                        {darken_channel(c[0], options.darken), darken_channel(c[1], options.darken),
                         darken_channel(c[2], options.darken)});
            }
        }
    }
    return out;
}

std::vector<std::pair<int, int>> bresenham(int x0, int y0, int x1, int y1)
{
    std::vector<std::pair<int, int>> pts;
    const int dx = std::abs(x1 - x0);
    const int dy = -std::abs(y1 - y0);
    const int sx = x0 < x1 ? 1 : -1;
    const int sy = y0 < y1 ? 1 : -1;
    int err = dx + dy;
    for (;;) {
        pts.emplace_back(x0, y0);
        if (x0 == x1 && y0 == y1)
            break;
        const int e2 = 2 * err;
        if (e2 >= dy) {
            err += dy;
            x0 += sx;
        }
        if (e2 <= dx) {
            err += dx;
            y0 += sy;
        }
    }
    return pts;
}

Raster xbox_mask(const Raster& img, const BBox& b)
{
    check_box(img, b);
    Raster out = img;
    out.fill(b, kXBoxFill);
    for (const auto& [x, y] : bresenham(b.left, b.top, b.right - 1, b.bottom - 1))
        out.set(x, y, kXBoxLine);
    for (const auto& [x, y] : bresenham(b.right - 1, b.top, b.left, b.bottom - 1))
        out.set(x, y, kXBoxLine);
    return out;
}

BBox jitter_box(const BBox& b, int width, int height, int jitter_px, SplitMix64& rng)
{
    auto j = [&] { return static_cast<int>(rng.uniform_int(-jitter_px, jitter_px)); };
    BBox out{std::clamp(b.left + j(), 0, width - 1), 0, std::clamp(b.top + j(), 0, height - 1), 0};
    out.right = std::clamp(b.right + j(), out.left + 1, width);
    out.bottom = std::clamp(b.bottom + j(), out.top + 1, height);
    return out;
}

std::vector<Sample> augment_dataset(const std::vector<Sample>& samples, SplitMix64& rng, const AugmentConfig& config)
{
    std::vector<Sample> out;
    out.reserve(samples.size() * static_cast<std::size_t>(1 + config.copies));
    for (const auto& s : samples) {
        out.push_back(s);
        for (int v = 1; v <= config.copies; ++v) {
            Sample a = s;
            a.variant = v;
            std::array<double, 3> gain{};
            for (auto& g : gain)
                g = rng.uniform(1.0 - config.color_shift, 1.0 + config.color_shift);
            auto& px = a.image.data();
            for (std::size_t i = 0; i < px.size(); ++i) {
                double value = px[i] * gain[i % 3];
                if (config.noise_sigma > 0.0)
                    value += config.noise_sigma * rng.normal();
                px[i] = clamp_byte(value);
            }
            for (auto& el : a.annotations)
                el.bbox = jitter_box(el.bbox, a.image.width(), a.image.height(), config.jitter_px, rng);
            out.push_back(std::move(a));
        }
    }
    return out;
}

std::vector<TrainingPair> export_pairs(const std::vector<Sample>& samples, const SemiMaskOptions& options)
{
    std::vector<TrainingPair> pairs;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& s = samples[i];
        for (std::size_t k = 0; k < s.annotations.size(); ++k) {
            const auto& el = s.annotations[k];
            pairs.push_back({semi_mask(s.image, el.bbox, options),
                             render_element(static_cast<int>(k) + 1, el, RenderStyle::attributes_only), i, k});
        }
    }
    return pairs;
}

std::vector<Sample> collect_screens(const std::vector<std::string>& families, const std::vector<std::int64_t>& seeds,
                                    int max_per_episode, std::size_t min_annotations)
{
    std::vector<Sample> samples;
    for (const auto& family : families) {
        for (const auto seed : seeds) {
            auto env = SimEnv::reset(family, seed);
            for (int step = 0; step < max_per_episode && env.status() == EnvStatus::running; ++step) {
                const auto obs = env.snapshot();
                Sample s;
                s.image = render_screen(obs);
                for (const auto& [id, el] : obs.elements())
                    if (el.visible)
                        s.annotations.push_back(el);
                s.family = family;
                s.seed = seed;
                s.step = step;
                if (s.annotations.size() >= min_annotations)
                    samples.push_back(std::move(s));
                const auto plan = env.oracle_plan();
                if (plan.empty())
                    break;
                execute_command(env, validate(plan.front(), obs));
            }
        }
    }
    return samples;
}

void write_png(const Raster& img, const std::filesystem::path& path)
{
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(img.width());
    image.height = static_cast<png_uint_32>(img.height());
    image.format = PNG_FORMAT_RGB;
    if (!png_image_write_to_file(&image, path.string().c_str(), 0, img.data().data(), 0, nullptr))
        throw std::runtime_error("cannot write " + path.string() + ": " + image.message);
}

Raster read_png(const std::filesystem::path& path)
{
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&image, path.string().c_str()))
        throw std::runtime_error("cannot read " + path.string() + ": " + image.message);
    image.format = PNG_FORMAT_RGB;
    Raster img(static_cast<int>(image.width), static_cast<int>(image.height));
    if (!png_image_finish_read(&image, nullptr, img.data().data(), 0, nullptr))
        throw std::runtime_error("cannot decode " + path.string() + ": " + image.message);
    return img;
}

DatasetWriteResult write_dataset(const std::vector<Sample>& samples, const std::filesystem::path& dir,
                                 const SemiMaskOptions& mask)
{
    namespace fs = std::filesystem;
    fs::create_directories(dir / "images");
    fs::create_directories(dir / "pairs");

    auto manifest = nlohmann::json::array();
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& s = samples[i];
        const auto name = s.family + "_" + std::to_string(s.seed) + "_" + std::to_string(s.step) + "_v" +
                          std::to_string(s.variant) + ".png";
        write_png(s.image, dir / "images" / name);
        auto annotations = nlohmann::json::array();
        for (const auto& el : s.annotations)
            annotations.push_back(to_json(el));
        const bool held_out = fnv1a64(s.family + ":" + std::to_string(s.seed)) % 10 == 0;
        manifest.push_back({{"image_path", "images/" + name},
                            {"annotations", annotations},
                            {"split", held_out ? "test" : "train"},
                            {"family", s.family},
                            {"seed", s.seed},
                            {"step", s.step},
                            {"variant", s.variant}});
    }
    {
        std::ofstream out(dir / "manifest.json");
        out << manifest.dump(1) << "\n";
    }

    const auto pairs = export_pairs(samples, mask);
    std::ofstream targets(dir / "pairs.jsonl");
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto name = "pair_" + std::to_string(i) + ".png";
        write_png(pairs[i].image, dir / "pairs" / name);
        targets << nlohmann::json{{"image_path", "pairs/" + name},
                                  {"target", pairs[i].target},
                                  {"sample", pairs[i].sample},
                                  {"annotation", pairs[i].annotation}}
                       .dump()
                << "\n";
    }
    return {samples.size(), pairs.size()};
}

} // namespace guiagent
