#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace relseg {

/// Integer pixel coordinate, x = column, y = row (row 0 is the top row).
struct Pixel {
    int x = 0;
    int y = 0;

    friend bool operator==(const Pixel& a, const Pixel& b) {
        return a.x == b.x && a.y == b.y;
    }
    friend bool operator<(const Pixel& a, const Pixel& b) {
        return a.y != b.y ? a.y < b.y : a.x < b.x;
    }
};

/// 2D scalar field, row-major. Canonical images keep values in [0,1];
/// derived maps (gradients) may hold any finite value.
struct ImageGrid {
    int width = 0;
    int height = 0;
    std::vector<double> data;

    ImageGrid() = default;
    ImageGrid(int w, int h, double fill = 0.0);

    double& at(int x, int y) { return data[static_cast<size_t>(y) * width + x]; }
    const double& at(int x, int y) const { return data[static_cast<size_t>(y) * width + x]; }

    bool in_bounds(int x, int y) const {
        return x >= 0 && x < width && y >= 0 && y < height;
    }
    size_t pixel_count() const { return static_cast<size_t>(width) * height; }

    /// Throws std::invalid_argument if dimensions and data disagree or a value
    /// is non-finite.
    void validate() const;

    friend bool operator==(const ImageGrid& a, const ImageGrid& b) {
        return a.width == b.width && a.height == b.height && a.data == b.data;
    }
};

struct GradientPair {
    ImageGrid gx;  // dI/dx
    ImageGrid gy;  // dI/dy
};

enum class ImageFormat { pgm, png };

/// Loads an 8- or 16-bit grayscale PGM (P2/P5) or PNG and rescales
/// intensities to [0,1] by the format's max value.
ImageGrid load_image(const std::string& path, ImageFormat format);

/// Saves as 8-bit grayscale (maxval 255). Values are clamped to [0,1] and
/// rounded, so load(save(g)) matches g within 1/510 per pixel.
void save_image(const ImageGrid& grid, const std::string& path, ImageFormat format);

/// Picks pgm/png from the file extension; anything else is an error.
ImageFormat format_from_extension(const std::string& path);

/// Lossless float map export: magic "RMAP", u32 width, u32 height, then
/// width*height little-endian float32, row-major.
void save_rmap(const ImageGrid& grid, const std::string& path);
ImageGrid load_rmap(const std::string& path);

/// Central differences in the interior, one-sided at the borders, so the
/// returned maps keep the source dimensions. Requires width, height >= 2.
GradientPair gradient(const ImageGrid& img);

/// Separable Gaussian blur, kernel radius ceil(3*sigma), kernel normalized
/// to sum 1, borders handled by edge replication. sigma == 0 returns the
/// input unchanged.
ImageGrid gaussian_blur(const ImageGrid& img, double sigma);

inline double clamp01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

}  // namespace relseg
