#include "relseg/image.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace relseg {

ImageGrid::ImageGrid(int w, int h, double fill) {
    if (w < 1 || h < 1) {
        throw std::invalid_argument("ImageGrid: dimensions must be positive");
    }
    width = w;
    height = h;
    data.assign(static_cast<size_t>(w) * h, fill);
}

void ImageGrid::validate() const {
    if (width < 1 || height < 1) {
        throw std::invalid_argument("ImageGrid: dimensions must be positive");
    }
    if (data.size() != pixel_count()) {
        throw std::invalid_argument("ImageGrid: data length does not match width*height");
    }
    for (double v : data) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument("ImageGrid: non-finite intensity");
        }
    }
}

ImageFormat format_from_extension(const std::string& path) {
    auto dot = path.find_last_of('.');
    std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (ext == "pgm") return ImageFormat::pgm;
    if (ext == "png") return ImageFormat::png;
    throw std::invalid_argument("unsupported image extension: " + path);
}

namespace {

// Reads the next header token of a PGM, skipping whitespace and '#' comments.
std::string next_pgm_token(std::istream& in) {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {
            }
        } else if (!std::isspace(c)) {
            tok.push_back(static_cast<char>(c));
            while ((c = in.peek()) != EOF && !std::isspace(c) && c != '#') {
                tok.push_back(static_cast<char>(in.get()));
            }
            return tok;
        }
    }
    throw std::runtime_error("malformed PGM header: unexpected end of file");
}

int parse_pgm_int(std::istream& in) {
    std::string tok = next_pgm_token(in);
    try {
        size_t pos = 0;
        int v = std::stoi(tok, &pos);
        if (pos != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error("malformed PGM header: bad integer '" + tok + "'");
    }
}

ImageGrid load_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open image file: " + path);

    std::string magic = next_pgm_token(in);
    if (magic != "P2" && magic != "P5") {
        throw std::runtime_error("malformed PGM header: expected P2 or P5, got '" + magic + "'");
    }
    int w = parse_pgm_int(in);
    int h = parse_pgm_int(in);
    int maxval = parse_pgm_int(in);
    if (w < 1 || h < 1) throw std::runtime_error("malformed PGM header: bad dimensions");
    if (maxval < 1 || maxval > 65535) {
        throw std::runtime_error("unsupported bit depth: PGM maxval " + std::to_string(maxval));
    }

    ImageGrid img(w, h);
    const double scale = 1.0 / maxval;
    if (magic == "P2") {
        for (size_t i = 0; i < img.pixel_count(); ++i) {
            int v = parse_pgm_int(in);
            if (v < 0 || v > maxval) throw std::runtime_error("malformed PGM: sample out of range");
            img.data[i] = v * scale;
        }
    } else {
        in.get();  // single whitespace byte after maxval
        const int bytes = maxval > 255 ? 2 : 1;
        std::vector<unsigned char> raw(img.pixel_count() * bytes);
        in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
        if (static_cast<size_t>(in.gcount()) != raw.size()) {
            throw std::runtime_error("malformed PGM: truncated pixel data");
        }
        for (size_t i = 0; i < img.pixel_count(); ++i) {
            int v = bytes == 1 ? raw[i] : (raw[2 * i] << 8 | raw[2 * i + 1]);  // big-endian
            img.data[i] = v * scale;
        }
    }
    return img;
}

void save_pgm(const ImageGrid& grid, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write image file: " + path);
    out << "P5\n" << grid.width << " " << grid.height << "\n255\n";
    std::vector<unsigned char> raw(grid.pixel_count());
    for (size_t i = 0; i < grid.pixel_count(); ++i) {
        raw[i] = static_cast<unsigned char>(std::lround(clamp01(grid.data[i]) * 255.0));
    }
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!out) throw std::runtime_error("cannot write image file: " + path);
}

struct PngReadCloser {
    png_structp png = nullptr;
    png_infop info = nullptr;
    FILE* fp = nullptr;
    ~PngReadCloser() {
        if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
        if (fp) std::fclose(fp);
    }
};

ImageGrid load_png(const std::string& path) {
    PngReadCloser s;
    s.fp = std::fopen(path.c_str(), "rb");
    if (!s.fp) throw std::runtime_error("cannot open image file: " + path);

    unsigned char sig[8];
    if (std::fread(sig, 1, 8, s.fp) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
        throw std::runtime_error("malformed PNG header: " + path);
    }
    s.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!s.png) throw std::runtime_error("libpng init failed");
    s.info = png_create_info_struct(s.png);
    if (!s.info) throw std::runtime_error("libpng init failed");
    if (setjmp(png_jmpbuf(s.png))) {
        throw std::runtime_error("malformed PNG data: " + path);
    }
    png_init_io(s.png, s.fp);
    png_set_sig_bytes(s.png, 8);
    png_read_info(s.png, s.info);

    const png_byte color = png_get_color_type(s.png, s.info);
    const png_byte depth = png_get_bit_depth(s.png, s.info);
    if (color != PNG_COLOR_TYPE_GRAY) {
        throw std::runtime_error("unsupported: not grayscale");
    }
    if (depth != 8 && depth != 16) {
        throw std::runtime_error("unsupported bit depth: PNG " + std::to_string(depth) + "-bit");
    }

    const png_uint_32 w = png_get_image_width(s.png, s.info);
    const png_uint_32 h = png_get_image_height(s.png, s.info);
    png_read_update_info(s.png, s.info);

    const size_t rowbytes = png_get_rowbytes(s.png, s.info);
    std::vector<unsigned char> buf(rowbytes * h);
    std::vector<png_bytep> rows(h);
    for (png_uint_32 y = 0; y < h; ++y) rows[y] = buf.data() + y * rowbytes;
    png_read_image(s.png, rows.data());
    png_read_end(s.png, nullptr);

    ImageGrid img(static_cast<int>(w), static_cast<int>(h));
    const double scale = depth == 8 ? 1.0 / 255.0 : 1.0 / 65535.0;
    for (png_uint_32 y = 0; y < h; ++y) {
        const unsigned char* row = rows[y];
        for (png_uint_32 x = 0; x < w; ++x) {
            int v = depth == 8 ? row[x] : (row[2 * x] << 8 | row[2 * x + 1]);  // PNG is big-endian
            img.at(static_cast<int>(x), static_cast<int>(y)) = v * scale;
        }
    }
    return img;
}

struct PngWriteCloser {
    png_structp png = nullptr;
    png_infop info = nullptr;
    FILE* fp = nullptr;
    ~PngWriteCloser() {
        if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
        if (fp) std::fclose(fp);
    }
};

void save_png(const ImageGrid& grid, const std::string& path) {
    PngWriteCloser s;
    s.fp = std::fopen(path.c_str(), "wb");
    if (!s.fp) throw std::runtime_error("cannot write image file: " + path);
    s.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!s.png) throw std::runtime_error("libpng init failed");
    s.info = png_create_info_struct(s.png);
    if (!s.info) throw std::runtime_error("libpng init failed");
    if (setjmp(png_jmpbuf(s.png))) {
        throw std::runtime_error("cannot write image file: " + path);
    }
    png_init_io(s.png, s.fp);
    png_set_IHDR(s.png, s.info, static_cast<png_uint_32>(grid.width),
                 static_cast<png_uint_32>(grid.height), 8, PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(s.png, s.info);

    std::vector<unsigned char> row(static_cast<size_t>(grid.width));
    for (int y = 0; y < grid.height; ++y) {
        for (int x = 0; x < grid.width; ++x) {
            row[static_cast<size_t>(x)] =
                static_cast<unsigned char>(std::lround(clamp01(grid.at(x, y)) * 255.0));
        }
        png_write_row(s.png, row.data());
    }
    png_write_end(s.png, nullptr);
}

}  // namespace

ImageGrid load_image(const std::string& path, ImageFormat format) {
    ImageGrid img = format == ImageFormat::pgm ? load_pgm(path) : load_png(path);
    img.validate();
    return img;
}

void save_image(const ImageGrid& grid, const std::string& path, ImageFormat format) {
    grid.validate();
    if (format == ImageFormat::pgm) {
        save_pgm(grid, path);
    } else {
        save_png(grid, path);
    }
}

void save_rmap(const ImageGrid& grid, const std::string& path) {
    grid.validate();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write map file: " + path);
    out.write("RMAP", 4);
    auto write_u32 = [&out](uint32_t v) {
        unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                              static_cast<unsigned char>(v >> 8 & 0xff),
                              static_cast<unsigned char>(v >> 16 & 0xff),
                              static_cast<unsigned char>(v >> 24 & 0xff)};
        out.write(reinterpret_cast<const char*>(b), 4);
    };
    write_u32(static_cast<uint32_t>(grid.width));
    write_u32(static_cast<uint32_t>(grid.height));
    for (double v : grid.data) {
        float f = static_cast<float>(v);
        uint32_t bits;
        std::memcpy(&bits, &f, 4);
        write_u32(bits);
    }
    if (!out) throw std::runtime_error("cannot write map file: " + path);
}

ImageGrid load_rmap(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open map file: " + path);
    char magic[4];
    in.read(magic, 4);
    if (in.gcount() != 4 || std::memcmp(magic, "RMAP", 4) != 0) {
        throw std::runtime_error("malformed RMAP header: " + path);
    }
    auto read_u32 = [&in, &path]() {
        unsigned char b[4];
        in.read(reinterpret_cast<char*>(b), 4);
        if (in.gcount() != 4) throw std::runtime_error("malformed RMAP: truncated " + path);
        return static_cast<uint32_t>(b[0]) | static_cast<uint32_t>(b[1]) << 8 |
               static_cast<uint32_t>(b[2]) << 16 | static_cast<uint32_t>(b[3]) << 24;
    };
    uint32_t w = read_u32();
    uint32_t h = read_u32();
    if (w < 1 || h < 1 || w > 1u << 20 || h > 1u << 20) {
        throw std::runtime_error("malformed RMAP header: bad dimensions in " + path);
    }
    ImageGrid img(static_cast<int>(w), static_cast<int>(h));
    for (size_t i = 0; i < img.pixel_count(); ++i) {
        uint32_t bits = read_u32();
        float f;
        std::memcpy(&f, &bits, 4);
        img.data[i] = f;
    }
    return img;
}

GradientPair gradient(const ImageGrid& img) {
    img.validate();
    if (img.width < 2 || img.height < 2) {
        throw std::invalid_argument("gradient: image must be at least 2x2");
    }
    GradientPair g{ImageGrid(img.width, img.height), ImageGrid(img.width, img.height)};
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            double dx;
            if (x == 0) {
                dx = img.at(1, y) - img.at(0, y);
            } else if (x == img.width - 1) {
                dx = img.at(x, y) - img.at(x - 1, y);
            } else {
                dx = (img.at(x + 1, y) - img.at(x - 1, y)) / 2.0;
            }
            double dy;
            if (y == 0) {
                dy = img.at(x, 1) - img.at(x, 0);
            } else if (y == img.height - 1) {
                dy = img.at(x, y) - img.at(x, y - 1);
            } else {
                dy = (img.at(x, y + 1) - img.at(x, y - 1)) / 2.0;
            }
            g.gx.at(x, y) = dx;
            g.gy.at(x, y) = dy;
        }
    }
    return g;
}

ImageGrid gaussian_blur(const ImageGrid& img, double sigma) {
    img.validate();
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
        throw std::invalid_argument("gaussian_blur: sigma must be finite and >= 0");
    }
    if (sigma == 0.0) return img;

    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> kernel(static_cast<size_t>(2 * radius + 1));
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        double v = std::exp(-(static_cast<double>(i) * i) / (2.0 * sigma * sigma));
        kernel[static_cast<size_t>(i + radius)] = v;
        sum += v;
    }
    for (double& v : kernel) v /= sum;

    const auto clamp_idx = [](int v, int hi) { return v < 0 ? 0 : (v > hi ? hi : v); };

    ImageGrid tmp(img.width, img.height);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i) {
                acc += kernel[static_cast<size_t>(i + radius)] *
                       img.at(clamp_idx(x + i, img.width - 1), y);
            }
            tmp.at(x, y) = acc;
        }
    }
    ImageGrid out(img.width, img.height);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i) {
                acc += kernel[static_cast<size_t>(i + radius)] *
                       tmp.at(x, clamp_idx(y + i, img.height - 1));
            }
            out.at(x, y) = acc;
        }
    }
    return out;
}

}  // namespace relseg
