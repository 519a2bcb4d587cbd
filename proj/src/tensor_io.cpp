#include "drf/tensor_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <png.h>

#include <nlohmann/json.hpp>

#include "drf/errors.hpp"

namespace drf {

using json = nlohmann::json;

static_assert(std::endian::native == std::endian::little,
              "container format assumes a little-endian host");

void save_tensor(const Tensor& t, const std::string& path) {
    if (t.rank() == 0) throw std::invalid_argument("save_tensor: empty tensor");

    json header;
    header["shape"] = t.shape();
    header["dtype"] = "f32";
    header["byte_order"] = "little";
    header["layout"] = "row-major";

    {
        std::ofstream js(path + ".json", std::ios::trunc);
        if (!js) throw IoError("save_tensor: cannot open " + path + ".json");
        js << header.dump(2) << "\n";
        if (!js) throw IoError("save_tensor: write failed for " + path + ".json");
    }
    {
        std::ofstream bin(path + ".bin", std::ios::trunc | std::ios::binary);
        if (!bin) throw IoError("save_tensor: cannot open " + path + ".bin");
        bin.write(reinterpret_cast<const char*>(t.data()),
                  static_cast<std::streamsize>(t.size() * sizeof(float)));
        if (!bin) throw IoError("save_tensor: write failed for " + path + ".bin");
    }
}

Tensor load_tensor(const std::string& path) {
    std::ifstream js(path + ".json");
    if (!js) throw IoError("load_tensor: missing header " + path + ".json");
    json header;
    try {
        js >> header;
    } catch (const json::exception& e) {
        throw IoError("load_tensor: corrupt container (bad header " + path +
                      ".json: " + e.what() + ")");
    }
    if (!header.contains("shape") || !header["shape"].is_array() ||
        header.value("dtype", "") != "f32" ||
        header.value("byte_order", "") != "little" ||
        header.value("layout", "") != "row-major")
        throw IoError("load_tensor: corrupt container (unsupported header " + path + ")");

    std::vector<std::size_t> shape;
    std::size_t count = 1;
    for (const auto& d : header["shape"]) {
        if (!d.is_number_unsigned() || d.get<std::size_t>() == 0)
            throw IoError("load_tensor: corrupt container (bad shape in " + path + ")");
        shape.push_back(d.get<std::size_t>());
        count *= shape.back();
    }
    if (shape.empty())
        throw IoError("load_tensor: corrupt container (rank-0 shape in " + path + ")");

    std::ifstream bin(path + ".bin", std::ios::binary | std::ios::ate);
    if (!bin) throw IoError("load_tensor: missing payload " + path + ".bin");
    const auto bytes = static_cast<std::size_t>(bin.tellg());
    if (bytes != count * sizeof(float))
        throw IoError("load_tensor: corrupt container (" + path + ".bin holds " +
                      std::to_string(bytes / sizeof(float)) + " floats, header wants " +
                      std::to_string(count) + ")");
    bin.seekg(0);
    std::vector<float> data(count);
    bin.read(reinterpret_cast<char*>(data.data()),
             static_cast<std::streamsize>(bytes));
    if (!bin) throw IoError("load_tensor: read failed for " + path + ".bin");

    for (float v : data)
        if (!std::isfinite(v))
            throw IoError("load_tensor: non-finite data in " + path + ".bin");

    return Tensor::from_data(std::move(shape), std::move(data));
}

namespace {

struct PngWriter {
    png_structp png = nullptr;
    png_infop info = nullptr;
    std::FILE* fp = nullptr;
    ~PngWriter() {
        if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
        if (fp) std::fclose(fp);
    }
};

struct PngReader {
    png_structp png = nullptr;
    png_infop info = nullptr;
    std::FILE* fp = nullptr;
    ~PngReader() {
        if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
        if (fp) std::fclose(fp);
    }
};

} // namespace

void export_image(const Tensor& t, const std::string& path, bool normalize) {
    const bool gray = t.rank() == 2;
    if (!gray && !(t.rank() == 3 && t.dim(2) == 3))
        throw std::invalid_argument("export_image: expected [h,w] or [h,w,3], got rank " +
                                    std::to_string(t.rank()));
    for (std::size_t i = 0; i < t.size(); ++i)
        if (!std::isfinite(t[i]))
            throw std::invalid_argument("export_image: non-finite value");

    const std::size_t h = t.dim(0), w = t.dim(1);
    const std::size_t channels = gray ? 1 : 3;

    float lo = t[0], hi = t[0];
    for (std::size_t i = 1; i < t.size(); ++i) {
        lo = std::min(lo, t[i]);
        hi = std::max(hi, t[i]);
    }
    const float span = hi - lo;

    auto quantize = [&](float v) -> std::uint16_t {
        float x;
        if (normalize) {
            x = span > 0.0f ? (v - lo) / span : 0.0f;
        } else {
            x = std::clamp(v, 0.0f, 1.0f);
        }
        return static_cast<std::uint16_t>(std::lround(x * 65535.0f));
    };

    PngWriter ctx;
    ctx.fp = std::fopen(path.c_str(), "wb");
    if (!ctx.fp) throw IoError("export_image: cannot open " + path);
    ctx.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    ctx.info = png_create_info_struct(ctx.png);
    if (!ctx.png || !ctx.info || setjmp(png_jmpbuf(ctx.png)))
        throw IoError("export_image: libpng failure for " + path);

    png_init_io(ctx.png, ctx.fp);
    png_set_IHDR(ctx.png, ctx.info, static_cast<png_uint_32>(w),
                 static_cast<png_uint_32>(h), 16,
                 gray ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(ctx.png, ctx.info);

    // PNG stores 16-bit samples big-endian.
    std::vector<std::uint8_t> row(w * channels * 2);
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            for (std::size_t c = 0; c < channels; ++c) {
                const float v = gray ? t.at(y, x) : t.at(y, x, c);
                const std::uint16_t q = quantize(v);
                row[(x * channels + c) * 2] = static_cast<std::uint8_t>(q >> 8);
                row[(x * channels + c) * 2 + 1] = static_cast<std::uint8_t>(q & 0xff);
            }
        }
        png_write_row(ctx.png, row.data());
    }
    png_write_end(ctx.png, ctx.info);
}

Tensor load_image(const std::string& path) {
    PngReader ctx;
    ctx.fp = std::fopen(path.c_str(), "rb");
    if (!ctx.fp) throw IoError("load_image: cannot open " + path);
    ctx.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    ctx.info = png_create_info_struct(ctx.png);
    if (!ctx.png || !ctx.info || setjmp(png_jmpbuf(ctx.png)))
        throw IoError("load_image: libpng failure for " + path);

    png_init_io(ctx.png, ctx.fp);
    png_read_info(ctx.png, ctx.info);
    const std::size_t w = png_get_image_width(ctx.png, ctx.info);
    const std::size_t h = png_get_image_height(ctx.png, ctx.info);
    const int depth = png_get_bit_depth(ctx.png, ctx.info);
    const int color = png_get_color_type(ctx.png, ctx.info);
    if (depth != 16 || (color != PNG_COLOR_TYPE_GRAY && color != PNG_COLOR_TYPE_RGB))
        throw IoError("load_image: expected 16-bit gray or RGB PNG: " + path);
    const std::size_t channels = color == PNG_COLOR_TYPE_GRAY ? 1 : 3;

    std::vector<std::uint8_t> row(w * channels * 2);
    Tensor out = channels == 1 ? Tensor({h, w}) : Tensor({h, w, 3});
    for (std::size_t y = 0; y < h; ++y) {
        png_read_row(ctx.png, row.data(), nullptr);
        for (std::size_t x = 0; x < w; ++x) {
            for (std::size_t c = 0; c < channels; ++c) {
                const std::uint16_t q = static_cast<std::uint16_t>(
                    (row[(x * channels + c) * 2] << 8) | row[(x * channels + c) * 2 + 1]);
                const float v = static_cast<float>(q) / 65535.0f;
                if (channels == 1)
                    out.at(y, x) = v;
                else
                    out.at(y, x, c) = v;
            }
        }
    }
    return out;
}

static std::string csv_format_value(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9f", v);
    return buf;
}

static std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

void export_csv(const std::string& path, const std::vector<std::string>& header,
                const std::vector<CsvRow>& rows) {
    for (const auto& r : rows)
        if (r.values.size() + 1 != header.size())
            throw std::invalid_argument("export_csv: ragged rows (row '" + r.label +
                                        "' has " + std::to_string(r.values.size() + 1) +
                                        " fields, header has " +
                                        std::to_string(header.size()) + ")");

    std::ofstream out(path, std::ios::trunc | std::ios::binary);
    if (!out) throw IoError("export_csv: cannot open " + path);

    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) out << ',';
        out << csv_escape(header[i]);
    }
    out << "\r\n";
    for (const auto& r : rows) {
        out << csv_escape(r.label);
        for (double v : r.values) out << ',' << csv_format_value(v);
        out << "\r\n";
    }
    if (!out) throw IoError("export_csv: write failed for " + path);
}

} // namespace drf
