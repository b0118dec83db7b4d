// SPDX-License-Identifier: Apache-2.0
#include <layoutloop/error.hpp>
#include <layoutloop/image_io.hpp>

#include <png.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

namespace layoutloop
{

namespace
{

std::uint8_t to_byte(double v)
{
    return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

LuminanceRaster decode_png(std::span<const unsigned char> bytes)
{
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size()))
        throw IoError(std::string("png: ") + image.message);
    // Grayscale sources are read as-is so 8-bit values survive exactly.
    const bool gray = (image.format & PNG_FORMAT_FLAG_COLOR) == 0;
    image.format = gray ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
    std::vector<png_byte> buffer(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr))
    {
        png_image_free(&image);
        throw IoError(std::string("png: ") + image.message);
    }
    LuminanceRaster out(static_cast<int>(image.width), static_cast<int>(image.height));
    for (size_t i = 0; i < out.values.size(); ++i)
    {
        if (gray)
        {
            out.values[i] = buffer[i] / 255.0;
            continue;
        }
        const Color c { buffer[3 * i], buffer[3 * i + 1], buffer[3 * i + 2] };
        out.values[i] = c.luminance();
    }
    return out;
}

// P2 (ASCII) and P5 (binary) graymaps, maxval up to 65535.
LuminanceRaster decode_pgm(std::span<const unsigned char> bytes)
{
    size_t pos = 2;
    const auto skip = [&] {
        while (pos < bytes.size())
        {
            if (std::isspace(bytes[pos]))
                ++pos;
            else if (bytes[pos] == '#')
                while (pos < bytes.size() && bytes[pos] != '\n')
                    ++pos;
            else
                break;
        }
    };
    const auto number = [&]() -> long {
        skip();
        long v = 0;
        size_t digits = 0;
        while (pos < bytes.size() && std::isdigit(bytes[pos]) && digits < 9)
        {
            v = v * 10 + (bytes[pos++] - '0');
            ++digits;
        }
        if (digits == 0)
            throw IoError("pgm: malformed header");
        return v;
    };

    const bool binary = bytes[1] == '5';
    const long width = number();
    const long height = number();
    const long maxval = number();
    if (width <= 0 || height <= 0 || width * height > (1L << 28) || maxval <= 0 || maxval > 65535)
        throw IoError("pgm: unsupported dimensions or maxval");

    LuminanceRaster out(static_cast<int>(width), static_cast<int>(height));
    if (binary)
    {
        ++pos; // single whitespace after maxval
        const size_t sample = maxval > 255 ? 2 : 1;
        if (bytes.size() < pos + out.values.size() * sample)
            throw IoError("pgm: truncated pixel data");
        for (size_t i = 0; i < out.values.size(); ++i)
        {
            unsigned v = bytes[pos + i * sample];
            if (sample == 2)
                v = (v << 8) | bytes[pos + i * sample + 1];
            out.values[i] = static_cast<double>(v) / maxval;
        }
    }
    else
    {
        for (auto& v: out.values)
            v = std::min(1.0, static_cast<double>(number()) / maxval);
    }
    return out;
}

std::vector<unsigned char> read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open image '" + path.string() + "'");
    return { std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>() };
}

} // namespace

LuminanceRaster decode_image(std::span<const unsigned char> bytes)
{
    if (bytes.size() >= 8 && png_sig_cmp(bytes.data(), 0, 8) == 0)
        return decode_png(bytes);
    if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '2' || bytes[1] == '5'))
        return decode_pgm(bytes);
    throw IoError("unrecognized image format (expected PNG or PGM)");
}

LuminanceRaster load_image(const std::filesystem::path& path)
{
    const auto bytes = read_file(path);
    try
    {
        return decode_image(bytes);
    }
    catch (const IoError& e)
    {
        throw IoError(path.string() + ": " + e.what());
    }
}

std::string encode_pgm(const LuminanceRaster& raster)
{
    std::ostringstream out;
    out << "P5\n" << raster.width << ' ' << raster.height << "\n255\n";
    std::string data(raster.values.size(), '\0');
    for (size_t i = 0; i < raster.values.size(); ++i)
        data[i] = static_cast<char>(to_byte(raster.values[i]));
    out << data;
    return out.str();
}

void save_pgm(const LuminanceRaster& raster, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot write '" + path.string() + "'");
    out << encode_pgm(raster);
}

void save_png(const LuminanceRaster& raster, const std::filesystem::path& path)
{
    std::vector<png_byte> data(raster.values.size());
    for (size_t i = 0; i < data.size(); ++i)
        data[i] = to_byte(raster.values[i]);

    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(raster.width);
    image.height = static_cast<png_uint_32>(raster.height);
    image.format = PNG_FORMAT_GRAY;
    if (!png_image_write_to_file(&image, path.c_str(), 0, data.data(), 0, nullptr))
        throw IoError("png: cannot write '" + path.string() + "': " + image.message);
}

} // namespace layoutloop
