// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <layoutloop/raster.hpp>

#include <filesystem>
#include <span>

namespace layoutloop
{

/// Loads a PNG or PGM (P2/P5) file as luminance (Rec. 709 weights for color input).
/// Throws IoError on missing files or undecodable data.
[[nodiscard]] LuminanceRaster load_image(const std::filesystem::path& path);

/// Same as load_image for an in-memory encoded file; the format is sniffed from the header.
[[nodiscard]] LuminanceRaster decode_image(std::span<const unsigned char> bytes);

/// 8-bit grayscale output.
void save_png(const LuminanceRaster& raster, const std::filesystem::path& path);
void save_pgm(const LuminanceRaster& raster, const std::filesystem::path& path);

/// Binary PGM (P5) encoding, used for fixtures and exact round-trips at 8 bits.
[[nodiscard]] std::string encode_pgm(const LuminanceRaster& raster);

} // namespace layoutloop
