#pragma once

#include <filesystem>

#include "illumkit/image.hpp"

namespace illumkit {

enum class Transfer {
  kLinear,  // stored values are used directly (v / max)
  kSrgb,    // stored values are sRGB-encoded and decoded on load
};

/// Loads an 8- or 16-bit RGB or RGBA PNG (alpha is discarded). Stored values
/// map to v / 255 or v / 65535. Throws IoError for unreadable files or
/// unsupported channel layouts.
Image load_image(const std::filesystem::path& path, Transfer transfer = Transfer::kLinear);

/// Writes an RGB PNG at 8 or 16 bits. Values are clipped to [0,1] and
/// quantized as round(v * max).
void save_image(const Image& img, const std::filesystem::path& path, int bit_depth = 8);

/// Illumination maps are stored as 16-bit RGB, channel = round(e * 65535).
/// Invalid pixels are written as zero; on load a pixel is valid iff all three
/// channels are nonzero. Values are taken as-is (no renormalization).
void save_map(const IlluminationMap& map, const std::filesystem::path& path);
IlluminationMap load_map(const std::filesystem::path& path);

/// 8-bit quantize-dequantize, the same round trip as save + load.
Image quantize(const Image& img, int bit_depth = 8);

}  // namespace illumkit
