//
// Project molgrep - Copyright 2026 The molgrep Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLGREP_RENDER_FONT_HPP_
#define MOLGREP_RENDER_FONT_HPP_

#include <cstdint>
#include <string>

#include "molgrep/img/raster.hpp"

namespace molgrep::render {

using img::RasterImage;

inline constexpr int kGlyphWidth = 5;
inline constexpr int kGlyphHeight = 7;

// Seven rows per glyph; the low five bits of each row are pixels, bit 4 the
// leftmost column. Returns nullptr for characters without a glyph.
const uint8_t* glyph(char c);

// Width in pixels of `text` at the given integer scale, including the
// one-column gaps between glyphs.
int text_width(const std::string& text, int scale);

// Paints glyph pixels with the ink value; unknown characters are skipped as
// blanks. (left, top) is the top-left corner of the first glyph cell.
void draw_text(RasterImage& img, const std::string& text, int left, int top, int scale, float ink);

}  // namespace molgrep::render

#endif  // MOLGREP_RENDER_FONT_HPP_
