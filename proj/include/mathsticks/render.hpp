#ifndef MATHSTICKS_RENDER_HPP
#define MATHSTICKS_RENDER_HPP

// Deterministic rendering of equation states. Layout is slot-absolute: the
// row of cells A B G C D = E F has fixed coordinates, so every stick
// position owns the same box whatever the state. Output is SVG (byte-stable)
// or PNG via a small built-in rasterizer.

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mathsticks/equation.hpp"
#include "mathsticks/moves.hpp"

namespace mathsticks {

class RenderError : public std::runtime_error {
 public:
  enum class Code { kManifestMismatch, kAmbiguousSlot, kMalformedImage, kIo };
  RenderError(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Code code() const { return code_; }

 private:
  Code code_;
};

struct Rect {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  int area() const { return w * h; }
  bool overlaps(const Rect& o) const {
    return x < o.x + o.w && o.x < x + w && y < o.y + o.h && o.y < y + h;
  }
  friend bool operator==(const Rect&, const Rect&) = default;
};

struct Point {
  int x = 0;
  int y = 0;
  friend bool operator==(const Point&, const Point&) = default;
};

struct PositionGeometry {
  StickPosition position;
  Rect box;          // where the stick is drawn
  Rect probe;        // region tested for ink on extraction
  Point stroke_from;  // centre line of the stick
  Point stroke_to;
};

/// Every coordinate the renderer uses, in abstract pixels.
struct GeometryManifest {
  std::string version;
  int slot_width = 0;
  int slot_height = 0;
  int stick_length = 0;
  int stick_thickness = 0;
  int corner_gap = 0;
  int slot_gap = 0;
  int margin = 0;
  int canvas_width = 0;
  int canvas_height = 0;
  /// Cell origins in rendering order: A, B, G, C, D, '=', E, F.
  std::array<Point, 8> cell_origins{};
  std::vector<PositionGeometry> positions;  // 43 entries, ascending code
  Rect operator_bar;                        // fixed horizontal bar of +/-
  std::array<Rect, 2> equals_bars{};

  /// The versioned default layout.
  static GeometryManifest standard();

  const PositionGeometry& at(StickPosition p) const { return positions[static_cast<std::size_t>(p.code())]; }

  std::string to_json() const;
  static GeometryManifest from_json(std::string_view text);
  /// FNV-1a over the JSON form, as 16 hex digits.
  std::string hash() const;
};

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

struct RenderStyle {
  std::string version = "1";
  Rgb stick{0x21, 0x21, 0x21};
  Rgb background{0xff, 0xff, 0xff};
  Rgb label{0xc6, 0x28, 0x28};
  bool labels = false;
  int scale = 1;  // PNG only
};

std::string render_svg(const EquationState& z, const RenderStyle& style, const GeometryManifest& m);

/// render_svg plus faint outlines of the empty positions and a label on
/// every one of the 43 positions.
std::string render_labeled(const EquationState& z, const GeometryManifest& m);

/// RGB raster, row-major.
struct Raster {
  int width = 0;
  int height = 0;
  std::vector<Rgb> pixels;

  const Rgb& at(int x, int y) const { return pixels[static_cast<std::size_t>(y * width + x)]; }
};

Raster rasterize(const EquationState& z, const RenderStyle& style, const GeometryManifest& m);

/// PNG bytes (8-bit RGB, no timestamps).
std::vector<std::uint8_t> encode_png(const Raster& r);
Raster decode_png(const std::vector<std::uint8_t>& bytes);

/// Inverse of render_svg: rasterizes the filled sticks of the SVG and reads
/// back occupancy from ink coverage in each position's probe box.
EquationState extract_state(std::string_view svg, const GeometryManifest& m);

/// Same for a raster produced at any integer scale. `background` is the
/// colour treated as "no ink".
EquationState extract_state(const Raster& image, const GeometryManifest& m,
                            Rgb background = RenderStyle{}.background);

}  // namespace mathsticks

#endif  // MATHSTICKS_RENDER_HPP
