#include "mathsticks/render.hpp"

#include <png.h>

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <sstream>

#include "json.hpp"

namespace mathsticks {

namespace {

constexpr int kCellA = 0;
constexpr int kCellG = 2;
constexpr int kCellEquals = 5;

// Digit cell index in the rendered row for digit slot A..F.
constexpr std::array<int, kDigitSlots> kDigitCell = {0, 1, 3, 4, 6, 7};

Rect offset(const Rect& r, Point o) { return {r.x + o.x, r.y + o.y, r.w, r.h}; }

Rect shrink(const Rect& r, int by) { return {r.x + by, r.y + by, r.w - 2 * by, r.h - 2 * by}; }

std::string hex(Rgb c) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", c.r, c.g, c.b);
  return buf;
}

}  // namespace

// ---------------------------------------------------------------------------
// Geometry

GeometryManifest GeometryManifest::standard() {
  GeometryManifest m;
  m.version = "1";
  m.slot_width = 100;
  m.slot_height = 180;
  m.stick_length = 72;
  m.stick_thickness = 12;
  m.corner_gap = 6;
  m.slot_gap = 40;
  m.margin = 20;
  m.canvas_width = 2 * m.margin + 8 * m.slot_width + 7 * m.slot_gap;
  m.canvas_height = 2 * m.margin + m.slot_height;
  for (int i = 0; i < 8; ++i) {
    m.cell_origins[static_cast<std::size_t>(i)] = {m.margin + i * (m.slot_width + m.slot_gap), m.margin};
  }

  const int t = m.stick_thickness;
  const int len = m.stick_length;
  const int hx = (m.slot_width - len) / 2;  // left end of horizontals
  const int lx = hx - t;                    // left verticals
  const int rx = hx + len;                  // right verticals
  const int mid = (m.slot_height - t) / 2;
  // Indexed by segment: middle, top, top-right, bottom-right, bottom,
  // bottom-left, top-left.
  const std::array<Rect, 7> segment = {
      Rect{hx, mid, len, t},
      Rect{hx, 0, len, t},
      Rect{rx, t, t, len},
      Rect{rx, mid + t, t, len},
      Rect{hx, m.slot_height - t, len, t},
      Rect{lx, mid + t, t, len},
      Rect{lx, t, t, len},
  };

  for (int s = 0; s < kDigitSlots; ++s) {
    const Point o = m.cell_origins[static_cast<std::size_t>(kDigitCell[static_cast<std::size_t>(s)])];
    for (int seg = 0; seg < 7; ++seg) {
      PositionGeometry g;
      g.position = StickPosition::digit(static_cast<DigitSlot>(s), seg);
      g.box = offset(segment[static_cast<std::size_t>(seg)], o);
      g.probe = shrink(g.box, 2);
      const bool horizontal = g.box.w > g.box.h;
      g.stroke_from = horizontal ? Point{g.box.x, g.box.y + t / 2} : Point{g.box.x + t / 2, g.box.y};
      g.stroke_to = horizontal ? Point{g.box.x + g.box.w, g.box.y + t / 2}
                               : Point{g.box.x + t / 2, g.box.y + g.box.h};
      m.positions.push_back(g);
    }
  }

  const Point og = m.cell_origins[kCellG];
  const int bar = 60;
  m.operator_bar = offset(Rect{(m.slot_width - bar) / 2, mid, bar, t}, og);
  PositionGeometry g0;
  g0.position = StickPosition::operator_stroke();
  g0.box = offset(Rect{(m.slot_width - t) / 2, m.slot_height / 2 - bar / 2, t, bar}, og);
  // Upper arm only; the lower part of the box crosses the fixed bar.
  g0.probe = Rect{g0.box.x + 2, g0.box.y + 2, t - 4, m.operator_bar.y - g0.box.y - 4};
  g0.stroke_from = {g0.box.x + t / 2, g0.box.y};
  g0.stroke_to = {g0.box.x + t / 2, g0.box.y + g0.box.h};
  m.positions.push_back(g0);

  const Point oe = m.cell_origins[kCellEquals];
  m.equals_bars[0] = offset(Rect{(m.slot_width - bar) / 2, mid - 2 * t, bar, t}, oe);
  m.equals_bars[1] = offset(Rect{(m.slot_width - bar) / 2, mid + 2 * t, bar, t}, oe);
  return m;
}

namespace {

nlohmann::ordered_json rect_json(const Rect& r) { return {r.x, r.y, r.w, r.h}; }
nlohmann::ordered_json point_json(const Point& p) { return {p.x, p.y}; }

Rect rect_from(const nlohmann::json& j) { return {j.at(0), j.at(1), j.at(2), j.at(3)}; }
Point point_from(const nlohmann::json& j) { return {j.at(0), j.at(1)}; }

}  // namespace

std::string GeometryManifest::to_json() const {
  nlohmann::ordered_json j;
  j["version"] = version;
  j["slot_width"] = slot_width;
  j["slot_height"] = slot_height;
  j["stick_length"] = stick_length;
  j["stick_thickness"] = stick_thickness;
  j["corner_gap"] = corner_gap;
  j["slot_gap"] = slot_gap;
  j["margin"] = margin;
  j["canvas"] = {canvas_width, canvas_height};
  static constexpr std::array<const char*, 8> kCells = {"A", "B", "G", "C", "D", "=", "E", "F"};
  for (std::size_t i = 0; i < cell_origins.size(); ++i) j["cell_origins"][kCells[i]] = point_json(cell_origins[i]);
  j["operator_bar"] = rect_json(operator_bar);
  j["equals_bars"] = {rect_json(equals_bars[0]), rect_json(equals_bars[1])};
  j["positions"] = nlohmann::ordered_json::array();
  for (const PositionGeometry& p : positions) {
    j["positions"].push_back({{"id", p.position.str()},
                              {"box", rect_json(p.box)},
                              {"probe", rect_json(p.probe)},
                              {"stroke", {point_json(p.stroke_from), point_json(p.stroke_to)}}});
  }
  return j.dump(2);
}

GeometryManifest GeometryManifest::from_json(std::string_view text) {
  GeometryManifest m;
  try {
    const auto j = nlohmann::json::parse(text);
    m.version = j.at("version").get<std::string>();
    m.slot_width = j.at("slot_width");
    m.slot_height = j.at("slot_height");
    m.stick_length = j.at("stick_length");
    m.stick_thickness = j.at("stick_thickness");
    m.corner_gap = j.at("corner_gap");
    m.slot_gap = j.at("slot_gap");
    m.margin = j.at("margin");
    m.canvas_width = j.at("canvas").at(0);
    m.canvas_height = j.at("canvas").at(1);
    static constexpr std::array<const char*, 8> kCells = {"A", "B", "G", "C", "D", "=", "E", "F"};
    for (std::size_t i = 0; i < 8; ++i) m.cell_origins[i] = point_from(j.at("cell_origins").at(kCells[i]));
    m.operator_bar = rect_from(j.at("operator_bar"));
    m.equals_bars = {rect_from(j.at("equals_bars").at(0)), rect_from(j.at("equals_bars").at(1))};
    for (const auto& p : j.at("positions")) {
      PositionGeometry g;
      const auto pos = StickPosition::parse(p.at("id").get<std::string>());
      if (!pos) throw RenderError(RenderError::Code::kManifestMismatch, "bad position id in manifest");
      g.position = *pos;
      g.box = rect_from(p.at("box"));
      g.probe = rect_from(p.at("probe"));
      g.stroke_from = point_from(p.at("stroke").at(0));
      g.stroke_to = point_from(p.at("stroke").at(1));
      m.positions.push_back(g);
    }
  } catch (const nlohmann::json::exception& e) {
    throw RenderError(RenderError::Code::kManifestMismatch, std::string("unreadable manifest: ") + e.what());
  }
  if (m.positions.size() != kPositionCount) {
    throw RenderError(RenderError::Code::kManifestMismatch, "manifest must describe 43 positions");
  }
  return m;
}

std::string GeometryManifest::hash() const {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : to_json()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------------------
// SVG

namespace {

struct DrawList {
  std::vector<std::pair<StickPosition, Rect>> sticks;
  std::vector<Rect> fixed;
};

DrawList draw_list(const EquationState& z, const GeometryManifest& m) {
  DrawList d;
  for (StickPosition p : occupied_positions(z).positions()) d.sticks.emplace_back(p, m.at(p).box);
  d.fixed = {m.operator_bar, m.equals_bars[0], m.equals_bars[1]};
  return d;
}

void svg_rect(std::ostringstream& out, const char* cls, const Rect& r, int radius, Rgb fill,
              const std::string& extra = {}) {
  out << "  <rect class=\"" << cls << "\"" << extra << " x=\"" << r.x << "\" y=\"" << r.y << "\" width=\""
      << r.w << "\" height=\"" << r.h << "\" rx=\"" << radius << "\" fill=\"" << hex(fill) << "\"/>\n";
}

std::string svg(const EquationState& z, const RenderStyle& style, const GeometryManifest& m, bool labeled) {
  const DrawList d = draw_list(z, m);
  const int radius = m.stick_thickness / 2;
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << m.canvas_width << "\" height=\""
      << m.canvas_height << "\" viewBox=\"0 0 " << m.canvas_width << ' ' << m.canvas_height
      << "\" data-manifest-version=\"" << m.version << "\" data-style-version=\"" << style.version
      << "\">\n";
  out << "  <rect class=\"background\" x=\"0\" y=\"0\" width=\"" << m.canvas_width << "\" height=\""
      << m.canvas_height << "\" fill=\"" << hex(style.background) << "\"/>\n";
  const Occupancy occ = occupied_positions(z);
  if (labeled) {
    for (const PositionGeometry& p : m.positions) {
      if (occ.contains(p.position)) continue;
      const Rect& r = p.box;
      out << "  <rect class=\"outline\" x=\"" << r.x << "\" y=\"" << r.y << "\" width=\"" << r.w
          << "\" height=\"" << r.h << "\" rx=\"" << radius
          << "\" fill=\"none\" stroke=\"#bdbdbd\" stroke-dasharray=\"4 3\"/>\n";
    }
  }
  for (const Rect& r : d.fixed) svg_rect(out, "fixed", r, radius, style.stick);
  for (const auto& [pos, r] : d.sticks) {
    svg_rect(out, "stick", r, radius, style.stick, " data-pos=\"" + pos.str() + "\"");
  }
  if (labeled) {
    for (const PositionGeometry& p : m.positions) {
      const int cx = p.box.x + p.box.w / 2;
      // Labels of G0 sit above the operator bar so they stay readable.
      const int cy = p.position.is_operator() ? p.box.y - 8 : p.box.y + p.box.h / 2;
      out << "  <text x=\"" << cx << "\" y=\"" << cy
          << "\" font-family=\"monospace\" font-size=\"11\" text-anchor=\"middle\" "
             "dominant-baseline=\"central\" fill=\""
          << hex(style.label) << "\">" << p.position.str() << "</text>\n";
    }
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace

std::string render_svg(const EquationState& z, const RenderStyle& style, const GeometryManifest& m) {
  return svg(z, style, m, style.labels);
}

std::string render_labeled(const EquationState& z, const GeometryManifest& m) {
  RenderStyle style;
  style.labels = true;
  return svg(z, style, m, true);
}

// ---------------------------------------------------------------------------
// Raster

namespace {

// Rounded rectangle fill, sampled at pixel centres with integer arithmetic
// in units of 1 / (2 * scale).
void fill_rounded(Raster& img, const Rect& r, int radius, int scale, Rgb color) {
  const int k = 2 * scale;
  const long x0 = long{r.x} * k;
  const long y0 = long{r.y} * k;
  const long x1 = long{r.x + r.w} * k;
  const long y1 = long{r.y + r.h} * k;
  const long rad = long{std::min({radius, r.w / 2, r.h / 2})} * k;
  const int px0 = std::max(0, r.x * scale);
  const int py0 = std::max(0, r.y * scale);
  const int px1 = std::min(img.width, (r.x + r.w) * scale);
  const int py1 = std::min(img.height, (r.y + r.h) * scale);
  for (int py = py0; py < py1; ++py) {
    const long cy = 2L * py + 1;
    for (int px = px0; px < px1; ++px) {
      const long cx = 2L * px + 1;
      const long nx = std::clamp(cx, x0 + rad, x1 - rad);
      const long ny = std::clamp(cy, y0 + rad, y1 - rad);
      const long dx = cx - nx;
      const long dy = cy - ny;
      if (dx * dx + dy * dy <= rad * rad) img.pixels[static_cast<std::size_t>(py * img.width + px)] = color;
    }
  }
}

Raster blank_raster(const GeometryManifest& m, int scale, Rgb background) {
  Raster img;
  img.width = m.canvas_width * scale;
  img.height = m.canvas_height * scale;
  img.pixels.assign(static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height), background);
  return img;
}

EquationState read_occupancy(const Raster& img, const GeometryManifest& m, Rgb background) {
  if (img.width % m.canvas_width != 0 || img.width / m.canvas_width == 0 ||
      img.height * m.canvas_width != img.width * m.canvas_height) {
    throw RenderError(RenderError::Code::kManifestMismatch, "image size does not match the manifest canvas");
  }
  const int scale = img.width / m.canvas_width;
  Occupancy occ;
  for (const PositionGeometry& p : m.positions) {
    long ink = 0;
    long total = 0;
    for (int y = p.probe.y * scale; y < (p.probe.y + p.probe.h) * scale; ++y) {
      for (int x = p.probe.x * scale; x < (p.probe.x + p.probe.w) * scale; ++x) {
        ++total;
        if (!(img.at(x, y) == background)) ++ink;
      }
    }
    if (2 * ink > total) occ.insert(p.position);
  }
  // Decode without rule checks: every glyph, including blank tens, is legal.
  EquationState z;
  z.g = occ.contains(StickPosition::operator_stroke()) ? Op::kPlus : Op::kMinus;
  for (int s = 0; s < kDigitSlots; ++s) {
    const auto slot = static_cast<DigitSlot>(s);
    const auto glyph = segments_to_glyph(occ.slot_segments(slot));
    if (!glyph || (*glyph == kBlank && !is_tens_slot(slot))) {
      throw RenderError(RenderError::Code::kAmbiguousSlot,
                        std::string("slot ") + static_cast<char>('A' + s) + " shows no glyph");
    }
    z.set_digit(slot, *glyph);
  }
  return z;
}

}  // namespace

Raster rasterize(const EquationState& z, const RenderStyle& style, const GeometryManifest& m) {
  const int scale = std::max(1, style.scale);
  Raster img = blank_raster(m, scale, style.background);
  const DrawList d = draw_list(z, m);
  const int radius = m.stick_thickness / 2;
  for (const Rect& r : d.fixed) fill_rounded(img, r, radius, scale, style.stick);
  for (const auto& [pos, r] : d.sticks) fill_rounded(img, r, radius, scale, style.stick);
  return img;
}

EquationState extract_state(const Raster& image, const GeometryManifest& m, Rgb background) {
  return read_occupancy(image, m, background);
}

namespace {

std::string attribute(std::string_view tag, std::string_view name) {
  const std::string key = " " + std::string(name) + "=\"";
  const std::size_t at = tag.find(key);
  if (at == std::string_view::npos) return {};
  const std::size_t start = at + key.size();
  const std::size_t end = tag.find('"', start);
  if (end == std::string_view::npos) return {};
  return std::string(tag.substr(start, end - start));
}

int int_attribute(std::string_view tag, std::string_view name) {
  const std::string v = attribute(tag, name);
  if (v.empty()) throw RenderError(RenderError::Code::kMalformedImage, "rect without " + std::string(name));
  try {
    return std::stoi(v);
  } catch (const std::exception&) {
    throw RenderError(RenderError::Code::kMalformedImage, "non-integer " + std::string(name));
  }
}

}  // namespace

EquationState extract_state(std::string_view svg_text, const GeometryManifest& m) {
  const std::size_t root = svg_text.find("<svg");
  if (root == std::string_view::npos) throw RenderError(RenderError::Code::kMalformedImage, "not an SVG document");
  const std::string_view root_tag = svg_text.substr(root, svg_text.find('>', root) - root);
  const std::string version = attribute(root_tag, "data-manifest-version");
  if (version != m.version) {
    throw RenderError(RenderError::Code::kManifestMismatch,
                      "image manifest version '" + version + "' != '" + m.version + "'");
  }

  const Rgb background = RenderStyle{}.background;
  Raster img = blank_raster(m, 1, background);
  const Rgb ink{0, 0, 0};
  for (std::size_t at = svg_text.find("<rect"); at != std::string_view::npos; at = svg_text.find("<rect", at + 1)) {
    const std::size_t end = svg_text.find('>', at);
    if (end == std::string_view::npos) throw RenderError(RenderError::Code::kMalformedImage, "unterminated rect");
    const std::string_view tag = svg_text.substr(at, end - at);
    const std::string fill = attribute(tag, "fill");
    const std::string cls = attribute(tag, "class");
    if (fill.empty() || fill == "none" || cls == "background") continue;
    const Rect r{int_attribute(tag, "x"), int_attribute(tag, "y"), int_attribute(tag, "width"),
                 int_attribute(tag, "height")};
    const std::string rx = attribute(tag, "rx");
    fill_rounded(img, r, rx.empty() ? 0 : std::stoi(rx), 1, ink);
  }
  return read_occupancy(img, m, background);
}

// ---------------------------------------------------------------------------
// PNG

namespace {

void png_append(png_structp png, png_bytep data, png_size_t len) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + len);
}

void png_flush_noop(png_structp) {}

struct PngReadCursor {
  const std::vector<std::uint8_t>* bytes;
  std::size_t pos;
};

void png_consume(png_structp png, png_bytep data, png_size_t len) {
  auto* cur = static_cast<PngReadCursor*>(png_get_io_ptr(png));
  if (cur->pos + len > cur->bytes->size()) png_error(png, "truncated PNG");
  std::memcpy(data, cur->bytes->data() + cur->pos, len);
  cur->pos += len;
}

}  // namespace

std::vector<std::uint8_t> encode_png(const Raster& r) {
  std::vector<std::uint8_t> out;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw RenderError(RenderError::Code::kIo, "libpng initialisation failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw RenderError(RenderError::Code::kIo, "PNG encoding failed");
  }
  png_set_write_fn(png, &out, png_append, png_flush_noop);
  png_set_IHDR(png, info, static_cast<png_uint_32>(r.width), static_cast<png_uint_32>(r.height), 8,
               PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<png_byte> row(static_cast<std::size_t>(r.width) * 3);
  for (int y = 0; y < r.height; ++y) {
    for (int x = 0; x < r.width; ++x) {
      const Rgb& c = r.at(x, y);
      row[static_cast<std::size_t>(3 * x)] = c.r;
      row[static_cast<std::size_t>(3 * x + 1)] = c.g;
      row[static_cast<std::size_t>(3 * x + 2)] = c.b;
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

Raster decode_png(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) {
    throw RenderError(RenderError::Code::kMalformedImage, "not a PNG file");
  }
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw RenderError(RenderError::Code::kIo, "libpng initialisation failed");
  }
  Raster img;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw RenderError(RenderError::Code::kMalformedImage, "PNG decoding failed");
  }
  PngReadCursor cur{&bytes, 0};
  png_set_read_fn(png, &cur, png_consume);
  png_read_info(png, info);
  png_set_strip_16(png);
  png_set_strip_alpha(png);
  png_set_palette_to_rgb(png);
  png_set_gray_to_rgb(png);
  png_read_update_info(png, info);
  img.width = static_cast<int>(png_get_image_width(png, info));
  img.height = static_cast<int>(png_get_image_height(png, info));
  img.pixels.resize(static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height));
  std::vector<png_byte> row(png_get_rowbytes(png, info));
  for (int y = 0; y < img.height; ++y) {
    png_read_row(png, row.data(), nullptr);
    for (int x = 0; x < img.width; ++x) {
      img.pixels[static_cast<std::size_t>(y * img.width + x)] = {
          row[static_cast<std::size_t>(3 * x)], row[static_cast<std::size_t>(3 * x + 1)],
          row[static_cast<std::size_t>(3 * x + 2)]};
    }
  }
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

}  // namespace mathsticks
