#pragma once

// LEF / DEF subset parsers, a debug emitter for both, and the layer-map reader.
//
// Everything is converted to integer database units (LEF DATABASE MICRONS) at
// parse time. Statements outside the subset are skipped and counted in
// `warnings`; structural problems inside the subset throw ParseError.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "icas/error.hpp"
#include "icas/geom.hpp"

namespace icas::lefdef {

using geom::Coord;
using geom::Point;
using geom::Rect;

// ---------------------------------------------------------------------------
// Tokens and numbers

struct Token {
  std::string text;
  std::size_t line = 0;
};

inline std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  std::size_t line = 1;
  std::size_t i = 0;
  const std::size_t n = src.size();
  while (i < n) {
    const char c = src[i];
    if (c == '\n') {
      ++line;
      ++i;
    } else if (c == ' ' || c == '\t' || c == '\r') {
      ++i;
    } else if (c == '#') {
      while (i < n && src[i] != '\n') ++i;
    } else if (c == '(' || c == ')' || c == ';') {
      out.push_back({std::string(1, c), line});
      ++i;
    } else if (c == '"') {
      const std::size_t start = ++i;
      while (i < n && src[i] != '"') line += src[i++] == '\n';
      out.push_back({std::string(src.substr(start, i - start)), line});
      if (i < n) ++i;
    } else {
      const std::size_t start = i;
      while (i < n && !std::isspace(static_cast<unsigned char>(src[i])) && src[i] != '(' && src[i] != ')' &&
             src[i] != ';')
        ++i;
      out.push_back({std::string(src.substr(start, i - start)), line});
    }
  }
  return out;
}

/// Exact conversion of a decimal literal times `scale` to an integer.
inline std::optional<std::int64_t> scaled_decimal(std::string_view s, std::int64_t scale) {
  if (s.empty()) return std::nullopt;
  bool neg = false;
  std::size_t i = 0;
  if (s[0] == '-' || s[0] == '+') {
    neg = s[0] == '-';
    ++i;
  }
  __int128 mant = 0;
  int frac = 0;
  bool dot = false, digits = false;
  for (; i < s.size(); ++i) {
    const char c = s[i];
    if (c == '.' && !dot) {
      dot = true;
    } else if (c >= '0' && c <= '9') {
      mant = mant * 10 + (c - '0');
      digits = true;
      if (dot) ++frac;
      if (mant > (__int128(1) << 100)) return std::nullopt;
    } else {
      return std::nullopt;
    }
  }
  if (!digits) return std::nullopt;
  __int128 num = mant * scale, den = 1;
  for (int k = 0; k < frac; ++k) den *= 10;
  if (num % den) return std::nullopt;
  const __int128 v = num / den;
  if (v > INT64_MAX) return std::nullopt;
  return static_cast<std::int64_t>(neg ? -v : v);
}

/// Writes v / per_unit as a terminating decimal; throws when it does not terminate.
inline std::string format_scaled(std::int64_t v, std::int64_t per_unit) {
  std::int64_t p10 = 1;
  int k = 0;
  while (p10 % per_unit != 0) {
    if (k == 18) throw Error("unit scale " + std::to_string(per_unit) + " has no finite decimal form");
    p10 *= 10;
    ++k;
  }
  const std::int64_t scaled = v * (p10 / per_unit);
  const std::int64_t mag = scaled < 0 ? -scaled : scaled;
  std::string s = std::to_string(mag / p10);
  std::string f = std::to_string(mag % p10);
  f.insert(0, static_cast<std::size_t>(k) - std::min<std::size_t>(f.size(), k), '0');
  while (!f.empty() && f.back() == '0') f.pop_back();
  if (!f.empty()) s += "." + f;
  return (scaled < 0 ? "-" : "") + s;
}

class TokenStream {
public:
  TokenStream(std::vector<Token> toks, std::string source) : toks_(std::move(toks)), source_(std::move(source)) {}

  bool done() const { return pos_ >= toks_.size(); }
  const std::string& peek(std::size_t ahead = 0) const {
    static const std::string kEmpty;
    return pos_ + ahead < toks_.size() ? toks_[pos_ + ahead].text : kEmpty;
  }
  std::size_t line() const {
    if (toks_.empty()) return 0;
    return pos_ < toks_.size() ? toks_[pos_].line : toks_.back().line;
  }
  const std::string& source() const { return source_; }

  const std::string& next() {
    if (done()) fail("unexpected end of file");
    return toks_[pos_++].text;
  }
  void expect(std::string_view want) {
    const std::size_t at = line();
    const std::string& got = next();
    if (got != want) throw ParseError(source_, at, "expected '" + std::string(want) + "', found '" + got + "'");
  }
  bool accept(std::string_view want) {
    if (!done() && peek() == want) {
      ++pos_;
      return true;
    }
    return false;
  }
  std::int64_t integer() {
    const std::size_t at = line();
    const std::string& t = next();
    std::int64_t v = 0;
    const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || p != t.data() + t.size()) throw ParseError(source_, at, "expected integer, found '" + t + "'");
    return v;
  }
  Coord dbu(std::int64_t scale) {
    const std::size_t at = line();
    const std::string& t = next();
    const auto v = scaled_decimal(t, scale);
    if (!v) throw ParseError(source_, at, "'" + t + "' is not a number on the database-unit grid");
    return *v;
  }
  void skip_statement() {
    while (!done() && next() != ";") {
    }
  }
  [[noreturn]] void fail(const std::string& what) const { throw ParseError(source_, line(), what); }

private:
  std::vector<Token> toks_;
  std::string source_;
  std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// LEF

enum class LayerKind { Routing, Cut, Masterslice };
enum class Direction { None, Horizontal, Vertical };

struct TechLayer {
  std::string name;
  LayerKind kind = LayerKind::Routing;
  Direction direction = Direction::None;
  Coord pitch = 0;
  Coord min_width = 0;
  Coord min_spacing = 0;
  int stack_index = 0;
  friend bool operator==(const TechLayer&, const TechLayer&) = default;
};

struct ViaRule {
  std::string cut_layer;
  Coord w = 0;
  Coord h = 0;
  friend bool operator==(const ViaRule&, const ViaRule&) = default;
};

struct LayerRect {
  std::string layer;
  Rect rect;
  friend bool operator==(const LayerRect&, const LayerRect&) = default;
};

struct ViaDef {
  std::string name;
  std::vector<LayerRect> rects;  // relative to the via origin
  friend bool operator==(const ViaDef&, const ViaDef&) = default;
};

struct Site {
  std::string name;
  Coord w = 0;
  Coord h = 0;
  bool core = false;
  friend bool operator==(const Site&, const Site&) = default;
};

struct MacroPin {
  std::string name;
  std::string direction;  // INPUT / OUTPUT / INOUT or empty
  std::vector<LayerRect> rects;
  friend bool operator==(const MacroPin&, const MacroPin&) = default;
};

struct Macro {
  std::string name;
  Coord w = 0;
  Coord h = 0;
  std::string site;
  int site_span = 0;  // sites per row
  int row_span = 0;   // rows covered
  std::vector<MacroPin> pins;
  std::vector<LayerRect> obstructions;

  const MacroPin* pin(const std::string& n) const {
    for (const MacroPin& p : pins)
      if (p.name == n) return &p;
    return nullptr;
  }
  friend bool operator==(const Macro&, const Macro&) = default;
};

struct Lef {
  std::int64_t dbu_per_micron = 0;
  std::vector<TechLayer> layers;
  std::vector<ViaRule> via_rules;
  std::vector<ViaDef> vias;
  std::vector<Site> sites;
  std::vector<Macro> macros;
  std::vector<std::string> warnings;

  const TechLayer* layer(const std::string& n) const {
    for (const TechLayer& l : layers)
      if (l.name == n) return &l;
    return nullptr;
  }
  const Macro* macro(const std::string& n) const {
    for (const Macro& m : macros)
      if (m.name == n) return &m;
    return nullptr;
  }
  const Site* site(const std::string& n) const {
    for (const Site& s : sites)
      if (s.name == n) return &s;
    return nullptr;
  }
  const ViaDef* via(const std::string& n) const {
    for (const ViaDef& v : vias)
      if (v.name == n) return &v;
    return nullptr;
  }
  const ViaRule* via_rule(const std::string& cut) const {
    for (const ViaRule& v : via_rules)
      if (v.cut_layer == cut) return &v;
    return nullptr;
  }

  /// Nearest routing or masterslice layers below and above `name` in the stack.
  std::pair<const TechLayer*, const TechLayer*> adjacent_layers(const std::string& name) const {
    const TechLayer* self = layer(name);
    if (!self) return {nullptr, nullptr};
    const TechLayer *below = nullptr, *above = nullptr;
    for (const TechLayer& l : layers) {
      if (l.kind == LayerKind::Cut) continue;
      if (l.stack_index < self->stack_index && (!below || l.stack_index > below->stack_index)) below = &l;
      if (l.stack_index > self->stack_index && (!above || l.stack_index < above->stack_index)) above = &l;
    }
    return {below, above};
  }
};

namespace detail {

inline Rect read_rect(TokenStream& ts, std::int64_t scale) {
  const Coord x1 = ts.dbu(scale), y1 = ts.dbu(scale), x2 = ts.dbu(scale), y2 = ts.dbu(scale);
  return Rect::from_corners({x1, y1}, {x2, y2});
}

inline void warn(std::vector<std::string>& w, const TokenStream& ts, const std::string& what) {
  w.push_back(ts.source() + ":" + std::to_string(ts.line()) + ": skipped " + what);
}

/// Skips `NAME ... END NAME` (or `END` alone when `end_name` is empty).
inline void skip_block(TokenStream& ts, const std::string& end_name) {
  while (!ts.done()) {
    if (ts.peek() == "END" && (end_name.empty() || ts.peek(1) == end_name)) {
      ts.next();
      if (!end_name.empty()) ts.next();
      return;
    }
    ts.next();
  }
  ts.fail("unterminated block '" + end_name + "'");
}

inline void parse_layer(TokenStream& ts, Lef& lef, std::int64_t scale) {
  TechLayer layer;
  layer.name = ts.next();
  std::optional<LayerKind> kind;
  bool skip = false;
  bool have_pitch = false, have_width = false;
  Coord cut_width = 0;
  const std::size_t start_line = ts.line();
  while (!(ts.peek() == "END" && ts.peek(1) == layer.name)) {
    if (ts.done()) ts.fail("LAYER " + layer.name + " is not terminated");
    const std::string key = ts.next();
    if (key == "TYPE") {
      const std::string t = ts.next();
      if (t == "ROUTING") kind = LayerKind::Routing;
      else if (t == "CUT") kind = LayerKind::Cut;
      else if (t == "MASTERSLICE") kind = LayerKind::Masterslice;
      else if (t == "OVERLAP" || t == "IMPLANT") skip = true;
      else ts.fail("LAYER " + layer.name + " has unknown TYPE '" + t + "'");
      ts.expect(";");
    } else if (key == "DIRECTION") {
      const std::string d = ts.next();
      if (d == "HORIZONTAL") layer.direction = Direction::Horizontal;
      else if (d == "VERTICAL") layer.direction = Direction::Vertical;
      else ts.fail("unknown DIRECTION '" + d + "'");
      ts.expect(";");
    } else if (key == "PITCH") {
      layer.pitch = ts.dbu(scale);
      have_pitch = true;
      ts.skip_statement();
    } else if (key == "WIDTH") {
      cut_width = layer.min_width = ts.dbu(scale);
      have_width = true;
      ts.expect(";");
    } else if (key == "SPACING") {
      const Coord s = ts.dbu(scale);
      if (ts.peek() == ";") layer.min_spacing = layer.min_spacing ? std::min(layer.min_spacing, s) : s;
      ts.skip_statement();
    } else if (key == "PROPERTY" || key == "RESISTANCE" || key == "CAPACITANCE" || key == "EDGECAPACITANCE" ||
               key == "THICKNESS" || key == "HEIGHT" || key == "OFFSET" || key == "AREA" || key == "MINWIDTH" ||
               key == "MAXWIDTH" || key == "WIREEXTENSION" || key == "ENCLOSURE") {
      ts.skip_statement();
    } else {
      warn(lef.warnings, ts, "LAYER statement '" + key + "'");
      ts.skip_statement();
    }
  }
  ts.next();
  ts.next();
  if (skip) {
    warn(lef.warnings, ts, "non-routing LAYER " + layer.name);
    return;
  }
  if (!kind) throw ParseError(ts.source(), start_line, "LAYER " + layer.name + " has no TYPE");
  if (lef.layer(layer.name)) throw ParseError(ts.source(), start_line, "LAYER " + layer.name + " defined twice");
  layer.kind = *kind;
  if (layer.kind == LayerKind::Routing) {
    if (!have_pitch || !have_width)
      throw ParseError(ts.source(), start_line, "routing LAYER " + layer.name + " needs PITCH and WIDTH");
    if (layer.pitch < layer.min_width + layer.min_spacing)
      throw ParseError(ts.source(), start_line, "LAYER " + layer.name + " pitch is below width + spacing");
  }
  layer.stack_index = static_cast<int>(lef.layers.size());
  lef.layers.push_back(layer);
  if (layer.kind == LayerKind::Cut && have_width && cut_width > 0)
    lef.via_rules.push_back({layer.name, cut_width, cut_width});
}

inline void parse_via(TokenStream& ts, Lef& lef, std::int64_t scale) {
  ViaDef via;
  via.name = ts.next();
  while (ts.peek() != ";" && !(ts.peek() == "LAYER")) ts.next();  // DEFAULT, GENERATED, ...
  std::string current;
  while (!(ts.peek() == "END" && ts.peek(1) == via.name)) {
    if (ts.done()) ts.fail("VIA " + via.name + " is not terminated");
    const std::string key = ts.next();
    if (key == "LAYER") {
      current = ts.next();
      if (!lef.layer(current)) ts.fail("VIA " + via.name + " uses unknown layer '" + current + "'");
      ts.expect(";");
    } else if (key == "RECT") {
      if (current.empty()) ts.fail("RECT before LAYER in VIA " + via.name);
      via.rects.push_back({current, read_rect(ts, scale)});
      ts.expect(";");
    } else if (key == ";" ) {
    } else if (key == "RESISTANCE" || key == "PROPERTY") {
      ts.skip_statement();
    } else {
      warn(lef.warnings, ts, "VIA statement '" + key + "'");
      ts.skip_statement();
    }
  }
  ts.next();
  ts.next();
  lef.vias.push_back(std::move(via));
}

inline void parse_site(TokenStream& ts, Lef& lef, std::int64_t scale) {
  Site site;
  site.name = ts.next();
  bool sized = false;
  while (!(ts.peek() == "END" && ts.peek(1) == site.name)) {
    if (ts.done()) ts.fail("SITE " + site.name + " is not terminated");
    const std::string key = ts.next();
    if (key == "SIZE") {
      site.w = ts.dbu(scale);
      ts.expect("BY");
      site.h = ts.dbu(scale);
      ts.expect(";");
      sized = true;
    } else if (key == "CLASS") {
      site.core = ts.next() == "CORE";
      ts.expect(";");
    } else if (key == "SYMMETRY") {
      ts.skip_statement();
    } else {
      warn(lef.warnings, ts, "SITE statement '" + key + "'");
      ts.skip_statement();
    }
  }
  ts.next();
  ts.next();
  if (!sized || site.w <= 0 || site.h <= 0) ts.fail("SITE " + site.name + " needs a positive SIZE");
  lef.sites.push_back(site);
}

inline std::vector<LayerRect> parse_geometry(TokenStream& ts, Lef& lef, std::int64_t scale, const std::string& what) {
  std::vector<LayerRect> out;
  std::string current;
  while (ts.peek() != "END") {
    if (ts.done()) ts.fail(what + " geometry is not terminated");
    const std::string key = ts.next();
    if (key == "LAYER") {
      current = ts.next();
      if (!lef.layer(current)) ts.fail(what + " uses unknown layer '" + current + "'");
      ts.skip_statement();
    } else if (key == "RECT") {
      if (current.empty()) ts.fail("RECT before LAYER in " + what);
      out.push_back({current, read_rect(ts, scale)});
      ts.expect(";");
    } else {
      warn(lef.warnings, ts, what + " geometry statement '" + key + "'");
      ts.skip_statement();
    }
  }
  ts.next();  // END
  return out;
}

inline void parse_macro(TokenStream& ts, Lef& lef, std::int64_t scale) {
  Macro m;
  m.name = ts.next();
  const std::size_t start_line = ts.line();
  Point origin{0, 0};
  bool sized = false;
  while (!(ts.peek() == "END" && ts.peek(1) == m.name)) {
    if (ts.done()) ts.fail("MACRO " + m.name + " is not terminated");
    const std::string key = ts.next();
    if (key == "SIZE") {
      m.w = ts.dbu(scale);
      ts.expect("BY");
      m.h = ts.dbu(scale);
      ts.expect(";");
      sized = true;
    } else if (key == "ORIGIN") {
      origin.x = ts.dbu(scale);
      origin.y = ts.dbu(scale);
      ts.expect(";");
    } else if (key == "SITE") {
      m.site = ts.next();
      ts.skip_statement();
    } else if (key == "PIN") {
      MacroPin pin;
      pin.name = ts.next();
      while (!(ts.peek() == "END" && ts.peek(1) == pin.name)) {
        if (ts.done()) ts.fail("PIN " + pin.name + " is not terminated");
        const std::string pk = ts.next();
        if (pk == "DIRECTION") {
          pin.direction = ts.next();
          ts.skip_statement();
        } else if (pk == "PORT") {
          auto rects = parse_geometry(ts, lef, scale, "PIN " + pin.name);
          pin.rects.insert(pin.rects.end(), rects.begin(), rects.end());
        } else if (pk == "USE" || pk == "SHAPE" || pk == "ANTENNAGATEAREA" || pk == "ANTENNADIFFAREA" ||
                   pk == "PROPERTY") {
          ts.skip_statement();
        } else {
          warn(lef.warnings, ts, "PIN statement '" + pk + "'");
          ts.skip_statement();
        }
      }
      ts.next();
      ts.next();
      m.pins.push_back(std::move(pin));
    } else if (key == "OBS") {
      auto rects = parse_geometry(ts, lef, scale, "OBS of " + m.name);
      m.obstructions.insert(m.obstructions.end(), rects.begin(), rects.end());
    } else if (key == "CLASS" || key == "FOREIGN" || key == "SYMMETRY" || key == "PROPERTY" || key == "SOURCE" ||
               key == "EEQ" || key == "LEQ") {
      ts.skip_statement();
    } else {
      warn(lef.warnings, ts, "MACRO statement '" + key + "'");
      ts.skip_statement();
    }
  }
  ts.next();
  ts.next();
  auto fail = [&](const std::string& what) -> void { throw ParseError(ts.source(), start_line, "MACRO " + m.name + ": " + what); };
  if (!sized || m.w <= 0 || m.h <= 0) fail("needs a positive SIZE");
  if (m.site.empty()) {
    for (const Site& s : lef.sites)
      if (s.core) {
        m.site = s.name;
        break;
      }
    if (m.site.empty() && !lef.sites.empty()) m.site = lef.sites.front().name;
  }
  const Site* site = lef.site(m.site);
  if (!site) fail("unknown or missing SITE '" + m.site + "'");
  if (m.w % site->w) fail("width is not a multiple of the site width");
  if (m.h % site->h) fail("height is not a multiple of the site height");
  m.site_span = static_cast<int>(m.w / site->w);
  m.row_span = static_cast<int>(m.h / site->h);
  const Rect box{{0, 0}, {m.w, m.h}};
  auto shift = [&](std::vector<LayerRect>& rs) {
    for (LayerRect& r : rs) r.rect = r.rect.translated(origin);
  };
  for (MacroPin& p : m.pins) {
    shift(p.rects);
    for (const LayerRect& r : p.rects)
      if (!box.contains(r.rect)) fail("pin " + p.name + " rect lies outside the macro");
  }
  shift(m.obstructions);
  if (lef.macro(m.name)) fail("defined twice");
  lef.macros.push_back(std::move(m));
}

}  // namespace detail

inline Lef parse_lef(std::string_view text, const std::string& source = "lef") {
  TokenStream ts(tokenize(text), source);
  Lef lef;
  std::int64_t scale = 0;
  auto need_units = [&] {
    if (!scale) ts.fail("geometry before UNITS DATABASE MICRONS");
  };
  while (!ts.done()) {
    const std::string key = ts.next();
    if (key == "UNITS") {
      while (ts.peek() != "END") {
        if (ts.done()) ts.fail("UNITS is not terminated");
        const std::string u = ts.next();
        if (u == "DATABASE") {
          ts.expect("MICRONS");
          scale = ts.integer();
          if (scale <= 0) ts.fail("DATABASE MICRONS must be positive");
          ts.expect(";");
        } else {
          ts.skip_statement();
        }
      }
      ts.expect("END");
      ts.expect("UNITS");
    } else if (key == "LAYER") {
      need_units();
      detail::parse_layer(ts, lef, scale);
    } else if (key == "VIA") {
      need_units();
      detail::parse_via(ts, lef, scale);
    } else if (key == "SITE") {
      need_units();
      detail::parse_site(ts, lef, scale);
    } else if (key == "MACRO") {
      need_units();
      detail::parse_macro(ts, lef, scale);
    } else if (key == "END") {
      if (ts.accept("LIBRARY")) break;
      ts.fail("unexpected END");
    } else if (key == "VERSION" || key == "BUSBITCHARS" || key == "DIVIDERCHAR" || key == "MANUFACTURINGGRID" ||
               key == "NAMESCASESENSITIVE") {
      ts.skip_statement();
    } else if (key == "PROPERTYDEFINITIONS" || key == "SPACING") {
      detail::warn(lef.warnings, ts, key + " section");
      detail::skip_block(ts, key);
    } else if (key == "VIARULE" || key == "NONDEFAULTRULE") {
      const std::string name = ts.next();
      detail::warn(lef.warnings, ts, key + " " + name);
      detail::skip_block(ts, name);
    } else {
      detail::warn(lef.warnings, ts, "statement '" + key + "'");
      ts.skip_statement();
    }
  }
  if (!scale) ts.fail("missing UNITS DATABASE MICRONS");
  lef.dbu_per_micron = scale;
  // Via cut rules: the smallest cut rect per cut layer across layer widths and via definitions.
  for (const ViaDef& v : lef.vias)
    for (const LayerRect& r : v.rects) {
      const TechLayer* l = lef.layer(r.layer);
      if (!l || l->kind != LayerKind::Cut || r.rect.degenerate()) continue;
      auto it = std::find_if(lef.via_rules.begin(), lef.via_rules.end(),
                             [&](const ViaRule& vr) { return vr.cut_layer == r.layer; });
      if (it == lef.via_rules.end())
        lef.via_rules.push_back({r.layer, r.rect.width(), r.rect.height()});
      else if (r.rect.area() < it->w * it->h)
        *it = {r.layer, r.rect.width(), r.rect.height()};
    }
  return lef;
}

// ---------------------------------------------------------------------------
// DEF

enum class Orient { N, S, E, W, FN, FS, FE, FW };

inline std::optional<Orient> parse_orient(std::string_view s) {
  static constexpr std::pair<std::string_view, Orient> table[] = {
      {"N", Orient::N}, {"S", Orient::S}, {"E", Orient::E}, {"W", Orient::W},
      {"FN", Orient::FN}, {"FS", Orient::FS}, {"FE", Orient::FE}, {"FW", Orient::FW}};
  for (auto [k, v] : table)
    if (k == s) return v;
  return std::nullopt;
}

inline const char* orient_name(Orient o) {
  static constexpr const char* names[] = {"N", "S", "E", "W", "FN", "FS", "FE", "FW"};
  return names[static_cast<int>(o)];
}

inline bool orient_swaps_axes(Orient o) {
  return o == Orient::E || o == Orient::W || o == Orient::FE || o == Orient::FW;
}

/// Maps a point of a w×h macro into the placed footprint whose lower-left is the origin.
inline Point orient_point(Orient o, Point p, Coord w, Coord h) {
  switch (o) {
    case Orient::N: return p;
    case Orient::S: return {w - p.x, h - p.y};
    case Orient::FN: return {w - p.x, p.y};
    case Orient::FS: return {p.x, h - p.y};
    case Orient::W: return {h - p.y, p.x};
    case Orient::E: return {p.y, w - p.x};
    case Orient::FW: return {h - p.y, w - p.x};
    case Orient::FE: return {p.y, p.x};
  }
  return p;
}

inline Rect orient_rect(Orient o, const Rect& r, Coord w, Coord h, Point at) {
  return Rect::from_corners(orient_point(o, r.lo, w, h), orient_point(o, r.hi, w, h)).translated(at);
}

struct Row {
  std::string name;
  std::string site;
  Point origin;
  Orient orient = Orient::N;
  std::int64_t count_x = 1;
  std::int64_t count_y = 1;
  Coord step_x = 0;
  Coord step_y = 0;
  friend bool operator==(const Row&, const Row&) = default;
};

struct Component {
  std::string name;
  std::string macro;
  Point location;
  Orient orient = Orient::N;
  bool placed = true;
  friend bool operator==(const Component&, const Component&) = default;
};

struct Segment {
  std::string layer;
  Point p1;
  Point p2;
  Coord width = 0;

  Coord length() const { return std::abs(p2.x - p1.x) + std::abs(p2.y - p1.y); }
  /// Centerline ± width/2 with flush ends.
  Rect rect() const {
    const Coord lo = width / 2, hi = width - width / 2;
    if (p1.y == p2.y) return {{std::min(p1.x, p2.x), p1.y - lo}, {std::max(p1.x, p2.x), p1.y + hi}};
    return {{p1.x - lo, std::min(p1.y, p2.y)}, {p1.x + hi, std::max(p1.y, p2.y)}};
  }
  friend bool operator==(const Segment&, const Segment&) = default;
};

struct ViaUse {
  std::string via;
  Point at;
  friend bool operator==(const ViaUse&, const ViaUse&) = default;
};

struct RoutedNet {
  std::string name;
  std::vector<Segment> segments;
  std::vector<ViaUse> vias;
  std::vector<std::pair<std::string, std::string>> pins;  // (instance or PIN or *, pin)

  Coord length() const {
    Coord s = 0;
    for (const Segment& g : segments) s += g.length();
    return s;
  }
  friend bool operator==(const RoutedNet&, const RoutedNet&) = default;
};

struct FloorplanDef {
  std::string design;
  std::int64_t units = 0;  // DEF distance units per micron as written
  Rect die_area;
  std::vector<Row> rows;
  std::vector<Component> components;
  std::vector<ViaDef> vias;  // VIAS section, already in LEF dbu
  std::vector<RoutedNet> nets;
  std::vector<RoutedNet> special_nets;
  std::vector<std::string> warnings;

  bool operator==(const FloorplanDef& o) const {
    return design == o.design && units == o.units && die_area == o.die_area && rows == o.rows &&
           components == o.components && vias == o.vias && nets == o.nets && special_nets == o.special_nets;
  }
};

/// The placement grid implied by a validated row set.
struct GridSpec {
  Point origin;
  std::int64_t cols = 0;
  std::int64_t rows = 0;
  Coord site_w = 0;
  Coord site_h = 0;
};

namespace detail {

inline const ViaDef* find_via(const Lef& lef, const FloorplanDef& def, const std::string& name) {
  for (const ViaDef& v : def.vias)
    if (v.name == name) return &v;
  return lef.via(name);
}

/// Layer reached by passing through `via` from `from`.
inline std::string via_other_layer(const Lef& lef, const ViaDef& via, const std::string& from) {
  const TechLayer* cur = lef.layer(from);
  std::string best;
  int best_gap = 1 << 30;
  for (const LayerRect& r : via.rects) {
    const TechLayer* l = lef.layer(r.layer);
    if (!l || l->kind == LayerKind::Cut || r.layer == from) continue;
    const int gap = cur ? std::abs(l->stack_index - cur->stack_index) : 0;
    if (gap < best_gap) {
      best_gap = gap;
      best = r.layer;
    }
  }
  return best.empty() ? from : best;
}

class DefParser {
public:
  DefParser(std::string_view text, const Lef& lef, std::string source)
      : ts_(tokenize(text), std::move(source)), lef_(lef) {}

  FloorplanDef run() {
    bool saw_nets = false;
    while (!ts_.done()) {
      const std::string key = ts_.next();
      if (key == "DESIGN") {
        def_.design = ts_.next();
        ts_.expect(";");
      } else if (key == "UNITS") {
        ts_.expect("DISTANCE");
        ts_.expect("MICRONS");
        def_.units = ts_.integer();
        ts_.expect(";");
        if (def_.units <= 0) ts_.fail("DISTANCE MICRONS must be positive");
        if (lef_.dbu_per_micron % def_.units)
          ts_.fail("DEF units " + std::to_string(def_.units) + " do not divide LEF database units " +
                   std::to_string(lef_.dbu_per_micron));
        mult_ = lef_.dbu_per_micron / def_.units;
      } else if (key == "DIEAREA") {
        const Point a = point(), b = point();
        if (ts_.peek() == "(") ts_.fail("non-rectangular DIEAREA is not supported");
        ts_.expect(";");
        def_.die_area = Rect::from_corners(a, b);
        have_die_ = true;
      } else if (key == "ROW") {
        row();
      } else if (key == "COMPONENTS") {
        components();
      } else if (key == "VIAS") {
        vias();
      } else if (key == "NETS") {
        saw_nets = true;
        nets(false);
      } else if (key == "SPECIALNETS") {
        nets(true);
      } else if (key == "END") {
        if (ts_.accept("DESIGN")) break;
        ts_.fail("unexpected END");
      } else if (key == "VERSION" || key == "DIVIDERCHAR" || key == "BUSBITCHARS" || key == "TECHNOLOGY") {
        ts_.skip_statement();
      } else if (key == "PINS" || key == "BLOCKAGES" || key == "REGIONS" || key == "GROUPS" ||
                 key == "PROPERTYDEFINITIONS" || key == "NONDEFAULTRULES" ||
                 key == "FILLS" || key == "PINPROPERTIES" || key == "SCANCHAINS" || key == "STYLES") {
        warn(def_.warnings, ts_, key + " section");
        skip_block(ts_, key);
      } else {
        warn(def_.warnings, ts_, "statement '" + key + "'");
        ts_.skip_statement();
      }
    }
    if (!def_.units) ts_.fail("missing UNITS DISTANCE MICRONS");
    if (!have_die_) ts_.fail("missing DIEAREA");
    if (!saw_nets) def_.warnings.push_back(ts_.source() + ": NETS section absent");
    return std::move(def_);
  }

private:
  Coord coord() { return ts_.integer() * mult_; }

  Point point() {
    ts_.expect("(");
    Point p{coord(), coord()};
    ts_.expect(")");
    return p;
  }

  void need_units() {
    if (!mult_) ts_.fail("coordinates before UNITS DISTANCE MICRONS");
  }

  void row() {
    need_units();
    Row r;
    r.name = ts_.next();
    r.site = ts_.next();
    if (!lef_.site(r.site)) ts_.fail("ROW " + r.name + " uses unknown SITE '" + r.site + "'");
    r.origin.x = coord();
    r.origin.y = coord();
    const auto o = parse_orient(ts_.next());
    if (!o) ts_.fail("bad ROW orientation");
    r.orient = *o;
    if (ts_.accept("DO")) {
      r.count_x = ts_.integer();
      ts_.expect("BY");
      r.count_y = ts_.integer();
      if (ts_.accept("STEP")) {
        r.step_x = coord();
        r.step_y = coord();
      }
    }
    if (ts_.accept("+")) ts_.skip_statement();  // row properties
    else ts_.expect(";");
    def_.rows.push_back(r);
  }

  void components() {
    need_units();
    const std::int64_t declared = ts_.integer();
    ts_.expect(";");
    while (!ts_.accept("END")) {
      ts_.expect("-");
      const std::size_t at = ts_.line();
      Component c;
      c.name = ts_.next();
      c.macro = ts_.next();
      if (!lef_.macro(c.macro))
        throw ParseError(ts_.source(), at, "component " + c.name + " references unknown macro '" + c.macro + "'");
      c.placed = false;
      while (!ts_.accept(";")) {
        ts_.expect("+");
        const std::string k = ts_.next();
        if (k == "PLACED" || k == "FIXED" || k == "COVER") {
          c.location = point();
          const auto o = parse_orient(ts_.next());
          if (!o) ts_.fail("bad orientation for component " + c.name);
          c.orient = *o;
          c.placed = true;
        } else if (k == "UNPLACED") {
        } else {
          warn(def_.warnings, ts_, "component attribute '" + k + "'");
          while (ts_.peek() != "+" && ts_.peek() != ";") ts_.next();
        }
      }
      def_.components.push_back(std::move(c));
    }
    ts_.expect("COMPONENTS");
    if (declared != static_cast<std::int64_t>(def_.components.size()))
      warn(def_.warnings, ts_, "COMPONENTS count mismatch");
  }

  void vias() {
    need_units();
    ts_.integer();
    ts_.expect(";");
    while (!ts_.accept("END")) {
      ts_.expect("-");
      ViaDef v;
      v.name = ts_.next();
      while (!ts_.accept(";")) {
        ts_.expect("+");
        const std::string k = ts_.next();
        if (k == "RECT") {
          const std::string layer = ts_.next();
          if (!lef_.layer(layer)) ts_.fail("via " + v.name + " uses unknown layer '" + layer + "'");
          const Point a = point(), b = point();
          v.rects.push_back({layer, Rect::from_corners(a, b)});
        } else {
          warn(def_.warnings, ts_, "via attribute '" + k + "'");
          while (ts_.peek() != "+" && ts_.peek() != ";") ts_.next();
        }
      }
      def_.vias.push_back(std::move(v));
    }
    ts_.expect("VIAS");
  }

  void check_in_die(Point p) {
    if (!def_.die_area.contains(p)) ts_.fail("routed point (" + std::to_string(p.x) + "," + std::to_string(p.y) + ") outside DIEAREA");
  }

  // One ROUTED / NEW wiring statement; stops before NEW, + or ;.
  void wiring(RoutedNet& net, bool special) {
    std::string layer = ts_.next();
    const TechLayer* tl = lef_.layer(layer);
    if (!tl || tl->kind == LayerKind::Cut) ts_.fail("net " + net.name + " routed on unknown layer '" + layer + "'");
    Coord width = tl->min_width;
    if (special) width = coord();
    std::optional<Point> last;
    for (;;) {
      const std::string& t = ts_.peek();
      if (t == "+" && ts_.peek(1) == "SHAPE") {
        ts_.next();
        ts_.next();
        ts_.next();
        continue;
      }
      if (t == "NEW" || t == "+" || t == ";" || ts_.done()) break;
      if (t == "(") {
        ts_.next();
        Point p;
        p.x = ts_.peek() == "*" ? (ts_.next(), need_last(last).x) : coord();
        p.y = ts_.peek() == "*" ? (ts_.next(), need_last(last).y) : coord();
        if (ts_.peek() != ")") ts_.integer();  // wire extension value, flush ends assumed
        ts_.expect(")");
        check_in_die(p);
        if (last && *last != p) {
          if (last->x != p.x && last->y != p.y) ts_.fail("net " + net.name + " has a non axis-parallel segment");
          if (width <= 0) ts_.fail("net " + net.name + " has a non-positive wire width");
          net.segments.push_back({layer, *last, p, width});
        }
        last = p;
      } else if (t == "TAPER" || t == "TAPERRULE" || t == "STYLE" || t == "MASK" || t == "VIRTUAL" || t == "RECT") {
        const std::string k = ts_.next();
        if (k == "TAPERRULE" || k == "STYLE" || k == "MASK") ts_.next();
        if (k == "VIRTUAL" || k == "RECT") {
          warn(def_.warnings, ts_, "wiring " + k);
          ts_.expect("(");
          while (!ts_.accept(")")) ts_.next();
        }
      } else {
        const std::string name = ts_.next();
        const ViaDef* via = find_via(lef_, def_, name);
        if (!via) ts_.fail("net " + net.name + " uses unknown via '" + name + "'");
        if (!last) ts_.fail("via " + name + " without a preceding point");
        net.vias.push_back({name, *last});
        layer = via_other_layer(lef_, *via, layer);
        tl = lef_.layer(layer);
        if (!special) width = tl->min_width;
      }
    }
  }

  Point need_last(const std::optional<Point>& last) {
    if (!last) ts_.fail("'*' without a previous point");
    return *last;
  }

  void nets(bool special) {
    need_units();
    ts_.integer();
    ts_.expect(";");
    auto& list = special ? def_.special_nets : def_.nets;
    while (!ts_.accept("END")) {
      ts_.expect("-");
      RoutedNet net;
      net.name = ts_.next();
      while (ts_.peek() == "(") {
        ts_.next();
        std::string inst = ts_.next();
        std::string pin = ts_.next();
        while (ts_.peek() != ")") ts_.next();  // + SYNTHESIZED
        ts_.expect(")");
        net.pins.emplace_back(std::move(inst), std::move(pin));
      }
      while (!ts_.accept(";")) {
        if (ts_.accept("NEW")) {
          wiring(net, special);
          continue;
        }
        ts_.expect("+");
        const std::string k = ts_.next();
        if (k == "ROUTED" || k == "FIXED" || k == "COVER" || k == "NOSHIELD") {
          wiring(net, special);
        } else if (k == "SHAPE") {
          ts_.next();
        } else if (k == "USE" || k == "SOURCE" || k == "WEIGHT" || k == "PATTERN") {
          ts_.next();
        } else {
          warn(def_.warnings, ts_, "net attribute '" + k + "'");
          while (ts_.peek() != "+" && ts_.peek() != ";" && ts_.peek() != "NEW") ts_.next();
        }
      }
      list.push_back(std::move(net));
    }
    ts_.expect(special ? "SPECIALNETS" : "NETS");
  }

  TokenStream ts_;
  const Lef& lef_;
  FloorplanDef def_;
  std::int64_t mult_ = 0;
  bool have_die_ = false;
};

}  // namespace detail

/// Validates that rows tile one rectangle of sites and returns it.
inline GridSpec grid_spec(const FloorplanDef& def, const Lef& lef) {
  if (def.rows.empty()) throw ParseError("def", 0, "no ROW statements");
  const Site* site = lef.site(def.rows[0].site);
  if (!site) throw ParseError("def", 0, "unknown site '" + def.rows[0].site + "'");
  std::vector<const Row*> rows;
  for (const Row& r : def.rows) rows.push_back(&r);
  std::sort(rows.begin(), rows.end(), [](const Row* a, const Row* b) { return a->origin.y < b->origin.y; });
  GridSpec g{rows[0]->origin, 0, static_cast<std::int64_t>(rows.size()), site->w, site->h};
  g.cols = rows[0]->count_x;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Row& r = *rows[i];
    auto fail = [&](const std::string& what) { throw ParseError("def", 0, "ROW " + r.name + ": " + what); };
    if (r.site != rows[0]->site) fail("mixes sites");
    if (r.count_y != 1) fail("vertical rows are not supported");
    if (r.count_x > 1 && r.step_x != site->w) fail("STEP differs from the site width");
    if (r.origin.x != g.origin.x || r.count_x != g.cols) fail("rows do not form a rectangle");
    if (r.origin.y != g.origin.y + static_cast<Coord>(i) * site->h) fail("rows are not abutted");
  }
  return g;
}

inline FloorplanDef parse_def(std::string_view text, const Lef& lef, const std::string& source = "def") {
  FloorplanDef def = detail::DefParser(text, lef, source).run();
  if (!def.rows.empty()) {
    const GridSpec g = grid_spec(def, lef);
    for (const Component& c : def.components) {
      if (!c.placed) continue;
      const Coord dx = c.location.x - g.origin.x, dy = c.location.y - g.origin.y;
      if (dx % g.site_w || dy % g.site_h)
        throw ParseError(source, 0, "component " + c.name + " is not aligned to the placement sites");
    }
  }
  return def;
}

// ---------------------------------------------------------------------------
// Debug emitters (also used by fixture generation)

inline std::string emit_lef(const Lef& lef) {
  const std::int64_t s = lef.dbu_per_micron;
  auto f = [&](Coord v) { return format_scaled(v, s); };
  auto rect = [&](const Rect& r) { return f(r.lo.x) + " " + f(r.lo.y) + " " + f(r.hi.x) + " " + f(r.hi.y); };
  std::ostringstream o;
  o << "VERSION 5.8 ;\nBUSBITCHARS \"[]\" ;\nDIVIDERCHAR \"/\" ;\n\nUNITS\n  DATABASE MICRONS " << s
    << " ;\nEND UNITS\n\n";
  for (const Site& st : lef.sites)
    o << "SITE " << st.name << "\n  CLASS " << (st.core ? "CORE" : "PAD") << " ;\n  SIZE " << f(st.w) << " BY "
      << f(st.h) << " ;\nEND " << st.name << "\n\n";
  std::vector<const TechLayer*> layers;
  for (const TechLayer& l : lef.layers) layers.push_back(&l);
  std::sort(layers.begin(), layers.end(), [](auto* a, auto* b) { return a->stack_index < b->stack_index; });
  for (const TechLayer* l : layers) {
    o << "LAYER " << l->name << "\n";
    if (l->kind == LayerKind::Routing) {
      o << "  TYPE ROUTING ;\n";
      if (l->direction != Direction::None)
        o << "  DIRECTION " << (l->direction == Direction::Horizontal ? "HORIZONTAL" : "VERTICAL") << " ;\n";
      o << "  PITCH " << f(l->pitch) << " ;\n  WIDTH " << f(l->min_width) << " ;\n";
      if (l->min_spacing) o << "  SPACING " << f(l->min_spacing) << " ;\n";
    } else if (l->kind == LayerKind::Cut) {
      o << "  TYPE CUT ;\n";
      if (l->min_width) o << "  WIDTH " << f(l->min_width) << " ;\n";
    } else {
      o << "  TYPE MASTERSLICE ;\n";
    }
    o << "END " << l->name << "\n\n";
  }
  for (const ViaDef& v : lef.vias) {
    o << "VIA " << v.name << " DEFAULT\n";
    for (const LayerRect& r : v.rects) o << "  LAYER " << r.layer << " ;\n    RECT " << rect(r.rect) << " ;\n";
    o << "END " << v.name << "\n\n";
  }
  for (const Macro& m : lef.macros) {
    o << "MACRO " << m.name << "\n  CLASS CORE ;\n  ORIGIN 0 0 ;\n  SIZE " << f(m.w) << " BY " << f(m.h)
      << " ;\n  SITE " << m.site << " ;\n";
    for (const MacroPin& p : m.pins) {
      o << "  PIN " << p.name << "\n";
      if (!p.direction.empty()) o << "    DIRECTION " << p.direction << " ;\n";
      o << "    PORT\n";
      for (const LayerRect& r : p.rects) o << "      LAYER " << r.layer << " ;\n        RECT " << rect(r.rect) << " ;\n";
      o << "    END\n  END " << p.name << "\n";
    }
    if (!m.obstructions.empty()) {
      o << "  OBS\n";
      for (const LayerRect& r : m.obstructions) o << "    LAYER " << r.layer << " ;\n      RECT " << rect(r.rect) << " ;\n";
      o << "  END\n";
    }
    o << "END " << m.name << "\n\n";
  }
  o << "END LIBRARY\n";
  return o.str();
}

/// Writes `def` in LEF database units. Regular-net wires must use the layer default width.
inline std::string emit_def(const FloorplanDef& def, const Lef& lef) {
  std::ostringstream o;
  auto pt = [&](Point p) { return "( " + std::to_string(p.x) + " " + std::to_string(p.y) + " )"; };
  o << "VERSION 5.8 ;\nDIVIDERCHAR \"/\" ;\nBUSBITCHARS \"[]\" ;\nDESIGN " << def.design << " ;\nUNITS DISTANCE MICRONS "
    << lef.dbu_per_micron << " ;\n\nDIEAREA " << pt(def.die_area.lo) << " " << pt(def.die_area.hi) << " ;\n\n";
  for (const Row& r : def.rows)
    o << "ROW " << r.name << " " << r.site << " " << r.origin.x << " " << r.origin.y << " " << orient_name(r.orient)
      << " DO " << r.count_x << " BY " << r.count_y << " STEP " << r.step_x << " " << r.step_y << " ;\n";
  if (!def.vias.empty()) {
    o << "\nVIAS " << def.vias.size() << " ;\n";
    for (const ViaDef& v : def.vias) {
      o << "- " << v.name;
      for (const LayerRect& r : v.rects) o << "\n  + RECT " << r.layer << " " << pt(r.rect.lo) << " " << pt(r.rect.hi);
      o << " ;\n";
    }
    o << "END VIAS\n";
  }
  o << "\nCOMPONENTS " << def.components.size() << " ;\n";
  for (const Component& c : def.components) {
    o << "- " << c.name << " " << c.macro;
    if (c.placed) o << " + PLACED " << pt(c.location) << " " << orient_name(c.orient);
    else o << " + UNPLACED";
    o << " ;\n";
  }
  o << "END COMPONENTS\n";
  auto emit_nets = [&](const std::vector<RoutedNet>& nets, bool special) {
    const char* kw = special ? "SPECIALNETS" : "NETS";
    o << "\n" << kw << " " << nets.size() << " ;\n";
    for (const RoutedNet& n : nets) {
      o << "- " << n.name;
      for (const auto& [inst, pin] : n.pins) o << " ( " << inst << " " << pin << " )";
      bool first = true;
      auto lead = [&] {
        o << (first ? "\n  + ROUTED " : "\n    NEW ");
        first = false;
      };
      for (const Segment& s : n.segments) {
        lead();
        o << s.layer;
        if (special) o << " " << s.width;
        else if (const TechLayer* l = lef.layer(s.layer); !l || l->min_width != s.width)
          throw Error("net " + n.name + " wire width is not expressible in regular DEF wiring");
        o << " " << pt(s.p1) << " " << pt(s.p2);
      }
      for (const ViaUse& v : n.vias) {
        const ViaDef* vd = detail::find_via(lef, def, v.via);
        if (!vd) throw Error("unknown via " + v.via);
        std::string bottom;
        int idx = 1 << 30;
        for (const LayerRect& r : vd->rects)
          if (const TechLayer* l = lef.layer(r.layer); l && l->kind != LayerKind::Cut && l->stack_index < idx) {
            idx = l->stack_index;
            bottom = r.layer;
          }
        lead();
        o << bottom;
        if (special) o << " " << lef.layer(bottom)->min_width;
        o << " " << pt(v.at) << " " << v.via;
      }
      o << " ;\n";
    }
    o << "END " << kw << "\n";
  };
  emit_nets(def.special_nets, true);
  emit_nets(def.nets, false);
  o << "\nEND DESIGN\n";
  return o.str();
}

// ---------------------------------------------------------------------------
// Layer map

struct LayerMapEntry {
  std::string layer;
  std::string purpose;
  int gds_layer = 0;
  int gds_datatype = 0;
  std::size_t line = 0;
};

struct LayerMap {
  std::vector<LayerMapEntry> entries;

  std::vector<std::pair<int, int>> lookup(const std::string& layer) const {
    std::vector<std::pair<int, int>> out;
    for (const LayerMapEntry& e : entries)
      if (e.layer == layer) out.emplace_back(e.gds_layer, e.gds_datatype);
    return out;
  }
  std::optional<std::pair<int, int>> find(const std::string& layer, const std::string& purpose) const {
    for (const LayerMapEntry& e : entries)
      if (e.layer == layer && e.purpose == purpose) return std::pair{e.gds_layer, e.gds_datatype};
    return std::nullopt;
  }
};

inline LayerMap parse_layermap(std::string_view text, const std::string& source = "layermap") {
  LayerMap map;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line_no = 0;
  auto to_int = [&](const std::string& s, const char* what) {
    int v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || v < 0)
      throw ParseError(source, line_no, std::string(what) + " '" + s + "' is not a non-negative integer");
    return v;
  };
  while (std::getline(in, raw)) {
    ++line_no;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    std::istringstream ls(raw);
    std::vector<std::string> cols;
    for (std::string t; ls >> t;) cols.push_back(t);
    if (cols.empty()) continue;
    if (cols.size() != 4) throw ParseError(source, line_no, "expected '<layer> <purpose> <gdsLayer> <gdsDatatype>'");
    LayerMapEntry e{cols[0], cols[1], to_int(cols[2], "layer number"), to_int(cols[3], "datatype"), line_no};
    bool duplicate = false;
    for (const LayerMapEntry& old : map.entries) {
      const bool same_key = old.layer == e.layer && old.purpose == e.purpose;
      const bool same_numbers = old.gds_layer == e.gds_layer && old.gds_datatype == e.gds_datatype;
      if (same_key && same_numbers) {
        duplicate = true;
      } else if (same_key || same_numbers) {
        throw ParseError(source, line_no,
                         "entry conflicts with line " + std::to_string(old.line) + " (" + old.layer + " " + old.purpose +
                             " " + std::to_string(old.gds_layer) + " " + std::to_string(old.gds_datatype) + ")");
      }
    }
    if (!duplicate) map.entries.push_back(std::move(e));
  }
  return map;
}

}  // namespace icas::lefdef
