#pragma once

// GDSII stream format: record codec, library model, reader, writer and
// hierarchy flattener.
//
// Elements keep unknown sub-records (ELFLAGS, PLEX, properties, path
// extensions) in three slots so that canonical streams re-encode byte for
// byte. TEXT, BOX and NODE elements are carried opaquely.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "icas/error.hpp"
#include "icas/geom.hpp"

namespace icas::gds {

namespace rt {
inline constexpr std::uint8_t kHeader = 0x00, kBgnLib = 0x01, kLibName = 0x02, kUnits = 0x03,
                              kEndLib = 0x04, kBgnStr = 0x05, kStrName = 0x06, kEndStr = 0x07,
                              kBoundary = 0x08, kPath = 0x09, kSref = 0x0A, kAref = 0x0B,
                              kText = 0x0C, kLayer = 0x0D, kDataType = 0x0E, kWidth = 0x0F,
                              kXy = 0x10, kEndEl = 0x11, kSname = 0x12, kColRow = 0x13,
                              kNode = 0x15, kStrans = 0x1A, kMag = 0x1B, kAngle = 0x1C,
                              kPathType = 0x21, kBox = 0x2D;
}  // namespace rt

enum class DataKind : std::uint8_t { None = 0, BitArray = 1, Int16 = 2, Int32 = 3, Real32 = 4, Real64 = 5, Ascii = 6 };

inline std::size_t element_width(std::uint8_t data_type) {
  switch (data_type) {
    case 1: case 2: return 2;
    case 3: case 4: return 4;
    case 5: return 8;
    default: return 1;
  }
}

struct Record {
  std::uint8_t type = 0;
  std::uint8_t data_type = 0;
  std::vector<std::uint8_t> payload;

  friend bool operator==(const Record&, const Record&) = default;
};

// ---------------------------------------------------------------------------
// Excess-64 reals

/// An 8-byte GDSII real. The encoded bytes are authoritative so that values
/// read from a stream are written back unchanged.
struct Real8 {
  std::array<std::uint8_t, 8> bytes{};

  static Real8 from_double(double v) {
    Real8 r;
    if (v == 0.0) return r;
    if (!std::isfinite(v)) throw Error("cannot encode non-finite GDSII real");
    const bool neg = v < 0;
    int k = 0;
    const double f = std::frexp(std::fabs(v), &k);  // |v| = f * 2^k, f in [0.5, 1)
    const int e = (k >= 0) ? (k + 3) / 4 : -((-k) / 4);  // ceil(k / 4)
    const int biased = e + 64;
    if (biased < 0 || biased > 127) throw Error("GDSII real exponent out of range");
    const auto mant = static_cast<std::uint64_t>(std::ldexp(f, 56 + k - 4 * e));
    r.bytes[0] = static_cast<std::uint8_t>((neg ? 0x80 : 0x00) | biased);
    for (int i = 0; i < 7; ++i) r.bytes[7 - i] = static_cast<std::uint8_t>(mant >> (8 * i));
    return r;
  }

  double value() const {
    std::uint64_t mant = 0;
    for (int i = 1; i < 8; ++i) mant = (mant << 8) | bytes[i];
    const int e = (bytes[0] & 0x7f) - 64;
    const double v = std::ldexp(static_cast<double>(mant), 4 * e - 56);
    return (bytes[0] & 0x80) ? -v : v;
  }

  friend bool operator==(const Real8&, const Real8&) = default;
};

/// 4-byte excess-64 real (rare in practice; decoded for completeness).
inline double decode_real4(std::span<const std::uint8_t, 4> b) {
  const std::uint32_t mant = (std::uint32_t(b[1]) << 16) | (std::uint32_t(b[2]) << 8) | b[3];
  const int e = (b[0] & 0x7f) - 64;
  const double v = std::ldexp(static_cast<double>(mant), 4 * e - 24);
  return (b[0] & 0x80) ? -v : v;
}

// ---------------------------------------------------------------------------
// Library model

using Date = std::array<std::int16_t, 12>;

struct Strans {
  std::uint16_t flags = 0;  // bit 15 reflect about x; bit 2 absolute mag; bit 1 absolute angle
  std::optional<Real8> mag;
  std::optional<Real8> angle;

  bool reflect_x() const { return flags & 0x8000; }
  friend bool operator==(const Strans&, const Strans&) = default;
};

struct ExtraRecords {
  std::vector<Record> pre;   // right after the element header
  std::vector<Record> mid;   // before XY
  std::vector<Record> post;  // after XY, before ENDEL
  friend bool operator==(const ExtraRecords&, const ExtraRecords&) = default;
};

struct Boundary {
  std::int16_t layer = 0;
  std::int16_t datatype = 0;
  geom::Polygon polygon;  // ring without the repeated closing vertex
  ExtraRecords extra;
  friend bool operator==(const Boundary&, const Boundary&) = default;
};

struct Path {
  std::int16_t layer = 0;
  std::int16_t datatype = 0;
  std::optional<std::int16_t> pathtype;
  std::optional<std::int32_t> width;
  std::vector<geom::Point> points;
  ExtraRecords extra;
  friend bool operator==(const Path&, const Path&) = default;
};

struct ArraySpec {
  std::int16_t cols = 1;
  std::int16_t rows = 1;
  geom::Point col_end;  // origin + cols * column pitch vector
  geom::Point row_end;  // origin + rows * row pitch vector
  friend bool operator==(const ArraySpec&, const ArraySpec&) = default;
};

/// SREF, or AREF when `array` is set.
struct Reference {
  std::string cell;
  std::optional<Strans> strans;
  geom::Point origin;
  std::optional<ArraySpec> array;
  ExtraRecords extra;
  friend bool operator==(const Reference&, const Reference&) = default;
};

/// TEXT, BOX, NODE and anything else, kept verbatim including header and ENDEL.
struct OpaqueElement {
  std::vector<Record> records;
  friend bool operator==(const OpaqueElement&, const OpaqueElement&) = default;
};

using Element = std::variant<Boundary, Path, Reference, OpaqueElement>;

struct Cell {
  std::string name;
  std::vector<std::uint8_t> bgnstr_payload = std::vector<std::uint8_t>(24, 0);
  std::vector<Record> extra;  // between STRNAME and the first element
  std::vector<Element> elements;

  template <class T>
  std::vector<const T*> all() const {
    std::vector<const T*> out;
    for (const Element& e : elements)
      if (const T* p = std::get_if<T>(&e)) out.push_back(p);
    return out;
  }
  friend bool operator==(const Cell&, const Cell&) = default;
};

struct Library {
  std::int16_t version = 600;
  std::vector<std::uint8_t> bgnlib_payload = std::vector<std::uint8_t>(24, 0);
  std::string name = "LIB";
  std::vector<Record> extra_before_units;
  Real8 user_units = Real8::from_double(1e-3);
  Real8 meters_per_dbu = Real8::from_double(1e-9);
  std::vector<Record> extra_after_units;
  std::vector<Cell> cells;
  std::vector<std::uint8_t> trailing;  // bytes after ENDLIB (block padding)

  static Library with_dbu_per_micron(std::string lib_name, double dbu_per_micron) {
    Library lib;
    lib.name = std::move(lib_name);
    lib.user_units = Real8::from_double(1.0 / dbu_per_micron);
    lib.meters_per_dbu = Real8::from_double(1e-6 / dbu_per_micron);
    return lib;
  }

  double dbu_per_micron() const { return 1e-6 / meters_per_dbu.value(); }

  const Cell* find(const std::string& cell_name) const {
    for (const Cell& c : cells)
      if (c.name == cell_name) return &c;
    return nullptr;
  }

  /// First cell, in stream order, that no other cell references.
  std::string top_cell() const {
    std::set<std::string> referenced;
    for (const Cell& c : cells)
      for (const Reference* r : c.all<Reference>()) referenced.insert(r->cell);
    for (const Cell& c : cells)
      if (!referenced.count(c.name)) return c.name;
    throw Error("library has no unreferenced top cell");
  }

  friend bool operator==(const Library&, const Library&) = default;
};

// ---------------------------------------------------------------------------
// Reader

namespace detail {

inline std::int16_t be16(const std::uint8_t* p) { return static_cast<std::int16_t>((p[0] << 8) | p[1]); }
inline std::int32_t be32(const std::uint8_t* p) {
  return static_cast<std::int32_t>((std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) |
                                   (std::uint32_t(p[2]) << 8) | std::uint32_t(p[3]));
}

struct PositionedRecord {
  Record rec;
  std::size_t offset;
};

class RecordCursor {
public:
  explicit RecordCursor(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  bool at_end() const { return pos_ >= bytes_.size(); }
  std::size_t offset() const { return pos_; }

  PositionedRecord next() {
    const std::size_t at = pos_;
    if (bytes_.size() - pos_ < 4) throw GdsError(at, "truncated record header");
    const std::size_t len = (std::size_t(bytes_[pos_]) << 8) | bytes_[pos_ + 1];
    if (len < 4) throw GdsError(at, "record length " + std::to_string(len) + " below header size");
    if (len % 2) throw GdsError(at, "odd record length " + std::to_string(len));
    if (bytes_.size() - pos_ < len) throw GdsError(at, "truncated record payload");
    Record r;
    r.type = bytes_[pos_ + 2];
    r.data_type = bytes_[pos_ + 3];
    if (r.data_type > 6) throw GdsError(at, "unknown data type " + std::to_string(r.data_type));
    r.payload.assign(bytes_.begin() + static_cast<std::ptrdiff_t>(pos_ + 4),
                     bytes_.begin() + static_cast<std::ptrdiff_t>(pos_ + len));
    if (r.payload.size() % element_width(r.data_type))
      throw GdsError(at, "payload size not a multiple of its element width");
    pos_ += len;
    return {std::move(r), at};
  }

  PositionedRecord peek() {
    const std::size_t save = pos_;
    auto r = next();
    pos_ = save;
    return r;
  }

private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

inline void expect_type(const PositionedRecord& r, std::uint8_t type, const char* name) {
  if (r.rec.type != type) throw GdsError(r.offset, std::string("expected ") + name);
}

inline std::int16_t int16_of(const PositionedRecord& r) {
  if (r.rec.payload.size() < 2) throw GdsError(r.offset, "missing int16 value");
  return be16(r.rec.payload.data());
}

inline std::int32_t int32_of(const PositionedRecord& r) {
  if (r.rec.payload.size() < 4) throw GdsError(r.offset, "missing int32 value");
  return be32(r.rec.payload.data());
}

inline std::string ascii_of(const Record& r) {
  std::string s(r.payload.begin(), r.payload.end());
  while (!s.empty() && s.back() == '\0') s.pop_back();
  return s;
}

inline Real8 real8_of(const PositionedRecord& r, std::size_t index = 0) {
  if (r.rec.data_type != 5 || r.rec.payload.size() < 8 * (index + 1))
    throw GdsError(r.offset, "expected 8-byte real");
  Real8 v;
  std::copy_n(r.rec.payload.begin() + static_cast<std::ptrdiff_t>(8 * index), 8, v.bytes.begin());
  return v;
}

inline std::vector<geom::Point> points_of(const PositionedRecord& r) {
  if (r.rec.payload.size() % 8) throw GdsError(r.offset, "XY payload not a whole number of points");
  std::vector<geom::Point> pts;
  for (std::size_t i = 0; i < r.rec.payload.size(); i += 8)
    pts.push_back({be32(&r.rec.payload[i]), be32(&r.rec.payload[i + 4])});
  return pts;
}

inline Element read_element(RecordCursor& cur, PositionedRecord head) {
  const std::uint8_t kind = head.rec.type;
  if (kind != rt::kBoundary && kind != rt::kPath && kind != rt::kSref && kind != rt::kAref) {
    OpaqueElement op;
    op.records.push_back(std::move(head.rec));
    for (;;) {
      if (cur.at_end()) throw GdsError(cur.offset(), "missing ENDEL");
      auto r = cur.next();
      const bool done = r.rec.type == rt::kEndEl;
      op.records.push_back(std::move(r.rec));
      if (done) return op;
    }
  }

  ExtraRecords extra;
  bool seen_core = false, seen_xy = false;
  std::optional<std::int16_t> layer, datatype, pathtype;
  std::optional<std::int32_t> width;
  std::optional<std::string> sname;
  std::optional<Strans> strans;
  std::optional<ArraySpec> array;
  std::vector<geom::Point> xy;
  std::size_t xy_offset = head.offset;

  for (;;) {
    if (cur.at_end()) throw GdsError(cur.offset(), "missing ENDEL");
    auto r = cur.next();
    switch (r.rec.type) {
      case rt::kEndEl: goto done;
      case rt::kLayer: layer = int16_of(r); seen_core = true; break;
      case rt::kDataType: datatype = int16_of(r); seen_core = true; break;
      case rt::kPathType: pathtype = int16_of(r); seen_core = true; break;
      case rt::kWidth: width = int32_of(r); seen_core = true; break;
      case rt::kSname: sname = ascii_of(r.rec); seen_core = true; break;
      case rt::kStrans:
        strans.emplace();
        strans->flags = static_cast<std::uint16_t>(int16_of(r));
        seen_core = true;
        break;
      case rt::kMag:
        if (!strans) throw GdsError(r.offset, "MAG without STRANS");
        strans->mag = real8_of(r);
        break;
      case rt::kAngle:
        if (!strans) throw GdsError(r.offset, "ANGLE without STRANS");
        strans->angle = real8_of(r);
        break;
      case rt::kColRow: {
        if (r.rec.payload.size() < 4) throw GdsError(r.offset, "COLROW needs two values");
        array.emplace();
        array->cols = detail::be16(r.rec.payload.data());
        array->rows = detail::be16(r.rec.payload.data() + 2);
        seen_core = true;
        break;
      }
      case rt::kXy: xy = points_of(r); xy_offset = r.offset; seen_xy = true; break;
      default:
        (seen_xy ? extra.post : seen_core ? extra.mid : extra.pre).push_back(std::move(r.rec));
    }
  }
done:
  if (!seen_xy) throw GdsError(head.offset, "element without XY");
  if (kind == rt::kBoundary) {
    if (!layer || !datatype) throw GdsError(head.offset, "BOUNDARY missing LAYER/DATATYPE");
    if (xy.size() < 4 || xy.front() != xy.back()) throw GdsError(xy_offset, "BOUNDARY ring not closed");
    xy.pop_back();
    return Boundary{*layer, *datatype, geom::Polygon(std::move(xy)), std::move(extra)};
  }
  if (kind == rt::kPath) {
    if (!layer || !datatype) throw GdsError(head.offset, "PATH missing LAYER/DATATYPE");
    if (xy.size() < 2) throw GdsError(xy_offset, "PATH needs at least two points");
    return Path{*layer, *datatype, pathtype, width, std::move(xy), std::move(extra)};
  }
  if (!sname) throw GdsError(head.offset, "reference missing SNAME");
  Reference ref{*sname, strans, {}, std::nullopt, std::move(extra)};
  if (kind == rt::kSref) {
    if (xy.size() != 1) throw GdsError(xy_offset, "SREF needs exactly one point");
    ref.origin = xy[0];
  } else {
    if (!array || xy.size() != 3) throw GdsError(xy_offset, "AREF needs COLROW and three points");
    if (array->cols <= 0 || array->rows <= 0) throw GdsError(xy_offset, "AREF with non-positive COLROW");
    ref.origin = xy[0];
    array->col_end = xy[1];
    array->row_end = xy[2];
    ref.array = array;
  }
  return ref;
}

}  // namespace detail

inline Library read_gds(std::span<const std::uint8_t> bytes) {
  using detail::expect_type;
  detail::RecordCursor cur(bytes);
  Library lib;
  if (cur.at_end()) throw GdsError(0, "empty stream");
  auto r = cur.next();
  expect_type(r, rt::kHeader, "HEADER");
  lib.version = detail::int16_of(r);
  r = cur.next();
  expect_type(r, rt::kBgnLib, "BGNLIB");
  lib.bgnlib_payload = r.rec.payload;
  r = cur.next();
  expect_type(r, rt::kLibName, "LIBNAME");
  lib.name = detail::ascii_of(r.rec);
  bool have_units = false;
  for (;;) {
    if (cur.at_end()) throw GdsError(cur.offset(), "missing ENDLIB");
    r = cur.next();
    if (r.rec.type == rt::kEndLib) break;
    if (r.rec.type == rt::kUnits) {
      lib.user_units = detail::real8_of(r, 0);
      lib.meters_per_dbu = detail::real8_of(r, 1);
      have_units = true;
      continue;
    }
    if (r.rec.type != rt::kBgnStr) {
      if (!lib.cells.empty()) throw GdsError(r.offset, "unexpected record between structures");
      (have_units ? lib.extra_after_units : lib.extra_before_units).push_back(std::move(r.rec));
      continue;
    }
    if (!have_units) throw GdsError(r.offset, "BGNSTR before UNITS");
    Cell cell;
    cell.bgnstr_payload = r.rec.payload;
    r = cur.next();
    expect_type(r, rt::kStrName, "STRNAME");
    cell.name = detail::ascii_of(r.rec);
    for (;;) {
      if (cur.at_end()) throw GdsError(cur.offset(), "missing ENDSTR");
      r = cur.next();
      if (r.rec.type == rt::kEndStr) break;
      const bool element_start = r.rec.type == rt::kBoundary || r.rec.type == rt::kPath ||
                                 r.rec.type == rt::kSref || r.rec.type == rt::kAref ||
                                 r.rec.type == rt::kText || r.rec.type == rt::kBox ||
                                 r.rec.type == rt::kNode;
      if (!element_start) {
        if (!cell.elements.empty()) throw GdsError(r.offset, "stray record inside structure");
        cell.extra.push_back(std::move(r.rec));
        continue;
      }
      cell.elements.push_back(detail::read_element(cur, std::move(r)));
    }
    lib.cells.push_back(std::move(cell));
  }
  lib.trailing.assign(bytes.begin() + static_cast<std::ptrdiff_t>(cur.offset()), bytes.end());
  return lib;
}

// ---------------------------------------------------------------------------
// Writer

namespace detail {

class Emitter {
public:
  std::vector<std::uint8_t> out;

  void record(std::uint8_t type, std::uint8_t dt, std::span<const std::uint8_t> payload) {
    const std::size_t len = payload.size() + 4;
    if (len > 0xFFFF) throw Error("GDSII record exceeds 65535 bytes");
    out.push_back(static_cast<std::uint8_t>(len >> 8));
    out.push_back(static_cast<std::uint8_t>(len));
    out.push_back(type);
    out.push_back(dt);
    out.insert(out.end(), payload.begin(), payload.end());
  }
  void record(const Record& r) { record(r.type, r.data_type, r.payload); }
  void records(const std::vector<Record>& rs) {
    for (const Record& r : rs) record(r);
  }
  void none(std::uint8_t type) { record(type, 0, {}); }
  void int16s(std::uint8_t type, std::initializer_list<std::int16_t> vs) {
    std::vector<std::uint8_t> p;
    for (std::int16_t v : vs) put16(p, v);
    record(type, 2, p);
  }
  void int32(std::uint8_t type, std::int32_t v) {
    std::vector<std::uint8_t> p;
    put32(p, v);
    record(type, 3, p);
  }
  void bits(std::uint8_t type, std::uint16_t v) {
    std::vector<std::uint8_t> p;
    put16(p, static_cast<std::int16_t>(v));
    record(type, 1, p);
  }
  void reals(std::uint8_t type, std::initializer_list<Real8> vs) {
    std::vector<std::uint8_t> p;
    for (const Real8& v : vs) p.insert(p.end(), v.bytes.begin(), v.bytes.end());
    record(type, 5, p);
  }
  void ascii(std::uint8_t type, const std::string& s) {
    std::vector<std::uint8_t> p(s.begin(), s.end());
    if (p.size() % 2) p.push_back(0);
    record(type, 6, p);
  }
  void xy(std::span<const geom::Point> pts) {
    std::vector<std::uint8_t> p;
    for (const geom::Point& pt : pts) {
      put32(p, checked32(pt.x));
      put32(p, checked32(pt.y));
    }
    record(rt::kXy, 3, p);
  }

private:
  static std::int32_t checked32(geom::Coord v) {
    if (v < INT32_MIN || v > INT32_MAX) throw Error("coordinate exceeds GDSII int32 range");
    return static_cast<std::int32_t>(v);
  }
  static void put16(std::vector<std::uint8_t>& p, std::int16_t v) {
    p.push_back(static_cast<std::uint8_t>(std::uint16_t(v) >> 8));
    p.push_back(static_cast<std::uint8_t>(v));
  }
  static void put32(std::vector<std::uint8_t>& p, std::int32_t v) {
    const auto u = static_cast<std::uint32_t>(v);
    for (int s = 24; s >= 0; s -= 8) p.push_back(static_cast<std::uint8_t>(u >> s));
  }
};

inline void check_name(const std::string& n, const char* what) {
  if (n.size() > 32) throw Error(std::string(what) + " '" + n + "' exceeds 32 characters");
  if (n.empty()) throw Error(std::string(what) + " is empty");
}

}  // namespace detail

inline std::vector<std::uint8_t> write_gds(const Library& lib) {
  detail::Emitter e;
  e.int16s(rt::kHeader, {lib.version});
  e.record(rt::kBgnLib, 2, lib.bgnlib_payload);
  e.ascii(rt::kLibName, lib.name);
  e.records(lib.extra_before_units);
  e.reals(rt::kUnits, {lib.user_units, lib.meters_per_dbu});
  e.records(lib.extra_after_units);
  for (const Cell& c : lib.cells) {
    detail::check_name(c.name, "structure name");
    e.record(rt::kBgnStr, 2, c.bgnstr_payload);
    e.ascii(rt::kStrName, c.name);
    e.records(c.extra);
    for (const Element& el : c.elements) {
      if (const auto* b = std::get_if<Boundary>(&el)) {
        e.none(rt::kBoundary);
        e.records(b->extra.pre);
        e.int16s(rt::kLayer, {b->layer});
        e.int16s(rt::kDataType, {b->datatype});
        e.records(b->extra.mid);
        std::vector<geom::Point> ring = b->polygon.vertices;
        if (ring.size() < 3) throw Error("BOUNDARY with fewer than 3 vertices");
        ring.push_back(ring.front());
        e.xy(ring);
        e.records(b->extra.post);
        e.none(rt::kEndEl);
      } else if (const auto* p = std::get_if<Path>(&el)) {
        e.none(rt::kPath);
        e.records(p->extra.pre);
        e.int16s(rt::kLayer, {p->layer});
        e.int16s(rt::kDataType, {p->datatype});
        if (p->pathtype) e.int16s(rt::kPathType, {*p->pathtype});
        if (p->width) e.int32(rt::kWidth, *p->width);
        e.records(p->extra.mid);
        e.xy(p->points);
        e.records(p->extra.post);
        e.none(rt::kEndEl);
      } else if (const auto* r = std::get_if<Reference>(&el)) {
        detail::check_name(r->cell, "referenced structure name");
        e.none(r->array ? rt::kAref : rt::kSref);
        e.records(r->extra.pre);
        e.ascii(rt::kSname, r->cell);
        if (r->strans) {
          e.bits(rt::kStrans, r->strans->flags);
          if (r->strans->mag) e.reals(rt::kMag, {*r->strans->mag});
          if (r->strans->angle) e.reals(rt::kAngle, {*r->strans->angle});
        }
        if (r->array) e.int16s(rt::kColRow, {r->array->cols, r->array->rows});
        e.records(r->extra.mid);
        if (r->array) {
          const geom::Point pts[] = {r->origin, r->array->col_end, r->array->row_end};
          e.xy(pts);
        } else {
          e.xy(std::span<const geom::Point>(&r->origin, 1));
        }
        e.records(r->extra.post);
        e.none(rt::kEndEl);
      } else {
        e.records(std::get<OpaqueElement>(el).records);
      }
    }
    e.none(rt::kEndStr);
  }
  e.none(rt::kEndLib);
  e.out.insert(e.out.end(), lib.trailing.begin(), lib.trailing.end());
  return std::move(e.out);
}

// ---------------------------------------------------------------------------
// Flattening

/// Integer affine map restricted to the eight rectilinear orientations.
struct Transform {
  std::int64_t a = 1, b = 0, c = 0, d = 1;  // [a b; c d]
  geom::Point t;

  geom::Point apply(geom::Point p) const { return {a * p.x + b * p.y + t.x, c * p.x + d * p.y + t.y}; }

  /// this ∘ inner
  Transform compose(const Transform& in) const {
    Transform r;
    r.a = a * in.a + b * in.c;
    r.b = a * in.b + b * in.d;
    r.c = c * in.a + d * in.c;
    r.d = c * in.b + d * in.d;
    r.t = apply(in.t);
    return r;
  }

  /// Reflect about x (optional), rotate counter-clockwise by quarter turns, translate.
  static Transform make(bool reflect_x, int quarter_turns, geom::Point offset) {
    static constexpr std::int64_t cs[4][2] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};  // cos, sin
    const int q = ((quarter_turns % 4) + 4) % 4;
    const std::int64_t co = cs[q][0], si = cs[q][1];
    const std::int64_t f = reflect_x ? -1 : 1;
    return Transform{co, -si * f, si, co * f, offset};
  }

  friend bool operator==(const Transform&, const Transform&) = default;
};

using LayerKey = std::pair<int, int>;  // (layer, datatype)
using FlatGeometry = std::map<LayerKey, std::vector<geom::Polygon>>;

namespace detail {

inline Transform reference_transform(const Reference& r, geom::Point offset) {
  bool reflect = false;
  int quarter = 0;
  if (r.strans) {
    reflect = r.strans->reflect_x();
    if (r.strans->mag && std::fabs(r.strans->mag->value() - 1.0) > 1e-12)
      throw Error("reference to '" + r.cell + "' uses magnification " +
                  std::to_string(r.strans->mag->value()) + "; only 1.0 is supported");
    if (r.strans->angle) {
      const double deg = r.strans->angle->value();
      const double q = deg / 90.0;
      if (std::fabs(q - std::round(q)) > 1e-9)
        throw Error("reference to '" + r.cell + "' rotated by " + std::to_string(deg) +
                    " degrees; only multiples of 90 are supported");
      quarter = static_cast<int>(std::llround(q));
    }
  }
  return Transform::make(reflect, quarter, offset);
}

inline void path_to_rects(const Path& p, const Transform& tf, std::vector<geom::Polygon>& out) {
  if (p.pathtype && *p.pathtype != 0)
    throw Error("PATH type " + std::to_string(*p.pathtype) + " unsupported; only flush ends (0)");
  const geom::Coord w = p.width.value_or(0);
  if (w < 0) throw Error("absolute-width PATH unsupported");
  const geom::Coord lo = w / 2, hi = w - w / 2;
  for (std::size_t i = 0; i + 1 < p.points.size(); ++i) {
    const geom::Point a = p.points[i], b = p.points[i + 1];
    geom::Rect r;
    if (a.y == b.y)
      r = {{std::min(a.x, b.x), a.y - lo}, {std::max(a.x, b.x), a.y + hi}};
    else if (a.x == b.x)
      r = {{a.x - lo, std::min(a.y, b.y)}, {a.x + hi, std::max(a.y, b.y)}};
    else
      throw Error("non-rectilinear PATH segment");
    if (r.degenerate()) continue;
    const geom::Rect placed = geom::Rect::from_corners(tf.apply(r.lo), tf.apply(r.hi));
    out.push_back(geom::Polygon::from_rect(placed));
  }
}

inline void flatten_into(const Library& lib, const std::unordered_map<std::string, const Cell*>& index,
                         const Cell& cell, const Transform& tf, FlatGeometry& out) {
  for (const Element& el : cell.elements) {
    if (const auto* b = std::get_if<Boundary>(&el)) {
      geom::Polygon poly;
      poly.vertices.reserve(b->polygon.vertices.size());
      for (const geom::Point& p : b->polygon.vertices) poly.vertices.push_back(tf.apply(p));
      out[{b->layer, b->datatype}].push_back(std::move(poly));
    } else if (const auto* p = std::get_if<Path>(&el)) {
      path_to_rects(*p, tf, out[{p->layer, p->datatype}]);
    } else if (const auto* r = std::get_if<Reference>(&el)) {
      const Cell& child = *index.at(r->cell);
      if (!r->array) {
        flatten_into(lib, index, child, tf.compose(reference_transform(*r, r->origin)), out);
        continue;
      }
      const ArraySpec& a = *r->array;
      const geom::Point dc = a.col_end - r->origin, dr = a.row_end - r->origin;
      if (dc.x % a.cols || dc.y % a.cols || dr.x % a.rows || dr.y % a.rows)
        throw Error("AREF of '" + r->cell + "' has non-integer pitch");
      const geom::Point cp{dc.x / a.cols, dc.y / a.cols}, rp{dr.x / a.rows, dr.y / a.rows};
      for (std::int64_t j = 0; j < a.rows; ++j)
        for (std::int64_t i = 0; i < a.cols; ++i) {
          const geom::Point at{r->origin.x + i * cp.x + j * rp.x, r->origin.y + i * cp.y + j * rp.y};
          flatten_into(lib, index, child, tf.compose(reference_transform(*r, at)), out);
        }
    }
  }
}

}  // namespace detail

/// Resolves every reference below `top` into top-cell coordinates. Throws on
/// dangling references and on reference cycles (naming the cycle).
inline FlatGeometry flatten(const Library& lib, const std::string& top) {
  std::unordered_map<std::string, const Cell*> index;
  for (const Cell& c : lib.cells) index.emplace(c.name, &c);
  if (!index.count(top)) throw Error("top cell '" + top + "' not found");

  // Cycle / dangling check over the reachable reference graph.
  std::unordered_map<std::string, int> state;  // 1 = on stack, 2 = done
  std::vector<std::string> stack;
  auto visit = [&](auto&& self, const std::string& name) -> void {
    state[name] = 1;
    stack.push_back(name);
    for (const Reference* r : index.at(name)->all<Reference>()) {
      if (!index.count(r->cell)) throw Error("cell '" + name + "' references undefined cell '" + r->cell + "'");
      const int s = state[r->cell];
      if (s == 1) {
        std::string cycle;
        auto it = std::find(stack.begin(), stack.end(), r->cell);
        for (; it != stack.end(); ++it) cycle += *it + " -> ";
        throw Error("reference cycle: " + cycle + r->cell);
      }
      if (s == 0) self(self, r->cell);
    }
    stack.pop_back();
    state[name] = 2;
  };
  visit(visit, top);

  FlatGeometry out;
  detail::flatten_into(lib, index, *index.at(top), Transform{}, out);
  return out;
}

// ---------------------------------------------------------------------------
// Builders used by emitters

inline Boundary make_boundary(int layer, int datatype, const geom::Rect& r) {
  return Boundary{static_cast<std::int16_t>(layer), static_cast<std::int16_t>(datatype),
                  geom::Polygon::from_rect(r), {}};
}

inline Path make_path(int layer, int datatype, geom::Coord width, std::vector<geom::Point> pts) {
  return Path{static_cast<std::int16_t>(layer), static_cast<std::int16_t>(datatype), std::int16_t{0},
              static_cast<std::int32_t>(width), std::move(pts), {}};
}

inline Reference make_sref(std::string cell, geom::Point origin, bool reflect_x = false, int quarter_turns = 0) {
  Reference r{std::move(cell), std::nullopt, origin, std::nullopt, {}};
  if (reflect_x || quarter_turns % 4) {
    r.strans = Strans{};
    if (reflect_x) r.strans->flags = 0x8000;
    if (quarter_turns % 4) r.strans->angle = Real8::from_double(90.0 * (quarter_turns % 4));
  }
  return r;
}

}  // namespace icas::gds
