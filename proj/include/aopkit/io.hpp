#pragma once

// File formats:
//  * label masks: binary greymap "P5", maxval <= 255. Written with the display
//    palette {0, 127, 255} for {background, PS, FH}; raw {0, 1, 2} is also
//    accepted on read.
//  * probability maps: "FPM <width> <height> <channels>\n" followed by
//    little-endian float32 values, row-major, channel-interleaved.
//  * frame scores: CSV "video_id,frame_index,score[,label]".
//  * measurement reports: CSV with a fixed column order.
//  * overlays: binary pixmap "P6".

#include <array>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <locale>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "aopkit/errors.hpp"
#include "aopkit/raster.hpp"

namespace aopkit::io {

using Bytes = std::vector<std::uint8_t>;

inline Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  Bytes bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return bytes;
}

inline void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

namespace detail {

/// Cursor over a netpbm-style ASCII header.
class HeaderReader {
 public:
  explicit HeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::size_t pos() const noexcept { return pos_; }

  void expect_magic(std::string_view magic) {
    if (bytes_.size() < magic.size() ||
        std::memcmp(bytes_.data(), magic.data(), magic.size()) != 0) {
      throw ParseError("bad magic, expected '" + std::string(magic) + "'", 0);
    }
    pos_ = magic.size();
    if (pos_ >= bytes_.size()) throw TruncationError("file ends after magic", pos_);
    if (!std::isspace(bytes_[pos_])) throw ParseError("expected whitespace after magic", pos_);
  }

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  long read_uint(const char* what) {
    skip_space_and_comments();
    const std::size_t begin = pos_;
    long value = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > 1'000'000'000L) throw ParseError(std::string(what) + " too large", begin);
      ++pos_;
    }
    if (pos_ == begin) {
      if (pos_ >= bytes_.size()) throw TruncationError(std::string("missing ") + what, pos_);
      throw ParseError(std::string("expected unsigned integer for ") + what, pos_);
    }
    return value;
  }

  /// Consumes the single whitespace byte that ends a binary netpbm header.
  void end_of_header() {
    if (pos_ >= bytes_.size()) throw TruncationError("header ends before payload", pos_);
    if (!std::isspace(bytes_[pos_])) throw ParseError("expected whitespace after header", pos_);
    ++pos_;
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

inline std::string pnm_header(const char* magic, int w, int h) {
  return std::string(magic) + "\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
}

inline std::string format_number(double v) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << std::setprecision(6) << v;
  return os.str();
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

inline double parse_double(const std::string& s, const std::string& what, std::size_t at = 0) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) throw ParseError("bad number for " + what + ": '" + s + "'", at);
  return v;
}

inline long parse_long(const std::string& s, const std::string& what, std::size_t at = 0) {
  long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError("bad integer for " + what + ": '" + s + "'", at);
  }
  return v;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Greymaps

/// Plain 8-bit greymap; any maxval <= 255 is accepted and values are kept raw.
inline Grid<std::uint8_t> decode_greymap(std::span<const std::uint8_t> bytes) {
  detail::HeaderReader hr(bytes);
  hr.expect_magic("P5");
  const long w = hr.read_uint("width");
  const long h = hr.read_uint("height");
  const std::size_t maxval_pos = hr.pos();
  const long maxval = hr.read_uint("maxval");
  if (w < 1 || h < 1) throw ParseError("greymap dimensions must be >= 1", maxval_pos);
  if (maxval < 1 || maxval > 255) throw ParseError("maxval must be in [1,255]", maxval_pos);
  hr.end_of_header();
  const std::size_t start = hr.pos();
  const std::size_t n = static_cast<std::size_t>(w) * h;
  if (bytes.size() - start < n) {
    throw TruncationError("greymap payload truncated: expected " + std::to_string(n) +
                              " bytes, found " + std::to_string(bytes.size() - start),
                          bytes.size());
  }
  if (bytes.size() - start > n) throw ParseError("trailing bytes after greymap payload", start + n);
  Grid<std::uint8_t> g(static_cast<int>(w), static_cast<int>(h));
  for (std::size_t i = 0; i < n; ++i) {
    if (bytes[start + i] > maxval) throw ParseError("value exceeds maxval", start + i);
    g[i] = bytes[start + i];
  }
  return g;
}

inline Bytes encode_greymap(const Grid<std::uint8_t>& g) {
  const std::string header = detail::pnm_header("P5", g.width(), g.height());
  Bytes out(header.begin(), header.end());
  out.insert(out.end(), g.data().begin(), g.data().end());
  return out;
}

inline LabelMask decode_label_mask(std::span<const std::uint8_t> bytes) {
  Grid<std::uint8_t> g = decode_greymap(bytes);
  const std::size_t start = bytes.size() - g.size();
  for (std::size_t i = 0; i < g.size(); ++i) {
    switch (g[i]) {
      case 0: case 1: case 2: break;
      case 127: g[i] = 1; break;
      case 255: g[i] = 2; break;
      default:
        throw ParseError("label value " + std::to_string(g[i]) +
                             " is neither in {0,1,2} nor in the palette {0,127,255}",
                         start + i);
    }
  }
  return LabelMask(std::move(g));
}

inline Bytes encode_label_mask(const LabelMask& m) {
  static constexpr std::array<std::uint8_t, 3> kPalette{0, 127, 255};
  Grid<std::uint8_t> g(m.width(), m.height());
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m[i] > 2) throw ValidationError("label value out of range at index " + std::to_string(i));
    g[i] = kPalette[m[i]];
  }
  return encode_greymap(g);
}

inline LabelMask read_label_mask(const std::filesystem::path& path) {
  return decode_label_mask(read_file(path));
}

inline void write_label_mask(const LabelMask& m, const std::filesystem::path& path) {
  write_file(path, encode_label_mask(m));
}

inline Grid<std::uint8_t> read_greymap(const std::filesystem::path& path) {
  return decode_greymap(read_file(path));
}

inline void write_greymap(const Grid<std::uint8_t>& g, const std::filesystem::path& path) {
  write_file(path, encode_greymap(g));
}

// ---------------------------------------------------------------------------
// Float probability maps

inline constexpr double kFileSumTolerance = 1e-3;

inline ProbMap decode_prob_map(std::span<const std::uint8_t> bytes) {
  detail::HeaderReader hr(bytes);
  hr.expect_magic("FPM");
  const long w = hr.read_uint("width");
  const long h = hr.read_uint("height");
  const std::size_t ch_pos = hr.pos();
  const long c = hr.read_uint("channels");
  if (w < 1 || h < 1) throw ParseError("prob map dimensions must be >= 1", ch_pos);
  if (c != 2 && c != 3) throw ParseError("channel count must be 2 or 3", ch_pos);
  if (hr.pos() >= bytes.size()) throw TruncationError("header ends before newline", hr.pos());
  if (bytes[hr.pos()] != '\n') throw ParseError("expected newline after FPM header", hr.pos());
  const std::size_t start = hr.pos() + 1;
  const std::size_t count = static_cast<std::size_t>(w) * h * c;
  const std::size_t need = count * 4;
  if (bytes.size() - start < need) {
    throw TruncationError("prob map payload truncated: expected " + std::to_string(need) +
                              " bytes, found " + std::to_string(bytes.size() - start),
                          bytes.size());
  }
  if (bytes.size() - start > need) throw ParseError("trailing bytes after prob map payload", start + need);
  std::vector<double> data(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint8_t* p = bytes.data() + start + 4 * i;
    const std::uint32_t bits = static_cast<std::uint32_t>(p[0]) |
                               (static_cast<std::uint32_t>(p[1]) << 8) |
                               (static_cast<std::uint32_t>(p[2]) << 16) |
                               (static_cast<std::uint32_t>(p[3]) << 24);
    data[i] = static_cast<double>(std::bit_cast<float>(bits));
  }
  ProbMap map(static_cast<int>(w), static_cast<int>(h), static_cast<int>(c), std::move(data));
  map.validate(kFileSumTolerance);
  return map;
}

/// Values are narrowed to float32.
inline Bytes encode_prob_map(const ProbMap& p) {
  const std::string header = "FPM " + std::to_string(p.width()) + " " +
                             std::to_string(p.height()) + " " +
                             std::to_string(p.channels()) + "\n";
  Bytes out(header.begin(), header.end());
  out.reserve(out.size() + p.data().size() * 4);
  for (double v : p.data()) {
    const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
    out.push_back(static_cast<std::uint8_t>(bits));
    out.push_back(static_cast<std::uint8_t>(bits >> 8));
    out.push_back(static_cast<std::uint8_t>(bits >> 16));
    out.push_back(static_cast<std::uint8_t>(bits >> 24));
  }
  return out;
}

inline ProbMap read_prob_map(const std::filesystem::path& path) {
  return decode_prob_map(read_file(path));
}

inline void write_prob_map(const ProbMap& p, const std::filesystem::path& path) {
  write_file(path, encode_prob_map(p));
}

// ---------------------------------------------------------------------------
// Colour pixmaps (overlays)

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

inline Bytes encode_pixmap(const Grid<Rgb>& img) {
  const std::string header = detail::pnm_header("P6", img.width(), img.height());
  Bytes out(header.begin(), header.end());
  out.reserve(out.size() + img.size() * 3);
  for (const Rgb& c : img.data()) {
    out.push_back(c.r);
    out.push_back(c.g);
    out.push_back(c.b);
  }
  return out;
}

inline void write_pixmap(const Grid<Rgb>& img, const std::filesystem::path& path) {
  write_file(path, encode_pixmap(img));
}

// ---------------------------------------------------------------------------
// CSV tables

struct FrameRecord {
  std::string video_id;
  long frame_index = 0;
  std::optional<int> label;
  std::optional<double> score;

  friend bool operator==(const FrameRecord&, const FrameRecord&) = default;
};

inline std::string format_frame_scores(const std::vector<FrameRecord>& rows) {
  std::string out = "video_id,frame_index,score,label\n";
  for (const auto& r : rows) {
    out += detail::csv_field(r.video_id) + "," + std::to_string(r.frame_index) + ",";
    if (r.score) out += detail::format_number(*r.score);
    out += ",";
    if (r.label) out += std::to_string(*r.label);
    out += "\n";
  }
  return out;
}

inline std::vector<FrameRecord> parse_frame_scores(const std::string& text) {
  std::vector<FrameRecord> rows;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0, next = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t at = next;
    next += line.size() + 1;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto f = detail::split_csv_line(line);
    if (line_no == 1 && f[0] == "video_id") continue;
    const std::string where = "frame scores line " + std::to_string(line_no);
    if (f.size() < 3 || f.size() > 4) throw ParseError(where + ": expected 3 or 4 fields", at);
    FrameRecord r;
    r.video_id = f[0];
    r.frame_index = detail::parse_long(f[1], where + " frame_index", at);
    if (r.frame_index < 0) throw ValidationError(where + ": negative frame index");
    if (!f[2].empty()) {
      const double s = detail::parse_double(f[2], where + " score", at);
      if (!(s >= 0.0 && s <= 1.0)) throw ValidationError(where + ": score outside [0,1]");
      r.score = s;
    }
    if (f.size() == 4 && !f[3].empty()) {
      const long l = detail::parse_long(f[3], where + " label", at);
      if (l != 0 && l != 1) throw ValidationError(where + ": label must be 0 or 1");
      r.label = static_cast<int>(l);
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

inline std::vector<FrameRecord> read_frame_scores(const std::filesystem::path& path) {
  const Bytes b = read_file(path);
  return parse_frame_scores(std::string(b.begin(), b.end()));
}

inline void write_frame_scores(const std::vector<FrameRecord>& rows,
                               const std::filesystem::path& path) {
  write_text(path, format_frame_scores(rows));
}

struct MeasurementReport {
  std::string frame;
  double aop_deg = 0.0;
  double hsd_px = 0.0;
  bool used_ellipse_ps = false;
  bool used_ellipse_fh = false;
  int prune_iters_ps = 0;
  int prune_iters_fh = 0;

  friend bool operator==(const MeasurementReport&, const MeasurementReport&) = default;
};

inline constexpr const char* kReportHeader =
    "frame,AoP_deg,HSD_px,used_ellipse_ps,used_ellipse_fh,prune_iters_ps,prune_iters_fh";

inline std::string format_report_csv(const std::vector<MeasurementReport>& rows) {
  std::string out = std::string(kReportHeader) + "\n";
  for (const auto& r : rows) {
    out += detail::csv_field(r.frame) + "," + detail::format_number(r.aop_deg) + "," +
           detail::format_number(r.hsd_px) + "," + (r.used_ellipse_ps ? "1" : "0") + "," +
           (r.used_ellipse_fh ? "1" : "0") + "," + std::to_string(r.prune_iters_ps) + "," +
           std::to_string(r.prune_iters_fh) + "\n";
  }
  return out;
}

inline void write_report_csv(const std::vector<MeasurementReport>& rows,
                             const std::filesystem::path& path) {
  write_text(path, format_report_csv(rows));
}

inline std::vector<MeasurementReport> parse_report_csv(const std::string& text) {
  std::vector<MeasurementReport> rows;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0, next = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t at = next;
    next += line.size() + 1;
    if (line.empty()) continue;
    if (line_no == 1) {
      if (line != kReportHeader) throw ValidationError("report CSV: unexpected header");
      continue;
    }
    auto f = detail::split_csv_line(line);
    const std::string where = "report line " + std::to_string(line_no);
    if (f.size() != 7) throw ParseError(where + ": expected 7 fields", at);
    MeasurementReport r;
    r.frame = f[0];
    r.aop_deg = detail::parse_double(f[1], where + " AoP", at);
    r.hsd_px = detail::parse_double(f[2], where + " HSD", at);
    r.used_ellipse_ps = detail::parse_long(f[3], where, at) != 0;
    r.used_ellipse_fh = detail::parse_long(f[4], where, at) != 0;
    r.prune_iters_ps = static_cast<int>(detail::parse_long(f[5], where, at));
    r.prune_iters_fh = static_cast<int>(detail::parse_long(f[6], where, at));
    rows.push_back(std::move(r));
  }
  return rows;
}

inline std::vector<MeasurementReport> read_report_csv(const std::filesystem::path& path) {
  const Bytes b = read_file(path);
  return parse_report_csv(std::string(b.begin(), b.end()));
}

}  // namespace aopkit::io
