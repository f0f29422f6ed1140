#include "rdshift/report.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>

#include "rdshift/errors.hpp"

namespace rdshift::report {

namespace {

std::string csv_escape(const std::string& cell) {
  if (cell.find_first_of(",\"\n\r") == std::string::npos) return cell;
  std::string out = "\"";
  for (const char ch : cell) {
    out += ch;
    if (ch == '"') out += '"';
  }
  out += '"';
  return out;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (const char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

}  // namespace

std::string format_number(double v) { return fmt("%.12g", v); }

std::string format_fixed(double v) { return fmt("%.12f", v); }

Table::Table(const std::vector<std::string>& columns) {
  if (columns.empty()) throw InvalidArgument("Table: need at least one column");
  width_ = columns.size();
  for (size_t i = 0; i < columns.size(); ++i) {
    if (i) body_ += ',';
    body_ += csv_escape(columns[i]);
  }
  body_ += '\n';
}

void Table::add_row(const std::vector<std::string>& cells) {
  if (cells.size() != width_)
    throw InvalidArgument("Table: row width " + std::to_string(cells.size()) +
                          " does not match header width " +
                          std::to_string(width_));
  for (size_t i = 0; i < cells.size(); ++i) {
    if (i) body_ += ',';
    body_ += csv_escape(cells[i]);
  }
  body_ += '\n';
  ++n_rows_;
}

void Table::add_numbers(const std::vector<double>& cells) {
  std::vector<std::string> row;
  row.reserve(cells.size());
  for (const double v : cells) row.push_back(format_number(v));
  add_row(row);
}

KeyValue::Entry* KeyValue::find(const std::string& key) {
  for (auto& e : entries_)
    if (e.key == key) return &e;
  return nullptr;
}

const KeyValue::Entry* KeyValue::find(const std::string& key) const {
  for (const auto& e : entries_)
    if (e.key == key) return &e;
  return nullptr;
}

void KeyValue::set(const std::string& key, const std::string& value) {
  if (Entry* e = find(key)) {
    e->value = value;
    e->numeric = false;
  } else {
    entries_.push_back({key, value, false, 0.0});
  }
}

void KeyValue::set_number(const std::string& key, double v) {
  set(key, format_number(v));
  find(key)->numeric = true;
  find(key)->num = v;
}

void KeyValue::set_fixed(const std::string& key, double v) {
  set(key, format_fixed(v));
  find(key)->numeric = true;
  find(key)->num = v;
}

bool KeyValue::has(const std::string& key) const { return find(key) != nullptr; }

const double* KeyValue::number(const std::string& key) const {
  const Entry* e = find(key);
  return (e && e->numeric) ? &e->num : nullptr;
}

std::string KeyValue::str() const {
  std::string out;
  for (const auto& e : entries_) {
    out += e.key;
    out += '=';
    out += e.value;
    out += '\n';
  }
  return out;
}

namespace {

// Fixed layout of the plot canvas, in pixels.
constexpr double kWidth = 880, kHeight = 560;
constexpr double kLeft = 72, kRight = kWidth - 180;
constexpr double kTop = 48, kBottom = kHeight - 64;

constexpr const char* kPalette[8] = {"#1f77b4", "#d62728", "#2ca02c",
                                     "#9467bd", "#ff7f0e", "#8c564b",
                                     "#17becf", "#7f7f7f"};

struct Range {
  double lo = 0.0, hi = 1.0;
  double map(double v, double plo, double phi) const {
    return plo + (v - lo) / (hi - lo) * (phi - plo);
  }
};

Range data_range(const std::vector<Series>& series, bool want_x) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& s : series)
    for (size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      const double v = want_x ? s.x[i] : s.y[i];
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  if (!(lo <= hi)) return {0.0, 1.0};  // no finite points at all
  if (lo == hi) {
    const double pad = (lo == 0.0) ? 0.5 : 0.05 * std::fabs(lo);
    return {lo - pad, hi + pad};
  }
  return {lo, hi};
}

std::string px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

}  // namespace

std::string render_svg(const std::string& title, const std::string& x_label,
                       const std::string& y_label,
                       const std::vector<Series>& series) {
  if (series.size() > 8)
    throw InvalidArgument("render_svg: at most 8 series per plot, got " +
                          std::to_string(series.size()));
  for (const auto& s : series)
    if (s.x.size() != s.y.size())
      throw InvalidArgument("render_svg: series \"" + s.label +
                            "\": x and y lengths differ");

  const Range rx = data_range(series, true);
  const Range ry = data_range(series, false);

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"880\" "
         "height=\"560\" viewBox=\"0 0 880 560\">\n";
  svg += "<rect width=\"880\" height=\"560\" fill=\"white\"/>\n";
  svg += "<text x=\"" + px((kLeft + kRight) / 2) + "\" y=\"26\" "
         "text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">" +
         xml_escape(title) + "</text>\n";

  // Axes.
  svg += "<line x1=\"" + px(kLeft) + "\" y1=\"" + px(kBottom) + "\" x2=\"" +
         px(kRight) + "\" y2=\"" + px(kBottom) +
         "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  svg += "<line x1=\"" + px(kLeft) + "\" y1=\"" + px(kTop) + "\" x2=\"" +
         px(kLeft) + "\" y2=\"" + px(kBottom) +
         "\" stroke=\"black\" stroke-width=\"1\"/>\n";

  // Five ticks per axis, with grid lines.
  for (int i = 0; i <= 4; ++i) {
    const double fx = rx.lo + i * (rx.hi - rx.lo) / 4;
    const double sx = rx.map(fx, kLeft, kRight);
    svg += "<line x1=\"" + px(sx) + "\" y1=\"" + px(kBottom) + "\" x2=\"" +
           px(sx) + "\" y2=\"" + px(kBottom + 5) + "\" stroke=\"black\"/>\n";
    svg += "<line x1=\"" + px(sx) + "\" y1=\"" + px(kTop) + "\" x2=\"" +
           px(sx) + "\" y2=\"" + px(kBottom) +
           "\" stroke=\"#dddddd\" stroke-width=\"0.5\"/>\n";
    svg += "<text x=\"" + px(sx) + "\" y=\"" + px(kBottom + 20) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"11\">" + tick_label(fx) + "</text>\n";

    const double fy = ry.lo + i * (ry.hi - ry.lo) / 4;
    const double sy = ry.map(fy, kBottom, kTop);
    svg += "<line x1=\"" + px(kLeft - 5) + "\" y1=\"" + px(sy) + "\" x2=\"" +
           px(kLeft) + "\" y2=\"" + px(sy) + "\" stroke=\"black\"/>\n";
    svg += "<line x1=\"" + px(kLeft) + "\" y1=\"" + px(sy) + "\" x2=\"" +
           px(kRight) + "\" y2=\"" + px(sy) +
           "\" stroke=\"#dddddd\" stroke-width=\"0.5\"/>\n";
    svg += "<text x=\"" + px(kLeft - 9) + "\" y=\"" + px(sy + 4) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" "
           "font-size=\"11\">" + tick_label(fy) + "</text>\n";
  }

  // Axis labels.
  svg += "<text x=\"" + px((kLeft + kRight) / 2) + "\" y=\"" +
         px(kHeight - 18) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"13\">" + xml_escape(x_label) + "</text>\n";
  svg += "<text x=\"20\" y=\"" + px((kTop + kBottom) / 2) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"13\" transform=\"rotate(-90 20 " +
         px((kTop + kBottom) / 2) + ")\">" + xml_escape(y_label) + "</text>\n";

  // Polylines, split at non-finite points.
  for (size_t k = 0; k < series.size(); ++k) {
    const Series& s = series[k];
    const char* color = kPalette[k % 8];
    std::string points;
    const auto flush = [&]() {
      if (points.empty()) return;
      svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
             "\" stroke-width=\"1.5\" points=\"" + points + "\"/>\n";
      points.clear();
    };
    for (size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) {
        flush();
        continue;
      }
      if (!points.empty()) points += ' ';
      points += px(rx.map(s.x[i], kLeft, kRight)) + ',' +
                px(ry.map(s.y[i], kBottom, kTop));
    }
    flush();

    // Legend entry.
    const double ly = kTop + 10 + 20.0 * static_cast<double>(k);
    svg += "<line x1=\"" + px(kRight + 12) + "\" y1=\"" + px(ly) + "\" x2=\"" +
           px(kRight + 34) + "\" y2=\"" + px(ly) + "\" stroke=\"" + color +
           "\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"" + px(kRight + 40) + "\" y=\"" + px(ly + 4) +
           "\" font-family=\"sans-serif\" font-size=\"12\">" +
           xml_escape(s.label) + "</text>\n";
  }

  svg += "</svg>\n";
  return svg;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw ValidationError("cannot open \"" + path + "\" for writing");
  out << content;
  out.flush();
  if (!out)
    throw ValidationError("failed while writing \"" + path + "\"");
}

void remove_file(const std::string& path) noexcept {
  std::error_code ec;
  std::filesystem::remove(path, ec);
}

}  // namespace rdshift::report
