#pragma once
// Artifact writers: CSV tables (RFC-4180-style quoting, '.' decimal point,
// 12 significant digits), ordered key=value report blocks, and a minimal
// self-contained SVG line plot. Everything is rendered deterministically
// from the data alone, so repeated runs produce byte-identical files.

#include <string>
#include <vector>

namespace rdshift::report {

/// %.12g: up to 12 significant digits, '.' decimal point, locale-free.
std::string format_number(double v);

/// %.12f: fixed twelve decimals, for headline quantities of order one.
std::string format_fixed(double v);

/// CSV table with a mandatory header row naming every column. Rows are
/// appended with exactly the header's width (InvalidArgument otherwise).
/// Cells containing a comma, quote, or newline get RFC-4180 quoting with
/// doubled inner quotes; lines end with '\n'.
class Table {
 public:
  explicit Table(const std::vector<std::string>& columns);

  void add_row(const std::vector<std::string>& cells);
  void add_numbers(const std::vector<double>& cells);  ///< format_number each

  size_t rows() const { return n_rows_; }
  const std::string& str() const { return body_; }

 private:
  size_t width_ = 0;
  size_t n_rows_ = 0;
  std::string body_;
};

/// Ordered key=value lines ('\n'-terminated). set() keeps first-insertion
/// order on overwrite; numeric entries stay readable for threshold checks.
class KeyValue {
 public:
  void set(const std::string& key, const std::string& value);
  void set_number(const std::string& key, double v);  ///< format_number
  void set_fixed(const std::string& key, double v);   ///< format_fixed

  bool has(const std::string& key) const;
  /// The stored numeric value, or nullptr for missing / text entries.
  const double* number(const std::string& key) const;

  std::string str() const;

 private:
  struct Entry {
    std::string key, value;
    bool numeric = false;
    double num = 0.0;
  };
  std::vector<Entry> entries_;
  Entry* find(const std::string& key);
  const Entry* find(const std::string& key) const;
};

/// One polyline of a plot. x and y must have equal length; non-finite
/// points break the line into separate segments.
struct Series {
  std::string label;
  std::vector<double> x, y;
};

/// Minimal hand-emitted SVG line plot: axes with five ticks each, a title,
/// axis labels, a legend, and at most 8 polylines (InvalidArgument beyond).
std::string render_svg(const std::string& title, const std::string& x_label,
                       const std::string& y_label,
                       const std::vector<Series>& series);

/// Writes content to path in one shot; ValidationError on any I/O failure.
void write_text_file(const std::string& path, const std::string& content);

/// Best-effort removal, for clearing artifacts after a failed run.
void remove_file(const std::string& path) noexcept;

}  // namespace rdshift::report
