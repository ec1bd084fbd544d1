#pragma once

// CSV interchange: confusion matrices, pmfs, distortion tables, logits
// datasets and rate-distortion curves. Comma delimiter, LF line endings,
// '#' comment lines skipped, '.' decimal point regardless of locale.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "tosc/class_bounds.hpp"
#include "tosc/curve.hpp"
#include "tosc/prob.hpp"
#include "tosc/snc.hpp"

namespace tosc::io {

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Documented pixel counts (H x W, channels excluded) for bpp conversion.
inline constexpr long kMnistPixels = 28 * 28;
inline constexpr long kCifarPixels = 32 * 32;
inline constexpr long kImageNetPixels = 224 * 224;

inline double bits_per_pixel(double rate_bits, long pixel_count) {
  if (pixel_count <= 0) throw ValidationError("pixel count must be positive");
  return rate_bits / static_cast<double>(pixel_count);
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                          : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

struct Line {
  std::size_t number;  // 1-based line number in the file
  std::string text;
};

inline std::vector<Line> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<Line> lines;
  std::string text;
  std::size_t n = 0;
  while (std::getline(in, text)) {
    ++n;
    const auto t = trim(text);
    if (t.empty() || t.front() == '#') continue;
    lines.push_back({n, std::string(t)});
  }
  return lines;
}

inline std::string where(const std::filesystem::path& path, std::size_t line, std::size_t col) {
  return path.string() + ": line " + std::to_string(line) + ", column " + std::to_string(col);
}

inline double parse_double(std::string_view tok, const std::filesystem::path& path,
                           std::size_t line, std::size_t col) {
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (tok.empty() || ec != std::errc() || ptr != tok.data() + tok.size())
    throw ParseError(where(path, line, col) + ": cannot parse number '" + std::string(tok) + "'");
  if (!std::isfinite(v))
    throw ParseError(where(path, line, col) + ": non-finite value '" + std::string(tok) + "'");
  return v;
}

inline std::string format_number(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 9);
  return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

inline std::string format_exact(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);  // shortest round-trip
  return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

}  // namespace detail

/// Writes `content` to `path` through a sibling temporary file, renamed on
/// success; nothing is left at `path` on failure.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << content;
    out.flush();
    if (!out) {
      std::error_code ignored;
      std::filesystem::remove(tmp, ignored);
      throw IoError("write failed for " + path.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot move output into place at " + path.string());
  }
}

/// Numeric table, one row per non-comment line.
inline std::vector<std::vector<double>> read_numeric_table(const std::filesystem::path& path) {
  std::vector<std::vector<double>> rows;
  for (const auto& line : detail::read_lines(path)) {
    const auto toks = detail::split(line.text);
    std::vector<double> row;
    row.reserve(toks.size());
    for (std::size_t c = 0; c < toks.size(); ++c)
      row.push_back(detail::parse_double(toks[c], path, line.number, c + 1));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError(path.string() + ": no data rows");
  for (std::size_t r = 1; r < rows.size(); ++r)
    if (rows[r].size() != rows[0].size())
      throw ParseError(path.string() + ": ragged table, row " + std::to_string(r + 1) + " has " +
                       std::to_string(rows[r].size()) + " columns, expected " +
                       std::to_string(rows[0].size()));
  return rows;
}

/// A pmf stored either as one row or one value per line.
inline Pmf read_pmf_csv(const std::filesystem::path& path) {
  std::vector<double> values;
  for (const auto& line : detail::read_lines(path)) {
    const auto toks = detail::split(line.text);
    for (std::size_t c = 0; c < toks.size(); ++c)
      values.push_back(detail::parse_double(toks[c], path, line.number, c + 1));
  }
  if (values.empty()) throw ParseError(path.string() + ": no values");
  try {
    return Pmf(std::move(values));
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

inline DistortionMatrix read_distortion_csv(const std::filesystem::path& path) {
  try {
    return DistortionMatrix(Matrix::from_rows(read_numeric_table(path)));
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

inline std::string format_pmf_csv(const Pmf& p) {
  std::string s;
  for (double v : p.probs()) s += detail::format_exact(v) + "\n";
  return s;
}

inline void write_pmf_csv(const Pmf& p, const std::filesystem::path& path) {
  write_file_atomic(path, format_pmf_csv(p));
}

enum class PriorChoice {
  kAuto,     // counts -> row mass; row-stochastic without a prior file -> error
  kUniform,
  kRowMass,
};

struct ConfusionReadOptions {
  std::optional<std::filesystem::path> prior_path;
  PriorChoice prior = PriorChoice::kAuto;
};

/// Confusion table with rows = true class, columns = predicted class. Counts
/// or probabilities; rows are normalized. An all-integer table is read as
/// counts.
inline ConfusionMatrix read_confusion_csv(const std::filesystem::path& path,
                                          const ConfusionReadOptions& opts = {}) {
  const auto rows = read_numeric_table(path);
  const std::size_t n = rows.size();
  if (rows[0].size() != n)
    throw ValidationError(path.string() + ": confusion table is " + std::to_string(n) + "x" +
                          std::to_string(rows[0].size()) + ", expected a square table");
  bool integral = true, stochastic = true;
  for (std::size_t y = 0; y < n; ++y) {
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double v = rows[y][j];
      if (v < 0.0)
        throw ValidationError(path.string() + ": negative entry at row " + std::to_string(y + 1) +
                              ", column " + std::to_string(j + 1));
      if (v != std::floor(v)) integral = false;
      sum += v;
    }
    if (!(sum > 0.0))
      throw ValidationError(path.string() + ": row " + std::to_string(y + 1) + " is all zeros");
    if (std::abs(sum - 1.0) > kProbTol) stochastic = false;
  }

  const ConfusionMatrix counts = ConfusionMatrix::from_counts(Matrix::from_rows(rows));
  if (opts.prior_path) {
    Pmf prior = read_pmf_csv(*opts.prior_path);
    if (prior.size() != n)
      throw ValidationError(opts.prior_path->string() + ": prior has " +
                            std::to_string(prior.size()) + " entries, confusion table has " +
                            std::to_string(n) + " classes");
    return ConfusionMatrix(counts.channel(), std::move(prior));
  }
  switch (opts.prior) {
    case PriorChoice::kUniform:
      return ConfusionMatrix(counts.channel(), Pmf::uniform(n));
    case PriorChoice::kRowMass:
      return counts;
    case PriorChoice::kAuto:
      break;
  }
  if (stochastic && !integral)
    throw ValidationError(path.string() +
                          ": table is already row-stochastic, so the class prior is unknown; "
                          "pass a prior file or choose 'uniform' or 'rows' explicitly");
  return counts;
}

inline std::string format_confusion_csv(const ConfusionMatrix& cm) {
  std::string s;
  const Matrix& ch = cm.channel();
  for (std::size_t y = 0; y < ch.rows(); ++y) {
    for (std::size_t j = 0; j < ch.cols(); ++j) {
      if (j) s += ',';
      s += detail::format_exact(ch(y, j));
    }
    s += '\n';
  }
  return s;
}

/// Channel table plus companion prior file.
inline void write_confusion_csv(const ConfusionMatrix& cm, const std::filesystem::path& path,
                                const std::filesystem::path& prior_path) {
  write_file_atomic(path, format_confusion_csv(cm));
  write_pmf_csv(cm.prior(), prior_path);
}

/// Header "label,l0,...,l{K-1}"; labels are 0-based class indices.
inline LogitsDataset read_logits_csv(const std::filesystem::path& path) {
  const auto lines = detail::read_lines(path);
  if (lines.empty()) throw ParseError(path.string() + ": missing header");
  const auto header = detail::split(lines[0].text);
  if (header.size() < 3 || header[0] != "label")
    throw ParseError(path.string() + ": header must be label,l0,l1,...");
  const std::size_t k = header.size() - 1;
  for (std::size_t c = 0; c < k; ++c)
    if (header[c + 1] != "l" + std::to_string(c))
      throw ParseError(detail::where(path, lines[0].number, c + 2) + ": expected header 'l" +
                       std::to_string(c) + "', found '" + std::string(header[c + 1]) + "'");

  LogitsDataset ds;
  ds.classes = k;
  std::vector<double> values;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto& line = lines[r];
    const auto toks = detail::split(line.text);
    if (toks.size() != k + 1)
      throw ParseError(detail::where(path, line.number, toks.size()) + ": expected " +
                       std::to_string(k + 1) + " fields, found " + std::to_string(toks.size()));
    long long label = 0;
    const auto [ptr, ec] = std::from_chars(toks[0].data(), toks[0].data() + toks[0].size(), label);
    if (toks[0].empty() || ec != std::errc() || ptr != toks[0].data() + toks[0].size())
      throw ParseError(detail::where(path, line.number, 1) + ": label '" + std::string(toks[0]) +
                       "' is not an integer");
    if (label < 0 || static_cast<std::size_t>(label) >= k)
      throw ParseError(detail::where(path, line.number, 1) + ": label " + std::to_string(label) +
                       " outside [0, " + std::to_string(k) + ")");
    ds.labels.push_back(static_cast<std::size_t>(label));
    for (std::size_t c = 0; c < k; ++c)
      values.push_back(detail::parse_double(toks[c + 1], path, line.number, c + 2));
  }
  if (ds.labels.size() < 2)
    throw ValidationError(path.string() + ": need at least 2 records, found " +
                          std::to_string(ds.labels.size()));
  ds.logits = Matrix(ds.labels.size(), k);
  std::copy(values.begin(), values.end(), ds.logits.row(0).data());
  ds.validate();
  return ds;
}

inline std::string format_logits_csv(const LogitsDataset& ds) {
  std::ostringstream s;
  s << "label";
  for (std::size_t c = 0; c < ds.classes; ++c) s << ",l" << c;
  s << '\n';
  for (std::size_t i = 0; i < ds.size(); ++i) {
    s << ds.labels[i];
    for (double v : ds.logits.row(i)) s << ',' << detail::format_exact(v);
    s << '\n';
  }
  return s.str();
}

inline void write_logits_csv(const LogitsDataset& ds, const std::filesystem::path& path) {
  write_file_atomic(path, format_logits_csv(ds));
}

struct CurveRecord {
  std::string method;
  std::optional<double> lambda;
  double rate = 0.0;
  double distortion = 0.0;
  std::optional<double> bpp;
  std::string flags;
};

inline constexpr std::string_view kCurveHeader = "method,lambda,rate_bits,distortion,bpp,flags";

inline std::vector<CurveRecord> to_records(const std::vector<RDCurve>& curves,
                                           std::optional<long> pixel_count = std::nullopt) {
  std::vector<CurveRecord> out;
  for (const auto& c : curves)
    for (const auto& p : c.points) {
      CurveRecord r{c.method, {}, p.rate, p.distortion, {}, p.flags};
      if (!std::isnan(p.lambda)) r.lambda = p.lambda;
      if (pixel_count) r.bpp = bits_per_pixel(p.rate, *pixel_count);
      out.push_back(std::move(r));
    }
  std::stable_sort(out.begin(), out.end(), [](const CurveRecord& a, const CurveRecord& b) {
    if (a.method != b.method) return a.method < b.method;
    return a.distortion < b.distortion;
  });
  return out;
}

inline std::string format_curves_csv(const std::vector<RDCurve>& curves,
                                     std::optional<long> pixel_count = std::nullopt) {
  if (curves.empty()) throw ValidationError("no curves to write");
  std::string s(kCurveHeader);
  s += '\n';
  for (const auto& r : to_records(curves, pixel_count)) {
    s += r.method;
    s += ',';
    if (r.lambda) s += detail::format_number(*r.lambda);
    s += ',' + detail::format_number(r.rate) + ',' + detail::format_number(r.distortion) + ',';
    if (r.bpp) s += detail::format_number(*r.bpp);
    s += ',' + r.flags + '\n';
  }
  return s;
}

inline void write_curves_csv(const std::vector<RDCurve>& curves, std::optional<long> pixel_count,
                             const std::filesystem::path& path) {
  write_file_atomic(path, format_curves_csv(curves, pixel_count));
}

/// Reads a curve file back, grouping rows by method in file order.
inline std::vector<RDCurve> read_curves_csv(const std::filesystem::path& path) {
  const auto lines = detail::read_lines(path);
  if (lines.empty() || lines[0].text != kCurveHeader)
    throw ParseError(path.string() + ": expected header " + std::string(kCurveHeader));
  std::vector<RDCurve> curves;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto toks = detail::split(lines[r].text);
    if (toks.size() != 6)
      throw ParseError(detail::where(path, lines[r].number, toks.size()) + ": expected 6 fields");
    CurvePoint p;
    if (!toks[1].empty()) p.lambda = detail::parse_double(toks[1], path, lines[r].number, 2);
    p.rate = detail::parse_double(toks[2], path, lines[r].number, 3);
    p.distortion = detail::parse_double(toks[3], path, lines[r].number, 4);
    p.flags = std::string(toks[5]);
    const std::string method(toks[0]);
    auto it = std::find_if(curves.begin(), curves.end(),
                           [&](const RDCurve& c) { return c.method == method; });
    if (it == curves.end()) {
      curves.push_back({method, {}});
      it = curves.end() - 1;
    }
    it->points.push_back(std::move(p));
  }
  return curves;
}

}  // namespace tosc::io
