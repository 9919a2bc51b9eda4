#include "btcf/market_data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "btcf/errors.hpp"

namespace btcf {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool parse_double(std::string_view s, double& out) {
  char* end = nullptr;
  std::string tmp(s);
  out = std::strtod(tmp.c_str(), &end);
  return end == tmp.c_str() + tmp.size() && !tmp.empty() && std::isfinite(out);
}

void check_bar(const Bar& b, std::size_t line_no) {
  auto fail = [&](const char* what) {
    throw InputError("ohlcv line " + std::to_string(line_no) + ": " + what);
  };
  if (!(b.open > 0 && b.high > 0 && b.low > 0 && b.close > 0)) fail("non-positive price");
  if (b.volume < 0) fail("negative volume");
  if (b.low > b.high) fail("low above high");
  if (b.open < b.low || b.open > b.high) fail("open outside [low, high]");
  if (b.close < b.low || b.close > b.high) fail("close outside [low, high]");
}

// The persisted dataset schema, in fixed order. Files may carry the base
// columns alone or base + the full default indicator set.
const std::vector<std::string> kBaseColumns = {"open", "high", "low",
                                               "close", "volume", "fng"};
const std::vector<std::string> kIndicatorColumns = {
    "ma_10",  "ma_20",  "ma_30",  "macd_line", "macd_signal", "macd_hist", "rsi_6",
    "rsi_12", "rsi_24", "mfi_14", "obv",       "bb_upper",    "bb_mid",    "bb_lower"};

void check_schema(const std::vector<std::string>& cols) {
  auto fail = [&] {
    std::string got;
    for (const auto& c : cols) got += (got.empty() ? "" : ",") + c;
    throw InputError("dataset schema mismatch: got columns [" + got + "]");
  };
  if (cols.size() != kBaseColumns.size() &&
      cols.size() != kBaseColumns.size() + kIndicatorColumns.size())
    fail();
  for (std::size_t i = 0; i < kBaseColumns.size(); ++i)
    if (cols[i] != kBaseColumns[i]) fail();
  for (std::size_t i = kBaseColumns.size(); i < cols.size(); ++i)
    if (cols[i] != kIndicatorColumns[i - kBaseColumns.size()]) fail();
}

}  // namespace

Eigen::Index AlignedDataset::column_index(std::string_view name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return static_cast<Eigen::Index>(i);
  throw InputError("unknown column: " + std::string(name));
}

Eigen::VectorXd AlignedDataset::column(std::string_view name) const {
  return values.col(column_index(name));
}

Eigen::Index AlignedDataset::first_complete_row() const {
  for (Eigen::Index r = 0; r < rows(); ++r)
    if (!values.row(r).hasNaN()) return r;
  return rows();
}

OhlcvParse parse_ohlcv_csv(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t pos = text.find('\n', start);
    if (pos == std::string_view::npos) {
      if (start < text.size()) lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
  if (lines.empty()) throw InputError("ohlcv: empty document");

  auto header = split_csv_line(trim(lines[0]));
  const std::vector<std::string_view> expected = {"Date",  "Open",      "High",  "Low",
                                                  "Close", "Adj Close", "Volume"};
  if (header.size() != expected.size() ||
      !std::equal(header.begin(), header.end(), expected.begin(),
                  [](std::string_view a, std::string_view b) { return trim(a) == b; }))
    throw InputError("ohlcv: unexpected header, want Date,Open,High,Low,Close,Adj Close,Volume");

  OhlcvParse result;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    std::string_view line = trim(lines[i]);
    if (line.empty()) continue;
    const std::size_t line_no = i + 1;
    auto fields = split_csv_line(line);
    if (fields.size() != 7)
      throw InputError("ohlcv line " + std::to_string(line_no) + ": expected 7 fields, got " +
                       std::to_string(fields.size()));
    bool has_null = false;
    for (auto f : fields)
      if (trim(f) == "null") has_null = true;
    if (has_null) {
      ++result.skipped_rows;
      continue;
    }
    auto date = Date::parse_iso(trim(fields[0]));
    if (!date)
      throw InputError("ohlcv line " + std::to_string(line_no) + ": bad date '" +
                       std::string(trim(fields[0])) + "'");
    Bar bar;
    bar.date = *date;
    double adj_close_ignored;
    if (!parse_double(trim(fields[1]), bar.open) || !parse_double(trim(fields[2]), bar.high) ||
        !parse_double(trim(fields[3]), bar.low) || !parse_double(trim(fields[4]), bar.close) ||
        !parse_double(trim(fields[5]), adj_close_ignored) ||
        !parse_double(trim(fields[6]), bar.volume))
      throw InputError("ohlcv line " + std::to_string(line_no) + ": malformed numeric field");
    check_bar(bar, line_no);
    result.bars.push_back(bar);
  }

  std::sort(result.bars.begin(), result.bars.end(),
            [](const Bar& a, const Bar& b) { return a.date < b.date; });
  for (std::size_t i = 1; i < result.bars.size(); ++i)
    if (result.bars[i].date == result.bars[i - 1].date)
      throw InputError("ohlcv: duplicate date " + result.bars[i].date.iso());
  return result;
}

namespace {

[[noreturn]] void fail_fng_entry(std::size_t entry_no, const std::string& what) {
  throw InputError("fng entry " + std::to_string(entry_no) + ": " + what);
}

long long parse_integer_field(const nlohmann::json& v, std::size_t entry_no,
                              const char* field) {
  if (v.is_number_integer()) return v.get<long long>();
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    std::size_t used = 0;
    long long out = 0;
    try {
      out = std::stoll(s, &used);
    } catch (const std::exception&) {
      fail_fng_entry(entry_no, std::string("non-integer ") + field + " '" + s + "'");
    }
    if (used != s.size())
      fail_fng_entry(entry_no, std::string("non-integer ") + field + " '" + s + "'");
    return out;
  }
  fail_fng_entry(entry_no, std::string("non-integer ") + field);
}

}  // namespace

std::vector<SentimentPoint> parse_fng_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(std::string("fng: invalid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("data") || !doc["data"].is_array())
    throw InputError("fng: missing 'data' array");

  std::vector<SentimentPoint> points;
  std::size_t entry_no = 0;
  for (const auto& entry : doc["data"]) {
    ++entry_no;
    if (!entry.is_object() || !entry.contains("value") || !entry.contains("timestamp"))
      fail_fng_entry(entry_no, "expected object with 'value' and 'timestamp'");

    const long long value = parse_integer_field(entry["value"], entry_no, "value");
    if (value < 0 || value > 100)
      fail_fng_entry(entry_no, "value " + std::to_string(value) + " outside 0..100");
    const long long ts = parse_integer_field(entry["timestamp"], entry_no, "timestamp");

    SentimentPoint p;
    p.date = Date::from_unix_seconds(ts);
    p.value = static_cast<int>(value);
    if (entry.contains("value_classification") && entry["value_classification"].is_string())
      p.classification = entry["value_classification"].get<std::string>();
    points.push_back(std::move(p));
  }

  std::sort(points.begin(), points.end(),
            [](const SentimentPoint& a, const SentimentPoint& b) { return a.date < b.date; });
  for (std::size_t i = 1; i < points.size(); ++i)
    if (points[i].date == points[i - 1].date)
      throw InputError("fng: duplicate date " + points[i].date.iso());
  return points;
}

AlignedDataset align(std::span<const Bar> bars, std::span<const SentimentPoint> sentiment) {
  for (std::size_t i = 1; i < bars.size(); ++i)
    if (!(bars[i - 1].date < bars[i].date)) throw InputError("align: bars not date-sorted");
  for (std::size_t i = 1; i < sentiment.size(); ++i)
    if (!(sentiment[i - 1].date < sentiment[i].date))
      throw InputError("align: sentiment not date-sorted");

  AlignedDataset out;
  out.columns = kBaseColumns;
  std::vector<std::array<double, 6>> rows;
  std::size_t bi = 0, si = 0;
  while (bi < bars.size() && si < sentiment.size()) {
    if (bars[bi].date < sentiment[si].date) {
      ++out.dropped_bars;
      ++bi;
    } else if (sentiment[si].date < bars[bi].date) {
      ++out.dropped_sentiment;
      ++si;
    } else {
      const Bar& b = bars[bi];
      out.dates.push_back(b.date);
      rows.push_back({b.open, b.high, b.low, b.close, b.volume,
                      static_cast<double>(sentiment[si].value)});
      ++bi;
      ++si;
    }
  }
  out.dropped_bars += static_cast<int>(bars.size() - bi);
  out.dropped_sentiment += static_cast<int>(sentiment.size() - si);

  if (rows.empty()) throw InputError("align: empty date intersection");
  out.values.resize(static_cast<Eigen::Index>(rows.size()), 6);
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (int c = 0; c < 6; ++c) out.values(static_cast<Eigen::Index>(r), c) = rows[r][c];
  return out;
}

namespace {

double interpolated_quantile(const std::vector<double>& sorted, double q) {
  const double h = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = static_cast<std::size_t>(std::ceil(h));
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

SummaryStats summarize(const AlignedDataset& dataset, std::span<const std::string> columns) {
  SummaryStats stats;
  for (const auto& name : columns) {
    const Eigen::VectorXd col = dataset.column(name);  // throws on unknown column
    std::vector<double> vals;
    vals.reserve(static_cast<std::size_t>(col.size()));
    for (Eigen::Index i = 0; i < col.size(); ++i)
      if (!std::isnan(col[i])) vals.push_back(col[i]);
    if (vals.empty()) throw InputError("summarize: column '" + name + "' has no values");
    std::sort(vals.begin(), vals.end());

    ColumnStats cs;
    cs.name = name;
    cs.count = static_cast<Eigen::Index>(vals.size());
    double sum = 0;
    for (double v : vals) sum += v;
    cs.mean = sum / static_cast<double>(vals.size());
    double ss = 0;
    for (double v : vals) ss += (v - cs.mean) * (v - cs.mean);
    cs.std = vals.size() > 1 ? std::sqrt(ss / static_cast<double>(vals.size() - 1)) : 0.0;
    cs.min = vals.front();
    cs.max = vals.back();
    cs.q25 = interpolated_quantile(vals, 0.25);
    cs.q50 = interpolated_quantile(vals, 0.50);
    cs.q75 = interpolated_quantile(vals, 0.75);
    stats.columns.push_back(std::move(cs));
  }
  return stats;
}

void save_dataset(const AlignedDataset& dataset, const std::filesystem::path& path) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw InputError("cannot write " + path.string());
    out << "date";
    for (const auto& c : dataset.columns) out << ',' << c;
    out << '\n';
    char buf[40];
    for (Eigen::Index r = 0; r < dataset.rows(); ++r) {
      out << dataset.dates[static_cast<std::size_t>(r)].iso();
      for (Eigen::Index c = 0; c < dataset.cols(); ++c) {
        const double v = dataset.values(r, c);
        if (std::isnan(v)) {
          out << ',';
        } else {
          std::snprintf(buf, sizeof(buf), "%.17g", v);
          out << ',' << buf;
        }
      }
      out << '\n';
    }
    if (!out) throw InputError("write failed: " + path.string());
  }
  std::filesystem::rename(tmp, path);
}

AlignedDataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw InputError("dataset file empty: " + path.string());

  auto header = split_csv_line(trim(line));
  if (header.empty() || header[0] != "date")
    throw InputError("dataset schema mismatch: first column must be 'date'");
  AlignedDataset out;
  for (std::size_t i = 1; i < header.size(); ++i) out.columns.emplace_back(trim(header[i]));
  check_schema(out.columns);

  std::vector<std::vector<double>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view sv = trim(line);
    if (sv.empty()) continue;
    auto fields = split_csv_line(sv);
    if (fields.size() != out.columns.size() + 1)
      throw InputError("dataset line " + std::to_string(line_no) + ": field count mismatch");
    auto date = Date::parse_iso(trim(fields[0]));
    if (!date) throw InputError("dataset line " + std::to_string(line_no) + ": bad date");
    if (!out.dates.empty() && !(out.dates.back() < *date))
      throw InputError("dataset line " + std::to_string(line_no) + ": dates not increasing");
    out.dates.push_back(*date);
    std::vector<double> row(out.columns.size());
    for (std::size_t c = 0; c < out.columns.size(); ++c) {
      std::string_view f = trim(fields[c + 1]);
      if (f.empty()) {
        row[c] = kNaN;
      } else if (!parse_double(f, row[c])) {
        throw InputError("dataset line " + std::to_string(line_no) + ": bad number '" +
                         std::string(f) + "'");
      }
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InputError("dataset has no rows: " + path.string());
  out.values.resize(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(out.columns.size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < out.columns.size(); ++c)
      out.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  return out;
}

}  // namespace btcf
