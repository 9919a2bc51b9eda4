#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "btcf/date.hpp"

namespace btcf {

/// One daily OHLCV observation. Prices in USD, volume in USD.
struct Bar {
  Date date;
  double open = 0, high = 0, low = 0, close = 0, volume = 0;
};

/// One daily Fear & Greed index reading, 0 (extreme fear) .. 100 (extreme greed).
struct SentimentPoint {
  Date date;
  int value = 0;
  std::string classification;  // informational label from the source
};

struct OhlcvParse {
  std::vector<Bar> bars;  // sorted by date ascending
  int skipped_rows = 0;   // rows containing "null" fields
};

/// Date-joined bars + sentiment (+ indicator columns once attached).
/// Stored column-major as a dense matrix; NaN marks missing (warmup) cells.
struct AlignedDataset {
  std::vector<Date> dates;           // strictly increasing
  std::vector<std::string> columns;  // "open","high","low","close","volume","fng",...
  Eigen::MatrixXd values;            // dates.size() x columns.size()
  int dropped_bars = 0;              // bars without a matching sentiment date
  int dropped_sentiment = 0;         // sentiment points without a matching bar

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }
  /// Index of a named column; throws InputError if absent.
  Eigen::Index column_index(std::string_view name) const;
  Eigen::VectorXd column(std::string_view name) const;
  /// First row where every column is present, or rows() if none.
  Eigen::Index first_complete_row() const;
};

/// Per-column distribution summary (count ignores missing cells).
struct ColumnStats {
  std::string name;
  Eigen::Index count = 0;
  double mean = 0, std = 0, min = 0, q25 = 0, q50 = 0, q75 = 0, max = 0;
};

struct SummaryStats {
  std::vector<ColumnStats> columns;
};

/// Parse a Yahoo-style OHLCV export: header Date,Open,High,Low,Close,Adj Close,Volume.
/// Rows come back sorted by date regardless of input order; "null" rows are
/// skipped and counted; a duplicate date or malformed row throws InputError
/// with the offending line number. The Adj Close column is ignored.
OhlcvParse parse_ohlcv_csv(std::string_view text);

/// Parse the Fear & Greed API wire format:
///   {"data":[{"value":"26","value_classification":"Fear","timestamp":"1655683200"},...]}
/// Timestamps are UNIX seconds, converted to UTC dates; output sorted ascending.
std::vector<SentimentPoint> parse_fng_json(std::string_view text);

/// Inner join on date. Rows present in only one source are dropped and counted.
/// Throws InputError when the date intersection is empty.
AlignedDataset align(std::span<const Bar> bars, std::span<const SentimentPoint> sentiment);

/// Table-style distribution summary of the requested columns.
/// Quartiles use linear interpolation between order statistics; std uses the
/// sample (n-1) denominator.
SummaryStats summarize(const AlignedDataset& dataset, std::span<const std::string> columns);

/// Dataset persistence: CSV with a `date` first column and an empty field as
/// the missing-value token. load(save(d)) == d, including column order.
void save_dataset(const AlignedDataset& dataset, const std::filesystem::path& path);
AlignedDataset load_dataset(const std::filesystem::path& path);

}  // namespace btcf
