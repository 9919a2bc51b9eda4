#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "btcf/market_data.hpp"

namespace btcf {

// All series functions return a column the same length as their input, with
// NaN over the warmup prefix where the indicator is not yet defined. A NaN
// prefix on the input (e.g. macd feeding its signal line) is skipped, the
// window logic starting at the first finite element.

struct MacdParams {
  int fast = 12, slow = 26, signal = 9;
};

struct BollingerParams {
  int period = 20;
  double width = 2.0;  // band half-width in population standard deviations
};

struct IndicatorConfig {
  std::vector<int> ma_periods{10, 20, 30};
  MacdParams macd;
  std::vector<int> rsi_periods{6, 12, 24};
  int mfi_period = 14;
  BollingerParams bollinger;

  /// Indicator column names in the fixed persisted order.
  std::vector<std::string> column_names() const;
  /// Rows before the first row on which every indicator is defined.
  int warmup_rows() const;
  void validate() const;  // throws InputError on bad parameters
};

struct MacdResult {
  Eigen::VectorXd line, signal, hist;
};

struct BollingerResult {
  Eigen::VectorXd upper, mid, lower;
};

/// Simple moving average over [t-period+1, t].
Eigen::VectorXd sma(const Eigen::VectorXd& x, int period);

/// Exponential moving average, alpha = 2/(period+1), seeded with the simple
/// mean of the first `period` values.
Eigen::VectorXd ema(const Eigen::VectorXd& x, int period);

/// MACD line = ema(fast) - ema(slow); signal = ema of the line; hist = line - signal.
MacdResult macd(const Eigen::VectorXd& close, const MacdParams& params = {});

/// Wilder RSI in [0, 100]. Zero-denominator conventions: no losses -> 100,
/// no gains -> 0, neither -> 50.
Eigen::VectorXd rsi(const Eigen::VectorXd& close, int period);

/// Money Flow Index in [0, 100] over typical-price money flows; days with an
/// unchanged typical price count toward neither flow. Zero denominator -> 50.
Eigen::VectorXd mfi(const Eigen::VectorXd& high, const Eigen::VectorXd& low,
                    const Eigen::VectorXd& close, const Eigen::VectorXd& volume, int period = 14);

/// On-balance volume, seeded at 0.
Eigen::VectorXd obv(const Eigen::VectorXd& close, const Eigen::VectorXd& volume);

/// Bollinger bands: mid = sma(period), offset = width * population std of the window.
BollingerResult bollinger(const Eigen::VectorXd& close, const BollingerParams& params = {});

/// Append all indicator columns to a base (ohlcv + fng) dataset. The input is
/// untouched; the result carries `config.column_names()` extra columns with
/// NaN inside each column's warmup. Throws InputError if the dataset is too
/// short to produce a single fully-defined row.
AlignedDataset attach_indicators(const AlignedDataset& dataset, const IndicatorConfig& config = {});

}  // namespace btcf
