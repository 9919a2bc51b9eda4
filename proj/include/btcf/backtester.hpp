#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "btcf/date.hpp"
#include "btcf/featurizer.hpp"
#include "btcf/models/model.hpp"

namespace btcf {

struct StrategyConfig {
  double initial_capital = 200000.0;
  double fees = 0.0;  // fraction of traded notional per leg, in [0, 1)
};

/// Daily close series. May carry one extra trailing day beyond the decision
/// window; that day only feeds hit evaluation, never trading or equity.
struct PriceWindow {
  std::vector<Date> dates;
  Eigen::VectorXd closes;
};

struct LedgerRow {
  Date date;
  double close = 0;
  double predicted_next_close = 0;  // USD
  bool long_signal = false;         // predicted change >= 0
  double position = 0;              // units held after today's action
  double cash = 0;
  double equity = 0;                // cash + position * close
  int hit = -1;                     // 1 hit, 0 miss, -1 not evaluable
};

struct BacktestLedger {
  std::vector<LedgerRow> rows;
  double final_value = 0;  // last row equity (open position marked to market)
  int trades = 0;          // buy or sell legs executed
};

/// All-in/all-out simulation. Day t goes long iff predicted_next[t] -
/// closes[t] >= 0; trades fill at day t's close with `fees` of the traded
/// notional per leg. predictions must cover the decision days: prices may be
/// the same length (last day then has no hit) or one day longer.
BacktestLedger run_strategy(const PriceWindow& prices, const Eigen::VectorXd& predicted_next,
                            const StrategyConfig& config);

/// Buy at the first close, hold, mark to market at the last decision-day close.
double run_buy_hold(const PriceWindow& prices, const StrategyConfig& config);

/// Directional hit counting: a day scores when sign(predicted change) equals
/// sign(actual change); a zero actual change counts only for a zero predicted
/// change. Returns (hits, evaluable days).
std::pair<int, int> count_hits(const PriceWindow& prices, const Eigen::VectorXd& predicted_next);

struct SimulationRow {
  std::string name;
  int hits = 0;
  int denominator = 0;
  double final_value = 0;
  bool failed = false;
  std::string error;
};

struct SimulationReport {
  std::vector<SimulationRow> table;  // models sorted by final value desc, then buy_hold
  std::map<std::string, BacktestLedger> ledgers;
  double buy_hold_final = 0;
};

/// Run every model over the test window: denormalize its predictions to USD,
/// simulate, count hits, and append the Buy & Hold baseline row. A model whose
/// prediction fails (e.g. schema mismatch) gets a failed row; others proceed.
/// prices must hold one more day than raw_test has samples, aligned so that
/// raw_test.sample_dates[k] == prices.dates[k+1].
SimulationReport simulate_all(std::span<const std::pair<std::string, TrainedModel>> models,
                              const FeatureMatrix& raw_test, const Normalizer& normalizer,
                              const PriceWindow& prices, const StrategyConfig& config);

/// Ledger CSV: one row per day, columns as in LedgerRow.
void save_ledger_csv(const BacktestLedger& ledger, const std::filesystem::path& path);

}  // namespace btcf
