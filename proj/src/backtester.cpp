#include "btcf/backtester.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "btcf/errors.hpp"

namespace btcf {

namespace {

int sign_of(double x) { return x > 0 ? 1 : (x < 0 ? -1 : 0); }

void check_prices(const PriceWindow& prices, Eigen::Index n_decisions) {
  const auto m = static_cast<Eigen::Index>(prices.dates.size());
  if (prices.closes.size() != m) throw InputError("backtest: dates/closes length mismatch");
  if (m != n_decisions && m != n_decisions + 1)
    throw InputError("backtest: " + std::to_string(n_decisions) + " predictions need " +
                     std::to_string(n_decisions) + " or " + std::to_string(n_decisions + 1) +
                     " price days, got " + std::to_string(m));
  for (Eigen::Index t = 0; t < m; ++t) {
    if (!(prices.closes[t] > 0)) throw InputError("backtest: non-positive close");
    if (t > 0 && !(prices.dates[t - 1] < prices.dates[t]))
      throw InputError("backtest: dates not strictly increasing");
  }
}

}  // namespace

BacktestLedger run_strategy(const PriceWindow& prices, const Eigen::VectorXd& predicted_next,
                            const StrategyConfig& config) {
  const Eigen::Index p = predicted_next.size();
  if (p == 0) throw InputError("backtest: no decision days");
  if (config.initial_capital <= 0) throw InputError("backtest: initial capital must be > 0");
  if (config.fees < 0 || config.fees >= 1) throw InputError("backtest: fees must be in [0, 1)");
  check_prices(prices, p);
  const Eigen::Index m = prices.closes.size();

  BacktestLedger ledger;
  ledger.rows.reserve(p);
  double cash = config.initial_capital;
  double position = 0;

  for (Eigen::Index t = 0; t < p; ++t) {
    const double close = prices.closes[t];
    const double predicted_change = predicted_next[t] - close;
    const bool go_long = predicted_change >= 0;

    if (go_long && position == 0 && cash > 0) {
      const double fee = config.fees * cash;
      position = (cash - fee) / close;
      cash = 0;
      ++ledger.trades;
    } else if (!go_long && position > 0) {
      const double proceeds = position * close;
      cash = proceeds - config.fees * proceeds;
      position = 0;
      ++ledger.trades;
    }

    LedgerRow row;
    row.date = prices.dates[static_cast<std::size_t>(t)];
    row.close = close;
    row.predicted_next_close = predicted_next[t];
    row.long_signal = go_long;
    row.position = position;
    row.cash = cash;
    row.equity = cash + position * close;
    if (t + 1 < m) {
      const double actual_change = prices.closes[t + 1] - close;
      row.hit = sign_of(predicted_change) == sign_of(actual_change) ? 1 : 0;
    }
    ledger.rows.push_back(row);
  }
  ledger.final_value = ledger.rows.back().equity;
  return ledger;
}

double run_buy_hold(const PriceWindow& prices, const StrategyConfig& config) {
  if (prices.dates.empty()) throw InputError("buy & hold: empty price window");
  check_prices(prices, static_cast<Eigen::Index>(prices.dates.size()));
  const double entry_fee = config.fees * config.initial_capital;
  const double units = (config.initial_capital - entry_fee) / prices.closes[0];
  return units * prices.closes[prices.closes.size() - 1];
}

std::pair<int, int> count_hits(const PriceWindow& prices, const Eigen::VectorXd& predicted_next) {
  const Eigen::Index p = predicted_next.size();
  if (p == 0) throw InputError("count_hits: no predictions");
  check_prices(prices, p);
  const Eigen::Index m = prices.closes.size();
  int hits = 0, evaluable = 0;
  for (Eigen::Index t = 0; t + 1 < m && t < p; ++t) {
    ++evaluable;
    const int predicted = sign_of(predicted_next[t] - prices.closes[t]);
    const int actual = sign_of(prices.closes[t + 1] - prices.closes[t]);
    if (predicted == actual) ++hits;
  }
  return {hits, evaluable};
}

SimulationReport simulate_all(std::span<const std::pair<std::string, TrainedModel>> models,
                              const FeatureMatrix& raw_test, const Normalizer& normalizer,
                              const PriceWindow& prices, const StrategyConfig& config) {
  const Eigen::Index n = raw_test.n_samples();
  if (static_cast<Eigen::Index>(prices.dates.size()) != n + 1)
    throw InputError("simulate_all: prices must cover the decision days plus the final target");
  for (Eigen::Index k = 0; k < n; ++k)
    if (raw_test.sample_dates[static_cast<std::size_t>(k)] !=
        prices.dates[static_cast<std::size_t>(k) + 1])
      throw InputError("simulate_all: sample dates misaligned with the price window");

  const FeatureMatrix scaled = transform(raw_test, normalizer);
  SimulationReport report;

  // Baseline over the decision days only.
  PriceWindow decisions;
  decisions.dates.assign(prices.dates.begin(), prices.dates.end() - 1);
  decisions.closes = prices.closes.head(n);
  report.buy_hold_final = run_buy_hold(decisions, config);

  std::vector<SimulationRow> model_rows;
  for (const auto& [name, model] : models) {
    SimulationRow row;
    row.name = name;
    try {
      const Eigen::VectorXd normalized_pred = model.predict(scaled.X);
      Eigen::VectorXd usd_pred(n);
      for (Eigen::Index i = 0; i < n; ++i)
        usd_pred[i] = inverse_transform_target(normalized_pred[i], normalizer);
      BacktestLedger ledger = run_strategy(prices, usd_pred, config);
      const auto [hits, denominator] = count_hits(prices, usd_pred);
      row.hits = hits;
      row.denominator = denominator;
      row.final_value = ledger.final_value;
      report.ledgers.emplace(name, std::move(ledger));
    } catch (const std::exception& e) {
      row.failed = true;
      row.error = e.what();
    }
    model_rows.push_back(std::move(row));
  }

  std::stable_sort(model_rows.begin(), model_rows.end(),
                   [](const SimulationRow& a, const SimulationRow& b) {
                     if (a.failed != b.failed) return !a.failed;
                     return a.final_value > b.final_value;
                   });
  report.table = std::move(model_rows);

  SimulationRow baseline;
  baseline.name = "buy_hold";
  baseline.final_value = report.buy_hold_final;
  baseline.denominator = 0;
  report.table.push_back(std::move(baseline));
  return report;
}

void save_ledger_csv(const BacktestLedger& ledger, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << "date,close,predicted_next_close,signal,position,cash,equity,hit\n";
  char buf[160];
  for (const auto& r : ledger.rows) {
    std::snprintf(buf, sizeof(buf), "%s,%.17g,%.17g,%s,%.17g,%.17g,%.17g,%s\n",
                  r.date.iso().c_str(), r.close, r.predicted_next_close,
                  r.long_signal ? "long" : "flat", r.position, r.cash, r.equity,
                  r.hit < 0 ? "" : (r.hit ? "1" : "0"));
    out << buf;
  }
}

}  // namespace btcf
