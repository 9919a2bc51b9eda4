#include "btcf/indicators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "btcf/errors.hpp"

namespace btcf {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Index of the first finite element, or size() if none.
Eigen::Index first_finite(const Eigen::VectorXd& x) {
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (!std::isnan(x[i])) return i;
  return x.size();
}

Eigen::VectorXd nan_vector(Eigen::Index n) { return Eigen::VectorXd::Constant(n, kNaN); }

}  // namespace

Eigen::VectorXd sma(const Eigen::VectorXd& x, int period) {
  if (period < 1) throw InputError("sma: period must be >= 1");
  const Eigen::Index n = x.size(), s = first_finite(x);
  Eigen::VectorXd out = nan_vector(n);
  if (n - s < period) return out;
  double sum = 0;
  for (Eigen::Index t = s; t < n; ++t) {
    sum += x[t];
    if (t - s >= period) sum -= x[t - period];
    if (t - s >= period - 1) out[t] = sum / period;
  }
  return out;
}

Eigen::VectorXd ema(const Eigen::VectorXd& x, int period) {
  if (period < 1) throw InputError("ema: period must be >= 1");
  const Eigen::Index n = x.size(), s = first_finite(x);
  Eigen::VectorXd out = nan_vector(n);
  if (n - s < period) return out;
  const double alpha = 2.0 / (period + 1);
  double seed = 0;
  for (Eigen::Index t = s; t < s + period; ++t) seed += x[t];
  out[s + period - 1] = seed / period;
  for (Eigen::Index t = s + period; t < n; ++t)
    out[t] = alpha * x[t] + (1.0 - alpha) * out[t - 1];
  return out;
}

MacdResult macd(const Eigen::VectorXd& close, const MacdParams& params) {
  if (params.fast >= params.slow) throw InputError("macd: fast period must be < slow period");
  MacdResult r;
  const Eigen::VectorXd fast = ema(close, params.fast);
  const Eigen::VectorXd slow = ema(close, params.slow);
  r.line = fast.binaryExpr(slow, [](double a, double b) { return a - b; });
  r.signal = ema(r.line, params.signal);
  r.hist = r.line.binaryExpr(r.signal, [](double a, double b) { return a - b; });
  return r;
}

Eigen::VectorXd rsi(const Eigen::VectorXd& close, int period) {
  if (period < 1) throw InputError("rsi: period must be >= 1");
  const Eigen::Index n = close.size(), s = first_finite(close);
  Eigen::VectorXd out = nan_vector(n);
  if (n - s < period + 1) return out;

  auto rsi_value = [](double avg_gain, double avg_loss) {
    if (avg_loss == 0.0 && avg_gain == 0.0) return 50.0;
    if (avg_loss == 0.0) return 100.0;
    if (avg_gain == 0.0) return 0.0;
    const double rs = avg_gain / avg_loss;
    return 100.0 - 100.0 / (1.0 + rs);
  };

  double avg_gain = 0, avg_loss = 0;
  for (Eigen::Index t = s + 1; t <= s + period; ++t) {
    const double d = close[t] - close[t - 1];
    avg_gain += std::max(d, 0.0);
    avg_loss += std::max(-d, 0.0);
  }
  avg_gain /= period;
  avg_loss /= period;
  out[s + period] = rsi_value(avg_gain, avg_loss);

  // Wilder smoothing thereafter.
  for (Eigen::Index t = s + period + 1; t < n; ++t) {
    const double d = close[t] - close[t - 1];
    avg_gain = (avg_gain * (period - 1) + std::max(d, 0.0)) / period;
    avg_loss = (avg_loss * (period - 1) + std::max(-d, 0.0)) / period;
    out[t] = rsi_value(avg_gain, avg_loss);
  }
  return out;
}

Eigen::VectorXd mfi(const Eigen::VectorXd& high, const Eigen::VectorXd& low,
                    const Eigen::VectorXd& close, const Eigen::VectorXd& volume, int period) {
  if (period < 1) throw InputError("mfi: period must be >= 1");
  const Eigen::Index n = close.size();
  if (high.size() != n || low.size() != n || volume.size() != n)
    throw InputError("mfi: input length mismatch");
  const Eigen::Index s = std::max({first_finite(high), first_finite(low), first_finite(close),
                                   first_finite(volume)});
  Eigen::VectorXd out = nan_vector(n);
  if (n - s < period + 1) return out;

  // Signed money flows; unchanged typical price contributes to neither side.
  Eigen::VectorXd pos = Eigen::VectorXd::Zero(n), neg = Eigen::VectorXd::Zero(n);
  auto typical = [&](Eigen::Index t) { return (high[t] + low[t] + close[t]) / 3.0; };
  for (Eigen::Index t = s + 1; t < n; ++t) {
    const double tp = typical(t), prev = typical(t - 1);
    const double flow = tp * volume[t];
    if (tp > prev)
      pos[t] = flow;
    else if (tp < prev)
      neg[t] = flow;
  }
  double pos_sum = 0, neg_sum = 0;
  for (Eigen::Index t = s + 1; t < n; ++t) {
    pos_sum += pos[t];
    neg_sum += neg[t];
    if (t - s > period) {
      pos_sum -= pos[t - period];
      neg_sum -= neg[t - period];
    }
    if (t - s >= period) {
      const double denom = pos_sum + neg_sum;
      out[t] = denom == 0.0 ? 50.0 : 100.0 * pos_sum / denom;
    }
  }
  return out;
}

Eigen::VectorXd obv(const Eigen::VectorXd& close, const Eigen::VectorXd& volume) {
  const Eigen::Index n = close.size();
  if (volume.size() != n) throw InputError("obv: input length mismatch");
  const Eigen::Index s = std::max(first_finite(close), first_finite(volume));
  Eigen::VectorXd out = nan_vector(n);
  if (s >= n) return out;
  out[s] = 0.0;
  for (Eigen::Index t = s + 1; t < n; ++t) {
    if (close[t] > close[t - 1])
      out[t] = out[t - 1] + volume[t];
    else if (close[t] < close[t - 1])
      out[t] = out[t - 1] - volume[t];
    else
      out[t] = out[t - 1];
  }
  return out;
}

BollingerResult bollinger(const Eigen::VectorXd& close, const BollingerParams& params) {
  if (params.period < 2) throw InputError("bollinger: period must be >= 2");
  const Eigen::Index n = close.size(), s = first_finite(close);
  const int p = params.period;
  BollingerResult r{nan_vector(n), nan_vector(n), nan_vector(n)};
  if (n - s < p) return r;
  for (Eigen::Index t = s + p - 1; t < n; ++t) {
    const auto window = close.segment(t - p + 1, p);
    const double mean = window.mean();
    const double var = (window.array() - mean).square().sum() / p;  // population
    const double offset = params.width * std::sqrt(var);
    r.mid[t] = mean;
    r.upper[t] = mean + offset;
    r.lower[t] = mean - offset;
  }
  return r;
}

std::vector<std::string> IndicatorConfig::column_names() const {
  std::vector<std::string> names;
  for (int p : ma_periods) names.push_back("ma_" + std::to_string(p));
  names.insert(names.end(), {"macd_line", "macd_signal", "macd_hist"});
  for (int p : rsi_periods) names.push_back("rsi_" + std::to_string(p));
  names.push_back("mfi_" + std::to_string(mfi_period));
  names.push_back("obv");
  names.insert(names.end(), {"bb_upper", "bb_mid", "bb_lower"});
  return names;
}

int IndicatorConfig::warmup_rows() const {
  int warmup = 0;
  for (int p : ma_periods) warmup = std::max(warmup, p - 1);
  warmup = std::max(warmup, macd.slow - 1 + macd.signal - 1);
  for (int p : rsi_periods) warmup = std::max(warmup, p);
  warmup = std::max(warmup, mfi_period);
  warmup = std::max(warmup, bollinger.period - 1);
  return warmup;
}

void IndicatorConfig::validate() const {
  for (int p : ma_periods)
    if (p < 1) throw InputError("indicator config: ma period must be >= 1");
  if (ma_periods.empty() || rsi_periods.empty())
    throw InputError("indicator config: empty period list");
  for (int p : rsi_periods)
    if (p < 1) throw InputError("indicator config: rsi period must be >= 1");
  if (macd.fast < 1 || macd.signal < 1 || macd.fast >= macd.slow)
    throw InputError("indicator config: macd requires 1 <= fast < slow and signal >= 1");
  if (mfi_period < 1) throw InputError("indicator config: mfi period must be >= 1");
  if (bollinger.period < 2) throw InputError("indicator config: bollinger period must be >= 2");
}

AlignedDataset attach_indicators(const AlignedDataset& dataset, const IndicatorConfig& config) {
  config.validate();
  if (dataset.rows() == 0) throw InputError("attach_indicators: empty dataset");
  const int required = config.warmup_rows() + 1;
  if (dataset.rows() < required)
    throw InputError("attach_indicators: dataset has " + std::to_string(dataset.rows()) +
                     " rows, need at least " + std::to_string(required) +
                     " to cover the indicator warmup");

  const Eigen::VectorXd high = dataset.column("high");
  const Eigen::VectorXd low = dataset.column("low");
  const Eigen::VectorXd close = dataset.column("close");
  const Eigen::VectorXd volume = dataset.column("volume");

  std::vector<Eigen::VectorXd> cols;
  for (int p : config.ma_periods) cols.push_back(sma(close, p));
  MacdResult m = macd(close, config.macd);
  cols.push_back(std::move(m.line));
  cols.push_back(std::move(m.signal));
  cols.push_back(std::move(m.hist));
  for (int p : config.rsi_periods) cols.push_back(rsi(close, p));
  cols.push_back(mfi(high, low, close, volume, config.mfi_period));
  cols.push_back(obv(close, volume));
  BollingerResult b = bollinger(close, config.bollinger);
  cols.push_back(std::move(b.upper));
  cols.push_back(std::move(b.mid));
  cols.push_back(std::move(b.lower));

  AlignedDataset out = dataset;
  const auto names = config.column_names();
  out.values.conservativeResize(dataset.rows(),
                                dataset.cols() + static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < cols.size(); ++i) {
    out.columns.push_back(names[i]);
    out.values.col(dataset.cols() + static_cast<Eigen::Index>(i)) = cols[i];
  }
  return out;
}

}  // namespace btcf
