#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "btcf/backtester.hpp"
#include "btcf/market_data.hpp"
#include "btcf/tuner.hpp"

namespace btcf {

/// One selected configuration, Table-3 shaped: SVR contributes one entry per
/// kernel, every other family its single best grid point.
struct BestParamsEntry {
  std::string label;  // "svr_rbf", "gradient_boosting", ...
  ModelFamily family = ModelFamily::linear_regression;
  nlohmann::json params;
  std::uint64_t seed = 0;
  double mean_mse = 0;
};

std::vector<BestParamsEntry> best_params_table(std::span<const TuneResult> results);

void save_summary_json(const SummaryStats& stats, const std::filesystem::path& path);
void save_best_params_json(std::span<const BestParamsEntry> entries,
                           const std::filesystem::path& path);
void save_best_params_csv(std::span<const BestParamsEntry> entries,
                          const std::filesystem::path& path);
std::vector<BestParamsEntry> load_best_params_json(const std::filesystem::path& path);

void save_simulation_report_json(const SimulationReport& report,
                                 const std::filesystem::path& path);

/// date,equity per decision day.
void save_equity_csv(const BacktestLedger& ledger, const std::filesystem::path& path);

struct PlotSeries {
  std::string label;
  std::vector<double> y;  // x is the day index
};

/// Minimal standalone SVG line plot (one polyline per series, shared x).
void save_line_plot_svg(const std::string& title, std::span<const PlotSeries> series,
                        const std::filesystem::path& path);

/// Render the Markdown summary of a completed run directory (summary,
/// leaderboards, best parameters, simulation table). Deterministic for fixed
/// inputs; throws InputError when the directory has no run artifacts.
std::string render_run_report(const std::filesystem::path& run_dir);

}  // namespace btcf
