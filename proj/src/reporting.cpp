#include "btcf/reporting.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "btcf/errors.hpp"

namespace btcf {

namespace {

std::string fmt(double v, const char* spec = "%.17g") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(path.string() + ": " + e.what());
  }
  return j;
}

}  // namespace

std::vector<BestParamsEntry> best_params_table(std::span<const TuneResult> results) {
  std::vector<BestParamsEntry> table;
  for (const auto& result : results) {
    if (result.family == ModelFamily::svr) {
      // Mirror the paper's split: best candidate per kernel.
      for (const std::string kernel : {"linear", "rbf"}) {
        const CandidateScore* best = nullptr;
        for (const auto& s : result.table) {
          if (s.failed || s.spec.params.value("kernel", "") != kernel) continue;
          if (!best || s.mean_mse < best->mean_mse) best = &s;
        }
        if (!best) continue;
        table.push_back({"svr_" + kernel, result.family, best->spec.params, best->spec.seed,
                         best->mean_mse});
      }
      continue;
    }
    const CandidateScore& best = result.best();
    table.push_back({to_string(result.family), result.family, best.spec.params, best.spec.seed,
                     best.mean_mse});
  }
  return table;
}

void save_summary_json(const SummaryStats& stats, const std::filesystem::path& path) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& c : stats.columns) {
    j[c.name] = {{"count", c.count}, {"mean", c.mean}, {"std", c.std}, {"min", c.min},
                 {"25%", c.q25},     {"50%", c.q50},   {"75%", c.q75}, {"max", c.max}};
  }
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

void save_best_params_json(std::span<const BestParamsEntry> entries,
                           const std::filesystem::path& path) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& e : entries)
    j.push_back({{"label", e.label},
                 {"family", to_string(e.family)},
                 {"params", e.params},
                 {"seed", e.seed},
                 {"mean_mse", e.mean_mse}});
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

void save_best_params_csv(std::span<const BestParamsEntry> entries,
                          const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << "label,family,params,mean_mse\n";
  for (const auto& e : entries)
    out << e.label << ',' << to_string(e.family) << ",\"" << e.params.dump() << "\","
        << fmt(e.mean_mse) << '\n';
}

std::vector<BestParamsEntry> load_best_params_json(const std::filesystem::path& path) {
  const nlohmann::json j = read_json(path);
  std::vector<BestParamsEntry> entries;
  for (const auto& e : j) {
    BestParamsEntry entry;
    entry.label = e.at("label").get<std::string>();
    entry.family = family_from_string(e.at("family").get<std::string>());
    entry.params = e.at("params");
    entry.seed = e.at("seed").get<std::uint64_t>();
    entry.mean_mse = e.value("mean_mse", 0.0);
    entries.push_back(std::move(entry));
  }
  return entries;
}

void save_simulation_report_json(const SimulationReport& report,
                                 const std::filesystem::path& path) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : report.table) {
    nlohmann::json row = {{"model", r.name}, {"final_value", r.final_value}};
    if (r.name != "buy_hold") {
      row["hits"] = r.hits;
      row["denominator"] = r.denominator;
    }
    if (r.failed) {
      row["failed"] = true;
      row["error"] = r.error;
    }
    rows.push_back(std::move(row));
  }
  nlohmann::json j = {{"table", rows}, {"buy_hold_final", report.buy_hold_final}};
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

void save_equity_csv(const BacktestLedger& ledger, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << "date,equity\n";
  for (const auto& r : ledger.rows) out << r.date.iso() << ',' << fmt(r.equity) << '\n';
}

void save_line_plot_svg(const std::string& title, std::span<const PlotSeries> series,
                        const std::filesystem::path& path) {
  constexpr double width = 900, height = 480;
  constexpr double left = 70, right = 20, top = 40, bottom = 40;
  const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                          "#8c564b", "#e377c2", "#7f7f7f"};

  double y_min = std::numeric_limits<double>::infinity(), y_max = -y_min;
  std::size_t n_max = 0;
  for (const auto& s : series) {
    n_max = std::max(n_max, s.y.size());
    for (double v : s.y) {
      y_min = std::min(y_min, v);
      y_max = std::max(y_max, v);
    }
  }
  if (n_max < 2 || !std::isfinite(y_min)) throw InputError("plot: need at least two points");
  if (y_max == y_min) {
    y_max += 1;
    y_min -= 1;
  }
  const double x_span = width - left - right, y_span = height - top - bottom;
  auto px = [&](std::size_t i, std::size_t n) {
    return left + x_span * static_cast<double>(i) / static_cast<double>(n - 1);
  };
  auto py = [&](double v) { return top + y_span * (1.0 - (v - y_min) / (y_max - y_min)); };

  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\""
      << " font-size=\"16\">" << title << "</text>\n";
  // axes
  out << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\""
      << height - bottom << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << height - bottom << "\" x2=\"" << width - right
      << "\" y2=\"" << height - bottom << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double v = y_min + (y_max - y_min) * k / 4.0;
    out << "<text x=\"" << left - 6 << "\" y=\"" << py(v) + 4
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << fmt(v, "%.6g")
        << "</text>\n";
    out << "<line x1=\"" << left - 3 << "\" y1=\"" << py(v) << "\" x2=\"" << left << "\" y2=\""
        << py(v) << "\" stroke=\"black\"/>\n";
  }
  std::size_t idx = 0;
  for (const auto& s : series) {
    const char* color = colors[idx % 8];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.y.size(); ++i)
      out << fmt(px(i, s.y.size()), "%.2f") << ',' << fmt(py(s.y[i]), "%.2f") << ' ';
    out << "\"/>\n";
    out << "<text x=\"" << left + 10 << "\" y=\"" << top + 16 * (idx + 1)
        << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"" << color << "\">" << s.label
        << "</text>\n";
    ++idx;
  }
  out << "</svg>\n";
}

namespace {

void render_summary_section(std::ostringstream& md, const std::filesystem::path& run_dir) {
  const auto path = run_dir / "summary.json";
  if (!std::filesystem::exists(path)) return;
  const nlohmann::json j = read_json(path);
  md << "## Data distribution\n\n";
  md << "| column | count | mean | std | min | 25% | 50% | 75% | max |\n";
  md << "|---|---|---|---|---|---|---|---|---|\n";
  for (const auto& [name, stats] : j.items()) {
    md << "| " << name;
    for (const char* key : {"count", "mean", "std", "min", "25%", "50%", "75%", "max"}) {
      if (key == std::string("count"))
        md << " | " << stats.at(key).get<long long>();
      else
        md << " | " << fmt(stats.at(key).get<double>(), "%.6g");
    }
    md << " |\n";
  }
  md << '\n';
}

void render_best_params_section(std::ostringstream& md, const std::filesystem::path& run_dir) {
  const auto path = run_dir / "best_params.json";
  if (!std::filesystem::exists(path)) return;
  md << "## Selected parameters per model\n\n";
  md << "| model | parameters | validation MSE |\n|---|---|---|\n";
  for (const auto& e : load_best_params_json(path))
    md << "| " << e.label << " | `" << e.params.dump() << "` | " << fmt(e.mean_mse, "%.6g")
       << " |\n";
  md << '\n';
}

void render_simulation_section(std::ostringstream& md, const std::filesystem::path& run_dir) {
  const auto path = run_dir / "simulation.json";
  if (!std::filesystem::exists(path)) return;
  const nlohmann::json j = read_json(path);
  md << "## Investment simulation\n\n";
  md << "| model | hits | final value (USD) |\n|---|---|---|\n";
  double sum_final = 0, sum_hits = 0;
  int n_models = 0;
  for (const auto& row : j.at("table")) {
    const std::string name = row.at("model").get<std::string>();
    if (row.value("failed", false)) {
      md << "| " << name << " | - | failed: " << row.value("error", "") << " |\n";
      continue;
    }
    if (name == "buy_hold") continue;
    md << "| " << name << " | " << row.at("hits").get<int>() << " | "
       << fmt(row.at("final_value").get<double>(), "%.2f") << " |\n";
    sum_final += row.at("final_value").get<double>();
    sum_hits += row.at("hits").get<int>();
    ++n_models;
  }
  if (n_models > 0)
    md << "| average | " << fmt(sum_hits / n_models, "%.1f") << " | "
       << fmt(sum_final / n_models, "%.2f") << " |\n";
  md << "| buy_hold | - | " << fmt(j.at("buy_hold_final").get<double>(), "%.2f") << " |\n\n";
}

}  // namespace

std::string render_run_report(const std::filesystem::path& run_dir) {
  if (!std::filesystem::is_directory(run_dir))
    throw InputError("run directory not found: " + run_dir.string());
  std::ostringstream md;
  md << "# Run report\n\n";
  bool any = false;
  for (const char* artifact : {"summary.json", "best_params.json", "simulation.json"})
    any = any || std::filesystem::exists(run_dir / artifact);
  if (!any) throw InputError("no run artifacts under " + run_dir.string());
  render_summary_section(md, run_dir);
  render_best_params_section(md, run_dir);

  // Per-family leaderboard heads.
  bool tuned_any = false;
  for (const auto& entry : std::filesystem::directory_iterator(run_dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("tune_", 0) != 0 || entry.path().extension() != ".json") continue;
    if (!tuned_any) {
      md << "## Validation MSE per family (best grid point)\n\n";
      md << "| family | best mean MSE | candidates | failed |\n|---|---|---|---|\n";
      tuned_any = true;
    }
  }
  if (tuned_any) {
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(run_dir)) {
      const std::string name = entry.path().filename().string();
      if (name.rfind("tune_", 0) == 0 && entry.path().extension() == ".json")
        files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      const TuneResult r = load_tune_result_json(f);
      md << "| " << to_string(r.family) << " | "
         << (r.table.empty() || r.table.front().failed ? std::string("-")
                                                       : fmt(r.best().mean_mse, "%.6g"))
         << " | " << r.table.size() << " | " << r.failed_count << " |\n";
    }
    md << '\n';
  }

  render_simulation_section(md, run_dir);
  return md.str();
}

}  // namespace btcf
