#include "numdual/experiment.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "numdual/distributed.hpp"
#include "numdual/metrics.hpp"

namespace numdual {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string fmt(const char* format, double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, value);
  return buf;
}

ExperimentCell cell_from_json(const json& obj, std::size_t index) {
  const auto ctx = [index](const std::string& what) {
    std::ostringstream msg;
    msg << "experiment spec, cell " << index << ": " << what;
    return msg.str();
  };
  ExperimentCell cell;
  const json& network = obj.contains("network") ? obj["network"] : obj;
  cell.kind = network.value("kind", cell.kind);
  if (cell.kind != "uniform" && cell.kind != "random")
    fail(Errc::kValidation, ctx("network kind must be uniform or random"));
  if (!network.contains("m") || !network.contains("n"))
    fail(Errc::kValidation, ctx("network needs m and n"));
  cell.m = network["m"].get<int>();
  cell.n = network["n"].get<int>();
  cell.b_value = network.value("b_value", cell.b_value);
  cell.network_seed = network.value("seed", cell.network_seed);
  if (obj.contains("utilities")) {
    const json& u = obj["utilities"];
    cell.utility = u.value("family", cell.utility);
    cell.utility_seed = u.value("seed", cell.utility_seed);
  }
  if (cell.utility != "quadratic" && cell.utility != "log")
    fail(Errc::kValidation, ctx("utility family must be quadratic or log"));
  if (!obj.contains("methods") || !obj["methods"].is_array() ||
      obj["methods"].empty())
    fail(Errc::kValidation, ctx("methods list must be nonempty"));
  for (const json& name : obj["methods"]) {
    method_from_name(name.get<std::string>());  // validates
    cell.methods.push_back(name.get<std::string>());
  }
  if (!obj.contains("eps") || !obj["eps"].is_array() || obj["eps"].empty())
    fail(Errc::kValidation, ctx("eps list must be nonempty"));
  for (const json& e : obj["eps"]) {
    const double eps = e.get<double>();
    if (!(eps > 0.0)) fail(Errc::kValidation, ctx("eps must be positive"));
    cell.eps.push_back(eps);
  }
  if (obj.contains("seeds")) {
    cell.seeds.clear();
    for (const json& s : obj["seeds"])
      cell.seeds.push_back(s.get<std::uint64_t>());
    if (cell.seeds.empty())
      fail(Errc::kValidation, ctx("seeds list must be nonempty"));
  }
  cell.R = obj.value("R", cell.R);
  cell.max_iter = obj.value("max_iter", cell.max_iter);
  cell.record_every = obj.value("record_every", cell.record_every);
  cell.M_override = obj.value("M_override", cell.M_override);
  cell.early_exit = obj.value("early_exit", cell.early_exit);
  return cell;
}

NetworkProblem build_instance(const ExperimentCell& cell) {
  NetworkProblem problem =
      cell.kind == "uniform"
          ? generate_uniform_network(cell.m, cell.n, cell.b_value)
          : generate_random_network(cell.m, cell.n, cell.network_seed);
  if (cell.utility == "quadratic")
    problem.set_utilities(make_quadratic_utilities(cell.n, cell.utility_seed));
  else
    problem.set_utilities(make_log_utilities(problem));
  return problem;
}

void write_atomically(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) fail(Errc::kIo, "cannot open '" + tmp + "' for writing");
    out << content;
    if (!out) fail(Errc::kIo, "write to '" + tmp + "' failed");
  }
  fs::rename(tmp, path);
}

std::string run_file_stem(std::size_t cell_idx, const std::string& method,
                          double eps, std::uint64_t seed) {
  std::ostringstream name;
  name << "cell" << cell_idx << "_" << method << "_eps" << fmt("%g", eps)
       << "_seed" << seed;
  std::string stem = name.str();
  for (char& c : stem)
    if (c == '.' || c == '+') c = 'p';
  return stem;
}

// Theorem feasibility scale per method: FGM proves eps/(3R), the ellipsoid
// certificate eps/R, RGEM eps/(2R) in expectation, SGM eps/R in expectation.
double feasibility_scale(Method method, double R) {
  switch (method) {
    case Method::kFgm: return 3.0 * R;
    case Method::kEllipsoid: return R;
    case Method::kRgem: return 2.0 * R;
    default: return R;
  }
}

bool is_stochastic(const std::string& method) {
  return method == "sgm1" || method == "sgm2" || method == "rgem";
}

struct Aggregate {
  std::string instance;
  std::string method;
  double eps = 0.0;
  std::vector<double> iters_hit;
  std::vector<double> wall;
  long long iterations = 0;
  double gap_sum = 0.0;
  double feas_sum = 0.0;
  int runs = 0;
  int errors = 0;
};

std::string mean_std(const std::vector<double>& values) {
  if (values.empty()) return "-";
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  if (values.size() == 1) return fmt("%.0f", mean);
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= static_cast<double>(values.size() - 1);
  return fmt("%.0f", mean) + " +- " + fmt("%.0f", std::sqrt(var));
}

}  // namespace

ExperimentSpec experiment_spec_from_json_string(const std::string& text) {
  json obj;
  try {
    obj = json::parse(text);
  } catch (const json::exception& e) {
    fail(Errc::kParse, std::string("experiment spec: ") + e.what());
  }
  try {
    ExperimentSpec spec;
    spec.table = obj.value("table", spec.table);
    if (spec.table != "quadratic-table" && spec.table != "log-table")
      fail(Errc::kValidation,
           "experiment spec: table must be quadratic-table or log-table");
    spec.output_dir = obj.value("output_dir", spec.output_dir);
    if (!obj.contains("cells") || !obj["cells"].is_array() ||
        obj["cells"].empty())
      fail(Errc::kValidation, "experiment spec: cells list must be nonempty");
    for (std::size_t i = 0; i < obj["cells"].size(); ++i)
      spec.cells.push_back(cell_from_json(obj["cells"][i], i));
    return spec;
  } catch (const json::exception& e) {
    fail(Errc::kParse, std::string("experiment spec: ") + e.what());
  }
}

ExperimentSpec load_experiment_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::kIo, "cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return experiment_spec_from_json_string(buffer.str());
}

ExperimentOutcome run_experiment(const ExperimentSpec& spec,
                                 const std::string& out_dir, bool check) {
  fs::create_directories(out_dir);
  ExperimentOutcome outcome;

  std::vector<Aggregate> aggregates;
  for (std::size_t ci = 0; ci < spec.cells.size(); ++ci) {
    const ExperimentCell& cell = spec.cells[ci];
    const NetworkProblem problem = build_instance(cell);
    std::ostringstream instance;
    instance << cell.kind << " " << cell.utility << " m=" << cell.m
             << " n=" << cell.n;

    // Reference optimum for --check, when the oracle applies.
    double reference_utility = std::numeric_limits<double>::quiet_NaN();
    if (check) {
      try {
        reference_utility = brute_force_solve(problem).value;
      } catch (const Error&) {
        // Oracle not applicable at this size; checks are skipped.
      }
    }

    for (const std::string& method_str : cell.methods) {
      const Method method = method_from_name(method_str);
      for (double eps : cell.eps) {
        Aggregate agg;
        agg.instance = instance.str();
        agg.method = method_str;
        agg.eps = eps;
        for (std::uint64_t seed : cell.seeds) {
          SummaryRow row;
          row.instance = instance.str();
          row.m = cell.m;
          row.n = cell.n;
          row.eps = eps;
          row.method = method_str;
          row.seed = seed;
          row.final_gap = std::numeric_limits<double>::quiet_NaN();
          try {
            SolverConfig config;
            config.eps = eps;
            config.R = cell.R;
            config.seed = seed;
            config.max_iter = cell.max_iter;
            config.record_every = cell.record_every;
            config.M_override = cell.M_override;
            config.early_exit = cell.early_exit;
            const SolverReport report = solve(problem, method, config);

            row.iterations = report.iterations;
            row.wall_ms = report.wall_ms;
            if (!report.history.empty()) {
              const HistoryRow& last = report.history.back();
              if (last.gap) row.final_gap = *last.gap;
              row.final_feas = last.feas;
              for (const HistoryRow& h : report.history) {
                if (h.gap && *h.gap <= eps) {
                  row.iters_to_eps = h.iter;
                  break;
                }
              }
            }
            const std::string stem =
                run_file_stem(ci, method_str, eps, seed);
            write_atomically(out_dir + "/" + stem + ".json",
                             report_to_json_string(report) + "\n");
            write_atomically(out_dir + "/" + stem + ".csv",
                             report_trace_csv(report));

            if (check && std::isfinite(reference_utility)) {
              const double utility_gap =
                  reference_utility - total_utility(problem, report.x_hat);
              const double feas =
                  feasibility_violation(problem, report.x_hat);
              // 2x slack on stochastic methods: their bounds hold in
              // expectation, single runs fluctuate.
              const double slack = is_stochastic(method_str) ? 2.0 : 1.0;
              const double feas_limit =
                  slack * eps / feasibility_scale(method, cell.R);
              if (utility_gap > slack * eps || feas > feas_limit)
                ++outcome.check_failures;
            }
          } catch (const Error& e) {
            row.error = e.what();
            ++agg.errors;
          }
          if (row.error.empty()) {
            agg.runs += 1;
            agg.iterations = row.iterations;
            agg.wall.push_back(row.wall_ms);
            if (row.iters_to_eps >= 0)
              agg.iters_hit.push_back(static_cast<double>(row.iters_to_eps));
            if (std::isfinite(row.final_gap)) agg.gap_sum += row.final_gap;
            agg.feas_sum += row.final_feas;
          }
          outcome.rows.push_back(std::move(row));
        }
        aggregates.push_back(std::move(agg));
      }
    }
  }

  // Machine-readable twin: one row per run.
  std::ostringstream csv;
  csv << "instance,m,n,eps,method,seed,iterations,iters_to_eps,wall_ms,"
         "final_gap,final_feas,error\n";
  for (const SummaryRow& row : outcome.rows) {
    csv << row.instance << ',' << row.m << ',' << row.n << ','
        << fmt("%.17g", row.eps) << ',' << row.method << ',' << row.seed << ','
        << row.iterations << ',' << row.iters_to_eps << ','
        << fmt("%.17g", row.wall_ms) << ',' << fmt("%.17g", row.final_gap)
        << ',' << fmt("%.17g", row.final_feas) << ',' << row.error << '\n';
  }
  outcome.summary_csv = csv.str();

  // Aligned text table: iterations next to wall time per
  // (instance, method, eps).
  std::vector<std::array<std::string, 6>> lines;
  lines.push_back({"instance", "method", "eps", "iterations (to eps)",
                   "wall ms", "final gap / feas"});
  for (const Aggregate& agg : aggregates) {
    std::array<std::string, 6> line;
    line[0] = agg.instance;
    line[1] = agg.method;
    line[2] = fmt("%g", agg.eps);
    if (agg.runs == 0) {
      line[3] = "error";
      line[4] = "-";
      line[5] = "-";
    } else {
      const std::string hits = mean_std(agg.iters_hit);
      line[3] = std::to_string(agg.iterations) +
                (agg.iters_hit.empty() ? " (-)" : " (" + hits + ")");
      line[4] = mean_std(agg.wall);
      line[5] = fmt("%.3g", agg.gap_sum / agg.runs) + " / " +
                fmt("%.3g", agg.feas_sum / agg.runs);
    }
    lines.push_back(std::move(line));
  }
  std::array<std::size_t, 6> width{};
  for (const auto& line : lines)
    for (std::size_t c = 0; c < 6; ++c)
      width[c] = std::max(width[c], line[c].size());
  std::ostringstream text;
  text << "table: " << spec.table << "\n";
  for (const auto& line : lines) {
    for (std::size_t c = 0; c < 6; ++c) {
      text << line[c] << std::string(width[c] - line[c].size(), ' ');
      text << (c + 1 < 6 ? "  " : "");
    }
    text << '\n';
  }
  outcome.summary_text = text.str();

  write_atomically(out_dir + "/summary.csv", outcome.summary_csv);
  write_atomically(out_dir + "/summary.txt", outcome.summary_text);
  return outcome;
}

namespace {

struct Series {
  std::vector<std::pair<double, double>> points;  // iter, log10(value)
  int color = 0;
  bool dashed = false;
  std::string label;
};

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

}  // namespace

std::string render_convergence_svg(const std::vector<SolverReport>& reports,
                                   const std::vector<std::string>& labels) {
  if (reports.empty())
    fail(Errc::kValidation, "plot needs at least one report");
  if (!labels.empty() && labels.size() != reports.size())
    fail(Errc::kInvalidArgument, "one label per report expected");

  constexpr double kFloor = 1e-16;
  std::vector<Series> series;
  double x_max = 1.0, y_lo = 0.0, y_hi = -15.0;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const SolverReport& report = reports[i];
    if (report.history.empty())
      fail(Errc::kValidation, "plot rejects reports with empty history");
    const std::string label =
        labels.empty() ? method_name(report.method) : labels[i];
    Series gap, feas;
    gap.color = feas.color = static_cast<int>(i % 8);
    gap.label = label;
    feas.dashed = true;
    for (const HistoryRow& row : report.history) {
      const double it = static_cast<double>(row.iter);
      x_max = std::max(x_max, it);
      if (row.gap && std::isfinite(*row.gap)) {
        const double v = std::log10(std::max(*row.gap, kFloor));
        gap.points.emplace_back(it, v);
        y_lo = std::min(y_lo, v);
        y_hi = std::max(y_hi, v);
      }
      const double f = std::log10(std::max(row.feas, kFloor));
      feas.points.emplace_back(it, f);
      y_lo = std::min(y_lo, f);
      y_hi = std::max(y_hi, f);
    }
    if (!gap.points.empty()) series.push_back(std::move(gap));
    if (!feas.points.empty()) series.push_back(std::move(feas));
  }
  if (series.empty())
    fail(Errc::kValidation, "plot found no finite positive values");
  y_lo = std::floor(y_lo) - 0.2;
  y_hi = std::ceil(y_hi) + 0.2;

  constexpr double W = 860, H = 520, ML = 70, MR = 200, MT = 30, MB = 50;
  const double plot_w = W - ML - MR, plot_h = H - MT - MB;
  const auto sx = [&](double it) { return ML + plot_w * it / x_max; };
  const auto sy = [&](double lg) {
    return MT + plot_h * (y_hi - lg) / (y_hi - y_lo);
  };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W
      << "\" height=\"" << H << "\" viewBox=\"0 0 " << W << " " << H
      << "\">\n";
  svg << "<rect width=\"" << W << "\" height=\"" << H
      << "\" fill=\"white\"/>\n";
  svg << "<rect x=\"" << ML << "\" y=\"" << MT << "\" width=\"" << plot_w
      << "\" height=\"" << plot_h
      << "\" fill=\"none\" stroke=\"#333333\"/>\n";

  // Horizontal grid at integer powers of ten.
  for (int e = static_cast<int>(std::ceil(y_lo)); e <= y_hi; ++e) {
    const double y = sy(e);
    svg << "<line x1=\"" << ML << "\" y1=\"" << fmt("%.2f", y) << "\" x2=\""
        << ML + plot_w << "\" y2=\"" << fmt("%.2f", y)
        << "\" stroke=\"#dddddd\"/>\n";
    svg << "<text x=\"" << ML - 8 << "\" y=\"" << fmt("%.2f", y + 4)
        << "\" text-anchor=\"end\" font-size=\"12\" font-family=\"sans-serif\">"
        << "1e" << e << "</text>\n";
  }
  // A handful of round x ticks.
  double step = std::pow(10.0, std::floor(std::log10(x_max)));
  if (x_max / step < 2) step /= 5;
  else if (x_max / step < 5) step /= 2;
  for (double tick = 0.0; tick <= x_max + 1e-9; tick += step) {
    const double x = sx(tick);
    svg << "<line x1=\"" << fmt("%.2f", x) << "\" y1=\"" << MT + plot_h
        << "\" x2=\"" << fmt("%.2f", x) << "\" y2=\"" << MT + plot_h + 5
        << "\" stroke=\"#333333\"/>\n";
    svg << "<text x=\"" << fmt("%.2f", x) << "\" y=\"" << MT + plot_h + 20
        << "\" text-anchor=\"middle\" font-size=\"12\" "
           "font-family=\"sans-serif\">"
        << fmt("%g", tick) << "</text>\n";
  }
  svg << "<text x=\"" << ML + plot_w / 2 << "\" y=\"" << H - 12
      << "\" text-anchor=\"middle\" font-size=\"13\" "
         "font-family=\"sans-serif\">iteration</text>\n";

  for (const Series& s : series) {
    svg << "<polyline fill=\"none\" stroke=\"" << kPalette[s.color]
        << "\" stroke-width=\"1.5\"";
    if (s.dashed) svg << " stroke-dasharray=\"6 3\"";
    svg << " points=\"";
    for (const auto& [it, lg] : s.points)
      svg << fmt("%.2f", sx(it)) << ',' << fmt("%.2f", sy(lg)) << ' ';
    svg << "\"/>\n";
  }

  // Legend: one color swatch per report plus the line-style key.
  double ly = MT + 10;
  for (const Series& s : series) {
    if (s.dashed) continue;
    svg << "<line x1=\"" << ML + plot_w + 15 << "\" y1=\"" << fmt("%.2f", ly)
        << "\" x2=\"" << ML + plot_w + 45 << "\" y2=\"" << fmt("%.2f", ly)
        << "\" stroke=\"" << kPalette[s.color] << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << ML + plot_w + 52 << "\" y=\"" << fmt("%.2f", ly + 4)
        << "\" font-size=\"12\" font-family=\"sans-serif\">" << s.label
        << "</text>\n";
    ly += 18;
  }
  ly += 8;
  svg << "<text x=\"" << ML + plot_w + 15 << "\" y=\"" << fmt("%.2f", ly + 4)
      << "\" font-size=\"11\" font-family=\"sans-serif\">solid: gap, dashed: "
         "feasibility</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

void plot_convergence(const std::vector<SolverReport>& reports,
                      const std::vector<std::string>& labels,
                      const std::string& out_path) {
  write_atomically(out_path, render_convergence_svg(reports, labels));
}

}  // namespace numdual
