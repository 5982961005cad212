#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "imsam/samplers.hpp"

namespace imsam {

enum class SweepAxis { Epsilon, T, NDim };

std::string_view axis_name(SweepAxis a);
std::optional<SweepAxis> parse_axis(std::string_view name);

/// Problem selection plus parameters; only the fields relevant to the named
/// problem are consulted. Valid names: random_walk, lorenz63, quadratic.
struct ProblemSpec {
  std::string name = "random_walk";
  int n_dim = 2;        // random_walk steps / quadratic dimension
  double alpha = 1.0;   // random_walk cubic coupling
  double beta = 1.0;    // random_walk quartic coupling
  double epsilon = 1e-4;
  double T = 0.05;      // lorenz63 observation time
};

struct ExperimentConfig {
  ProblemSpec problem;
  std::vector<Method> methods;
  SweepAxis axis = SweepAxis::Epsilon;
  std::vector<double> grid;  // nonempty, positive, strictly increasing
  long n_samples = 10000;
  std::uint64_t seed = 1;
  std::string output_dir = "out";
  bool emit_predictions = false;
};

/// Parses a config from JSON text. Unknown keys anywhere are rejected.
ExperimentConfig load_config(const std::string& json_text);
ExperimentConfig load_config_file(const std::string& path);

/// Built-in sweep configs reproducing the four benchmark figures:
///   fig1  random walk N=2, epsilon sweep, all four methods
///   fig2  random walk, N sweep at epsilon = 1e-5
///   fig3  Lorenz '63, T sweep at epsilon = 1
///   fig4  Lorenz '63, epsilon sweep at T = 0.05
ExperimentConfig builtin_figure_config(std::string_view fig);

struct ResultRow {
  std::string problem;
  std::string method;
  std::string axis;
  double axis_value = 0.0;
  int dim = 0;
  long n_samples = 0;
  std::uint64_t seed = 0;
  std::optional<double> q_hat;
  std::optional<double> q_se;
  std::optional<double> q_pred;
  std::string status;  // "ok" or the failure message

  bool ok() const { return status == "ok"; }
  friend bool operator==(const ResultRow&, const ResultRow&) = default;
};

struct ResultTable {
  std::vector<ResultRow> rows;
  friend bool operator==(const ResultTable&, const ResultTable&) = default;
};

/// Runs the configured sweep: build problem at each grid value, find the
/// mode, draw an ensemble per method, estimate Q, attach predictions.
/// Per-point failures are recorded in the row status; the sweep continues.
/// Deterministic given the seed.
ResultTable run_sweep(const ExperimentConfig& cfg);

/// CSV with columns
/// problem,method,axis,axis_value,dim,n_samples,seed,q_hat,q_se,q_pred,status
/// Floats are written as shortest round-trip decimals; absent values as
/// empty fields.
std::string format_csv(const ResultTable& table);
void write_csv(const ResultTable& table, const std::string& path);
ResultTable parse_csv(const std::string& text);
ResultTable read_csv(const std::string& path);

/// Slope of the reference line for one series: declared by
/// (problem, axis, method) where the scaling is known, otherwise a
/// least-squares fit to the data.
double reference_slope(const std::string& problem, const std::string& axis,
                       const std::string& method, const std::vector<double>& xs,
                       const std::vector<double>& ys);

/// Log-log scatter of q_hat against the sweep axis, one marker style per
/// method (lm turquoise square, slm blue diamond, rm red dot, srm purple
/// circle), plus a reference line per method anchored to predictions when
/// present. Throws if the table has no successful row.
std::string render_plot_svg(const ResultTable& table);
void emit_plot(const ResultTable& table, const std::string& path);

/// Text summary: per-method fitted slope, constant and prediction ratio,
/// plus a failure count.
std::string report(const ResultTable& table);

}  // namespace imsam
