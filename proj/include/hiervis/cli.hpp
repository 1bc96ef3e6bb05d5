#ifndef HIERVIS_CLI_HPP
#define HIERVIS_CLI_HPP

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hiervis/dataset.hpp"
#include "hiervis/draws_io.hpp"
#include "hiervis/evaluation.hpp"
#include "hiervis/layout.hpp"
#include "hiervis/model_spec.hpp"
#include "hiervis/posterior.hpp"
#include "hiervis/render.hpp"
#include "hiervis/sampler.hpp"
#include "hiervis/svg.hpp"
#include "hiervis/version.hpp"

namespace hiervis::cli {

namespace detail {

struct CommonInputs {
  std::string data_path;
  std::vector<std::string> grouping_specs;  // name=path
  int anchor_year = 2018;
};

inline Dataset load_inputs(const CommonInputs& in, ModelKind kind,
                           OutputMetadata* meta) {
  Dataset ds = load_observations(in.data_path, {}, {}, in.anchor_year);
  if (meta) meta->inputs["data"] = in.data_path;
  for (const auto& spec : in.grouping_specs) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos) {
      fail("config", "--grouping expects name=path, got '" + spec + "'");
    }
    const std::string name = spec.substr(0, eq);
    const std::string path = spec.substr(eq + 1);
    ds = attach_grouping(ds, load_grouping(path, name));
    if (meta) meta->inputs["grouping:" + name] = path;
  }
  // The composite grouping derives from region x income when the model
  // needs it and only the parents were supplied.
  if (kind == ModelKind::income_region && !ds.has_grouping("income_region") &&
      ds.has_grouping("region") && ds.has_grouping("income")) {
    ds = derive_composite_grouping(ds, "region", "income", "income_region");
  }
  return ds;
}

inline std::vector<double> parse_levels(const std::string& csv) {
  std::vector<double> out;
  for (const auto& piece : split_csv_line(csv)) {
    out.push_back(parse_double(piece, "in --levels"));
  }
  if (out.empty()) fail("config", "--levels must name at least one level");
  return out;
}

inline Palette palette_from(const std::string& flag_path) {
  if (!flag_path.empty()) return load_palette(flag_path);
  if (const char* env = std::getenv("HIERVIS_PALETTE")) {
    if (*env) return load_palette(env);
  }
  return Palette{};
}

inline void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("io", "cannot write " + path);
  out << content;
}

inline std::string sibling(const std::string& data_path,
                           const std::string& name) {
  return (std::filesystem::path(data_path).parent_path() / name).string();
}

// Median composite lines for every unit plus the hyper line per parent
// level ("global" for the one-level model).
struct MedianLines {
  std::map<std::string, FitLine> unit;
  std::map<std::string, FitLine> group;              // keyed by parent label
  std::map<std::string, std::string> parent_of;      // unit -> label
};

inline MedianLines median_lines(const PosteriorDraws& draws,
                                const ModelSpec& spec, const Dataset& ds) {
  MedianLines out;
  const UnitParamDraws up = composite_unit_params(draws, spec, ds);
  for (std::size_t c = 0; c < up.units.size(); ++c) {
    out.unit[up.units[c]] = {summarize(up.intercept[c], {0.8}).median,
                             summarize(up.slope[c], {0.8}).median};
  }
  for (std::size_t k = 0; k < up.hyper_labels.size(); ++k) {
    out.group[up.hyper_labels[k]] = {
        summarize(up.hyper_intercept[k], {0.8}).median,
        summarize(up.hyper_slope[k], {0.8}).median};
  }
  out.parent_of = up.parent_of;
  return out;
}

// Builds the ragged data-space layout for a fitted model, grouped by
// `grouping` (rows), using data plus fit extents.
inline GridLayout data_space_layout(const PosteriorDraws& draws,
                                    const ModelSpec& spec, const Dataset& ds,
                                    const std::string& grouping,
                                    ScalePolicy policy) {
  const MedianLines lines = median_lines(draws, spec, ds);
  const GroupingTable& table = ds.grouping(grouping);

  double t_lo = 0.0, t_hi = 0.0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    t_lo = std::min(t_lo, ds.time(i));
    t_hi = std::max(t_hi, ds.time(i));
  }

  std::map<std::string, std::pair<double, double>> unit_extent;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto& o = ds.observations()[i];
    auto it = unit_extent.find(o.unit);
    if (it == unit_extent.end()) {
      unit_extent[o.unit] = {o.value, o.value};
    } else {
      it->second.first = std::min(it->second.first, o.value);
      it->second.second = std::max(it->second.second, o.value);
    }
  }

  std::vector<UnitPanelInput> units;
  for (const auto& unit : spec.units) {
    const FitLine& line = lines.unit.at(unit);
    auto extent = unit_extent.at(unit);
    extent.first = std::min({extent.first, line.intercept + line.slope * t_lo,
                             line.intercept + line.slope * t_hi});
    extent.second = std::max({extent.second, line.intercept + line.slope * t_lo,
                              line.intercept + line.slope * t_hi});
    units.push_back({unit, table.label_of(unit),
                     lines.unit.at(unit).slope, extent.first, extent.second,
                     true});
  }

  // Group rows: pooled data extent plus the hyper line for that label.
  std::map<std::string, std::pair<double, double>> group_extent;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto& o = ds.observations()[i];
    const std::string label = table.label_of(o.unit);
    auto it = group_extent.find(label);
    if (it == group_extent.end()) {
      group_extent[label] = {o.value, o.value};
    } else {
      it->second.first = std::min(it->second.first, o.value);
      it->second.second = std::max(it->second.second, o.value);
    }
  }
  std::vector<GroupPanelInput> groups;
  for (const auto& [label, extent] : group_extent) {
    // One-level models carry a single global hyper used for every row.
    const FitLine line = lines.group.count(label)
                             ? lines.group.at(label)
                             : lines.group.at("global");
    const double lo = std::min({extent.first, line.intercept + line.slope * t_lo,
                                line.intercept + line.slope * t_hi});
    const double hi = std::max({extent.second,
                                line.intercept + line.slope * t_lo,
                                line.intercept + line.slope * t_hi});
    groups.push_back({label, line.slope, lo, hi, true});
  }
  return ragged_layout(units, groups, t_lo, t_hi, policy, grouping);
}

inline std::map<std::string, FitLine> group_lines_for_layout(
    const MedianLines& lines, const GridLayout& layout) {
  std::map<std::string, FitLine> out;
  for (const auto& row : layout.rows) {
    out[row.group] = lines.group.count(row.group)
                         ? lines.group.at(row.group)
                         : lines.group.at("global");
  }
  return out;
}

}  // namespace detail

// Full pipeline entry point; returns a process exit code. Domain errors
// print their message and exit 1; CLI misuse exits 2.
inline int run(std::vector<std::string> args) {
  CLI::App app{"Hierarchical-model fitting, comparison and visualisation"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  // --- fit ---------------------------------------------------------------
  auto* fit_cmd = app.add_subcommand("fit", "Fit a model by Gibbs sampling");
  detail::CommonInputs fit_in;
  std::string fit_model = "country", fit_out = "draws.csv";
  McmcConfig fit_mc;
  bool fit_prior_only = false;
  fit_cmd->add_option("--model", fit_model, "Model kind")
      ->check(CLI::IsMember(
          {"nonpooled", "country", "region", "income", "income_region"}));
  fit_cmd->add_option("--data", fit_in.data_path, "Observations file")
      ->required();
  fit_cmd->add_option("--grouping", fit_in.grouping_specs,
                      "Grouping as name=path (repeatable)");
  fit_cmd->add_option("--anchor-year", fit_in.anchor_year,
                      "Year the intercept refers to");
  fit_cmd->add_option("--chains", fit_mc.chains, "Number of chains");
  fit_cmd->add_option("--iters", fit_mc.iterations, "Post-warmup iterations");
  fit_cmd->add_option("--warmup", fit_mc.warmup, "Warmup iterations");
  fit_cmd->add_option("--thin", fit_mc.thin, "Keep every thin-th draw");
  fit_cmd->add_option("--seed", fit_mc.seed, "RNG seed");
  fit_cmd->add_flag("--prior-only", fit_prior_only, "Sample the prior");
  fit_cmd->add_option("--out", fit_out, "Draws file to write");

  // --- summarize -----------------------------------------------------------
  auto* sum_cmd =
      app.add_subcommand("summarize", "Interval summaries of unit parameters");
  detail::CommonInputs sum_in;
  std::string sum_draws, sum_levels = "0.8,0.95", sum_out;
  sum_cmd->add_option("--draws", sum_draws, "Draws file")->required();
  sum_cmd->add_option("--data", sum_in.data_path, "Observations file")
      ->required();
  sum_cmd->add_option("--grouping", sum_in.grouping_specs, "name=path");
  sum_cmd->add_option("--anchor-year", sum_in.anchor_year, "Anchor year");
  sum_cmd->add_option("--levels", sum_levels, "Credible levels, comma separated");
  sum_cmd->add_option("--out", sum_out, "Output file (default stdout)");

  // --- loo -----------------------------------------------------------------
  auto* loo_cmd = app.add_subcommand("loo", "PSIS leave-one-out evaluation");
  detail::CommonInputs loo_in;
  std::string loo_draws, loo_out, loo_model;
  loo_cmd->add_option("--draws", loo_draws, "Draws file")->required();
  loo_cmd->add_option("--data", loo_in.data_path, "Observations file")
      ->required();
  loo_cmd->add_option("--grouping", loo_in.grouping_specs, "name=path");
  loo_cmd->add_option("--anchor-year", loo_in.anchor_year, "Anchor year");
  loo_cmd->add_option("--model", loo_model,
                      "Model kind (validated against the draws metadata)");
  loo_cmd->add_option("--out", loo_out, "Result file to write");

  // --- compare ---------------------------------------------------------------
  auto* cmp_cmd = app.add_subcommand("compare", "Compare LOO result files");
  std::vector<std::string> cmp_files;
  std::string cmp_out;
  cmp_cmd->add_option("results", cmp_files, "LOO result files")
      ->expected(2, -1);
  cmp_cmd->add_option("--out", cmp_out, "Output file (default stdout)");

  // --- predict -----------------------------------------------------------
  auto* pred_cmd =
      app.add_subcommand("predict", "Posterior predictions for a year");
  detail::CommonInputs pred_in;
  std::string pred_draws, pred_unit, pred_levels = "0.5,0.8,0.95", pred_out;
  int pred_year = 2022;
  bool pred_mean_only = false;
  std::uint64_t pred_seed = 2022;
  pred_cmd->add_option("--draws", pred_draws, "Draws file")->required();
  pred_cmd->add_option("--data", pred_in.data_path, "Observations file")
      ->required();
  pred_cmd->add_option("--grouping", pred_in.grouping_specs, "name=path");
  pred_cmd->add_option("--anchor-year", pred_in.anchor_year, "Anchor year");
  pred_cmd->add_option("--unit", pred_unit, "Single unit (default: all)");
  pred_cmd->add_option("--year", pred_year, "Calendar year to predict");
  pred_cmd->add_option("--levels", pred_levels, "Interval levels");
  pred_cmd->add_flag("--no-noise", pred_mean_only,
                     "Predict the line, not a new observation");
  pred_cmd->add_option("--seed", pred_seed, "Noise stream seed");
  pred_cmd->add_option("--out", pred_out, "Output file (default stdout)");

  // --- plot ------------------------------------------------------------------
  auto* plot_cmd = app.add_subcommand("plot", "Render a figure as SVG");
  plot_cmd->require_subcommand(1);

  auto* pds_cmd =
      plot_cmd->add_subcommand("data-space", "Model fits over the data");
  detail::CommonInputs pds_in;
  std::string pds_draws, pds_out = "data_space.svg", pds_scales = "per_row";
  std::string pds_group_by, pds_palette;
  pds_cmd->add_option("--draws", pds_draws, "Draws file")->required();
  pds_cmd->add_option("--data", pds_in.data_path, "Observations file")
      ->required();
  pds_cmd->add_option("--grouping", pds_in.grouping_specs, "name=path");
  pds_cmd->add_option("--anchor-year", pds_in.anchor_year, "Anchor year");
  pds_cmd->add_option("--group-by", pds_group_by,
                      "Grouping that forms the rows");
  pds_cmd->add_option("--scales", pds_scales, "Scale policy")
      ->check(CLI::IsMember({"global", "per_row", "free"}));
  pds_cmd->add_option("--palette", pds_palette, "Palette override file");
  pds_cmd->add_option("--out", pds_out, "SVG path");

  auto* pcp_cmd = plot_cmd->add_subcommand(
      "compare-params", "Parameter estimates across models");
  detail::CommonInputs pcp_in;
  std::vector<std::string> pcp_draws;
  std::string pcp_param = "intercept", pcp_grid, pcp_out = "compare.svg";
  std::string pcp_palette, pcp_levels = "0.8,0.95";
  pcp_cmd->add_option("--draws", pcp_draws, "Draws files (repeatable)")
      ->required();
  pcp_cmd->add_option("--data", pcp_in.data_path, "Observations file")
      ->required();
  pcp_cmd->add_option("--grouping", pcp_in.grouping_specs, "name=path");
  pcp_cmd->add_option("--anchor-year", pcp_in.anchor_year, "Anchor year");
  pcp_cmd->add_option("--param", pcp_param, "intercept or slope")
      ->check(CLI::IsMember({"intercept", "slope"}));
  pcp_cmd->add_option("--grid", pcp_grid, "Geo grid file")->required();
  pcp_cmd->add_option("--levels", pcp_levels, "Interval levels");
  pcp_cmd->add_option("--palette", pcp_palette, "Palette override file");
  pcp_cmd->add_option("--out", pcp_out, "SVG path");

  auto* pof_cmd = plot_cmd->add_subcommand("offsets", "Unit offsets from the global line");
  detail::CommonInputs pof_in;
  std::string pof_draws, pof_out = "offsets.svg", pof_palette;
  std::string pof_group = "country", pof_levels = "0.95";
  pof_cmd->add_option("--draws", pof_draws, "Draws file")->required();
  pof_cmd->add_option("--data", pof_in.data_path, "Observations file")
      ->required();
  pof_cmd->add_option("--grouping", pof_in.grouping_specs, "name=path");
  pof_cmd->add_option("--anchor-year", pof_in.anchor_year, "Anchor year");
  pof_cmd->add_option("--group", pof_group, "Group term to display");
  pof_cmd->add_option("--levels", pof_levels, "Interval levels");
  pof_cmd->add_option("--palette", pof_palette, "Palette override file");
  pof_cmd->add_option("--out", pof_out, "SVG path");

  auto* ppe_cmd = plot_cmd->add_subcommand(
      "prediction-error", "Observed minus predicted for a holdout year");
  detail::CommonInputs ppe_in;
  std::string ppe_draws, ppe_holdout, ppe_out = "prediction_error.svg";
  std::string ppe_palette, ppe_levels = "0.5,0.8,0.95";
  std::uint64_t ppe_seed = 2022;
  ppe_cmd->add_option("--draws", ppe_draws, "Draws file")->required();
  ppe_cmd->add_option("--data", ppe_in.data_path, "Observations file")
      ->required();
  ppe_cmd->add_option("--grouping", ppe_in.grouping_specs, "name=path");
  ppe_cmd->add_option("--anchor-year", ppe_in.anchor_year, "Anchor year");
  ppe_cmd->add_option("--holdout", ppe_holdout, "Holdout observations file")
      ->required();
  ppe_cmd->add_option("--levels", ppe_levels, "Interval levels");
  ppe_cmd->add_option("--seed", ppe_seed, "Predictive noise seed");
  ppe_cmd->add_option("--palette", ppe_palette, "Palette override file");
  ppe_cmd->add_option("--out", ppe_out, "SVG path");

  // --- reproduce ---------------------------------------------------------
  auto* rep_cmd = app.add_subcommand(
      "reproduce", "Run the five-model case study end to end");
  std::string rep_data, rep_holdout, rep_outdir = "figs";
  std::string rep_region, rep_income, rep_grid, rep_palette;
  McmcConfig rep_mc;
  rep_cmd->add_option("--data", rep_data, "Observations file")->required();
  rep_cmd->add_option("--holdout", rep_holdout,
                      "Holdout file (prediction errors are skipped if absent)");
  rep_cmd->add_option("--outdir", rep_outdir, "Output directory");
  rep_cmd->add_option("--region", rep_region,
                      "Region grouping file (default: region.csv beside --data)");
  rep_cmd->add_option("--income", rep_income,
                      "Income grouping file (default: income.csv beside --data)");
  rep_cmd->add_option("--grid", rep_grid,
                      "Geo grid file (default: europe_grid.csv beside --data)");
  rep_cmd->add_option("--palette", rep_palette, "Palette override file");
  rep_cmd->add_option("--chains", rep_mc.chains, "Chains per model");
  rep_cmd->add_option("--iters", rep_mc.iterations, "Post-warmup iterations");
  rep_cmd->add_option("--warmup", rep_mc.warmup, "Warmup iterations");
  rep_cmd->add_option("--seed", rep_mc.seed, "Base seed");

  std::vector<const char*> argv;
  argv.push_back("hiervis");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*fit_cmd) {
      OutputMetadata meta;
      meta.seed = fit_mc.seed;
      const ModelKind kind = parse_model_kind(fit_model);
      const Dataset ds = detail::load_inputs(fit_in, kind, &meta);
      const ModelSpec spec = build_spec(kind, ds);
      FitOptions opt;
      opt.prior_only = fit_prior_only;
      const PosteriorDraws draws = fit(spec, ds, fit_mc, {}, opt);
      for (const auto& w : draws.warnings) std::cerr << "warning: " << w << "\n";
      write_draws_csv(draws, fit_out, meta);
      const DiagnosticsTable diag = diagnostics(draws);
      int flagged = 0;
      for (const auto& row : diag.rows) flagged += row.flagged ? 1 : 0;
      std::cout << "wrote " << fit_out << " (" << draws.num_draws()
                << " draws, " << draws.index.size() << " parameters";
      if (flagged > 0) std::cout << ", " << flagged << " R-hat flags";
      std::cout << ")\n";
      return 0;
    }

    if (*sum_cmd) {
      OutputMetadata meta;
      const LoadedDraws loaded = read_draws_csv(sum_draws);
      meta.inputs["draws"] = sum_draws;
      sum_in.anchor_year = loaded.anchor_year;
      const Dataset ds = detail::load_inputs(
          sum_in, parse_model_kind(loaded.model), &meta);
      const PosteriorDraws draws = attach_draws(loaded, ds);
      const auto levels = detail::parse_levels(sum_levels);
      const UnitParamDraws up = composite_unit_params(draws, draws.spec, ds);

      std::string out = "# " + meta.header_line() + "\n";
      out += "unit,quantity,model,median,level,lower,upper\n";
      auto emit = [&](const std::string& unit, const std::string& quantity,
                      const IntervalSummary& s) {
        for (const auto& band : s.intervals) {
          out += unit + "," + quantity + "," + loaded.model + "," +
                 hiervis::detail::fmt_double(s.median) + "," +
                 hiervis::detail::fmt_double(band.level) + "," +
                 hiervis::detail::fmt_double(band.lower) + "," +
                 hiervis::detail::fmt_double(band.upper) + "\n";
        }
      };
      for (std::size_t c = 0; c < up.units.size(); ++c) {
        emit(up.units[c], "intercept", summarize(up.intercept[c], levels));
        emit(up.units[c], "slope", summarize(up.slope[c], levels));
      }
      for (std::size_t k = 0; k < up.hyper_labels.size(); ++k) {
        emit(up.hyper_labels[k], "hyper_intercept",
             summarize(up.hyper_intercept[k], levels));
        emit(up.hyper_labels[k], "hyper_slope",
             summarize(up.hyper_slope[k], levels));
      }
      if (sum_out.empty()) {
        std::cout << out;
      } else {
        detail::write_text(sum_out, out);
        std::cout << "wrote " << sum_out << "\n";
      }
      return 0;
    }

    if (*loo_cmd) {
      OutputMetadata meta;
      LoadedDraws loaded = read_draws_csv(loo_draws);
      meta.inputs["draws"] = loo_draws;
      if (!loo_model.empty()) {
        if (loaded.model.empty()) {
          loaded.model = loo_model;
        } else if (loaded.model != loo_model) {
          fail("config", "--model " + loo_model +
                             " conflicts with the draws file (" +
                             loaded.model + ")");
        }
      }
      loo_in.anchor_year = loaded.anchor_year;
      const Dataset ds = detail::load_inputs(
          loo_in, parse_model_kind(loaded.model), &meta);
      const PosteriorDraws draws = attach_draws(loaded, ds);
      const LogLikMatrix loglik = pointwise_loglik(draws, draws.spec, ds);
      const LooResult result = psis_loo(loglik, loaded.model);
      for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
      std::cout << "model=" << result.model << " elpd_loo=" << result.elpd
                << " se=" << result.se << " n=" << result.n() << "\n";
      int high_k = 0;
      for (double k : result.pareto_k) high_k += k > 0.7 ? 1 : 0;
      std::cout << "pareto_k > 0.7: " << high_k << " of " << result.n() << "\n";
      if (!loo_out.empty()) {
        write_loo_csv(result, loo_out, meta);
        std::cout << "wrote " << loo_out << "\n";
      }
      return 0;
    }

    if (*cmp_cmd) {
      OutputMetadata meta;
      std::vector<LooResult> results;
      for (const auto& path : cmp_files) {
        results.push_back(read_loo_csv(path));
        meta.inputs["loo:" + results.back().model] = path;
      }
      const auto table = compare_models(results);
      std::string out = "# " + meta.header_line() + "\n";
      out += "model,elpd,se,delta_elpd,delta_se\n";
      for (const auto& row : table) {
        out += row.model + "," + hiervis::detail::fmt_double(row.elpd) + "," +
               hiervis::detail::fmt_double(row.se) + "," +
               hiervis::detail::fmt_double(row.delta_elpd) + "," +
               hiervis::detail::fmt_double(row.delta_se) + "\n";
      }
      if (cmp_out.empty()) {
        std::cout << out;
      } else {
        detail::write_text(cmp_out, out);
        std::cout << "wrote " << cmp_out << "\n";
      }
      return 0;
    }

    if (*pred_cmd) {
      OutputMetadata meta;
      meta.seed = pred_seed;
      const LoadedDraws loaded = read_draws_csv(pred_draws);
      meta.inputs["draws"] = pred_draws;
      pred_in.anchor_year = loaded.anchor_year;
      const Dataset ds = detail::load_inputs(
          pred_in, parse_model_kind(loaded.model), &meta);
      const PosteriorDraws draws = attach_draws(loaded, ds);
      const auto levels = detail::parse_levels(pred_levels);
      const double t = static_cast<double>(pred_year - ds.anchor_year());

      std::vector<std::string> units =
          pred_unit.empty() ? draws.spec.units
                            : std::vector<std::string>{pred_unit};
      std::string out = "# " + meta.header_line() + "\n";
      out += "unit,year,median,level,lower,upper\n";
      for (const auto& unit : units) {
        const auto pred =
            predict(draws, draws.spec, ds, unit, t, !pred_mean_only, pred_seed);
        const IntervalSummary s = summarize(pred, levels);
        for (const auto& band : s.intervals) {
          out += unit + "," + std::to_string(pred_year) + "," +
                 hiervis::detail::fmt_double(s.median) + "," +
                 hiervis::detail::fmt_double(band.level) + "," +
                 hiervis::detail::fmt_double(band.lower) + "," +
                 hiervis::detail::fmt_double(band.upper) + "\n";
        }
      }
      if (pred_out.empty()) {
        std::cout << out;
      } else {
        detail::write_text(pred_out, out);
        std::cout << "wrote " << pred_out << "\n";
      }
      return 0;
    }

    if (*pds_cmd) {
      OutputMetadata meta;
      const LoadedDraws loaded = read_draws_csv(pds_draws);
      meta.inputs["draws"] = pds_draws;
      pds_in.anchor_year = loaded.anchor_year;
      const Dataset ds = detail::load_inputs(
          pds_in, parse_model_kind(loaded.model), &meta);
      const PosteriorDraws draws = attach_draws(loaded, ds);
      std::string grouping = pds_group_by;
      if (grouping.empty()) {
        if (draws.spec.has_parent_term()) {
          grouping = draws.spec.parent_term().grouping;
        } else if (ds.has_grouping("region")) {
          grouping = "region";
        } else {
          fail("config",
               "this model has no parent grouping; pass --group-by");
        }
      }
      const GridLayout layout = detail::data_space_layout(
          draws, draws.spec, ds, grouping, parse_scale_policy(pds_scales));
      const detail::MedianLines lines =
          detail::median_lines(draws, draws.spec, ds);
      const Palette palette = detail::palette_from(pds_palette);
      const Scene scene = render_data_space(
          layout, ds, lines.unit,
          detail::group_lines_for_layout(lines, layout), palette);
      detail::write_text(pds_out, emit_svg(scene, meta.header_line()));
      std::cout << "wrote " << pds_out << "\n";
      return 0;
    }

    if (*pcp_cmd) {
      OutputMetadata meta;
      const GeoGridSpec grid = load_geo_grid(pcp_grid);
      meta.inputs["grid"] = pcp_grid;
      std::vector<LoadedDraws> loaded;
      for (const auto& path : pcp_draws) {
        loaded.push_back(read_draws_csv(path));
        meta.inputs["draws:" + loaded.back().model] = path;
      }
      // One dataset load covering every grouping any model needs.
      pcp_in.anchor_year = loaded.front().anchor_year;
      Dataset ds = detail::load_inputs(pcp_in, ModelKind::income_region, &meta);

      const auto levels = detail::parse_levels(pcp_levels);
      const bool want_slope = pcp_param == "slope";
      std::vector<ModelCompareInput> models;
      std::map<std::string, std::pair<double, double>> extents;
      for (const auto& ld : loaded) {
        const PosteriorDraws draws = attach_draws(ld, ds);
        const UnitParamDraws up =
            composite_unit_params(draws, draws.spec, ds);
        ModelCompareInput input;
        input.position = model_position(draws.spec.kind);
        input.name = ld.model;
        for (std::size_t c = 0; c < up.units.size(); ++c) {
          const auto& vec = want_slope ? up.slope[c] : up.intercept[c];
          const IntervalSummary s = summarize(vec, levels);
          input.unit_summary[up.units[c]] = s;
          auto it = extents.find(up.units[c]);
          const double lo = s.intervals.back().lower;
          const double hi = s.intervals.back().upper;
          if (it == extents.end()) {
            extents[up.units[c]] = {lo, hi};
          } else {
            it->second.first = std::min(it->second.first, lo);
            it->second.second = std::max(it->second.second, hi);
          }
        }
        for (std::size_t c = 0; c < up.units.size(); ++c) {
          if (up.parent_of.empty()) continue;  // nonpooled: no hyper
          const std::size_t k = up.hyper_pos(up.parent_of.at(up.units[c]));
          const auto& vec =
              want_slope ? up.hyper_slope[k] : up.hyper_intercept[k];
          const IntervalSummary s = summarize(vec, levels);
          input.hyper_summary[up.units[c]] = s;
          auto& e = extents[up.units[c]];
          e.first = std::min(e.first, s.intervals.back().lower);
          e.second = std::max(e.second, s.intervals.back().upper);
        }
        models.push_back(std::move(input));
      }
      std::sort(models.begin(), models.end(),
                [](const ModelCompareInput& a, const ModelCompareInput& b) {
                  return a.position < b.position;
                });

      std::vector<GeoUnitExtent> geo_extents;
      for (const auto& [unit, e] : extents) {
        geo_extents.push_back({unit, e.first, e.second});
      }
      const GridLayout layout = geo_layout(grid, geo_extents, 0.5, 5.8);
      std::map<std::string, std::string> region_of, income_of;
      if (ds.has_grouping("region")) {
        for (const auto& unit : ds.units()) {
          region_of[unit] = ds.grouping("region").label_of(unit);
        }
      }
      if (ds.has_grouping("income")) {
        for (const auto& unit : ds.units()) {
          income_of[unit] = ds.grouping("income").label_of(unit);
        }
      }
      const Palette palette = detail::palette_from(pcp_palette);
      const Scene scene = render_param_compare(layout, models, region_of,
                                               income_of, palette);
      detail::write_text(pcp_out, emit_svg(scene, meta.header_line()));
      std::cout << "wrote " << pcp_out << "\n";
      return 0;
    }

    if (*pof_cmd) {
      OutputMetadata meta;
      const LoadedDraws loaded = read_draws_csv(pof_draws);
      meta.inputs["draws"] = pof_draws;
      pof_in.anchor_year = loaded.anchor_year;
      const Dataset ds = detail::load_inputs(
          pof_in, parse_model_kind(loaded.model), &meta);
      const PosteriorDraws draws = attach_draws(loaded, ds);
      const auto levels = detail::parse_levels(pof_levels);
      const OffsetDraws off = offsets(draws, draws.spec, pof_group);
      std::vector<OffsetRow> rows;
      for (std::size_t k = 0; k < off.levels.size(); ++k) {
        rows.push_back({off.levels[k], summarize(off.intercept[k], levels)});
      }
      const Palette palette = detail::palette_from(pof_palette);
      const Scene scene = render_offset_plot(rows, palette);
      detail::write_text(pof_out, emit_svg(scene, meta.header_line()));
      std::cout << "wrote " << pof_out << "\n";
      return 0;
    }

    if (*ppe_cmd) {
      OutputMetadata meta;
      meta.seed = ppe_seed;
      const LoadedDraws loaded = read_draws_csv(ppe_draws);
      meta.inputs["draws"] = ppe_draws;
      meta.inputs["holdout"] = ppe_holdout;
      ppe_in.anchor_year = loaded.anchor_year;
      Dataset ds = detail::load_inputs(
          ppe_in, parse_model_kind(loaded.model), &meta);
      if (!ds.has_grouping("income_region") && ds.has_grouping("region") &&
          ds.has_grouping("income")) {
        ds = derive_composite_grouping(ds, "region", "income", "income_region");
      }
      const PosteriorDraws draws = attach_draws(loaded, ds);
      const Dataset holdout =
          load_observations(ppe_holdout, {}, {}, ds.anchor_year());
      const auto levels = detail::parse_levels(ppe_levels);
      const PredictionErrorSet pes = prediction_error(
          draws, draws.spec, ds, holdout, levels, ppe_seed);
      for (const auto& skipped : pes.skipped_units) {
        std::cerr << "warning: holdout unit " << skipped
                  << " unknown to the fit; skipped\n";
      }
      const GroupingTable& blocks = ds.grouping("income_region");
      std::vector<PredictionErrorRow> rows;
      for (const auto& pe : pes.errors) {
        rows.push_back({pe.unit, blocks.label_of(pe.unit), pe.summary});
      }
      const Palette palette = detail::palette_from(ppe_palette);
      const Scene scene = render_prediction_error(rows, palette);
      detail::write_text(ppe_out, emit_svg(scene, meta.header_line()));
      std::cout << "wrote " << ppe_out << "\n";
      return 0;
    }

    if (*rep_cmd) {
      namespace fs = std::filesystem;
      fs::create_directories(rep_outdir);
      const std::string region_path =
          rep_region.empty() ? detail::sibling(rep_data, "region.csv")
                             : rep_region;
      const std::string income_path =
          rep_income.empty() ? detail::sibling(rep_data, "income.csv")
                             : rep_income;
      const std::string grid_path =
          rep_grid.empty() ? detail::sibling(rep_data, "europe_grid.csv")
                           : rep_grid;
      auto out = [&](const std::string& name) {
        return (fs::path(rep_outdir) / name).string();
      };
      auto run_sub = [&](std::vector<std::string> sub) {
        const int code = run(std::move(sub));
        if (code != 0) fail("config", "pipeline step failed");
      };

      const std::vector<std::string> kinds{"nonpooled", "country", "region",
                                           "income", "income_region"};
      for (std::size_t k = 0; k < kinds.size(); ++k) {
        std::cout << "fitting model " << (k + 1) << " (" << kinds[k] << ")\n";
        run_sub({"fit", "--model", kinds[k], "--data", rep_data,
                 "--grouping", "region=" + region_path,
                 "--grouping", "income=" + income_path,
                 "--chains", std::to_string(rep_mc.chains),
                 "--iters", std::to_string(rep_mc.iterations),
                 "--warmup", std::to_string(rep_mc.warmup),
                 "--seed", std::to_string(rep_mc.seed + k),
                 "--out", out("draws_" + kinds[k] + ".csv")});
      }

      const std::vector<std::string> common_groupings{
          "--grouping", "region=" + region_path,
          "--grouping", "income=" + income_path};

      auto with_groupings = [&](std::vector<std::string> base) {
        base.insert(base.end(), common_groupings.begin(),
                    common_groupings.end());
        return base;
      };

      std::cout << "rendering figures\n";
      run_sub(with_groupings({"plot", "data-space",
                              "--draws", out("draws_country.csv"),
                              "--data", rep_data, "--group-by", "region",
                              "--out", out("fig1_country_fits.svg")}));
      run_sub(with_groupings({"plot", "offsets",
                              "--draws", out("draws_country.csv"),
                              "--data", rep_data,
                              "--out", out("fig2_intercept_offsets.svg")}));
      run_sub(with_groupings({"plot", "data-space",
                              "--draws", out("draws_region.csv"),
                              "--data", rep_data, "--scales", "per_row",
                              "--out", out("fig3_region_fits.svg")}));
      std::vector<std::string> compare_base{"plot", "compare-params",
                                            "--data", rep_data,
                                            "--grid", grid_path};
      for (const auto& kind : kinds) {
        compare_base.push_back("--draws");
        compare_base.push_back(out("draws_" + kind + ".csv"));
      }
      {
        auto fig4 = with_groupings(compare_base);
        fig4.push_back("--param");
        fig4.push_back("intercept");
        fig4.push_back("--out");
        fig4.push_back(out("fig4_intercept_compare.svg"));
        run_sub(fig4);
        auto fig5 = with_groupings(compare_base);
        fig5.push_back("--param");
        fig5.push_back("slope");
        fig5.push_back("--out");
        fig5.push_back(out("fig5_slope_compare.svg"));
        run_sub(fig5);
      }

      std::cout << "evaluating models 2-5 by PSIS-LOO\n";
      for (std::size_t k = 1; k < kinds.size(); ++k) {
        run_sub(with_groupings({"loo",
                                "--draws", out("draws_" + kinds[k] + ".csv"),
                                "--data", rep_data,
                                "--out", out("loo_" + kinds[k] + ".csv")}));
      }
      {
        std::vector<std::string> cmp{"compare"};
        for (std::size_t k = 1; k < kinds.size(); ++k) {
          cmp.push_back(out("loo_" + kinds[k] + ".csv"));
        }
        cmp.push_back("--out");
        cmp.push_back(out("loo_compare.txt"));
        run_sub(cmp);
      }

      if (!rep_holdout.empty()) {
        std::cout << "computing holdout prediction errors\n";
        run_sub(with_groupings({"plot", "prediction-error",
                                "--draws", out("draws_income_region.csv"),
                                "--data", rep_data,
                                "--holdout", rep_holdout,
                                "--out", out("fig6_prediction_errors.svg")}));
      } else {
        std::cout << "no holdout file; skipping the prediction-error figure\n";
      }
      std::cout << "case study written to " << rep_outdir << "\n";
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

inline int run(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(std::move(args));
}

}  // namespace hiervis::cli

#endif  // HIERVIS_CLI_HPP
