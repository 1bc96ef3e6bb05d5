#ifndef HIERVIS_POSTERIOR_HPP
#define HIERVIS_POSTERIOR_HPP

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "hiervis/dataset.hpp"
#include "hiervis/error.hpp"
#include "hiervis/model_spec.hpp"
#include "hiervis/rng.hpp"
#include "hiervis/sampler.hpp"
#include "hiervis/version.hpp"

namespace hiervis {

// Median plus nested central credible intervals.
struct IntervalSummary {
  double median = 0.0;
  struct Band {
    double level;  // in (0,1)
    double lower;
    double upper;
  };
  std::vector<Band> intervals;  // sorted by level ascending

  const Band& band(double level) const {
    for (const auto& b : intervals) {
      if (std::abs(b.level - level) < 1e-12) return b;
    }
    fail("config", "no interval at requested level");
  }
};

// Type-7 quantile (sorted-order linear interpolation); fixed convention so
// summaries reproduce bit-for-bit across runs and languages.
inline double quantile_sorted(const std::vector<double>& sorted, double p) {
  const std::size_t n = sorted.size();
  if (n == 0) fail("config", "quantile of empty vector");
  if (n == 1) return sorted[0];
  const double h = static_cast<double>(n - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, n - 1);
  const double frac = h - std::floor(h);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

inline double quantile_type7(std::vector<double> values, double p) {
  std::sort(values.begin(), values.end());
  return quantile_sorted(values, p);
}

inline IntervalSummary summarize(const std::vector<double>& draws,
                                 std::vector<double> levels = {0.80, 0.95}) {
  if (draws.size() < 2) fail("config", "summarize needs at least 2 draws");
  for (double lv : levels) {
    if (!(lv > 0.0 && lv < 1.0)) fail("config", "interval level outside (0,1)");
  }
  std::sort(levels.begin(), levels.end());
  std::vector<double> sorted = draws;
  std::sort(sorted.begin(), sorted.end());
  IntervalSummary out;
  out.median = quantile_sorted(sorted, 0.5);
  for (double lv : levels) {
    out.intervals.push_back({lv, quantile_sorted(sorted, 0.5 * (1.0 - lv)),
                             quantile_sorted(sorted, 0.5 * (1.0 + lv))});
  }
  return out;
}

// Per-unit composite lines and the hyper (group-level) lines the figures
// show beside them. For the one-level model the hyper is the global line;
// for two-level models it is global + parent effect; nonpooled has none.
struct UnitParamDraws {
  std::vector<std::string> units;
  std::vector<std::vector<double>> intercept;  // [unit][draw]
  std::vector<std::vector<double>> slope;
  std::vector<std::string> hyper_labels;       // parent levels or "global"
  std::vector<std::vector<double>> hyper_intercept;
  std::vector<std::vector<double>> hyper_slope;
  std::map<std::string, std::string> parent_of;  // unit -> hyper label

  std::size_t unit_pos(const std::string& unit) const {
    for (std::size_t i = 0; i < units.size(); ++i) {
      if (units[i] == unit) return i;
    }
    fail("config", "unit '" + unit + "' not in summaries");
  }
  std::size_t hyper_pos(const std::string& label) const {
    for (std::size_t i = 0; i < hyper_labels.size(); ++i) {
      if (hyper_labels[i] == label) return i;
    }
    fail("config", "hyper label '" + label + "' not in summaries");
  }
};

inline UnitParamDraws composite_unit_params(const PosteriorDraws& draws,
                                            const ModelSpec& spec,
                                            const Dataset& ds) {
  const std::size_t s_count = draws.num_draws();
  UnitParamDraws out;
  out.units = spec.units;
  out.intercept.assign(spec.units.size(), std::vector<double>(s_count));
  out.slope.assign(spec.units.size(), std::vector<double>(s_count));

  if (spec.kind == ModelKind::nonpooled) {
    for (std::size_t c = 0; c < spec.units.size(); ++c) {
      out.intercept[c] = draws.column("alpha[" + spec.units[c] + "]");
      out.slope[c] = draws.column("gamma[" + spec.units[c] + "]");
    }
    return out;
  }

  const auto& beta0 = draws.column("beta0");
  const auto& beta1 = draws.column("beta1");
  const bool two_level = spec.has_parent_term();
  const GroupingTable* parent_table =
      two_level ? &ds.grouping(spec.parent_term().grouping) : nullptr;

  for (std::size_t c = 0; c < spec.units.size(); ++c) {
    const std::string& unit = spec.units[c];
    const auto& u_int = draws.column("u[country," + unit + ",int]");
    const auto& u_slo = draws.column("u[country," + unit + ",slope]");
    std::vector<double>& ic = out.intercept[c];
    std::vector<double>& sc = out.slope[c];
    if (two_level) {
      const std::string parent = parent_table->label_of(unit);
      const auto& p_int =
          draws.column("u[" + spec.parent_term().grouping + "," + parent + ",int]");
      const auto& p_slo =
          draws.column("u[" + spec.parent_term().grouping + "," + parent + ",slope]");
      for (std::size_t s = 0; s < s_count; ++s) {
        ic[s] = beta0[s] + p_int[s] + u_int[s];
        sc[s] = beta1[s] + p_slo[s] + u_slo[s];
      }
      out.parent_of[unit] = parent;
    } else {
      for (std::size_t s = 0; s < s_count; ++s) {
        ic[s] = beta0[s] + u_int[s];
        sc[s] = beta1[s] + u_slo[s];
      }
      out.parent_of[unit] = "global";
    }
  }

  if (two_level) {
    for (const auto& level : spec.parent_term().levels) {
      const auto& p_int =
          draws.column("u[" + spec.parent_term().grouping + "," + level + ",int]");
      const auto& p_slo =
          draws.column("u[" + spec.parent_term().grouping + "," + level + ",slope]");
      std::vector<double> hi(s_count), hs(s_count);
      for (std::size_t s = 0; s < s_count; ++s) {
        hi[s] = beta0[s] + p_int[s];
        hs[s] = beta1[s] + p_slo[s];
      }
      out.hyper_labels.push_back(level);
      out.hyper_intercept.push_back(std::move(hi));
      out.hyper_slope.push_back(std::move(hs));
    }
  } else {
    out.hyper_labels.push_back("global");
    out.hyper_intercept.push_back(beta0);
    out.hyper_slope.push_back(beta1);
  }
  return out;
}

// Raw deviations u[g,k,*] for every level of one group term.
struct OffsetDraws {
  std::vector<std::string> levels;
  std::vector<std::vector<double>> intercept;  // [level][draw]
  std::vector<std::vector<double>> slope;
};

inline OffsetDraws offsets(const PosteriorDraws& draws, const ModelSpec& spec,
                           const std::string& grouping) {
  const GroupTerm* term = nullptr;
  for (const auto& t : spec.group_terms) {
    if (t.grouping == grouping) term = &t;
  }
  if (!term) fail("config", "group term '" + grouping + "' not in model");
  OffsetDraws out;
  out.levels = term->levels;
  for (const auto& level : term->levels) {
    out.intercept.push_back(
        draws.column("u[" + grouping + "," + level + ",int]"));
    out.slope.push_back(
        draws.column("u[" + grouping + "," + level + ",slope]"));
  }
  return out;
}

// Per-draw line for one unit; the building block of predictions.
struct UnitLineDraws {
  std::vector<double> intercept;
  std::vector<double> slope;
};

inline UnitLineDraws unit_line_draws(const PosteriorDraws& draws,
                                     const ModelSpec& spec, const Dataset& ds,
                                     const std::string& unit) {
  bool known = false;
  for (const auto& u : spec.units) known = known || u == unit;
  if (!known) fail("config", "unit '" + unit + "' unknown to the fitted model");
  const std::size_t s_count = draws.num_draws();
  UnitLineDraws out;
  out.intercept.resize(s_count);
  out.slope.resize(s_count);
  if (spec.kind == ModelKind::nonpooled) {
    out.intercept = draws.column("alpha[" + unit + "]");
    out.slope = draws.column("gamma[" + unit + "]");
    return out;
  }
  const auto& beta0 = draws.column("beta0");
  const auto& beta1 = draws.column("beta1");
  const auto& u_int = draws.column("u[country," + unit + ",int]");
  const auto& u_slo = draws.column("u[country," + unit + ",slope]");
  for (std::size_t s = 0; s < s_count; ++s) {
    out.intercept[s] = beta0[s] + u_int[s];
    out.slope[s] = beta1[s] + u_slo[s];
  }
  if (spec.has_parent_term()) {
    const std::string parent =
        ds.grouping(spec.parent_term().grouping).label_of(unit);
    const auto& p_int =
        draws.column("u[" + spec.parent_term().grouping + "," + parent + ",int]");
    const auto& p_slo =
        draws.column("u[" + spec.parent_term().grouping + "," + parent + ",slope]");
    for (std::size_t s = 0; s < s_count; ++s) {
      out.intercept[s] += p_int[s];
      out.slope[s] += p_slo[s];
    }
  }
  return out;
}

// Posterior predictive draws for one unit at time offset t. With noise the
// result is a new-observation predictive; without, the line itself.
inline std::vector<double> predict(const PosteriorDraws& draws,
                                   const ModelSpec& spec, const Dataset& ds,
                                   const std::string& unit, double t,
                                   bool include_noise,
                                   std::uint64_t noise_seed = 0) {
  const UnitLineDraws line = unit_line_draws(draws, spec, ds, unit);
  const std::size_t s_count = draws.num_draws();
  std::vector<double> out(s_count);
  for (std::size_t s = 0; s < s_count; ++s) {
    out[s] = line.intercept[s] + line.slope[s] * t;
  }
  if (include_noise) {
    // Per-unit substream so adding or removing units leaves others unchanged.
    Rng rng(noise_seed ^ fnv1a64(unit));
    const auto& sigma = draws.column("sigma");
    for (std::size_t s = 0; s < s_count; ++s) {
      out[s] += sigma[s] * rng.normal();
    }
  }
  return out;
}

}  // namespace hiervis

#endif  // HIERVIS_POSTERIOR_HPP
