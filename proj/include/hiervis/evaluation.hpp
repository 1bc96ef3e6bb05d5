#ifndef HIERVIS_EVALUATION_HPP
#define HIERVIS_EVALUATION_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "hiervis/dataset.hpp"
#include "hiervis/error.hpp"
#include "hiervis/model_spec.hpp"
#include "hiervis/posterior.hpp"
#include "hiervis/sampler.hpp"

namespace hiervis {

// Per-draw per-observation log-likelihood, natural log. Row s corresponds
// to retained draw s, column i to dataset observation i.
struct LogLikMatrix {
  std::size_t draws = 0;
  std::size_t observations = 0;
  std::vector<double> values;  // row-major, draws x observations

  double& at(std::size_t s, std::size_t i) {
    return values[s * observations + i];
  }
  double at(std::size_t s, std::size_t i) const {
    return values[s * observations + i];
  }
};

inline double log_normal_density(double y, double mean, double sd) {
  static const double kLogTwoPi = std::log(2.0 * 3.14159265358979323846);
  const double z = (y - mean) / sd;
  return -0.5 * kLogTwoPi - std::log(sd) - 0.5 * z * z;
}

inline LogLikMatrix pointwise_loglik(const PosteriorDraws& draws,
                                     const ModelSpec& spec, const Dataset& ds) {
  const std::size_t s_count = draws.num_draws();
  const std::size_t n = ds.size();
  LogLikMatrix out;
  out.draws = s_count;
  out.observations = n;
  out.values.resize(s_count * n);
  const auto& sigma = draws.column("sigma");

  // Composite per-unit lines already include every random-effect layer.
  std::vector<UnitLineDraws> lines;
  std::map<std::string, std::size_t> unit_pos;
  for (const auto& unit : spec.units) {
    unit_pos[unit] = lines.size();
    lines.push_back(unit_line_draws(draws, spec, ds, unit));
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto& obs = ds.observations()[i];
    auto it = unit_pos.find(obs.unit);
    if (it == unit_pos.end()) {
      fail("config", "observation unit '" + obs.unit + "' unknown to the model");
    }
    const UnitLineDraws& line = lines[it->second];
    const double t = ds.time(i);
    for (std::size_t s = 0; s < s_count; ++s) {
      const double mu = line.intercept[s] + line.slope[s] * t;
      out.at(s, i) = log_normal_density(obs.value, mu, sigma[s]);
    }
  }
  return out;
}

// --- Generalized Pareto tail fit ----------------------------------------

struct GpdFit {
  double shape = 0.0;  // k-hat
  double scale = 0.0;
  bool degenerate = false;  // tail too small or zero spread
};

// Profile posterior-mean estimator over a fixed theta grid (Zhang-Stephens
// style), with the usual weak prior nudging the shape toward 0.5. Input is
// the vector of positive excesses over the tail threshold; order does not
// matter, the fit sorts internally.
inline GpdFit fit_generalized_pareto(std::vector<double> excesses) {
  GpdFit out;
  if (excesses.size() < 5) {
    out.degenerate = true;
    return out;
  }
  std::sort(excesses.begin(), excesses.end());
  const std::size_t n = excesses.size();
  if (!(excesses.back() > excesses.front()) || !(excesses.back() > 0.0)) {
    out.degenerate = true;  // constant tail carries no shape information
    return out;
  }

  const std::size_t grid = 30 + static_cast<std::size_t>(std::sqrt(
                                    static_cast<double>(n)));
  std::size_t q_idx = static_cast<std::size_t>(
      std::floor(static_cast<double>(n) / 4.0 + 0.5));
  q_idx = q_idx > 0 ? q_idx - 1 : 0;  // first-quartile order statistic
  double quartile = excesses[q_idx];
  if (!(quartile > 0.0)) {
    // Ties at the threshold: fall back to the smallest positive excess.
    for (double x : excesses) {
      if (x > 0.0) {
        quartile = x;
        break;
      }
    }
  }
  const double x_max = excesses.back();

  std::vector<double> thetas(grid), log_weights(grid);
  for (std::size_t j = 0; j < grid; ++j) {
    thetas[j] = 1.0 / x_max +
                (1.0 - std::sqrt(static_cast<double>(grid) /
                                 (static_cast<double>(j) + 0.5))) /
                    (3.0 * quartile);
  }
  auto mean_log1p = [&](double theta) {
    double acc = 0.0;
    for (double x : excesses) acc += std::log1p(-theta * x);
    return acc / static_cast<double>(n);
  };
  double max_lw = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < grid; ++j) {
    const double k = mean_log1p(thetas[j]);
    const double lw =
        static_cast<double>(n) * (std::log(-thetas[j] / k) - k - 1.0);
    log_weights[j] = lw;
    max_lw = std::max(max_lw, lw);
  }
  double w_sum = 0.0, theta_hat = 0.0;
  for (std::size_t j = 0; j < grid; ++j) {
    const double w = std::exp(log_weights[j] - max_lw);
    w_sum += w;
    theta_hat += w * thetas[j];
  }
  theta_hat /= w_sum;

  double k_hat = mean_log1p(theta_hat);
  const double sigma_hat = -k_hat / theta_hat;
  // Weakly informative shape prior (pseudo-count 10 at k = 0.5).
  k_hat = (k_hat * static_cast<double>(n) + 5.0) /
          (static_cast<double>(n) + 10.0);
  if (!std::isfinite(k_hat) || !std::isfinite(sigma_hat) || sigma_hat <= 0.0) {
    out.degenerate = true;
    return out;
  }
  out.shape = k_hat;
  out.scale = sigma_hat;
  return out;
}

// GPD quantile for the expected-order-statistic tail replacement.
inline double gpd_quantile(double p, double shape, double scale) {
  if (std::abs(shape) < 1e-12) return -scale * std::log1p(-p);
  return scale * std::expm1(-shape * std::log1p(-p)) / shape;
}

// --- PSIS-LOO ------------------------------------------------------------

struct LooResult {
  std::string model;
  double elpd = 0.0;
  double se = 0.0;
  std::vector<double> pointwise;  // elpd_i
  std::vector<double> pareto_k;
  std::vector<std::string> warnings;

  std::size_t n() const { return pointwise.size(); }
};

namespace detail {

inline double log_sum_exp(const std::vector<double>& v) {
  const double m = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(m)) return m;
  double acc = 0.0;
  for (double x : v) acc += std::exp(x - m);
  return m + std::log(acc);
}

}  // namespace detail

// Pareto-smoothed importance sampling estimate of leave-one-out elpd.
// Raw ratios come from the negated log-likelihood column; the largest
// min(ceil(0.2 S), ceil(3 sqrt(S))) ratios are replaced by the expected
// order statistics of a generalized Pareto fitted to their excesses, then
// truncated at the raw maximum.
inline LooResult psis_loo(const LogLikMatrix& loglik,
                          const std::string& model_name = "") {
  const std::size_t s_count = loglik.draws;
  const std::size_t n = loglik.observations;
  if (s_count < 2 || n == 0) fail("config", "psis_loo needs draws and observations");
  LooResult out;
  out.model = model_name;
  if (s_count < 100) {
    out.warnings.push_back("fewer than 100 draws; PSIS estimates are noisy");
  }
  const auto m_raw = static_cast<std::size_t>(
      std::min(std::ceil(0.2 * static_cast<double>(s_count)),
               std::ceil(3.0 * std::sqrt(static_cast<double>(s_count)))));
  const std::size_t tail_size = std::min(m_raw, s_count - 1);

  out.pointwise.resize(n);
  out.pareto_k.assign(n, 0.0);

  std::vector<double> log_ratio(s_count);
  std::vector<std::size_t> order(s_count);
  for (std::size_t i = 0; i < n; ++i) {
    double max_lr = -std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < s_count; ++s) {
      log_ratio[s] = -loglik.at(s, i);
      max_lr = std::max(max_lr, log_ratio[s]);
    }
    for (std::size_t s = 0; s < s_count; ++s) log_ratio[s] -= max_lr;

    // Identify the tail in ratio order (stable: index breaks ties).
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return log_ratio[a] != log_ratio[b] ? log_ratio[a] < log_ratio[b]
                                          : a < b;
    });
    const std::size_t cut = s_count - tail_size;
    const double threshold = std::exp(log_ratio[order[cut - 1]]);

    std::vector<double> excess(tail_size);
    for (std::size_t j = 0; j < tail_size; ++j) {
      excess[j] = std::exp(log_ratio[order[cut + j]]) - threshold;
    }
    const GpdFit gpd = fit_generalized_pareto(excess);
    if (gpd.degenerate) {
      out.pareto_k[i] = 0.0;  // no smoothing applied
    } else {
      out.pareto_k[i] = gpd.shape;
      // Replace tail values by expected order statistics, keep positions.
      for (std::size_t j = 0; j < tail_size; ++j) {
        const double p = (static_cast<double>(j) + 0.5) /
                         static_cast<double>(tail_size);
        const double smoothed =
            threshold + gpd_quantile(p, gpd.shape, gpd.scale);
        log_ratio[order[cut + j]] = std::log(std::min(smoothed, 1.0));
      }
      if (gpd.shape > 0.7) {
        out.warnings.push_back("observation " + std::to_string(i + 1) +
                               " has pareto_k > 0.7; LOO estimate unreliable");
      }
    }

    // elpd_i = log( sum w * p ) - log( sum w ) computed in log space.
    std::vector<double> lw_plus_l(s_count);
    for (std::size_t s = 0; s < s_count; ++s) {
      lw_plus_l[s] = log_ratio[s] + loglik.at(s, i);
    }
    const double num = detail::log_sum_exp(lw_plus_l);
    const double den = detail::log_sum_exp(log_ratio);
    double elpd_i = num - den;
    if (!std::isfinite(elpd_i)) {
      // Degenerate weights: fall back to plain importance sampling.
      out.warnings.push_back("observation " + std::to_string(i + 1) +
                             ": degenerate weights, unsmoothed fallback");
      std::vector<double> raw(s_count);
      for (std::size_t s = 0; s < s_count; ++s) raw[s] = -loglik.at(s, i);
      const double m = *std::max_element(raw.begin(), raw.end());
      for (std::size_t s = 0; s < s_count; ++s) {
        lw_plus_l[s] = raw[s] - m + loglik.at(s, i);
        raw[s] -= m;
      }
      elpd_i = detail::log_sum_exp(lw_plus_l) - detail::log_sum_exp(raw);
    }
    out.pointwise[i] = elpd_i;
  }

  out.elpd = std::accumulate(out.pointwise.begin(), out.pointwise.end(), 0.0);
  double mean = out.elpd / static_cast<double>(n);
  double var = 0.0;
  for (double v : out.pointwise) var += (v - mean) * (v - mean);
  var /= static_cast<double>(n > 1 ? n - 1 : 1);
  out.se = std::sqrt(static_cast<double>(n) * var);
  return out;
}

// Brute-force leave-one-out: refit without each observation in turn.
// Small-n validation oracle for psis_loo; refuses large datasets.
inline std::vector<double> exact_loo_oracle(const ModelSpec& spec,
                                            const Dataset& ds,
                                            const McmcConfig& mc,
                                            const PriorConfig& pr = {},
                                            std::size_t max_n = 50) {
  const std::size_t n = ds.size();
  if (n > max_n) {
    fail("config", "exact LOO oracle limited to n <= " + std::to_string(max_n));
  }
  if (n < 2) fail("config", "exact LOO oracle needs at least 2 observations");
  std::vector<double> elpd(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<Observation> rest;
    rest.reserve(n - 1);
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) rest.push_back(ds.observations()[j]);
    }
    Dataset held(rest, ds.anchor_year());
    for (const auto& g : ds.groupings()) held = held.with_grouping(g);
    // Rebuild on the spec's own kind so levels resolve against the subset;
    // held-out units keep their parameters through the grouping tables.
    const ModelSpec sub = build_spec(spec.kind, held);
    const PosteriorDraws draws = fit(sub, held, mc, pr);
    const auto& obs = ds.observations()[i];
    const double t = ds.time(i);
    const auto& sigma = draws.column("sigma");
    std::vector<double> logp(draws.num_draws());
    const bool unit_known =
        std::find(sub.units.begin(), sub.units.end(), obs.unit) !=
        sub.units.end();
    if (unit_known) {
      const UnitLineDraws line = unit_line_draws(draws, sub, held, obs.unit);
      for (std::size_t s = 0; s < draws.num_draws(); ++s) {
        const double mu = line.intercept[s] + line.slope[s] * t;
        logp[s] = log_normal_density(obs.value, mu, sigma[s]);
      }
    } else {
      // The unit vanished with its only observation: integrate its offsets
      // against their conditional prior by simulation, one fresh effect
      // per retained draw.
      Rng rng(mc.seed ^ fnv1a64(obs.unit) ^ 0x9e3779b97f4a7c15ULL);
      for (std::size_t s = 0; s < draws.num_draws(); ++s) {
        double mu;
        if (sub.kind == ModelKind::nonpooled) {
          const Vec2 coef = mvn2_draw(pr.fixed_mean, pr.fixed_cov, rng);
          mu = coef.a + coef.b * t;
        } else {
          mu = draws.column("beta0")[s] + draws.column("beta1")[s] * t;
          if (sub.has_parent_term()) {
            const std::string parent =
                held.grouping(sub.parent_term().grouping).label_of(obs.unit);
            mu += draws.column("u[" + sub.parent_term().grouping + "," +
                               parent + ",int]")[s];
            mu += draws.column("u[" + sub.parent_term().grouping + "," +
                               parent + ",slope]")[s] *
                  t;
          }
          const auto& unit_term = sub.unit_term();
          const Mat2 cov{
              draws.column("Sigma[" + unit_term.grouping + ",ii]")[s],
              draws.column("Sigma[" + unit_term.grouping + ",is]")[s],
              draws.column("Sigma[" + unit_term.grouping + ",is]")[s],
              draws.column("Sigma[" + unit_term.grouping + ",ss]")[s]};
          const Vec2 u = mvn2_draw(Vec2{0.0, 0.0}, cov, rng);
          mu += u.a + u.b * t;
        }
        logp[s] = log_normal_density(obs.value, mu, sigma[s]);
      }
    }
    elpd[i] = detail::log_sum_exp(logp) -
              std::log(static_cast<double>(draws.num_draws()));
  }
  return elpd;
}

// --- Model comparison ----------------------------------------------------

struct ComparisonRow {
  std::string model;
  double elpd = 0.0;
  double se = 0.0;
  double delta_elpd = 0.0;  // relative to the best model
  double delta_se = 0.0;
};

inline std::vector<ComparisonRow> compare_models(
    const std::vector<LooResult>& results) {
  if (results.size() < 2) fail("config", "compare needs at least two results");
  const std::size_t n = results.front().n();
  for (const auto& r : results) {
    if (r.n() != n) {
      fail("config", "LOO results computed on different observation counts");
    }
  }
  std::vector<std::size_t> order(results.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return results[a].elpd != results[b].elpd
               ? results[a].elpd > results[b].elpd
               : results[a].model < results[b].model;
  });
  const LooResult& best = results[order.front()];
  std::vector<ComparisonRow> rows;
  for (std::size_t idx : order) {
    const LooResult& r = results[idx];
    ComparisonRow row;
    row.model = r.model;
    row.elpd = r.elpd;
    row.se = r.se;
    row.delta_elpd = r.elpd - best.elpd;
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      mean += r.pointwise[i] - best.pointwise[i];
    }
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = r.pointwise[i] - best.pointwise[i] - mean;
      var += d * d;
    }
    var /= static_cast<double>(n > 1 ? n - 1 : 1);
    row.delta_se = std::sqrt(static_cast<double>(n) * var);
    rows.push_back(row);
  }
  return rows;
}

// Pairwise difference for two named results (antisymmetric by definition).
inline std::pair<double, double> elpd_difference(const LooResult& a,
                                                 const LooResult& b) {
  if (a.n() != b.n()) fail("config", "LOO results have different n");
  const std::size_t n = a.n();
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += a.pointwise[i] - b.pointwise[i];
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a.pointwise[i] - b.pointwise[i] - mean;
    var += d * d;
  }
  var /= static_cast<double>(n > 1 ? n - 1 : 1);
  return {a.elpd - b.elpd, std::sqrt(static_cast<double>(n) * var)};
}

// --- Holdout prediction errors -------------------------------------------

struct PredictionError {
  std::string unit;
  double observed = 0.0;
  std::vector<double> error_draws;  // observed - predictive draw
  IntervalSummary summary;
};

struct PredictionErrorSet {
  std::vector<PredictionError> errors;      // holdout order
  std::vector<std::string> skipped_units;   // unknown to the fit
};

inline PredictionErrorSet prediction_error(
    const PosteriorDraws& draws, const ModelSpec& spec, const Dataset& ds,
    const Dataset& holdout, std::vector<double> levels = {0.5, 0.8, 0.95},
    std::uint64_t noise_seed = 2022) {
  PredictionErrorSet out;
  for (std::size_t i = 0; i < holdout.size(); ++i) {
    const auto& obs = holdout.observations()[i];
    const bool known =
        std::find(spec.units.begin(), spec.units.end(), obs.unit) !=
        spec.units.end();
    if (!known) {
      out.skipped_units.push_back(obs.unit);
      continue;
    }
    const double t = static_cast<double>(obs.year - ds.anchor_year());
    std::vector<double> pred =
        predict(draws, spec, ds, obs.unit, t, /*include_noise=*/true,
                noise_seed);
    PredictionError pe;
    pe.unit = obs.unit;
    pe.observed = obs.value;
    pe.error_draws.resize(pred.size());
    for (std::size_t s = 0; s < pred.size(); ++s) {
      pe.error_draws[s] = obs.value - pred[s];
    }
    pe.summary = summarize(pe.error_draws, levels);
    out.errors.push_back(std::move(pe));
  }
  return out;
}

}  // namespace hiervis

#endif  // HIERVIS_EVALUATION_HPP
