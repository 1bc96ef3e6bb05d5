#ifndef HIERVIS_SAMPLER_HPP
#define HIERVIS_SAMPLER_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "hiervis/dataset.hpp"
#include "hiervis/error.hpp"
#include "hiervis/linalg2.hpp"
#include "hiervis/model_spec.hpp"
#include "hiervis/rng.hpp"

namespace hiervis {

struct McmcConfig {
  int chains = 4;
  int iterations = 1000;  // post-warmup, per chain
  int warmup = 1000;
  std::uint64_t seed = 1;
  int thin = 1;

  void check() const {
    if (chains < 1) fail("config", "chains must be >= 1");
    if (iterations < 1) fail("config", "iterations must be >= 1");
    if (warmup < 0) fail("config", "warmup must be >= 0");
    if (thin < 1) fail("config", "thin must be >= 1");
    if (iterations % thin != 0) {
      fail("config", "iterations must be a multiple of thin");
    }
  }

  int retained_per_chain() const { return iterations / thin; }
};

// Conjugate prior family: Normal fixed effects, Inverse-Gamma residual
// variance, Inverse-Wishart per-term offset covariance. Nonpooled unit
// coefficients reuse the fixed-effect prior.
struct PriorConfig {
  Vec2 fixed_mean{500.0, 0.0};
  Mat2 fixed_cov = Mat2::diag(100.0 * 100.0, 10.0 * 10.0);
  double residual_shape = 2.0;    // a0
  double residual_scale = 200.0;  // b0
  double group_df = 3.0;          // nu0
  Mat2 group_scale = Mat2::diag(10.0 * 10.0, 1.0);  // Psi0

  void check() const {
    if (!fixed_cov.positive_definite()) fail("config", "fixed_cov must be PD");
    if (!group_scale.positive_definite()) fail("config", "group_scale must be PD");
    if (group_df <= 1.0) fail("config", "group_df must exceed dim - 1 = 1");
    if (residual_shape <= 0.0 || residual_scale <= 0.0) {
      fail("config", "residual prior parameters must be positive");
    }
  }
};

struct FitOptions {
  bool prior_only = false;                 // ignore the likelihood entirely
  std::optional<double> fixed_sigma2;      // known-variance mode
  std::optional<Mat2> fixed_group_cov;     // applied to every group term
};

// Retained draws in column-major layout plus everything needed to interpret
// them: the resolved spec, canonical parameter index and run metadata.
struct PosteriorDraws {
  ModelSpec spec;
  ParameterIndex index;
  int anchor_year = 2018;
  McmcConfig config;
  std::vector<int> chain;      // 1-based, per retained draw
  std::vector<int> iteration;  // 1-based within chain, post-thin
  std::vector<std::vector<double>> columns;  // columns[p][s]
  std::vector<std::string> warnings;

  std::size_t num_draws() const { return chain.size(); }

  const std::vector<double>& column(const std::string& name) const {
    return columns[index.at(name)];
  }
  bool has(const std::string& name) const { return index.contains(name); }
};

namespace detail {

// Per-observation design row is x_i = (1, t_i); these are the precomputed
// cross-products and group bookkeeping one Gibbs scan needs.
struct FitWorkspace {
  std::vector<double> y, t;
  Mat2 sxx_total;
  // Per group term: observation -> level, level -> observations, level Sxx.
  std::vector<std::vector<int>> level_of;
  std::vector<std::vector<std::vector<int>>> obs_of_level;
  std::vector<std::vector<Mat2>> sxx_level;
  // For two-term models with nested data: child level -> parent level,
  // empty when the terms are genuinely crossed.
  std::vector<int> parent_of_child;

  static FitWorkspace build(const ModelSpec& spec, const Dataset& ds,
                            bool prior_only) {
    FitWorkspace w;
    if (prior_only) {
      w.level_of.resize(spec.group_terms.size());
      w.obs_of_level.resize(spec.group_terms.size());
      w.sxx_level.resize(spec.group_terms.size());
      for (std::size_t g = 0; g < spec.group_terms.size(); ++g) {
        const auto levels = spec.group_terms[g].levels.size();
        w.obs_of_level[g].resize(levels);
        w.sxx_level[g].assign(levels, Mat2{});
      }
      return w;
    }
    const auto& obs = ds.observations();
    w.y.reserve(obs.size());
    w.t.reserve(obs.size());
    for (std::size_t i = 0; i < obs.size(); ++i) {
      w.y.push_back(obs[i].value);
      w.t.push_back(ds.time(i));
      const Vec2 x{1.0, w.t.back()};
      w.sxx_total = w.sxx_total + Mat2::outer(x);
    }
    w.level_of.resize(spec.group_terms.size());
    w.obs_of_level.resize(spec.group_terms.size());
    w.sxx_level.resize(spec.group_terms.size());
    for (std::size_t g = 0; g < spec.group_terms.size(); ++g) {
      const GroupTerm& term = spec.group_terms[g];
      w.obs_of_level[g].resize(term.levels.size());
      w.sxx_level[g].assign(term.levels.size(), Mat2{});
      w.level_of[g].resize(obs.size());
      const bool is_unit = term.grouping == "country";
      const GroupingTable* table =
          is_unit ? nullptr : &ds.grouping(term.grouping);
      for (std::size_t i = 0; i < obs.size(); ++i) {
        const std::string& label =
            is_unit ? obs[i].unit : table->label_of(obs[i].unit);
        const int k = term.level_index(label);
        if (k < 0) fail("config", "unresolved level '" + label + "'");
        w.level_of[g][i] = k;
        w.obs_of_level[g][static_cast<std::size_t>(k)].push_back(
            static_cast<int>(i));
        const Vec2 x{1.0, w.t[i]};
        w.sxx_level[g][static_cast<std::size_t>(k)] =
            w.sxx_level[g][static_cast<std::size_t>(k)] + Mat2::outer(x);
      }
    }
    if (spec.group_terms.size() == 2) {
      w.parent_of_child.assign(spec.group_terms[1].levels.size(), -1);
      bool nested = true;
      for (std::size_t i = 0; i < obs.size(); ++i) {
        const auto child = static_cast<std::size_t>(w.level_of[1][i]);
        if (w.parent_of_child[child] < 0) {
          w.parent_of_child[child] = w.level_of[0][i];
        } else if (w.parent_of_child[child] != w.level_of[0][i]) {
          nested = false;  // a child spans two parents: crossed design
        }
      }
      if (!nested) w.parent_of_child.clear();
    }
    return w;
  }

  std::size_t n() const { return y.size(); }
};

struct GibbsState {
  Vec2 beta;
  std::vector<std::vector<Vec2>> u;  // [term][level]
  std::vector<Mat2> group_cov;       // [term]
  double sigma2 = 1.0;
  std::vector<Vec2> unit_coef;       // nonpooled only
};

inline double mean_contribution(const GibbsState& st, const FitWorkspace& w,
                                std::size_t i) {
  const Vec2 x{1.0, w.t[i]};
  double mu = st.beta.dot(x);
  for (std::size_t g = 0; g < st.u.size(); ++g) {
    mu += st.u[g][static_cast<std::size_t>(w.level_of[g][i])].dot(x);
  }
  return mu;
}

}  // namespace detail

// --- Full-conditional updates -----------------------------------------
//
// Likelihood: y_i ~ N(beta.x_i + sum_g u[g,k_g(i)].x_i, sigma2) with
// x_i = (1, t_i). Each update below is the exact conjugate conditional.

// beta | u, sigma2: Normal with precision S0^-1 + Sxx/sigma2.
inline Vec2 update_fixed_effects(const detail::GibbsState& st,
                                 const detail::FitWorkspace& w,
                                 const PriorConfig& pr, Rng& rng) {
  const Mat2 prior_prec = pr.fixed_cov.inverse();
  Vec2 sxr{0.0, 0.0};
  for (std::size_t i = 0; i < w.n(); ++i) {
    const Vec2 x{1.0, w.t[i]};
    double r = w.y[i];  // residual net of the random-effect contributions
    for (std::size_t g = 0; g < st.u.size(); ++g) {
      r -= st.u[g][static_cast<std::size_t>(w.level_of[g][i])].dot(x);
    }
    sxr += x * r;
  }
  const double inv_s2 = 1.0 / st.sigma2;
  const Mat2 prec = prior_prec + w.sxx_total * inv_s2;
  const Mat2 cov = prec.inverse();
  const Vec2 b = prior_prec * pr.fixed_mean + sxr * inv_s2;
  return mvn2_draw(cov * b, cov, rng);
}

// u[g,k] | beta, other terms, Sigma_g, sigma2: bivariate Normal per level.
inline void update_group_effects(detail::GibbsState& st,
                                 const detail::FitWorkspace& w,
                                 std::size_t g, Rng& rng) {
  const Mat2 prior_prec = st.group_cov[g].inverse();
  const double inv_s2 = 1.0 / st.sigma2;
  for (std::size_t k = 0; k < st.u[g].size(); ++k) {
    Vec2 sxr{0.0, 0.0};
    for (int ii : w.obs_of_level[g][k]) {
      const auto i = static_cast<std::size_t>(ii);
      const Vec2 x{1.0, w.t[i]};
      double r = w.y[i] - st.beta.dot(x);
      for (std::size_t h = 0; h < st.u.size(); ++h) {
        if (h == g) continue;
        r -= st.u[h][static_cast<std::size_t>(w.level_of[h][i])].dot(x);
      }
      sxr += x * r;
    }
    const Mat2 prec = prior_prec + w.sxx_level[g][k] * inv_s2;
    const Mat2 cov = prec.inverse();
    st.u[g][k] = mvn2_draw(cov * (sxr * inv_s2), cov, rng);
  }
}

// Sigma_g | u[g]: Inverse-Wishart(nu0 + K, Psi0 + sum_k u_k u_k^T).
inline Mat2 update_group_covariance(const std::vector<Vec2>& level_effects,
                                    const PriorConfig& pr, Rng& rng) {
  Mat2 scale = pr.group_scale;
  for (const Vec2& u : level_effects) scale = scale + Mat2::outer(u);
  const double df = pr.group_df + static_cast<double>(level_effects.size());
  return inverse_wishart_draw(df, scale, rng);
}

// sigma2 | everything else: Inverse-Gamma(a0 + n/2, b0 + SSR/2).
inline double update_residual_variance(const detail::GibbsState& st,
                                       const detail::FitWorkspace& w,
                                       const PriorConfig& pr, Rng& rng) {
  double ssr = 0.0;
  for (std::size_t i = 0; i < w.n(); ++i) {
    const double r = w.y[i] - detail::mean_contribution(st, w, i);
    ssr += r * r;
  }
  const double shape = pr.residual_shape + 0.5 * static_cast<double>(w.n());
  const double scale = pr.residual_scale + 0.5 * ssr;
  return rng.inverse_gamma(shape, scale);
}

namespace detail {

// Location sweeps. The likelihood only pins beta plus the level means, so
// single-site scans random-walk along beta + d, u - d. Each sweep samples
// the exact Gaussian conditional along that translation direction (the
// likelihood is invariant on it, so only the priors enter), leaving the
// posterior invariant while decorrelating the location parameters.
inline void location_sweep_global(GibbsState& st, const PriorConfig& pr,
                                  std::size_t g, Rng& rng) {
  const Mat2 prior_prec = pr.fixed_cov.inverse();
  const Mat2 level_prec = st.group_cov[g].inverse();
  const auto k = static_cast<double>(st.u[g].size());
  if (k == 0.0) return;
  const Mat2 cov = (prior_prec + level_prec * k).inverse();
  Vec2 level_sum{0.0, 0.0};
  for (const Vec2& u : st.u[g]) level_sum += u;
  const Vec2 b =
      prior_prec * (pr.fixed_mean - st.beta) + level_prec * level_sum;
  const Vec2 delta = mvn2_draw(cov * b, cov, rng);
  st.beta += delta;
  for (Vec2& u : st.u[g]) u = u - delta;
}

// Same idea between a parent level and its child levels when the data are
// nested: u_parent + d, children - d.
inline void location_sweep_nested(GibbsState& st,
                                  const std::vector<int>& parent_of_child,
                                  Rng& rng) {
  const Mat2 parent_prec = st.group_cov[0].inverse();
  const Mat2 child_prec = st.group_cov[1].inverse();
  std::vector<std::vector<std::size_t>> children(st.u[0].size());
  for (std::size_t c = 0; c < parent_of_child.size(); ++c) {
    if (parent_of_child[c] >= 0) {
      children[static_cast<std::size_t>(parent_of_child[c])].push_back(c);
    }
  }
  for (std::size_t r = 0; r < children.size(); ++r) {
    if (children[r].empty()) continue;
    const auto k = static_cast<double>(children[r].size());
    const Mat2 cov = (parent_prec + child_prec * k).inverse();
    Vec2 child_sum{0.0, 0.0};
    for (std::size_t c : children[r]) child_sum += st.u[1][c];
    const Vec2 b = child_prec * child_sum - parent_prec * st.u[0][r];
    const Vec2 delta = mvn2_draw(cov * b, cov, rng);
    st.u[0][r] += delta;
    for (std::size_t c : children[r]) st.u[1][c] = st.u[1][c] - delta;
  }
}

inline void run_chain_hierarchical(const ModelSpec& spec, const FitWorkspace& w,
                                   const McmcConfig& mc, const PriorConfig& pr,
                                   const FitOptions& opt, int chain_index,
                                   PosteriorDraws* out) {
  Rng rng(mc.seed + static_cast<std::uint64_t>(chain_index));
  GibbsState st;
  st.beta = pr.fixed_mean;
  st.sigma2 = opt.fixed_sigma2.value_or(
      pr.residual_scale / (pr.residual_shape + 1.0));  // prior mode
  const Mat2 cov_init = opt.fixed_group_cov.value_or(
      pr.group_scale * (1.0 / (pr.group_df + 3.0)));   // prior mode
  st.u.resize(spec.group_terms.size());
  st.group_cov.assign(spec.group_terms.size(), cov_init);
  for (std::size_t g = 0; g < spec.group_terms.size(); ++g) {
    st.u[g].assign(spec.group_terms[g].levels.size(), Vec2{});
  }

  const int total = mc.warmup + mc.iterations;
  int kept = 0;
  for (int it = 1; it <= total; ++it) {
    st.beta = update_fixed_effects(st, w, pr, rng);
    for (std::size_t g = 0; g < spec.group_terms.size(); ++g) {
      update_group_effects(st, w, g, rng);
    }
    if (!opt.prior_only) {
      for (std::size_t g = 0; g < spec.group_terms.size(); ++g) {
        location_sweep_global(st, pr, g, rng);
      }
      if (!w.parent_of_child.empty()) {
        location_sweep_nested(st, w.parent_of_child, rng);
      }
    }
    for (std::size_t g = 0; g < spec.group_terms.size(); ++g) {
      if (!opt.fixed_group_cov) {
        st.group_cov[g] = update_group_covariance(st.u[g], pr, rng);
      }
    }
    if (!opt.fixed_sigma2) {
      st.sigma2 = update_residual_variance(st, w, pr, rng);
    }
    const int post = it - mc.warmup;
    if (post >= 1 && post % mc.thin == 0) {
      ++kept;
      const std::size_t s = out->chain.size();
      out->chain.push_back(chain_index + 1);
      out->iteration.push_back(kept);
      std::size_t p = 0;
      out->columns[p++][s] = st.beta.a;
      out->columns[p++][s] = st.beta.b;
      out->columns[p++][s] = std::sqrt(st.sigma2);
      for (std::size_t g = 0; g < spec.group_terms.size(); ++g) {
        for (const Vec2& u : st.u[g]) {
          out->columns[p++][s] = u.a;
          out->columns[p++][s] = u.b;
        }
      }
      for (std::size_t g = 0; g < spec.group_terms.size(); ++g) {
        out->columns[p++][s] = st.group_cov[g].m00;
        out->columns[p++][s] = st.group_cov[g].m01;
        out->columns[p++][s] = st.group_cov[g].m11;
      }
    }
  }
}

inline void run_chain_nonpooled(const ModelSpec& spec, const FitWorkspace& w,
                                const Dataset& ds, const McmcConfig& mc,
                                const PriorConfig& pr, const FitOptions& opt,
                                int chain_index, PosteriorDraws* out) {
  Rng rng(mc.seed + static_cast<std::uint64_t>(chain_index));
  const std::size_t n_units = spec.units.size();

  std::vector<std::vector<std::size_t>> rows(n_units);
  std::vector<Mat2> sxx(n_units);
  if (!opt.prior_only) {
    std::map<std::string, std::size_t> unit_pos;
    for (std::size_t c = 0; c < n_units; ++c) unit_pos[spec.units[c]] = c;
    for (std::size_t i = 0; i < w.n(); ++i) {
      const std::size_t c = unit_pos.at(ds.observations()[i].unit);
      rows[c].push_back(i);
      const Vec2 x{1.0, w.t[i]};
      sxx[c] = sxx[c] + Mat2::outer(x);
    }
  }

  GibbsState st;
  st.unit_coef.assign(n_units, pr.fixed_mean);
  st.sigma2 = opt.fixed_sigma2.value_or(
      pr.residual_scale / (pr.residual_shape + 1.0));
  const Mat2 prior_prec = pr.fixed_cov.inverse();
  const Vec2 prior_b = prior_prec * pr.fixed_mean;

  const int total = mc.warmup + mc.iterations;
  int kept = 0;
  for (int it = 1; it <= total; ++it) {
    const double inv_s2 = 1.0 / st.sigma2;
    for (std::size_t c = 0; c < n_units; ++c) {
      Vec2 sxr{0.0, 0.0};
      for (std::size_t i : rows[c]) {
        const Vec2 x{1.0, w.t[i]};
        sxr += x * w.y[i];
      }
      const Mat2 prec = prior_prec + sxx[c] * inv_s2;
      const Mat2 cov = prec.inverse();
      st.unit_coef[c] = mvn2_draw(cov * (prior_b + sxr * inv_s2), cov, rng);
    }
    if (!opt.fixed_sigma2) {
      double ssr = 0.0;
      for (std::size_t c = 0; c < n_units; ++c) {
        for (std::size_t i : rows[c]) {
          const Vec2 x{1.0, w.t[i]};
          const double r = w.y[i] - st.unit_coef[c].dot(x);
          ssr += r * r;
        }
      }
      const double shape =
          pr.residual_shape + 0.5 * static_cast<double>(w.n());
      st.sigma2 = rng.inverse_gamma(shape, pr.residual_scale + 0.5 * ssr);
    }
    const int post = it - mc.warmup;
    if (post >= 1 && post % mc.thin == 0) {
      ++kept;
      const std::size_t s = out->chain.size();
      out->chain.push_back(chain_index + 1);
      out->iteration.push_back(kept);
      std::size_t p = 0;
      out->columns[p++][s] = std::sqrt(st.sigma2);
      for (std::size_t c = 0; c < n_units; ++c) {
        out->columns[p++][s] = st.unit_coef[c].a;
        out->columns[p++][s] = st.unit_coef[c].b;
      }
    }
  }
}

}  // namespace detail

// Blocked Gibbs fit. Deterministic for a fixed seed: chain c uses the
// substream seed + c and chains are written in chain order, so results do
// not depend on scheduling.
inline PosteriorDraws fit(const ModelSpec& spec, const Dataset& ds,
                          const McmcConfig& mc, const PriorConfig& pr = {},
                          const FitOptions& opt = {}) {
  mc.check();
  pr.check();
  if (ds.size() == 0 && !opt.prior_only) {
    fail("config", "dataset has no observations (use prior-only mode)");
  }
  if (opt.fixed_sigma2 && !(*opt.fixed_sigma2 > 0.0)) {
    fail("config", "fixed sigma2 must be positive");
  }
  if (opt.fixed_group_cov && !opt.fixed_group_cov->positive_definite()) {
    fail("config", "fixed group covariance must be PD");
  }

  PosteriorDraws out;
  out.spec = spec;
  out.index = parameter_index(spec);
  out.anchor_year = ds.anchor_year();
  out.config = mc;

  const auto w = detail::FitWorkspace::build(spec, ds, opt.prior_only);
  if (!opt.prior_only && w.n() >= 2) {
    bool all_t_equal = true;
    for (std::size_t i = 1; i < w.n(); ++i) {
      if (w.t[i] != w.t[0]) {
        all_t_equal = false;
        break;
      }
    }
    if (all_t_equal) {
      out.warnings.push_back(
          "all time values are identical; slopes are informed by the prior only");
    }
  }

  const std::size_t total_draws =
      static_cast<std::size_t>(mc.chains) *
      static_cast<std::size_t>(mc.retained_per_chain());
  out.columns.assign(out.index.size(), std::vector<double>(total_draws));
  out.chain.reserve(total_draws);
  out.iteration.reserve(total_draws);

  for (int c = 0; c < mc.chains; ++c) {
    if (spec.kind == ModelKind::nonpooled) {
      detail::run_chain_nonpooled(spec, w, ds, mc, pr, opt, c, &out);
    } else {
      detail::run_chain_hierarchical(spec, w, mc, pr, opt, c, &out);
    }
  }

  // Write-time invariant checks on the retained draws.
  for (std::size_t s = 0; s < out.num_draws(); ++s) {
    if (!(out.column("sigma")[s] > 0.0)) {
      fail("numeric", "non-positive sigma draw");
    }
  }
  if (spec.kind != ModelKind::nonpooled) {
    for (const auto& term : spec.group_terms) {
      const auto& ii = out.column("Sigma[" + term.grouping + ",ii]");
      const auto& is = out.column("Sigma[" + term.grouping + ",is]");
      const auto& ss = out.column("Sigma[" + term.grouping + ",ss]");
      for (std::size_t s = 0; s < out.num_draws(); ++s) {
        const Mat2 m{ii[s], is[s], is[s], ss[s]};
        if (!m.positive_definite()) {
          fail("numeric", "non-PD group covariance draw");
        }
      }
    }
  }
  return out;
}

// --- Convergence diagnostics ------------------------------------------

struct DiagnosticRow {
  std::string parameter;
  double rhat = std::numeric_limits<double>::quiet_NaN();
  double ess = std::numeric_limits<double>::quiet_NaN();
  bool flagged = false;   // rhat > 1.01
  bool constant = false;  // zero variance: R-hat not applicable
};

struct DiagnosticsTable {
  std::vector<DiagnosticRow> rows;
  std::vector<std::string> notices;
};

namespace detail {

// Split each chain's retained sequence in half; classic split-R-hat plus
// the initial-monotone-sequence ESS on the split sequences.
inline void rhat_ess(const std::vector<std::vector<double>>& sequences,
                     double* rhat, double* ess, bool* constant) {
  const std::size_t m = sequences.size();
  const std::size_t len = sequences.front().size();
  std::vector<double> means(m), vars(m);
  for (std::size_t j = 0; j < m; ++j) {
    double acc = 0.0;
    for (double v : sequences[j]) acc += v;
    means[j] = acc / static_cast<double>(len);
    double sq = 0.0;
    for (double v : sequences[j]) sq += (v - means[j]) * (v - means[j]);
    vars[j] = sq / static_cast<double>(len - 1);
  }
  double grand = 0.0;
  for (double v : means) grand += v;
  grand /= static_cast<double>(m);
  double b = 0.0;
  for (double v : means) b += (v - grand) * (v - grand);
  b *= static_cast<double>(len) / static_cast<double>(m - 1);
  double w = 0.0;
  for (double v : vars) w += v;
  w /= static_cast<double>(m);

  const double var_plus =
      (static_cast<double>(len - 1) / static_cast<double>(len)) * w +
      b / static_cast<double>(len);
  if (!(var_plus > 0.0)) {
    *constant = true;
    return;
  }
  *constant = false;
  if (w > 0.0) *rhat = std::sqrt(var_plus / w);

  // Mean within-sequence autocovariance at each lag, Geyer pairing.
  auto autocov = [&](std::size_t lag) {
    double acc = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      double c = 0.0;
      for (std::size_t i = 0; i + lag < len; ++i) {
        c += (sequences[j][i] - means[j]) * (sequences[j][i + lag] - means[j]);
      }
      acc += c / static_cast<double>(len);
    }
    return acc / static_cast<double>(m);
  };

  double tau = 0.0;
  double prev_pair = std::numeric_limits<double>::infinity();
  for (std::size_t lag = 0; lag + 1 < len; lag += 2) {
    const double rho_even =
        lag == 0 ? 1.0 : 1.0 - (w - autocov(lag)) / var_plus;
    const double rho_odd = 1.0 - (w - autocov(lag + 1)) / var_plus;
    double pair = rho_even + rho_odd;
    if (pair < 0.0) break;
    pair = std::min(pair, prev_pair);  // enforce monotone decrease
    prev_pair = pair;
    tau += pair;
  }
  const double total = static_cast<double>(m * len);
  const double denom = std::max(2.0 * tau - 1.0, 1e-12);
  *ess = std::min(total, total / denom);
}

}  // namespace detail

inline DiagnosticsTable diagnostics(const PosteriorDraws& draws) {
  DiagnosticsTable table;
  const int chains = draws.config.chains;
  const int per_chain = draws.config.retained_per_chain();
  if (per_chain < 4) {
    fail("config", "diagnostics need at least 4 retained draws per chain");
  }
  if (chains < 2) {
    table.notices.push_back(
        "single chain: split R-hat omitted; ESS uses the one chain");
  }

  const std::size_t half = static_cast<std::size_t>(per_chain) / 2;
  for (std::size_t p = 0; p < draws.index.size(); ++p) {
    DiagnosticRow row;
    row.parameter = draws.index.name(p);
    // Chains are stored consecutively in chain order.
    std::vector<std::vector<double>> sequences;
    for (int c = 0; c < chains; ++c) {
      const std::size_t base =
          static_cast<std::size_t>(c) * static_cast<std::size_t>(per_chain);
      const auto& col = draws.columns[p];
      sequences.emplace_back(col.begin() + static_cast<long>(base),
                             col.begin() + static_cast<long>(base + half));
      sequences.emplace_back(col.begin() + static_cast<long>(base + half),
                             col.begin() + static_cast<long>(base + 2 * half));
    }
    bool constant = false;
    double rhat = std::numeric_limits<double>::quiet_NaN();
    double ess = std::numeric_limits<double>::quiet_NaN();
    detail::rhat_ess(sequences, &rhat, &ess, &constant);
    row.constant = constant;
    if (chains >= 2 && !constant) {
      row.rhat = rhat;
      row.flagged = rhat > 1.01;
    }
    if (!constant) row.ess = ess;
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace hiervis

#endif  // HIERVIS_SAMPLER_HPP
