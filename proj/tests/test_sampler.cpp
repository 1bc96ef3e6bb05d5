#include <cmath>
#include <numeric>

#include "conjugate_oracle.hpp"
#include "doctest.h"
#include "hiervis/posterior.hpp"
#include "hiervis/sampler.hpp"
#include "test_support.hpp"

using namespace hiervis;

namespace {

Dataset make_dataset(const std::vector<Observation>& obs, int anchor = 2018) {
  return Dataset(obs, anchor);
}

double column_mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) /
         static_cast<double>(v.size());
}

double column_sd(const std::vector<double>& v) {
  const double m = column_mean(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

double ess_of(const PosteriorDraws& draws, const std::string& name) {
  const DiagnosticsTable table = diagnostics(draws);
  for (const auto& row : table.rows) {
    if (row.parameter == name) return row.ess;
  }
  FAIL("parameter not found");
  return 0.0;
}

}  // namespace

TEST_CASE("update_fixed_effects: no observations draws from the prior") {
  const ModelSpec spec = build_spec(
      ModelKind::country, make_dataset({{"A", 2018, 500.0}}));
  const auto w = detail::FitWorkspace::build(spec, Dataset({}, 2018), true);
  PriorConfig pr;
  detail::GibbsState st;
  st.u.resize(1);
  st.u[0].assign(1, Vec2{});
  st.group_cov.assign(1, Mat2::diag(1.0, 1.0));
  st.sigma2 = 1.0;

  Rng rng(21);
  const int n = 50000;
  double s0 = 0, s1 = 0, q0 = 0, q1 = 0;
  for (int i = 0; i < n; ++i) {
    const Vec2 b = update_fixed_effects(st, w, pr, rng);
    s0 += b.a;
    s1 += b.b;
    q0 += b.a * b.a;
    q1 += b.b * b.b;
  }
  CHECK(s0 / n == doctest::Approx(500.0).epsilon(0.005));
  CHECK(std::abs(s1 / n) < 0.2);
  CHECK(std::sqrt(q0 / n - (s0 / n) * (s0 / n)) ==
        doctest::Approx(100.0).epsilon(0.02));
  CHECK(std::sqrt(q1 / n - (s1 / n) * (s1 / n)) ==
        doctest::Approx(10.0).epsilon(0.02));
}

TEST_CASE("update_fixed_effects: one observation at t=0 matches the 1-D formula") {
  const Dataset ds = make_dataset({{"A", 2018, 520.0}});
  const ModelSpec spec = build_spec(ModelKind::country, ds);
  const auto w = detail::FitWorkspace::build(spec, ds, false);
  PriorConfig pr;
  detail::GibbsState st;
  st.u.resize(1);
  st.u[0].assign(1, Vec2{0.0, 0.0});  // offsets held at zero
  st.group_cov.assign(1, Mat2::diag(1.0, 1.0));
  const double sigma2 = 25.0;
  st.sigma2 = sigma2;

  // Textbook scalar update for beta0 (t = 0 gives no slope information).
  const double prior_var = 100.0 * 100.0;
  const double post_var = 1.0 / (1.0 / prior_var + 1.0 / sigma2);
  const double post_mean = post_var * (500.0 / prior_var + 520.0 / sigma2);

  Rng rng(22);
  const int n = 60000;
  double sum = 0, sq = 0, slope_sum = 0, slope_sq = 0;
  for (int i = 0; i < n; ++i) {
    const Vec2 b = update_fixed_effects(st, w, pr, rng);
    sum += b.a;
    sq += b.a * b.a;
    slope_sum += b.b;
    slope_sq += b.b * b.b;
  }
  CHECK(sum / n == doctest::Approx(post_mean).epsilon(0.001));
  CHECK(sq / n - (sum / n) * (sum / n) ==
        doctest::Approx(post_var).epsilon(0.03));
  // Slope stays at its prior.
  CHECK(std::abs(slope_sum / n) < 0.2);
  CHECK(std::sqrt(slope_sq / n) == doctest::Approx(10.0).epsilon(0.03));
}

TEST_CASE("update_fixed_effects: vanishing prior covariance pins the draw") {
  const Dataset ds = make_dataset({{"A", 2018, 520.0}, {"A", 2003, 470.0}});
  const ModelSpec spec = build_spec(ModelKind::country, ds);
  const auto w = detail::FitWorkspace::build(spec, ds, false);
  PriorConfig pr;
  pr.fixed_cov = Mat2::diag(1e-12, 1e-12);
  detail::GibbsState st;
  st.u.resize(1);
  st.u[0].assign(1, Vec2{});
  st.group_cov.assign(1, Mat2::diag(1.0, 1.0));
  st.sigma2 = 25.0;

  Rng rng(23);
  for (int i = 0; i < 100; ++i) {
    const Vec2 b = update_fixed_effects(st, w, pr, rng);
    CHECK(b.a == doctest::Approx(500.0).epsilon(1e-4));
    CHECK(std::abs(b.b) < 1e-3);
  }
}

TEST_CASE("update_group_effects: zero-observation level draws from N(0, Sigma)") {
  const Dataset ds = make_dataset({{"A", 2018, 500.0}});
  const ModelSpec spec = build_spec(ModelKind::country, ds);
  auto w = detail::FitWorkspace::build(spec, ds, false);
  // Pretend the level has no rows: move its observations away.
  w.obs_of_level[0][0].clear();
  w.sxx_level[0][0] = Mat2{};

  detail::GibbsState st;
  st.beta = Vec2{500.0, 0.0};
  st.u.resize(1);
  st.u[0].assign(1, Vec2{});
  const Mat2 sigma{9.0, 2.0, 2.0, 4.0};
  st.group_cov.assign(1, sigma);
  st.sigma2 = 1.0;

  Rng rng(31);
  const int n = 60000;
  double qa = 0, qb = 0, qab = 0;
  for (int i = 0; i < n; ++i) {
    update_group_effects(st, w, 0, rng);
    qa += st.u[0][0].a * st.u[0][0].a;
    qb += st.u[0][0].b * st.u[0][0].b;
    qab += st.u[0][0].a * st.u[0][0].b;
  }
  CHECK(qa / n == doctest::Approx(9.0).epsilon(0.03));
  CHECK(qb / n == doctest::Approx(4.0).epsilon(0.03));
  CHECK(qab / n == doctest::Approx(2.0).epsilon(0.08));
}

TEST_CASE("update_group_effects: single observation at t=0 matches the 2x2 form") {
  const Dataset ds = make_dataset({{"A", 2018, 512.0}});
  const ModelSpec spec = build_spec(ModelKind::country, ds);
  const auto w = detail::FitWorkspace::build(spec, ds, false);

  detail::GibbsState st;
  st.beta = Vec2{500.0, 0.0};
  st.u.resize(1);
  st.u[0].assign(1, Vec2{});
  const Mat2 sigma{16.0, 3.0, 3.0, 2.0};
  st.group_cov.assign(1, sigma);
  const double sigma2 = 25.0;
  st.sigma2 = sigma2;

  // Closed form: prec = Sigma^-1 + diag(1/sigma2, 0), mean = cov (r/sigma2, 0).
  const Mat2 prec = sigma.inverse() + Mat2{1.0 / sigma2, 0, 0, 0};
  const Mat2 cov = prec.inverse();
  const double resid = 512.0 - 500.0;
  const Vec2 mean = cov * Vec2{resid / sigma2, 0.0};
  // The slope update is the rho-scaled fraction of the intercept update.
  CHECK(mean.b == doctest::Approx(mean.a * sigma.m01 / sigma.m00).epsilon(1e-9));

  Rng rng(32);
  const int n = 60000;
  double sa = 0, sb = 0, va = 0, vb = 0;
  for (int i = 0; i < n; ++i) {
    update_group_effects(st, w, 0, rng);
    sa += st.u[0][0].a;
    sb += st.u[0][0].b;
    va += st.u[0][0].a * st.u[0][0].a;
    vb += st.u[0][0].b * st.u[0][0].b;
  }
  CHECK(sa / n == doctest::Approx(mean.a).epsilon(0.01));
  CHECK(sb / n == doctest::Approx(mean.b).epsilon(0.02));
  CHECK(va / n - (sa / n) * (sa / n) == doctest::Approx(cov.m00).epsilon(0.03));
  CHECK(vb / n - (sb / n) * (sb / n) == doctest::Approx(cov.m11).epsilon(0.03));
}

TEST_CASE("update_group_effects: tiny Sigma pins offsets at zero") {
  const Dataset ds = make_dataset({{"A", 2018, 560.0}, {"A", 2003, 560.0}});
  const ModelSpec spec = build_spec(ModelKind::country, ds);
  const auto w = detail::FitWorkspace::build(spec, ds, false);
  detail::GibbsState st;
  st.beta = Vec2{500.0, 0.0};
  st.u.resize(1);
  st.u[0].assign(1, Vec2{});
  st.group_cov.assign(1, Mat2::diag(1e-10, 1e-10));
  st.sigma2 = 25.0;
  Rng rng(33);
  for (int i = 0; i < 200; ++i) {
    update_group_effects(st, w, 0, rng);
    CHECK(std::abs(st.u[0][0].a) < 1e-3);
    CHECK(std::abs(st.u[0][0].b) < 1e-3);
  }
}

TEST_CASE("update_group_covariance: prior draw and posterior recovery") {
  PriorConfig pr;
  pr.group_df = 10.0;
  pr.group_scale = Mat2{35.0, 7.0, 7.0, 14.0};
  Rng rng(41);

  SUBCASE("zero levels reproduce the prior mean") {
    const int n = 40000;
    double m00 = 0, m11 = 0;
    for (int i = 0; i < n; ++i) {
      const Mat2 s = update_group_covariance({}, pr, rng);
      m00 += s.m00;
      m11 += s.m11;
    }
    CHECK(m00 / n == doctest::Approx(35.0 / 7.0).epsilon(0.05));
    CHECK(m11 / n == doctest::Approx(14.0 / 7.0).epsilon(0.05));
  }

  SUBCASE("200 levels from a known covariance recover it within 10%") {
    const Mat2 truth{25.0, -4.0, -4.0, 9.0};
    std::vector<Vec2> effects;
    Rng sim(42);
    for (int k = 0; k < 200; ++k) {
      effects.push_back(mvn2_draw(Vec2{0, 0}, truth, sim));
    }
    const int n = 4000;
    double m00 = 0, m01 = 0, m11 = 0;
    for (int i = 0; i < n; ++i) {
      const Mat2 s = update_group_covariance(effects, pr, rng);
      m00 += s.m00;
      m01 += s.m01;
      m11 += s.m11;
    }
    CHECK(std::abs(m00 / n - truth.m00) / truth.m00 < 0.10);
    CHECK(std::abs(m11 / n - truth.m11) / truth.m11 < 0.10);
    CHECK(std::abs(m01 / n - truth.m01) < 0.10 * std::sqrt(25.0 * 9.0));
  }

  SUBCASE("all-zero effects concentrate below the prior mean") {
    const std::vector<Vec2> zeros(10, Vec2{0.0, 0.0});
    const int n = 20000;
    double m00 = 0;
    for (int i = 0; i < n; ++i) m00 += update_group_covariance(zeros, pr, rng).m00;
    // Scale stays Psi0 while df grows to 20: mean = 35 / (20 - 3).
    CHECK(m00 / n == doctest::Approx(35.0 / 17.0).epsilon(0.05));
    CHECK(m00 / n < 35.0 / 7.0);
  }
}

TEST_CASE("update_residual_variance cases") {
  PriorConfig pr;
  pr.residual_shape = 3.0;
  pr.residual_scale = 400.0;
  Rng rng(51);

  SUBCASE("no observations draws from the prior") {
    const ModelSpec spec =
        build_spec(ModelKind::country, make_dataset({{"A", 2018, 1.0}}));
    const auto w = detail::FitWorkspace::build(spec, Dataset({}, 2018), true);
    detail::GibbsState st;
    st.u.resize(1);
    st.u[0].assign(1, Vec2{});
    const int n = 60000;
    double sum = 0;
    for (int i = 0; i < n; ++i) sum += update_residual_variance(st, w, pr, rng);
    CHECK(sum / n == doctest::Approx(400.0 / 2.0).epsilon(0.05));
  }

  SUBCASE("zero residuals with n=10 sample IG(a0+5, b0)") {
    std::vector<Observation> obs;
    for (int i = 0; i < 10; ++i) obs.push_back({"A", 2003 + i, 500.0});
    const Dataset ds = make_dataset(obs);
    const ModelSpec spec = build_spec(ModelKind::country, ds);
    const auto w = detail::FitWorkspace::build(spec, ds, false);
    detail::GibbsState st;
    st.beta = Vec2{500.0, 0.0};
    st.u.resize(1);
    st.u[0].assign(1, Vec2{});
    st.group_cov.assign(1, Mat2::diag(1.0, 1.0));
    const int n = 60000;
    double sum = 0;
    for (int i = 0; i < n; ++i) sum += update_residual_variance(st, w, pr, rng);
    // IG(8, 400) mean = 400 / 7.
    CHECK(sum / n == doctest::Approx(400.0 / 7.0).epsilon(0.03));
  }

  SUBCASE("N(0, 25) residuals with n=1000 put sigma near 5") {
    // A workspace holding 1000 pure-noise residuals around a zero line.
    Rng sim(52);
    const ModelSpec spec =
        build_spec(ModelKind::country, make_dataset({{"A", 2018, 0.0}}));
    auto w = detail::FitWorkspace::build(
        spec, make_dataset({{"A", 2018, 0.0}}), false);
    w.y.clear();
    w.t.clear();
    w.level_of[0].clear();
    w.obs_of_level[0][0].clear();
    w.sxx_level[0][0] = Mat2{};
    w.sxx_total = Mat2{};
    for (int i = 0; i < 1000; ++i) {
      w.y.push_back(5.0 * sim.normal());
      w.t.push_back(0.0);
      w.obs_of_level[0][0].push_back(i);
      w.level_of[0].push_back(0);
      w.sxx_level[0][0] = w.sxx_level[0][0] + Mat2::outer(Vec2{1.0, 0.0});
      w.sxx_total = w.sxx_total + Mat2::outer(Vec2{1.0, 0.0});
    }
    detail::GibbsState st;
    st.beta = Vec2{0.0, 0.0};
    st.u.resize(1);
    st.u[0].assign(1, Vec2{});
    st.group_cov.assign(1, Mat2::diag(1.0, 1.0));
    std::vector<double> draws;
    for (int i = 0; i < 4000; ++i) {
      draws.push_back(std::sqrt(update_residual_variance(st, w, pr, rng)));
    }
    std::sort(draws.begin(), draws.end());
    const double median = draws[draws.size() / 2];
    CHECK(std::abs(median - 5.0) / 5.0 < 0.05);
  }
}

TEST_CASE("fit: prior-only draws match prior moments within 3 MCSE") {
  const ModelSpec spec =
      build_spec(ModelKind::country, make_dataset({{"A", 2018, 500.0}}));
  McmcConfig mc;
  mc.chains = 4;
  mc.iterations = 1000;
  mc.warmup = 200;
  mc.seed = 99;
  PriorConfig pr;
  FitOptions opt;
  opt.prior_only = true;
  const PosteriorDraws draws = fit(spec, Dataset({}, 2018), mc, pr, opt);
  REQUIRE(draws.num_draws() == 4000);

  for (const auto& [name, prior_mean, prior_sd] :
       std::vector<std::tuple<std::string, double, double>>{
           {"beta0", 500.0, 100.0}, {"beta1", 0.0, 10.0}}) {
    const auto& col = draws.column(name);
    const double mean = column_mean(col);
    const double sd = column_sd(col);
    const double mcse = sd / std::sqrt(ess_of(draws, name));
    CHECK(std::abs(mean - prior_mean) <= 3.0 * mcse);
    CHECK(std::abs(sd - prior_sd) / prior_sd < 0.06);
  }
}

TEST_CASE("fit: known-variance posterior matches the conjugate oracle") {
  // Three units, a handful of observations, sigma and Sigma fixed.
  const Dataset ds = make_dataset({{"A", 2003, 480.0},
                                   {"A", 2010, 490.0},
                                   {"A", 2018, 500.0},
                                   {"B", 2003, 520.0},
                                   {"B", 2018, 528.0},
                                   {"C", 2010, 455.0},
                                   {"C", 2018, 462.0}});
  const ModelSpec spec = build_spec(ModelKind::country, ds);
  const double sigma2 = 36.0;
  const Mat2 unit_cov{400.0, 0.0, 0.0, 4.0};

  McmcConfig mc;
  mc.chains = 4;
  mc.iterations = 1000;
  mc.warmup = 500;
  mc.seed = 7;
  PriorConfig pr;
  FitOptions opt;
  opt.fixed_sigma2 = sigma2;
  opt.fixed_group_cov = unit_cov;
  const PosteriorDraws draws = fit(spec, ds, mc, pr, opt);

  const auto oracle = conjugate_oracle::beta_posterior_known_variance(
      ds, sigma2, unit_cov, pr.fixed_mean, pr.fixed_cov);

  for (const auto& [name, target] :
       std::vector<std::pair<std::string, double>>{
           {"beta0", oracle.mean0}, {"beta1", oracle.mean1}}) {
    const auto& col = draws.column(name);
    const double mcse = column_sd(col) / std::sqrt(ess_of(draws, name));
    CHECK(std::abs(column_mean(col) - target) <= 3.0 * mcse);
  }
  const double sd0 = column_sd(draws.column("beta0"));
  const double sd1 = column_sd(draws.column("beta1"));
  CHECK(sd0 == doctest::Approx(std::sqrt(oracle.cov00)).epsilon(0.10));
  CHECK(sd1 == doctest::Approx(std::sqrt(oracle.cov11)).epsilon(0.10));
}

TEST_CASE("fit: same seed twice yields identical draws") {
  const Dataset ds = make_dataset(
      {{"A", 2003, 480.0}, {"A", 2018, 500.0}, {"B", 2018, 520.0}});
  const ModelSpec spec = build_spec(ModelKind::country, ds);
  McmcConfig mc;
  mc.chains = 2;
  mc.iterations = 200;
  mc.warmup = 100;
  mc.seed = 1234;
  const PosteriorDraws a = fit(spec, ds, mc);
  const PosteriorDraws b = fit(spec, ds, mc);
  REQUIRE(a.num_draws() == b.num_draws());
  bool identical = true;
  for (std::size_t p = 0; p < a.index.size(); ++p) {
    for (std::size_t s = 0; s < a.num_draws(); ++s) {
      identical = identical && a.columns[p][s] == b.columns[p][s];
    }
  }
  CHECK(identical);

  McmcConfig other = mc;
  other.seed = 1235;
  const PosteriorDraws c = fit(spec, ds, other);
  CHECK(c.column("beta0")[0] != a.column("beta0")[0]);
}

TEST_CASE("fit warns when every time value is identical") {
  const Dataset ds = make_dataset({{"A", 2018, 500.0}, {"B", 2018, 510.0}});
  const ModelSpec spec = build_spec(ModelKind::country, ds);
  McmcConfig mc;
  mc.chains = 1;
  mc.iterations = 50;
  mc.warmup = 50;
  const PosteriorDraws draws = fit(spec, ds, mc);
  REQUIRE(draws.warnings.size() == 1);
  CHECK(draws.warnings[0].find("identical") != std::string::npos);
}

TEST_CASE("fit nonpooled: per-unit lines recover simple regressions") {
  // Unit A: flat line at 500; unit B: slope 2 through 520 at t=0.
  std::vector<Observation> obs;
  for (int y : {2003, 2008, 2013, 2018}) {
    obs.push_back({"A", y, 500.0});
    obs.push_back({"B", y, 520.0 + 2.0 * (y - 2018)});
  }
  const Dataset ds = make_dataset(obs);
  const ModelSpec spec = build_spec(ModelKind::nonpooled, ds);
  McmcConfig mc;
  mc.chains = 2;
  mc.iterations = 1000;
  mc.warmup = 500;
  mc.seed = 3;
  const PosteriorDraws draws = fit(spec, ds, mc);
  CHECK(column_mean(draws.column("alpha[A]")) ==
        doctest::Approx(500.0).epsilon(0.01));
  CHECK(std::abs(column_mean(draws.column("gamma[A]"))) < 0.35);
  CHECK(column_mean(draws.column("alpha[B]")) ==
        doctest::Approx(520.0).epsilon(0.01));
  CHECK(column_mean(draws.column("gamma[B]")) ==
        doctest::Approx(2.0).epsilon(0.15));
}

TEST_CASE("pooling limits bracket the hierarchical fit") {
  // Shared synthetic panel with clearly separated unit lines.
  Rng sim(606);
  std::vector<Observation> obs;
  for (int c = 0; c < 8; ++c) {
    const double unit_int = 500.0 + 15.0 * sim.normal();
    const double unit_slope = -1.0 + 0.8 * sim.normal();
    for (int y : {2006, 2010, 2014, 2018}) {
      obs.push_back({"U" + std::to_string(c), y,
                     unit_int + unit_slope * (y - 2018) + 2.0 * sim.normal()});
    }
  }
  const Dataset ds = make_dataset(obs);
  McmcConfig mc;
  mc.chains = 2;
  mc.iterations = 600;
  mc.warmup = 400;
  mc.seed = 77;

  SUBCASE("shrinking the offset prior pools the offsets toward zero") {
    // Hold Sigma fixed at decreasing scales; max |posterior mean offset|
    // must decrease monotonically toward complete pooling.
    const ModelSpec spec = build_spec(ModelKind::country, ds);
    std::vector<double> max_offsets;
    for (double scale : {100.0, 1.0, 0.01}) {
      FitOptions opt;
      opt.fixed_group_cov = Mat2::diag(scale, scale / 100.0);
      const PosteriorDraws draws = fit(spec, ds, mc, {}, opt);
      double worst = 0.0;
      for (const auto& unit : spec.units) {
        worst = std::max(worst, std::abs(column_mean(draws.column(
                                    "u[country," + unit + ",int]"))));
      }
      max_offsets.push_back(worst);
    }
    CHECK(max_offsets[1] < max_offsets[0]);
    CHECK(max_offsets[2] < max_offsets[1]);
    CHECK(max_offsets[2] < 0.5);
  }

  SUBCASE("a huge offset prior reproduces the nonpooled fit") {
    const ModelSpec h_spec = build_spec(ModelKind::country, ds);
    FitOptions wide;
    wide.fixed_group_cov = Mat2::diag(1e6, 1e4);
    const PosteriorDraws h_draws = fit(h_spec, ds, mc, {}, wide);
    const ModelSpec n_spec = build_spec(ModelKind::nonpooled, ds);
    const PosteriorDraws n_draws = fit(n_spec, ds, mc);
    const UnitParamDraws h_up = composite_unit_params(h_draws, h_spec, ds);
    const UnitParamDraws n_up = composite_unit_params(n_draws, n_spec, ds);
    for (std::size_t c = 0; c < h_up.units.size(); ++c) {
      const auto& n_col = n_up.intercept[n_up.unit_pos(h_up.units[c])];
      const double h_med = summarize(h_up.intercept[c], {0.8}).median;
      const double n_med = summarize(n_col, {0.8}).median;
      CHECK(std::abs(h_med - n_med) <= 2.0 * column_sd(n_col));
    }
  }
}

TEST_CASE("diagnostics: iid, split, and constant behaviour") {
  const Dataset ds = make_dataset({{"A", 2018, 500.0}});
  const ModelSpec spec = build_spec(ModelKind::country, ds);
  PosteriorDraws draws;
  draws.spec = spec;
  draws.index = parameter_index(spec);
  draws.config.chains = 4;
  draws.config.iterations = 1000;
  draws.config.warmup = 0;
  draws.columns.assign(draws.index.size(), std::vector<double>(4000, 1.0));
  for (int c = 0; c < 4; ++c) {
    for (int i = 0; i < 1000; ++i) {
      draws.chain.push_back(c + 1);
      draws.iteration.push_back(i + 1);
    }
  }

  SUBCASE("iid standard normal draws sit inside [0.99, 1.01]") {
    Rng rng(77);
    for (auto& v : draws.columns[0]) v = rng.normal();
    const DiagnosticsTable table = diagnostics(draws);
    CHECK(table.rows[0].rhat > 0.99);
    CHECK(table.rows[0].rhat < 1.01);
    CHECK(table.rows[0].ess > 2000.0);
    CHECK_FALSE(table.rows[0].flagged);
  }

  SUBCASE("chains with disjoint means blow past 2") {
    Rng rng(78);
    for (std::size_t s = 0; s < 4000; ++s) {
      const double offset = draws.chain[s] <= 2 ? 0.0 : 10.0;
      draws.columns[0][s] = offset + 0.1 * rng.normal();
    }
    const DiagnosticsTable table = diagnostics(draws);
    CHECK(table.rows[0].rhat > 2.0);
    CHECK(table.rows[0].flagged);
  }

  SUBCASE("constant parameters are reported as not applicable") {
    const DiagnosticsTable table = diagnostics(draws);
    CHECK(table.rows[1].constant);
    CHECK(std::isnan(table.rows[1].rhat));
  }

  SUBCASE("single chain omits R-hat with a notice") {
    PosteriorDraws one = draws;
    one.config.chains = 1;
    one.config.iterations = 4000;
    const DiagnosticsTable table = diagnostics(one);
    REQUIRE(!table.notices.empty());
    CHECK(std::isnan(table.rows[0].rhat));
  }
}
