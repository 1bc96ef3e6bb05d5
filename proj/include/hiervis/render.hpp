#ifndef HIERVIS_RENDER_HPP
#define HIERVIS_RENDER_HPP

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hiervis/csv.hpp"
#include "hiervis/dataset.hpp"
#include "hiervis/error.hpp"
#include "hiervis/layout.hpp"
#include "hiervis/posterior.hpp"
#include "hiervis/svg.hpp"
#include "hiervis/version.hpp"

namespace hiervis {

// --- Palette ---------------------------------------------------------------

// Role -> hex map. Every colour in an emitted document resolves through
// here; unknown grouping labels fall back to a deterministic pastel cycle
// keyed on the label text, so arbitrary datasets still render.
class Palette {
 public:
  Palette() : roles_(defaults()) {}

  static std::map<std::string, std::string> defaults() {
    return {
        {"negative", "#EE2C2C"},
        {"nonnegative", "#0000FF"},
        {"region:western", "#90EE90"},
        {"region:northern", "#CDC1C5"},
        {"region:eastern", "#4682B4"},
        {"region:southern", "#EED5B7"},
        {"income:high", "#000000"},
        {"income:middle", "#FF00FF"},
        {"model1", "#404040"},
        {"model2", "#584E6C"},
        {"model3", "#566C73"},
        {"model4", "#A52A2A"},
        {"model5", "#CD950C"},
        {"model2_hyper", "#B19CD9"},
        {"model3_hyper", "#ADD8E6"},
        {"model4_hyper", lighten50("#A52A2A")},
        {"model5_hyper", lighten50("#CD950C")},
        {"frame", "#B0B0B0"},
        {"text", "#000000"},
        {"point", "#333333"},
        {"connector", "#555555"},
        {"reference", "#808080"},
        {"background", "#FFFFFF"},
        {"cycle:0", "#A6CEE3"},
        {"cycle:1", "#B2DF8A"},
        {"cycle:2", "#FB9A99"},
        {"cycle:3", "#FDBF6F"},
        {"cycle:4", "#CAB2D6"},
        {"cycle:5", "#FFFF99"},
        {"cycle:6", "#E5D8BD"},
        {"cycle:7", "#CCEBC5"},
    };
  }

  // 50% blend toward white, channel-wise integer floor.
  static std::string lighten50(const std::string& hex) {
    if (hex.size() != 7 || hex[0] != '#') fail("config", "bad hex " + hex);
    auto channel = [&](std::size_t pos) {
      const int v = std::stoi(hex.substr(pos, 2), nullptr, 16);
      const int mixed = (v + 255) / 2;
      static const char* digits = "0123456789ABCDEF";
      std::string out(2, '0');
      out[0] = digits[(mixed >> 4) & 0xf];
      out[1] = digits[mixed & 0xf];
      return out;
    };
    return "#" + channel(1) + channel(3) + channel(5);
  }

  void set(const std::string& role, const std::string& hex) {
    if (hex.size() != 7 || hex[0] != '#') {
      fail("config", "invalid hex colour '" + hex + "' for role " + role);
    }
    for (std::size_t i = 1; i < 7; ++i) {
      if (!std::isxdigit(static_cast<unsigned char>(hex[i]))) {
        fail("config", "invalid hex colour '" + hex + "' for role " + role);
      }
    }
    roles_[role] = hex;
  }

  const std::string& resolve(const std::string& role) const {
    auto it = roles_.find(role);
    if (it != roles_.end()) return it->second;
    // Grouping role without a configured colour: stable cycle assignment.
    const auto slot = fnv1a64(role) % 8;
    return roles_.at("cycle:" + std::to_string(slot));
  }

  const std::map<std::string, std::string>& roles() const { return roles_; }

 private:
  std::map<std::string, std::string> roles_;
};

// Override file: header `role,hex`, one role per row.
inline Palette load_palette(const std::string& path) {
  Palette p;
  const CsvTable table = read_csv(path);
  const int cr = table.require_column("role", path);
  const int ch = table.require_column("hex", path);
  for (const auto& row : table.rows) {
    p.set(trim(row[static_cast<std::size_t>(cr)]),
          trim(row[static_cast<std::size_t>(ch)]));
  }
  return p;
}

// --- Ticks -------------------------------------------------------------

// Tick positions at multiples of {1,2,5}*10^k covering [lo, hi], count as
// close to `target` as the step family allows. Degenerate ranges fall back
// to the two endpoints.
inline std::vector<double> nice_ticks(double lo, double hi, int target = 5) {
  if (!(lo < hi)) fail("config", "nice_ticks needs lo < hi");
  if (target < 2) target = 2;
  const double span = hi - lo;
  if (span < std::max(std::abs(lo), std::abs(hi)) * 1e-9) {
    return {lo, hi};
  }
  const double raw = span / static_cast<double>(target - 1);
  const int k0 = static_cast<int>(std::floor(std::log10(raw)));
  double best_step = 0.0;
  long best_count = -1;
  for (int k = k0 - 1; k <= k0 + 1; ++k) {
    for (double base : {1.0, 2.0, 5.0}) {
      const double step = base * std::pow(10.0, k);
      const long first = static_cast<long>(std::ceil(lo / step - 1e-9));
      const long last = static_cast<long>(std::floor(hi / step + 1e-9));
      const long count = last - first + 1;
      if (count < 2 || count > 4 * target) continue;
      if (best_count < 0 ||
          std::llabs(count - target) < std::llabs(best_count - target) ||
          (std::llabs(count - target) == std::llabs(best_count - target) &&
           step > best_step)) {
        best_step = step;
        best_count = count;
      }
    }
  }
  if (best_count < 0) return {lo, hi};
  std::vector<double> out;
  const long first = static_cast<long>(std::ceil(lo / best_step - 1e-9));
  for (long i = 0; i < best_count; ++i) {
    out.push_back(static_cast<double>(first + i) * best_step);
  }
  return out;
}

// --- Shared panel geometry -----------------------------------------------

struct RenderOptions {
  double width = 1600.0;
  double height = 1200.0;
};

namespace detail {

constexpr double kMarginLeft = 56.0;
constexpr double kMarginRight = 16.0;
constexpr double kMarginTop = 24.0;
constexpr double kMarginBottom = 40.0;
constexpr double kGutter = 8.0;
constexpr double kStripHeight = 14.0;

// "12.000" -> "12", "0.500" -> "0.5"; tick labels stay compact.
inline std::string tick_label(double v) {
  std::string s = fmt3(v);
  while (!s.empty() && s.back() == '0') s.pop_back();
  if (!s.empty() && s.back() == '.') s.pop_back();
  return s.empty() ? "0" : s;
}

struct PanelBox {
  double x0, y0, w, h;       // full panel incl. strip
  double plot_y0;            // top of the plot area (below the strip)

  double px(double v, double lo, double hi) const {
    return x0 + (v - lo) / (hi - lo) * w;
  }
  double py(double v, double lo, double hi) const {
    const double plot_h = h - (plot_y0 - y0);
    return plot_y0 + (hi - v) / (hi - lo) * plot_h;
  }
};

struct PanelGrid {
  double cell_w, cell_h;
  int n_rows, n_cols;
  RenderOptions opts;

  static PanelGrid from_layout(const GridLayout& layout,
                               const RenderOptions& opts) {
    PanelGrid g;
    g.opts = opts;
    g.n_rows = layout.n_rows();
    g.n_cols = layout.n_cols();
    g.cell_w = (opts.width - kMarginLeft - kMarginRight -
                kGutter * (g.n_cols - 1)) /
               g.n_cols;
    g.cell_h = (opts.height - kMarginTop - kMarginBottom -
                kGutter * (g.n_rows - 1)) /
               g.n_rows;
    if (g.cell_w < 20 || g.cell_h < 20) {
      fail("config", "canvas too small for the panel grid");
    }
    return g;
  }

  PanelBox box(const Panel& p) const {
    PanelBox b;
    b.x0 = kMarginLeft + (p.col - 1) * (cell_w + kGutter);
    b.y0 = kMarginTop + (p.row - 1) * (cell_h + kGutter);
    b.w = cell_w;
    b.h = cell_h;
    b.plot_y0 = b.y0 + kStripHeight;
    return b;
  }
};

// Liang-Barsky segment clip against an axis-aligned box.
inline std::optional<std::pair<std::pair<double, double>,
                               std::pair<double, double>>>
clip_segment(double x1, double y1, double x2, double y2, double bx0,
             double by0, double bx1, double by1) {
  double t0 = 0.0, t1 = 1.0;
  const double dx = x2 - x1, dy = y2 - y1;
  const double p[4] = {-dx, dx, -dy, dy};
  const double q[4] = {x1 - bx0, bx1 - x1, y1 - by0, by1 - y1};
  for (int e = 0; e < 4; ++e) {
    if (p[e] == 0.0) {
      if (q[e] < 0.0) return std::nullopt;
      continue;
    }
    const double r = q[e] / p[e];
    if (p[e] < 0.0) {
      if (r > t1) return std::nullopt;
      t0 = std::max(t0, r);
    } else {
      if (r < t0) return std::nullopt;
      t1 = std::min(t1, r);
    }
  }
  return std::make_pair(std::make_pair(x1 + t0 * dx, y1 + t0 * dy),
                        std::make_pair(x1 + t1 * dx, y1 + t1 * dy));
}

inline void draw_frame_and_strip(Scene& scene, SceneGroup& group,
                                 const PanelBox& box, const Panel& panel,
                                 const Palette& palette) {
  scene.add(group, RectElem{box.x0, box.y0, box.w, box.h, "none",
                            palette.resolve("frame"), 1.0});
  scene.add(group, RectElem{box.x0, box.y0, box.w, kStripHeight,
                            palette.resolve(panel.strip_color_role.empty()
                                                ? "background"
                                                : panel.strip_color_role),
                            palette.resolve("frame"), 0.5});
  TextElem label;
  label.x = box.x0 + box.w / 2.0;
  label.y = box.y0 + kStripHeight - 3.5;
  label.content = panel.strip_label;
  label.size = 9.0;
  label.anchor = TextAnchor::middle;
  label.fill = palette.resolve(
      panel.label_color_role.empty() ? "text" : panel.label_color_role);
  scene.add(group, label);
}

inline void draw_y_ticks(Scene& scene, SceneGroup& group, const PanelBox& box,
                         const Panel& panel, const Palette& palette) {
  for (double v : nice_ticks(panel.y_lo, panel.y_hi, 4)) {
    if (v < panel.y_lo || v > panel.y_hi) continue;
    const double y = box.py(v, panel.y_lo, panel.y_hi);
    scene.add(group, LineElem{box.x0 - 3.0, y, box.x0, y,
                              palette.resolve("frame"), 0.8, false});
    TextElem t;
    t.x = box.x0 - 5.0;
    t.y = y + 2.5;
    t.content = detail::tick_label(v);
    t.size = 7.0;
    t.anchor = TextAnchor::end;
    t.fill = palette.resolve("text");
    scene.add(group, t);
  }
}

inline void draw_x_ticks(Scene& scene, SceneGroup& group, const PanelBox& box,
                         const Panel& panel, const Palette& palette,
                         bool labels) {
  for (double v : nice_ticks(panel.x_lo, panel.x_hi, 4)) {
    if (v < panel.x_lo || v > panel.x_hi) continue;
    const double x = box.px(v, panel.x_lo, panel.x_hi);
    const double y1 = box.y0 + box.h;
    scene.add(group, LineElem{x, y1, x, y1 + 3.0, palette.resolve("frame"),
                              0.8, false});
    if (labels) {
      TextElem t;
      t.x = x;
      t.y = y1 + 11.0;
      t.content = tick_label(v);
      t.size = 7.0;
      t.anchor = TextAnchor::middle;
      t.fill = palette.resolve("text");
      scene.add(group, t);
    }
  }
}

}  // namespace detail

// --- Figure family 1: model fits in data space -----------------------------

struct FitLine {
  double intercept = 0.0;  // value at t = 0
  double slope = 0.0;
};

// Layout rows come from ragged_layout; unit panels show their observations
// and posterior-median line, group panels pool the group's observations
// under the hyper line. Lines are coloured by trend direction.
inline Scene render_data_space(const GridLayout& layout, const Dataset& ds,
                               const std::map<std::string, FitLine>& unit_lines,
                               const std::map<std::string, FitLine>& group_lines,
                               const Palette& palette,
                               const RenderOptions& opts = {}) {
  Scene scene(opts.width, opts.height);
  const auto grid = detail::PanelGrid::from_layout(layout, opts);
  const GroupingTable* grouping =
      ds.has_grouping(layout.grouping_name) ? &ds.grouping(layout.grouping_name)
                                            : nullptr;
  const int last_row = layout.n_rows();

  for (const auto& panel : layout.panels) {
    const auto box = grid.box(panel);
    SceneGroup& group = scene.begin_group(
        (panel.kind == PanelKind::group_summary ? "group-" : "unit-") +
        panel.id);
    detail::draw_frame_and_strip(scene, group, box, panel, palette);
    if (panel.col == 1) detail::draw_y_ticks(scene, group, box, panel, palette);
    detail::draw_x_ticks(scene, group, box, panel, palette,
                         panel.row == last_row);

    // Collect the observations this panel shows.
    std::vector<std::pair<double, double>> points;
    for (std::size_t i = 0; i < ds.size(); ++i) {
      const auto& obs = ds.observations()[i];
      const bool member =
          panel.kind == PanelKind::unit
              ? obs.unit == panel.id
              : (grouping && grouping->label_of(obs.unit) == panel.id);
      if (member) points.emplace_back(ds.time(i), obs.value);
    }
    const FitLine* line = nullptr;
    if (panel.kind == PanelKind::unit) {
      auto it = unit_lines.find(panel.id);
      if (it != unit_lines.end()) line = &it->second;
    } else {
      auto it = group_lines.find(panel.id);
      if (it != group_lines.end()) line = &it->second;
    }

    for (const auto& [t, v] : points) {
      if (t < panel.x_lo || t > panel.x_hi || v < panel.y_lo || v > panel.y_hi)
        continue;
      scene.add(group, CircleElem{box.px(t, panel.x_lo, panel.x_hi),
                                  box.py(v, panel.y_lo, panel.y_hi),
                                  panel.kind == PanelKind::unit ? 2.2 : 1.6,
                                  palette.resolve("point")});
    }
    if (line) {
      const double xa = panel.x_lo, xb = panel.x_hi;
      const double ya = line->intercept + line->slope * xa;
      const double yb = line->intercept + line->slope * xb;
      const auto clipped = detail::clip_segment(
          xa, ya, xb, yb, panel.x_lo, panel.y_lo, panel.x_hi, panel.y_hi);
      if (clipped) {
        const auto& [p1, p2] = *clipped;
        scene.add(group,
                  LineElem{box.px(p1.first, panel.x_lo, panel.x_hi),
                           box.py(p1.second, panel.y_lo, panel.y_hi),
                           box.px(p2.first, panel.x_lo, panel.x_hi),
                           box.py(p2.second, panel.y_lo, panel.y_hi),
                           palette.resolve(trend_color(line->slope)),
                           panel.kind == PanelKind::unit ? 1.6 : 2.0, false});
      }
    }
  }
  return scene;
}

// --- Figure family 2: parameter comparison across models -------------------

struct ModelCompareInput {
  int position = 1;  // 1..5 on the horizontal axis
  std::string name;
  std::map<std::string, IntervalSummary> unit_summary;
  std::map<std::string, IntervalSummary> hyper_summary;  // empty: no hyper
};

namespace detail {

inline void draw_point_interval(Scene& scene, SceneGroup& group,
                                const PanelBox& box, const Panel& panel,
                                double x_value, const IntervalSummary& s,
                                const std::string& hex) {
  const double x = box.px(x_value, panel.x_lo, panel.x_hi);
  // Thinner bars for wider levels; interval widths themselves are nested.
  std::vector<IntervalSummary::Band> bands = s.intervals;
  std::sort(bands.begin(), bands.end(),
            [](const auto& a, const auto& b) { return a.level > b.level; });
  double stroke = 1.1;
  for (const auto& band : bands) {
    const double lo = std::max(band.lower, panel.y_lo);
    const double hi = std::min(band.upper, panel.y_hi);
    if (lo < hi) {
      scene.add(group, LineElem{x, box.py(lo, panel.y_lo, panel.y_hi), x,
                                box.py(hi, panel.y_lo, panel.y_hi), hex,
                                stroke, false});
    }
    stroke += 1.5;
  }
  if (s.median >= panel.y_lo && s.median <= panel.y_hi) {
    scene.add(group, CircleElem{x, box.py(s.median, panel.y_lo, panel.y_hi),
                                2.4, hex});
  }
}

}  // namespace detail

// Geo-faceted comparison of one parameter across models 1..5: dark
// point-intervals per country, lighter hyper companion for hierarchical
// models, dashed connector through the country medians.
inline Scene render_param_compare(
    const GridLayout& layout, const std::vector<ModelCompareInput>& models,
    const std::map<std::string, std::string>& region_of,
    const std::map<std::string, std::string>& income_of,
    const Palette& palette, const RenderOptions& opts = {}) {
  Scene scene(opts.width, opts.height);
  const auto grid = detail::PanelGrid::from_layout(layout, opts);

  for (const auto& panel : layout.panels) {
    Panel styled = panel;
    auto rit = region_of.find(panel.id);
    if (rit != region_of.end()) {
      styled.strip_color_role = "region:" + rit->second;
    }
    auto iit = income_of.find(panel.id);
    if (iit != income_of.end()) {
      styled.label_color_role = "income:" + iit->second;
    }
    const auto box = grid.box(styled);
    SceneGroup& group = scene.begin_group("unit-" + panel.id);
    detail::draw_frame_and_strip(scene, group, box, styled, palette);
    detail::draw_y_ticks(scene, group, box, styled, palette);

    std::vector<std::pair<double, double>> medians;  // position, median
    for (const auto& model : models) {
      auto it = model.unit_summary.find(panel.id);
      if (it == model.unit_summary.end()) continue;
      const std::string role = "model" + std::to_string(model.position);
      detail::draw_point_interval(scene, group, box, styled,
                                  static_cast<double>(model.position),
                                  it->second, palette.resolve(role));
      medians.emplace_back(static_cast<double>(model.position),
                           it->second.median);
      auto hit = model.hyper_summary.find(panel.id);
      if (hit != model.hyper_summary.end()) {
        detail::draw_point_interval(
            scene, group, box, styled,
            static_cast<double>(model.position) + 0.3, hit->second,
            palette.resolve(role + "_hyper"));
      }
    }
    std::sort(medians.begin(), medians.end());
    for (std::size_t i = 1; i < medians.size(); ++i) {
      const auto& [xa, ya] = medians[i - 1];
      const auto& [xb, yb] = medians[i];
      const auto clipped = detail::clip_segment(
          xa, ya, xb, yb, styled.x_lo, styled.y_lo, styled.x_hi, styled.y_hi);
      if (clipped) {
        scene.add(group,
                  LineElem{box.px(clipped->first.first, styled.x_lo, styled.x_hi),
                           box.py(clipped->first.second, styled.y_lo, styled.y_hi),
                           box.px(clipped->second.first, styled.x_lo, styled.x_hi),
                           box.py(clipped->second.second, styled.y_lo, styled.y_hi),
                           palette.resolve("connector"), 0.9, true});
      }
    }
  }
  return scene;
}

// --- Figure family 3: offsets around zero ----------------------------------

struct OffsetRow {
  std::string unit;
  IntervalSummary summary;
};

// Horizontal forest plot of per-unit offsets with a zero reference line;
// rows sorted by offset median, largest at the top.
inline Scene render_offset_plot(std::vector<OffsetRow> rows,
                                const Palette& palette,
                                const RenderOptions& opts = {}) {
  if (rows.empty()) fail("config", "offset plot needs at least one row");
  Scene scene(opts.width, opts.height);
  std::sort(rows.begin(), rows.end(), [](const OffsetRow& a, const OffsetRow& b) {
    return a.summary.median != b.summary.median
               ? a.summary.median > b.summary.median
               : a.unit < b.unit;
  });

  double lo = 0.0, hi = 0.0;
  for (const auto& r : rows) {
    for (const auto& band : r.summary.intervals) {
      lo = std::min(lo, band.lower);
      hi = std::max(hi, band.upper);
    }
    lo = std::min(lo, r.summary.median);
    hi = std::max(hi, r.summary.median);
  }
  const ScaledRange x_range = pad_range(lo, hi);

  const double left = 140.0, right = 24.0, top = 24.0, bottom = 40.0;
  const double plot_w = opts.width - left - right;
  const double plot_h = opts.height - top - bottom;
  const double row_h = plot_h / static_cast<double>(rows.size());
  auto px = [&](double v) {
    return left + (v - x_range.lo) / (x_range.hi - x_range.lo) * plot_w;
  };

  SceneGroup& group = scene.begin_group("offsets");
  scene.add(group, RectElem{left, top, plot_w, plot_h, "none",
                            palette.resolve("frame"), 1.0});
  scene.add(group, LineElem{px(0.0), top, px(0.0), top + plot_h,
                            palette.resolve("reference"), 1.0, true});

  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const double y = top + (static_cast<double>(i) + 0.5) * row_h;
    TextElem label;
    label.x = left - 6.0;
    label.y = y + 2.5;
    label.content = r.unit;
    label.size = std::min(9.0, row_h * 0.8);
    label.anchor = TextAnchor::end;
    label.fill = palette.resolve("text");
    scene.add(group, label);

    std::vector<IntervalSummary::Band> bands = r.summary.intervals;
    std::sort(bands.begin(), bands.end(),
              [](const auto& a, const auto& b) { return a.level > b.level; });
    double stroke = 1.1;
    for (const auto& band : bands) {
      scene.add(group, LineElem{px(band.lower), y, px(band.upper), y,
                                palette.resolve("point"), stroke, false});
      stroke += 1.5;
    }
    scene.add(group, CircleElem{px(r.summary.median), y,
                                std::min(2.6, row_h * 0.35),
                                palette.resolve("point")});
  }

  for (double v : nice_ticks(x_range.lo, x_range.hi, 6)) {
    if (v < x_range.lo || v > x_range.hi) continue;
    scene.add(group, LineElem{px(v), top + plot_h, px(v), top + plot_h + 3.0,
                              palette.resolve("frame"), 0.8, false});
    TextElem t;
    t.x = px(v);
    t.y = top + plot_h + 13.0;
    t.content = detail::tick_label(v);
    t.size = 8.0;
    t.anchor = TextAnchor::middle;
    t.fill = palette.resolve("text");
    scene.add(group, t);
  }
  return scene;
}

// --- Figure family 4: holdout prediction errors ----------------------------

struct PredictionErrorRow {
  std::string unit;
  std::string group;  // income_region label "<region>:<income>"
  IntervalSummary summary;
};

// Horizontal point-interval rows in blocks per income-region group; blocks
// alphabetical, units within a block by ascending error median. Block strip
// colour comes from the region part, block label colour from the income
// part.
inline Scene render_prediction_error(std::vector<PredictionErrorRow> rows,
                                     const Palette& palette,
                                     const RenderOptions& opts = {}) {
  if (rows.empty()) fail("config", "prediction error plot needs rows");
  Scene scene(opts.width, opts.height);
  std::sort(rows.begin(), rows.end(),
            [](const PredictionErrorRow& a, const PredictionErrorRow& b) {
              if (a.group != b.group) return a.group < b.group;
              if (a.summary.median != b.summary.median) {
                return a.summary.median < b.summary.median;
              }
              return a.unit < b.unit;
            });

  double lo = 0.0, hi = 0.0;
  for (const auto& r : rows) {
    for (const auto& band : r.summary.intervals) {
      lo = std::min(lo, band.lower);
      hi = std::max(hi, band.upper);
    }
  }
  const ScaledRange x_range = pad_range(lo, hi);

  const double left = 180.0, right = 24.0, top = 24.0, bottom = 40.0;
  const double plot_w = opts.width - left - right;
  const double block_gap = 10.0;
  std::vector<std::pair<std::string, std::size_t>> blocks;  // label, count
  for (const auto& r : rows) {
    if (blocks.empty() || blocks.back().first != r.group) {
      blocks.emplace_back(r.group, 0);
    }
    ++blocks.back().second;
  }
  const double plot_h = opts.height - top - bottom -
                        block_gap * static_cast<double>(blocks.size() - 1);
  const double row_h = plot_h / static_cast<double>(rows.size());
  auto px = [&](double v) {
    return left + (v - x_range.lo) / (x_range.hi - x_range.lo) * plot_w;
  };

  auto split_group = [](const std::string& label) {
    const auto pos = label.find(':');
    if (pos == std::string::npos) return std::make_pair(label, std::string());
    return std::make_pair(label.substr(0, pos), label.substr(pos + 1));
  };

  std::size_t row_idx = 0;
  double y_cursor = top;
  for (const auto& [label, count] : blocks) {
    const auto [region, income] = split_group(label);
    const double block_h = row_h * static_cast<double>(count);
    SceneGroup& group = scene.begin_group("block-" + label);
    scene.add(group, RectElem{left - 172.0, y_cursor, 164.0, block_h,
                              palette.resolve("region:" + region),
                              palette.resolve("frame"), 0.5});
    TextElem block_label;
    block_label.x = left - 90.0;
    block_label.y = y_cursor + std::min(block_h / 2.0 + 3.0, block_h - 2.0);
    block_label.content = label;
    block_label.size = 9.0;
    block_label.anchor = TextAnchor::middle;
    block_label.fill = palette.resolve(income.empty() ? "text"
                                                      : "income:" + income);
    scene.add(group, block_label);
    scene.add(group, RectElem{left, y_cursor, plot_w, block_h, "none",
                              palette.resolve("frame"), 0.8});
    scene.add(group, LineElem{px(0.0), y_cursor, px(0.0), y_cursor + block_h,
                              palette.resolve("reference"), 1.0, true});

    for (std::size_t j = 0; j < count; ++j, ++row_idx) {
      const auto& r = rows[row_idx];
      const double y = y_cursor + (static_cast<double>(j) + 0.5) * row_h;
      TextElem unit_label;
      unit_label.x = left + plot_w - 4.0;
      unit_label.y = y + 2.5;
      unit_label.content = r.unit;
      unit_label.size = std::min(8.0, row_h * 0.75);
      unit_label.anchor = TextAnchor::end;
      unit_label.fill = palette.resolve("text");
      scene.add(group, unit_label);

      std::vector<IntervalSummary::Band> bands = r.summary.intervals;
      std::sort(bands.begin(), bands.end(),
                [](const auto& a, const auto& b) { return a.level > b.level; });
      double stroke = 1.0;
      for (const auto& band : bands) {
        scene.add(group, LineElem{px(band.lower), y, px(band.upper), y,
                                  palette.resolve("point"), stroke, false});
        stroke += 1.4;
      }
      scene.add(group, CircleElem{px(r.summary.median), y,
                                  std::min(2.4, row_h * 0.35),
                                  palette.resolve("point")});
    }
    y_cursor += block_h + block_gap;
  }

  // Shared x axis under the last block.
  SceneGroup& axis = scene.begin_group("axis-x");
  for (double v : nice_ticks(x_range.lo, x_range.hi, 6)) {
    if (v < x_range.lo || v > x_range.hi) continue;
    const double y1 = y_cursor - block_gap;
    scene.add(axis, LineElem{px(v), y1, px(v), y1 + 3.0,
                             palette.resolve("frame"), 0.8, false});
    TextElem t;
    t.x = px(v);
    t.y = y1 + 13.0;
    t.content = detail::tick_label(v);
    t.size = 8.0;
    t.anchor = TextAnchor::middle;
    t.fill = palette.resolve("text");
    scene.add(axis, t);
  }
  return scene;
}

}  // namespace hiervis

#endif  // HIERVIS_RENDER_HPP
