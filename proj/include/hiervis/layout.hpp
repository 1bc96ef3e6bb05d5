#ifndef HIERVIS_LAYOUT_HPP
#define HIERVIS_LAYOUT_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "hiervis/csv.hpp"
#include "hiervis/error.hpp"

namespace hiervis {

enum class ScalePolicy { global, per_row, free_scale };

inline const char* scale_policy_name(ScalePolicy p) {
  switch (p) {
    case ScalePolicy::global: return "global";
    case ScalePolicy::per_row: return "per_row";
    case ScalePolicy::free_scale: return "free";
  }
  return "?";
}

inline ScalePolicy parse_scale_policy(const std::string& s) {
  if (s == "global") return ScalePolicy::global;
  if (s == "per_row") return ScalePolicy::per_row;
  if (s == "free") return ScalePolicy::free_scale;
  fail("config", "unknown scale policy '" + s + "'");
}

enum class PanelKind { unit, group_summary };

struct Panel {
  std::string id;  // unit code or group label
  PanelKind kind = PanelKind::unit;
  int row = 0;  // 1-based
  int col = 0;  // 1-based
  double x_lo = 0.0, x_hi = 1.0;
  double y_lo = 0.0, y_hi = 1.0;
  std::string strip_label;
  std::string strip_color_role;  // e.g. "region:western"
  std::string label_color_role;  // e.g. "income:middle"
  std::string display_name;      // falls back to id when empty
};

struct RowInfo {
  std::string group;
  std::string color_role;
};

struct GridLayout {
  std::vector<Panel> panels;
  std::vector<RowInfo> rows;  // empty for geo layouts
  ScalePolicy policy = ScalePolicy::per_row;
  std::string grouping_name;  // grouping that defined the rows, if any

  int n_rows() const {
    int r = 0;
    for (const auto& p : panels) r = std::max(r, p.row);
    return r;
  }
  int n_cols() const {
    int c = 0;
    for (const auto& p : panels) c = std::max(c, p.col);
    return c;
  }
};

// --- Scale computation ----------------------------------------------------

struct PanelExtent {
  int row = 0;
  bool has_content = true;
  double lo = 0.0;
  double hi = 1.0;
};

struct ScaledRange {
  double lo = 0.0;
  double hi = 1.0;
};

// Pads [lo, hi] by 5% of the span on each side; degenerate spans are opened
// by max(1, 5% of |value|) so every range satisfies lower < upper.
inline ScaledRange pad_range(double lo, double hi) {
  if (hi < lo) std::swap(lo, hi);
  double span = hi - lo;
  if (span <= 0.0) {
    const double bump = std::max(1.0, 0.05 * std::abs(lo));
    return {lo - bump, hi + bump};
  }
  return {lo - 0.05 * span, hi + 0.05 * span};
}

struct ScaleResult {
  std::vector<ScaledRange> ranges;  // one per input panel
  std::vector<std::string> notices;
};

inline ScaleResult compute_scales(const std::vector<PanelExtent>& panels,
                                  ScalePolicy policy) {
  ScaleResult out;
  out.ranges.resize(panels.size());

  double g_lo = std::numeric_limits<double>::infinity();
  double g_hi = -std::numeric_limits<double>::infinity();
  std::map<int, std::pair<double, double>> row_extent;
  for (const auto& p : panels) {
    if (!p.has_content) continue;
    if (!std::isfinite(p.lo) || !std::isfinite(p.hi)) {
      fail("config", "non-finite panel extent");
    }
    g_lo = std::min(g_lo, std::min(p.lo, p.hi));
    g_hi = std::max(g_hi, std::max(p.lo, p.hi));
    auto it = row_extent.find(p.row);
    if (it == row_extent.end()) {
      row_extent[p.row] = {std::min(p.lo, p.hi), std::max(p.lo, p.hi)};
    } else {
      it->second.first = std::min(it->second.first, std::min(p.lo, p.hi));
      it->second.second = std::max(it->second.second, std::max(p.lo, p.hi));
    }
  }
  if (!std::isfinite(g_lo)) fail("config", "no panel has content");

  for (std::size_t i = 0; i < panels.size(); ++i) {
    const auto& p = panels[i];
    switch (policy) {
      case ScalePolicy::global:
        out.ranges[i] = pad_range(g_lo, g_hi);
        break;
      case ScalePolicy::per_row: {
        auto it = row_extent.find(p.row);
        if (it == row_extent.end()) {
          out.ranges[i] = pad_range(g_lo, g_hi);
          out.notices.push_back("row " + std::to_string(p.row) +
                                " empty; using the global range");
        } else {
          out.ranges[i] = pad_range(it->second.first, it->second.second);
        }
        break;
      }
      case ScalePolicy::free_scale:
        if (!p.has_content) {
          auto it = row_extent.find(p.row);
          if (it != row_extent.end()) {
            out.ranges[i] = pad_range(it->second.first, it->second.second);
            out.notices.push_back("panel " + std::to_string(i + 1) +
                                  " empty; using its row range");
          } else {
            out.ranges[i] = pad_range(g_lo, g_hi);
            out.notices.push_back("panel " + std::to_string(i + 1) +
                                  " empty; using the global range");
          }
        } else {
          out.ranges[i] = pad_range(p.lo, p.hi);
        }
        break;
    }
  }
  return out;
}

// Trend colour role: strictly negative slopes read "negative" (red);
// zero or positive read "nonnegative" (blue).
inline const char* trend_color(double slope_median) {
  if (!std::isfinite(slope_median)) fail("config", "non-finite slope median");
  return slope_median < 0.0 ? "negative" : "nonnegative";
}

// --- Ragged grouped layout -------------------------------------------------

struct UnitPanelInput {
  std::string unit;
  std::string group;
  double slope_median = 0.0;
  double y_lo = 0.0, y_hi = 0.0;  // data + fit extent
  bool has_content = true;
};

struct GroupPanelInput {
  std::string label;
  double slope_median = 0.0;
  double y_lo = 0.0, y_hi = 0.0;
  bool has_content = true;
};

// One row per group ordered by ascending group slope median; a leading
// group-summary panel, then units ordered by ascending slope median with
// alphabetical tie-breaks. The x range is shared globally (callers pass
// the data extent); y ranges follow the policy (default per_row).
inline GridLayout ragged_layout(const std::vector<UnitPanelInput>& units,
                                const std::vector<GroupPanelInput>& groups,
                                double x_lo, double x_hi,
                                ScalePolicy policy = ScalePolicy::per_row,
                                const std::string& grouping_name = "group") {
  if (units.empty() || groups.empty()) {
    fail("config", "ragged layout needs units and groups");
  }
  std::map<std::string, const GroupPanelInput*> group_of;
  for (const auto& g : groups) group_of[g.label] = &g;
  for (const auto& u : units) {
    if (!std::isfinite(u.slope_median)) {
      fail("config", "unit '" + u.unit + "' has no finite slope median");
    }
    if (group_of.find(u.group) == group_of.end()) {
      fail("config", "unit '" + u.unit + "' references unknown group '" +
                         u.group + "'");
    }
  }

  std::vector<const GroupPanelInput*> row_order;
  for (const auto& g : groups) row_order.push_back(&g);
  std::sort(row_order.begin(), row_order.end(),
            [](const GroupPanelInput* a, const GroupPanelInput* b) {
              return a->slope_median != b->slope_median
                         ? a->slope_median < b->slope_median
                         : a->label < b->label;
            });

  GridLayout out;
  out.policy = policy;
  out.grouping_name = grouping_name;
  const ScaledRange x_range = pad_range(x_lo, x_hi);

  std::vector<PanelExtent> extents;
  for (std::size_t r = 0; r < row_order.size(); ++r) {
    const GroupPanelInput& g = *row_order[r];
    out.rows.push_back({g.label, grouping_name + ":" + g.label});

    Panel gp;
    gp.id = g.label;
    gp.kind = PanelKind::group_summary;
    gp.row = static_cast<int>(r + 1);
    gp.col = 1;
    gp.strip_label = g.label;
    gp.strip_color_role = grouping_name + ":" + g.label;
    gp.x_lo = x_range.lo;
    gp.x_hi = x_range.hi;
    out.panels.push_back(gp);
    extents.push_back({gp.row, g.has_content, g.y_lo, g.y_hi});

    std::vector<const UnitPanelInput*> members;
    for (const auto& u : units) {
      if (u.group == g.label) members.push_back(&u);
    }
    std::sort(members.begin(), members.end(),
              [](const UnitPanelInput* a, const UnitPanelInput* b) {
                return a->slope_median != b->slope_median
                           ? a->slope_median < b->slope_median
                           : a->unit < b->unit;
              });
    int col = 2;
    for (const UnitPanelInput* u : members) {
      Panel p;
      p.id = u->unit;
      p.kind = PanelKind::unit;
      p.row = static_cast<int>(r + 1);
      p.col = col++;
      p.strip_label = u->unit;
      p.strip_color_role = grouping_name + ":" + g.label;
      p.x_lo = x_range.lo;
      p.x_hi = x_range.hi;
      out.panels.push_back(p);
      extents.push_back({p.row, u->has_content, u->y_lo, u->y_hi});
    }
  }

  const ScaleResult scaled = compute_scales(extents, policy);
  for (std::size_t i = 0; i < out.panels.size(); ++i) {
    out.panels[i].y_lo = scaled.ranges[i].lo;
    out.panels[i].y_hi = scaled.ranges[i].hi;
  }
  return out;
}

// --- Geographic grid layout -------------------------------------------------

struct GeoGridEntry {
  std::string unit;
  std::string display_name;
  int row = 0;
  int col = 0;
};

struct GeoGridSpec {
  std::vector<GeoGridEntry> entries;

  const GeoGridEntry* find(const std::string& unit) const {
    for (const auto& e : entries) {
      if (e.unit == unit) return &e;
    }
    return nullptr;
  }

  void check() const {
    std::set<std::pair<int, int>> cells;
    std::set<std::string> units;
    for (const auto& e : entries) {
      if (e.row < 1 || e.col < 1) fail("config", "grid cells are 1-based");
      if (!cells.insert({e.row, e.col}).second) {
        fail("config", "duplicate grid cell (" + std::to_string(e.row) + "," +
                           std::to_string(e.col) + ")");
      }
      if (!units.insert(e.unit).second) {
        fail("config", "unit '" + e.unit + "' appears twice in the grid");
      }
    }
  }
};

// Geo spec file: code,name,row,col.
inline GeoGridSpec load_geo_grid(const std::string& path) {
  const CsvTable table = read_csv(path);
  const int cc = table.require_column("code", path);
  const int cn = table.require_column("name", path);
  const int cr = table.require_column("row", path);
  const int cl = table.require_column("col", path);
  GeoGridSpec out;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::string where = "at grid row " + std::to_string(r + 1);
    GeoGridEntry e;
    e.unit = trim(row[static_cast<std::size_t>(cc)]);
    e.display_name = trim(row[static_cast<std::size_t>(cn)]);
    e.row = static_cast<int>(parse_long(row[static_cast<std::size_t>(cr)], where));
    e.col = static_cast<int>(parse_long(row[static_cast<std::size_t>(cl)], where));
    out.entries.push_back(std::move(e));
  }
  out.check();
  return out;
}

struct GeoUnitExtent {
  std::string unit;
  double lo = 0.0;
  double hi = 1.0;
};

// One free-scaled panel per unit at its grid cell. Every plotted unit must
// have a cell; the x range (model positions) is shared.
inline GridLayout geo_layout(const GeoGridSpec& spec,
                             const std::vector<GeoUnitExtent>& units,
                             double x_lo, double x_hi) {
  spec.check();
  std::vector<std::string> missing;
  for (const auto& u : units) {
    if (!spec.find(u.unit)) missing.push_back(u.unit);
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    fail("config", "units missing from the geo grid: " + list);
  }

  GridLayout out;
  out.policy = ScalePolicy::free_scale;
  std::vector<PanelExtent> extents;
  for (const auto& u : units) {
    const GeoGridEntry* e = spec.find(u.unit);
    Panel p;
    p.id = u.unit;
    p.kind = PanelKind::unit;
    p.row = e->row;
    p.col = e->col;
    p.strip_label = e->display_name.empty() ? u.unit : e->display_name;
    p.display_name = e->display_name;
    p.x_lo = x_lo;
    p.x_hi = x_hi;
    out.panels.push_back(p);
    extents.push_back({e->row, true, u.lo, u.hi});
  }
  const ScaleResult scaled = compute_scales(extents, ScalePolicy::free_scale);
  for (std::size_t i = 0; i < out.panels.size(); ++i) {
    out.panels[i].y_lo = scaled.ranges[i].lo;
    out.panels[i].y_hi = scaled.ranges[i].hi;
  }
  return out;
}

}  // namespace hiervis

#endif  // HIERVIS_LAYOUT_HPP
