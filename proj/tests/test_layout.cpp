#include <algorithm>
#include <random>
#include <set>

#include "doctest.h"
#include "hiervis/dataset.hpp"
#include "hiervis/layout.hpp"
#include "test_support.hpp"

using namespace hiervis;

namespace {

std::vector<UnitPanelInput> demo_units() {
  // A Northern-Europe-like group where FIN has the steepest decline.
  return {
      {"FIN", "north", -3.0, 500, 550, true},
      {"SWE", "north", -0.7, 470, 510, true},
      {"NOR", "north", 0.4, 480, 505, true},
      {"ALB", "south", 6.6, 370, 440, true},
      {"ITA", "south", 1.4, 460, 490, true},
  };
}

std::vector<GroupPanelInput> demo_groups() {
  return {{"north", -1.0, 470, 550, true}, {"south", 4.0, 370, 490, true}};
}

}  // namespace

TEST_CASE("ragged_layout: rows by group slope, units ascending, group first") {
  const GridLayout layout = ragged_layout(demo_units(), demo_groups(), -15, 0,
                                          ScalePolicy::per_row, "region");
  REQUIRE(layout.rows.size() == 2);
  CHECK(layout.rows[0].group == "north");  // -1.0 < 4.0
  CHECK(layout.rows[1].group == "south");

  // Row 1: group panel then FIN, SWE, NOR by ascending slope.
  std::vector<std::string> row1;
  for (const auto& p : layout.panels) {
    if (p.row == 1) row1.push_back(p.id);
  }
  CHECK(row1 == std::vector<std::string>{"north", "FIN", "SWE", "NOR"});
  CHECK(layout.panels[0].kind == PanelKind::group_summary);
  CHECK(layout.panels[0].col == 1);
  CHECK(layout.panels[0].strip_color_role == "region:north");
}

TEST_CASE("ragged_layout: ties break alphabetically") {
  std::vector<UnitPanelInput> units{
      {"ZED", "g", 1.0, 0, 1, true},
      {"ANN", "g", 1.0, 0, 1, true},
      {"MID", "g", 1.0, 0, 1, true},
  };
  std::vector<GroupPanelInput> groups{{"g", 1.0, 0, 1, true}};
  const GridLayout layout = ragged_layout(units, groups, 0, 1);
  std::vector<std::string> order;
  for (const auto& p : layout.panels) {
    if (p.kind == PanelKind::unit) order.push_back(p.id);
  }
  CHECK(order == std::vector<std::string>{"ANN", "MID", "ZED"});
}

TEST_CASE("ragged_layout: row lengths count the leading group panel") {
  std::vector<UnitPanelInput> units;
  std::vector<GroupPanelInput> groups;
  const std::vector<int> sizes{8, 12, 11, 9};
  for (std::size_t g = 0; g < sizes.size(); ++g) {
    const std::string label = "g" + std::to_string(g);
    groups.push_back({label, static_cast<double>(g), 0, 1, true});
    for (int u = 0; u < sizes[g]; ++u) {
      units.push_back({label + "u" + std::to_string(u), label,
                       static_cast<double>(u), 0, 1, true});
    }
  }
  const GridLayout layout = ragged_layout(units, groups, 0, 1);
  std::map<int, int> row_len;
  for (const auto& p : layout.panels) ++row_len[p.row];
  CHECK(row_len[1] == 9);
  CHECK(row_len[2] == 13);
  CHECK(row_len[3] == 12);
  CHECK(row_len[4] == 10);
}

TEST_CASE("ragged_layout: per_row policy aligns ranges within rows") {
  const GridLayout layout = ragged_layout(demo_units(), demo_groups(), -15, 0,
                                          ScalePolicy::per_row);
  std::map<int, std::pair<double, double>> seen;
  for (const auto& p : layout.panels) {
    CHECK(p.y_lo < p.y_hi);
    auto it = seen.find(p.row);
    if (it == seen.end()) {
      seen[p.row] = {p.y_lo, p.y_hi};
    } else {
      CHECK(it->second.first == p.y_lo);
      CHECK(it->second.second == p.y_hi);
    }
  }
  CHECK(seen[1] != seen[2]);
}

TEST_CASE("ragged_layout: ordering is scale-invariant and sign-reversing") {
  auto units = demo_units();
  auto groups = demo_groups();
  const GridLayout base = ragged_layout(units, groups, -15, 0);

  auto order_of = [](const GridLayout& l) {
    std::vector<std::string> ids;
    for (const auto& p : l.panels) ids.push_back(p.id);
    return ids;
  };

  auto scaled_units = units;
  auto scaled_groups = groups;
  for (auto& u : scaled_units) u.slope_median *= 3.5;
  for (auto& g : scaled_groups) g.slope_median *= 3.5;
  CHECK(order_of(ragged_layout(scaled_units, scaled_groups, -15, 0)) ==
        order_of(base));

  for (auto& u : scaled_units) u.slope_median *= -1.0;
  for (auto& g : scaled_groups) g.slope_median *= -1.0;
  const auto flipped = order_of(ragged_layout(scaled_units, scaled_groups, -15, 0));
  // Rows reverse and units within each row reverse.
  std::vector<std::string> expected;
  {
    const GridLayout b = base;
    const int rows = b.n_rows();
    for (int r = rows; r >= 1; --r) {
      std::vector<std::string> row;
      for (const auto& p : b.panels) {
        if (p.row == r) row.push_back(p.id);
      }
      expected.push_back(row.front());  // group panel stays first
      for (std::size_t i = row.size(); i > 1; --i) {
        expected.push_back(row[i - 1]);
      }
    }
  }
  CHECK(flipped == expected);
}

TEST_CASE("ragged_layout: property test over random inputs") {
  std::mt19937 gen(31415);
  std::uniform_int_distribution<int> n_groups_d(1, 6);
  std::uniform_int_distribution<int> n_units_d(1, 8);
  std::uniform_real_distribution<double> slope_d(-5.0, 5.0);

  for (int rep = 0; rep < 500; ++rep) {
    std::vector<GroupPanelInput> groups;
    std::vector<UnitPanelInput> units;
    const int n_groups = n_groups_d(gen);
    for (int g = 0; g < n_groups; ++g) {
      const std::string label = "g" + std::to_string(g);
      groups.push_back({label, slope_d(gen), 0, 1, true});
      const int n_units = n_units_d(gen);
      for (int u = 0; u < n_units; ++u) {
        units.push_back({label + "-u" + std::to_string(u), label, slope_d(gen),
                         0, 1, true});
      }
    }
    const GridLayout layout = ragged_layout(units, groups, 0, 1);

    std::map<std::string, double> group_slope;
    for (const auto& g : groups) group_slope[g.label] = g.slope_median;
    std::map<std::string, double> unit_slope;
    for (const auto& u : units) unit_slope[u.unit] = u.slope_median;

    for (std::size_t r = 1; r < layout.rows.size(); ++r) {
      CHECK(group_slope[layout.rows[r - 1].group] <=
            group_slope[layout.rows[r].group]);
    }
    std::set<std::pair<int, int>> cells;
    for (const auto& p : layout.panels) {
      CHECK(cells.insert({p.row, p.col}).second);
      CHECK(p.y_lo < p.y_hi);
    }
    for (const auto& row : layout.rows) {
      std::vector<const Panel*> in_row;
      for (const auto& p : layout.panels) {
        if (layout.rows[static_cast<std::size_t>(p.row - 1)].group == row.group &&
            p.kind == PanelKind::unit) {
          in_row.push_back(&p);
        }
      }
      std::sort(in_row.begin(), in_row.end(),
                [](const Panel* a, const Panel* b) { return a->col < b->col; });
      for (std::size_t i = 1; i < in_row.size(); ++i) {
        CHECK(unit_slope[in_row[i - 1]->id] <= unit_slope[in_row[i]->id]);
      }
    }
  }
}

TEST_CASE("ragged_layout rejects units with missing pieces") {
  std::vector<UnitPanelInput> units{{"A", "ghost", 1.0, 0, 1, true}};
  std::vector<GroupPanelInput> groups{{"g", 1.0, 0, 1, true}};
  CHECK_THROWS_AS(ragged_layout(units, groups, 0, 1), Error);

  std::vector<UnitPanelInput> nan_units{
      {"A", "g", std::numeric_limits<double>::quiet_NaN(), 0, 1, true}};
  CHECK_THROWS_AS(ragged_layout(nan_units, groups, 0, 1), Error);
}

TEST_CASE("compute_scales: global, per_row, free") {
  const std::vector<PanelExtent> panels{
      {1, true, 300, 550}, {2, true, 400, 500}};

  SUBCASE("global unions and pads 5%") {
    const ScaleResult r = compute_scales(panels, ScalePolicy::global);
    for (const auto& range : r.ranges) {
      CHECK(range.lo == doctest::Approx(287.5));
      CHECK(range.hi == doctest::Approx(562.5));
    }
  }

  SUBCASE("per_row differs across rows, matches within") {
    const std::vector<PanelExtent> grid{
        {1, true, 300, 400}, {1, true, 350, 380}, {2, true, 0, 10}};
    const ScaleResult r = compute_scales(grid, ScalePolicy::per_row);
    CHECK(r.ranges[0].lo == r.ranges[1].lo);
    CHECK(r.ranges[0].hi == r.ranges[1].hi);
    CHECK(r.ranges[2].hi < r.ranges[0].lo);
  }

  SUBCASE("free pads each panel's own extent") {
    const ScaleResult r = compute_scales(panels, ScalePolicy::free_scale);
    CHECK(r.ranges[0].lo == doctest::Approx(287.5));
    CHECK(r.ranges[1].lo == doctest::Approx(395.0));
    CHECK(r.ranges[1].hi == doctest::Approx(505.0));
  }

  SUBCASE("empty panel inherits its row with a notice") {
    const std::vector<PanelExtent> grid{
        {1, true, 300, 400}, {1, false, 0, 0}};
    const ScaleResult r = compute_scales(grid, ScalePolicy::free_scale);
    CHECK(r.ranges[1].lo == r.ranges[0].lo);
    REQUIRE(!r.notices.empty());
  }
}

TEST_CASE("trend_color boundary rule") {
  CHECK(std::string(trend_color(-0.5)) == "negative");
  CHECK(std::string(trend_color(1.2)) == "nonnegative");
  CHECK(std::string(trend_color(0.0)) == "nonnegative");
  CHECK_THROWS_AS(trend_color(std::numeric_limits<double>::quiet_NaN()), Error);
}

TEST_CASE("geo_layout: pass-through cells and missing-unit errors") {
  GeoGridSpec spec;
  spec.entries = {{"FIN", "Finland", 1, 7}, {"SWE", "Sweden", 1, 6}};

  const GridLayout layout =
      geo_layout(spec, {{"FIN", 480, 550}, {"SWE", 460, 520}}, 0.5, 5.5);
  REQUIRE(layout.panels.size() == 2);
  CHECK(layout.panels[0].row == 1);
  CHECK(layout.panels[0].col == 7);
  CHECK(layout.panels[0].strip_label == "Finland");
  CHECK(layout.policy == ScalePolicy::free_scale);

  CHECK_THROWS_WITH_AS(geo_layout(spec, {{"ALB", 0, 1}}, 0.5, 5.5),
                       doctest::Contains("ALB"), Error);

  GeoGridSpec dup;
  dup.entries = {{"A", "", 1, 1}, {"B", "", 1, 1}};
  CHECK_THROWS_AS(dup.check(), Error);
}

TEST_CASE("bundled europe grid covers the 40-unit roster with unique cells") {
  const GeoGridSpec grid =
      load_geo_grid(test_support::data_file("europe_grid.csv"));
  CHECK(grid.entries.size() == 40);
  grid.check();  // throws on duplicate cells/units

  const Dataset ds =
      load_observations(test_support::data_file("pisa_math.csv"));
  for (const auto& unit : ds.units()) {
    CHECK(grid.find(unit) != nullptr);
  }
}
