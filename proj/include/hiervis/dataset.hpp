#ifndef HIERVIS_DATASET_HPP
#define HIERVIS_DATASET_HPP

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "hiervis/csv.hpp"
#include "hiervis/error.hpp"

namespace hiervis {

// One unit/time/value record. `unit` is the lowest-level identifier
// (a country code in the bundled data); `value` is the measured score.
struct Observation {
  std::string unit;
  int year = 0;
  double value = 0.0;
};

struct YearRange {
  int min_year = 1995;
  int max_year = 2035;
};

// unit -> group label. Labels are normalised to lowercase on load so they
// round-trip cleanly through parameter names.
struct GroupingTable {
  std::string name;
  std::map<std::string, std::string> assignment;

  const std::string& label_of(const std::string& unit) const {
    auto it = assignment.find(unit);
    if (it == assignment.end()) {
      fail("coverage", "unit '" + unit + "' missing from grouping '" + name + "'");
    }
    return it->second;
  }
};

struct ValidationReport {
  std::vector<std::string> single_observation_units;
  std::vector<std::string> coverage_warnings;  // "unit X missing from grouping G"
  std::vector<std::string> year_gap_notes;     // units missing globally observed years
  bool empty() const {
    return single_observation_units.empty() && coverage_warnings.empty() &&
           year_gap_notes.empty();
  }
};

// Immutable after construction: loaders and transforms return new values.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::vector<Observation> observations, int anchor_year)
      : observations_(std::move(observations)), anchor_year_(anchor_year) {
    check_invariants();
  }

  const std::vector<Observation>& observations() const { return observations_; }
  std::size_t size() const { return observations_.size(); }
  int anchor_year() const { return anchor_year_; }

  // t = year - anchor_year, exact integer arithmetic widened to double.
  double time(std::size_t i) const {
    return static_cast<double>(observations_[i].year - anchor_year_);
  }

  const std::vector<GroupingTable>& groupings() const { return groupings_; }

  bool has_grouping(const std::string& name) const {
    return find_grouping(name) != nullptr;
  }

  const GroupingTable& grouping(const std::string& name) const {
    const GroupingTable* g = find_grouping(name);
    if (!g) fail("config", "grouping '" + name + "' not attached");
    return *g;
  }

  // Distinct units in first-appearance order (row order is preserved by the
  // loader, so this is deterministic).
  std::vector<std::string> units() const {
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (const auto& o : observations_) {
      if (seen.insert(o.unit).second) out.push_back(o.unit);
    }
    return out;
  }

  std::vector<std::size_t> rows_of(const std::string& unit) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < observations_.size(); ++i) {
      if (observations_[i].unit == unit) out.push_back(i);
    }
    return out;
  }

  Dataset with_anchor(int anchor_year) const {
    Dataset out = *this;
    out.anchor_year_ = anchor_year;
    return out;
  }

  // Appends/replaces a grouping without the coverage precondition; the
  // attach_grouping entry point enforces it and validate() reports holes.
  Dataset with_grouping(GroupingTable table) const {
    for (const auto& [unit, label] : table.assignment) {
      if (trim(label).empty()) {
        fail("schema", "empty group label for unit '" + unit +
                           "' in grouping '" + table.name + "'");
      }
    }
    Dataset out = *this;
    out.groupings_.erase(
        std::remove_if(out.groupings_.begin(), out.groupings_.end(),
                       [&](const GroupingTable& g) { return g.name == table.name; }),
        out.groupings_.end());
    out.groupings_.push_back(std::move(table));
    // Grouping list order is normalised alphabetically so attach order
    // does not matter.
    std::sort(out.groupings_.begin(), out.groupings_.end(),
              [](const GroupingTable& x, const GroupingTable& y) {
                return x.name < y.name;
              });
    return out;
  }

 private:
  const GroupingTable* find_grouping(const std::string& name) const {
    for (const auto& g : groupings_) {
      if (g.name == name) return &g;
    }
    return nullptr;
  }

  void check_invariants() const {
    std::set<std::pair<std::string, int>> seen;
    for (const auto& o : observations_) {
      if (!std::isfinite(o.value)) {
        fail("parse", "non-finite value for " + o.unit + "/" +
                          std::to_string(o.year));
      }
      if (!seen.insert({o.unit, o.year}).second) {
        fail("duplicate", "duplicate observation for " + o.unit + "/" +
                              std::to_string(o.year));
      }
    }
  }

  std::vector<Observation> observations_;
  int anchor_year_ = 2018;
  std::vector<GroupingTable> groupings_;
};

struct ColumnNames {
  std::string unit = "country";
  std::string year = "year";
  std::string value = "math";
};

// Reads long-format observations from a delimited text file. Row order is
// preserved; duplicate (unit, year) pairs and out-of-range years are
// rejected. Groupings start empty.
inline Dataset load_observations(const std::string& path,
                                 const ColumnNames& cols = {},
                                 const YearRange& years = {},
                                 int anchor_year = 2018) {
  const CsvTable table = read_csv(path);
  const int cu = table.require_column(cols.unit, path);
  const int cy = table.require_column(cols.year, path);
  const int cv = table.require_column(cols.value, path);
  std::vector<Observation> obs;
  obs.reserve(table.rows.size());
  std::set<std::pair<std::string, int>> seen;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::string where = "at data row " + std::to_string(r + 1);
    if (static_cast<int>(row.size()) <= std::max({cu, cy, cv})) {
      fail("parse", "too few fields " + where + " in " + path);
    }
    Observation o;
    o.unit = trim(row[static_cast<std::size_t>(cu)]);
    o.year = static_cast<int>(parse_long(row[static_cast<std::size_t>(cy)], where));
    o.value = parse_double(row[static_cast<std::size_t>(cv)], where);
    if (o.unit.empty()) fail("parse", "empty unit " + where);
    if (o.year < years.min_year || o.year > years.max_year) {
      fail("parse", "year " + std::to_string(o.year) + " outside [" +
                        std::to_string(years.min_year) + ", " +
                        std::to_string(years.max_year) + "] " + where);
    }
    if (!seen.insert({o.unit, o.year}).second) {
      fail("duplicate", "duplicate (unit, year) = (" + o.unit + ", " +
                            std::to_string(o.year) + ") " + where);
    }
    obs.push_back(std::move(o));
  }
  return Dataset(std::move(obs), anchor_year);
}

// Loads a unit -> group table; labels are lowercased.
inline GroupingTable load_grouping(const std::string& path,
                                   const std::string& name,
                                   const ColumnNames& cols = {}) {
  const CsvTable table = read_csv(path);
  const int cu = table.require_column(cols.unit, path);
  const int cg = table.require_column("group", path);
  GroupingTable out;
  out.name = to_lower(trim(name));
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    if (static_cast<int>(row.size()) <= std::max(cu, cg)) {
      fail("parse", "too few fields at row " + std::to_string(r + 1) + " in " + path);
    }
    const std::string unit = trim(row[static_cast<std::size_t>(cu)]);
    const std::string label = to_lower(trim(row[static_cast<std::size_t>(cg)]));
    if (label.empty()) fail("schema", "empty group label for unit '" + unit + "'");
    if (!out.assignment.emplace(unit, label).second) {
      fail("duplicate", "unit '" + unit + "' listed twice in " + path);
    }
  }
  return out;
}

inline Dataset recenter_time(const Dataset& ds, int anchor_year) {
  return ds.with_anchor(anchor_year);
}

inline Dataset attach_grouping(const Dataset& ds, GroupingTable table) {
  std::vector<std::string> missing;
  for (const auto& unit : ds.units()) {
    if (table.assignment.find(unit) == table.assignment.end()) {
      missing.push_back(unit);
    }
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& u : missing) list += (list.empty() ? "" : ", ") + u;
    fail("coverage",
         "grouping '" + table.name + "' does not cover: " + list);
  }
  return ds.with_grouping(std::move(table));
}

// Builds "<parent>:<child>" labels, e.g. region x income -> income_region.
inline Dataset derive_composite_grouping(const Dataset& ds,
                                         const std::string& first,
                                         const std::string& second,
                                         const std::string& name) {
  const GroupingTable& a = ds.grouping(first);
  const GroupingTable& b = ds.grouping(second);
  GroupingTable out;
  out.name = to_lower(trim(name));
  for (const auto& unit : ds.units()) {
    out.assignment[unit] = a.label_of(unit) + ":" + b.label_of(unit);
  }
  return ds.with_grouping(std::move(out));
}

inline ValidationReport validate(const Dataset& ds) {
  ValidationReport report;
  std::map<std::string, int> counts;
  std::set<int> all_years;
  for (const auto& o : ds.observations()) {
    ++counts[o.unit];
    all_years.insert(o.year);
  }
  for (const auto& unit : ds.units()) {
    if (counts[unit] == 1) report.single_observation_units.push_back(unit);
  }
  for (const auto& g : ds.groupings()) {
    for (const auto& unit : ds.units()) {
      if (g.assignment.find(unit) == g.assignment.end()) {
        report.coverage_warnings.push_back("unit " + unit +
                                           " missing from grouping " + g.name);
      }
    }
  }
  for (const auto& unit : ds.units()) {
    std::set<int> unit_years;
    for (std::size_t i : ds.rows_of(unit)) {
      unit_years.insert(ds.observations()[i].year);
    }
    if (unit_years.size() > 1) {
      int missing = 0;
      for (int y : all_years) {
        if (y > *unit_years.begin() && y < *unit_years.rbegin() &&
            unit_years.count(y) == 0) {
          ++missing;
        }
      }
      if (missing > 0) {
        report.year_gap_notes.push_back(unit + " missing " +
                                        std::to_string(missing) +
                                        " interior year(s)");
      }
    }
  }
  return report;
}

}  // namespace hiervis

#endif  // HIERVIS_DATASET_HPP
