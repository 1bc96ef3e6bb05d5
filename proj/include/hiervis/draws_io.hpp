#ifndef HIERVIS_DRAWS_IO_HPP
#define HIERVIS_DRAWS_IO_HPP

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "hiervis/csv.hpp"
#include "hiervis/error.hpp"
#include "hiervis/evaluation.hpp"
#include "hiervis/sampler.hpp"
#include "hiervis/version.hpp"

namespace hiervis {

// Output files open with '#' metadata records: tool version, seed and the
// digests of every input file, so identical inputs are checkable by eye.
struct OutputMetadata {
  std::uint64_t seed = 0;
  std::map<std::string, std::string> inputs;  // label -> path

  // Inputs are recorded as basename:digest; content is pinned by the digest
  // and the filename stays machine-independent, so reruns byte-match.
  std::string header_line() const {
    std::string line = "hiervis " + std::string(kVersion) +
                       "; seed=" + std::to_string(seed);
    for (const auto& [label, path] : inputs) {
      line += "; " + label + "=" +
              std::filesystem::path(path).filename().string() + ":" +
              hex64(digest_file(path));
    }
    return line;
  }

  static std::uint64_t digest_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("io", "cannot open " + path + " for digesting");
    std::ostringstream buf;
    buf << in.rdbuf();
    return fnv1a64(buf.str());
  }
};

namespace detail {

// Shortest round-trip decimal form; stable for a given libc, and draws are
// already deterministic bit-for-bit given the seed.
inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

// Draws file: metadata comments, then `chain,iter,<parameter...>` rows.
inline void write_draws_csv(const PosteriorDraws& draws,
                            const std::string& path,
                            const OutputMetadata& meta) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("io", "cannot write " + path);
  out << "# " << meta.header_line() << "\n";
  out << "# model=" << model_kind_name(draws.spec.kind)
      << " anchor=" << draws.anchor_year << " chains=" << draws.config.chains
      << " iterations=" << draws.config.iterations
      << " warmup=" << draws.config.warmup << " thin=" << draws.config.thin
      << "\n";
  for (const auto& w : draws.warnings) out << "# warning: " << w << "\n";
  out << "chain,iter";
  for (const auto& name : draws.index.names()) out << "," << csv_quote(name);
  out << "\n";
  for (std::size_t s = 0; s < draws.num_draws(); ++s) {
    out << draws.chain[s] << "," << draws.iteration[s];
    for (std::size_t p = 0; p < draws.index.size(); ++p) {
      out << "," << detail::fmt_double(draws.columns[p][s]);
    }
    out << "\n";
  }
}

// Reads a draws file back. The model spec is reconstructed from the data
// later; here we recover names, metadata and the draw matrix.
struct LoadedDraws {
  std::vector<std::string> parameter_names;
  std::vector<int> chain;
  std::vector<int> iteration;
  std::vector<std::vector<double>> columns;  // [param][draw]
  std::string model;
  int anchor_year = 2018;
  int chains = 0, iterations = 0, warmup = 0, thin = 1;

  std::size_t num_draws() const { return chain.size(); }

  const std::vector<double>& column(const std::string& name) const {
    for (std::size_t p = 0; p < parameter_names.size(); ++p) {
      if (parameter_names[p] == name) return columns[p];
    }
    fail("config", "draws file has no parameter '" + name + "'");
  }
};

inline LoadedDraws read_draws_csv(const std::string& path) {
  const CsvTable table = read_csv(path);
  if (table.header.size() < 3 || table.header[0] != "chain" ||
      table.header[1] != "iter") {
    fail("schema", "draws file must start with chain,iter columns: " + path);
  }
  LoadedDraws out;
  for (const auto& line : table.comments) {
    std::istringstream ss(line.substr(1));
    std::string token;
    while (ss >> token) {
      auto grab = [&](const char* key, auto setter) {
        const std::string prefix = std::string(key) + "=";
        if (token.rfind(prefix, 0) == 0) setter(token.substr(prefix.size()));
      };
      grab("model", [&](const std::string& v) { out.model = v; });
      grab("anchor", [&](const std::string& v) {
        out.anchor_year = static_cast<int>(parse_long(v, "in metadata"));
      });
      grab("chains", [&](const std::string& v) {
        out.chains = static_cast<int>(parse_long(v, "in metadata"));
      });
      grab("iterations", [&](const std::string& v) {
        out.iterations = static_cast<int>(parse_long(v, "in metadata"));
      });
      grab("warmup", [&](const std::string& v) {
        out.warmup = static_cast<int>(parse_long(v, "in metadata"));
      });
      grab("thin", [&](const std::string& v) {
        out.thin = static_cast<int>(parse_long(v, "in metadata"));
      });
    }
  }
  out.parameter_names.assign(table.header.begin() + 2, table.header.end());
  out.columns.assign(out.parameter_names.size(), {});
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::string where = "at draws row " + std::to_string(r + 1);
    if (row.size() != table.header.size()) {
      fail("parse", "wrong field count " + where + " in " + path);
    }
    out.chain.push_back(static_cast<int>(parse_long(row[0], where)));
    out.iteration.push_back(static_cast<int>(parse_long(row[1], where)));
    for (std::size_t p = 0; p < out.parameter_names.size(); ++p) {
      out.columns[p].push_back(parse_double(row[p + 2], where));
    }
  }
  if (out.chain.empty()) fail("schema", "draws file has no rows: " + path);
  return out;
}

// Rehydrates a PosteriorDraws from a loaded file plus the dataset it was
// fitted to (the spec levels must resolve identically, which the canonical
// ordering guarantees for the same data).
inline PosteriorDraws attach_draws(const LoadedDraws& loaded,
                                   const Dataset& ds) {
  PosteriorDraws out;
  out.spec = build_spec(parse_model_kind(loaded.model), ds);
  out.index = parameter_index(out.spec);
  if (out.index.size() != loaded.parameter_names.size()) {
    fail("schema", "draws file parameters do not match the dataset/model");
  }
  for (std::size_t p = 0; p < out.index.size(); ++p) {
    if (out.index.name(p) != loaded.parameter_names[p]) {
      fail("schema", "parameter mismatch at column " + std::to_string(p + 3) +
                         ": expected " + out.index.name(p) + ", file has " +
                         loaded.parameter_names[p]);
    }
  }
  out.anchor_year = loaded.anchor_year;
  out.config.chains = loaded.chains > 0 ? loaded.chains : 1;
  out.config.iterations =
      loaded.iterations > 0
          ? loaded.iterations
          : static_cast<int>(loaded.num_draws()) / out.config.chains;
  out.config.warmup = loaded.warmup;
  out.config.thin = loaded.thin;
  out.chain = loaded.chain;
  out.iteration = loaded.iteration;
  out.columns = loaded.columns;
  return out;
}

// LOO result records: pointwise rows with a summary line in the metadata.
inline void write_loo_csv(const LooResult& result, const std::string& path,
                          const OutputMetadata& meta) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("io", "cannot write " + path);
  out << "# " << meta.header_line() << "\n";
  out << "# model=" << result.model << " elpd=" << detail::fmt_double(result.elpd)
      << " se=" << detail::fmt_double(result.se) << " n=" << result.n() << "\n";
  for (const auto& w : result.warnings) out << "# warning: " << w << "\n";
  out << "i,elpd,pareto_k\n";
  for (std::size_t i = 0; i < result.n(); ++i) {
    out << (i + 1) << "," << detail::fmt_double(result.pointwise[i]) << ","
        << detail::fmt_double(result.pareto_k[i]) << "\n";
  }
}

inline LooResult read_loo_csv(const std::string& path) {
  const CsvTable table = read_csv(path);
  LooResult out;
  for (const auto& line : table.comments) {
    std::istringstream ss(line.substr(1));
    std::string token;
    while (ss >> token) {
      if (token.rfind("model=", 0) == 0) out.model = token.substr(6);
    }
  }
  const int ce = table.require_column("elpd", path);
  const int ck = table.require_column("pareto_k", path);
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const std::string where = "at row " + std::to_string(r + 1);
    out.pointwise.push_back(
        parse_double(table.rows[r][static_cast<std::size_t>(ce)], where));
    out.pareto_k.push_back(
        parse_double(table.rows[r][static_cast<std::size_t>(ck)], where));
  }
  if (out.pointwise.empty()) fail("schema", "LOO file has no rows: " + path);
  out.elpd = 0.0;
  for (double v : out.pointwise) out.elpd += v;
  double mean = out.elpd / static_cast<double>(out.n());
  double var = 0.0;
  for (double v : out.pointwise) var += (v - mean) * (v - mean);
  var /= static_cast<double>(out.n() > 1 ? out.n() - 1 : 1);
  out.se = std::sqrt(static_cast<double>(out.n()) * var);
  return out;
}

}  // namespace hiervis

#endif  // HIERVIS_DRAWS_IO_HPP
