#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "wproj/complexity.hpp"
#include "wproj/measures.hpp"
#include "wproj/mot.hpp"
#include "wproj/ot.hpp"
#include "wproj/shadow.hpp"
#include "wproj/stability.hpp"

namespace wproj {

/// Shortest-exact decimal rendering capped at 17 significant digits;
/// round-trips any finite double.
std::string format_double(double v);

/// Measure JSON: {"dims": [d_1,...,d_K], "atoms": [[...],...], "weights":
/// [...]} with "weights" optional (uniform). Load/save round-trips finite
/// doubles bit-stably.
ProductMeasure load_product_measure(const std::filesystem::path& file);
DiscreteMeasure load_measure(const std::filesystem::path& file);
void save_measure(const ProductMeasure& m, const std::filesystem::path& file);
void save_measure(const DiscreteMeasure& m, const std::filesystem::path& file);

/// Sparse triplet CSV (row_atom_index, col_atom_index, mass) preceded by a
/// `# {"source": ..., "target": ...}` JSON header line.
void save_plan_csv(const TransportPlan& plan, const std::filesystem::path& file,
                   const std::string& source_name, const std::string& target_name);

void save_glued_csv(const ShadowResult& result, const std::filesystem::path& file,
                    const std::string& shadow_name, const std::string& rho_name);

/// shadow.json + glued.csv + summary.json under `dir`.
void save_shadow_result(const ShadowResult& result, const MetricSpec& spec,
                        const std::filesystem::path& dir);

/// certificate.json + coupling CSV under `dir`.
void save_certificate(const ProjectionCertificate& cert, const MetricSpec& spec,
                      const std::filesystem::path& dir);

/// Minimal CSV writer with the fixed double rendering.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> columns);
  void add_row(const std::vector<std::string>& cells);
  void write(const std::filesystem::path& file) const;
  static std::string cell(double v) { return format_double(v); }
  static std::string cell(std::size_t v) { return std::to_string(v); }
  static std::string cell(int v) { return std::to_string(v); }

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace wproj
