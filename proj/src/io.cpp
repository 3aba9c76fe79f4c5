#include "wproj/io.hpp"

#include <cstdio>
#include <fstream>

#include <json.hpp>

namespace wproj {

using nlohmann::json;

std::string format_double(double v) {
  // Fixed 17-significant-digit rendering; round-trips every finite double.
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

json measure_to_json(const DiscreteMeasure& m, const std::vector<int>& dims) {
  json j;
  j["dims"] = dims;
  json atoms = json::array();
  for (std::size_t i = 0; i < m.size(); ++i) {
    json atom = json::array();
    for (double c : m.atom(i)) atom.push_back(c);
    atoms.push_back(std::move(atom));
  }
  j["atoms"] = std::move(atoms);
  j["weights"] = m.weights();
  return j;
}

json load_json(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw InputError("cannot open " + file.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw InputError("malformed JSON in " + file.string() + ": " + e.what());
  }
  return j;
}

std::pair<DiscreteMeasure, std::vector<int>> parse_measure(const json& j,
                                                           const std::string& name) {
  if (!j.contains("dims") || !j["dims"].is_array()) {
    throw InputError(name + ": missing \"dims\" array");
  }
  std::vector<int> dims;
  try {
    dims = j["dims"].get<std::vector<int>>();
  } catch (const json::exception&) {
    throw InputError(name + ": \"dims\" entries must be integers");
  }
  int total = 0;
  for (int d : dims) {
    if (d < 1) throw InputError(name + ": \"dims\" entries must be positive");
    total += d;
  }
  if (!j.contains("atoms") || !j["atoms"].is_array() || j["atoms"].empty()) {
    throw InputError(name + ": missing nonempty \"atoms\" array");
  }
  std::vector<double> coords;
  std::size_t count = j["atoms"].size();
  coords.reserve(count * static_cast<std::size_t>(total));
  for (const auto& atom : j["atoms"]) {
    if (!atom.is_array() || atom.size() != static_cast<std::size_t>(total)) {
      throw InputError(name + ": every atom needs " + std::to_string(total) +
                       " coordinates (\"atoms\")");
    }
    for (const auto& c : atom) {
      if (!c.is_number()) throw InputError(name + ": non-numeric coordinate (\"atoms\")");
      coords.push_back(c.get<double>());
    }
  }
  std::vector<double> weights;
  if (j.contains("weights")) {
    if (!j["weights"].is_array() || j["weights"].size() != count) {
      throw InputError(name + ": \"weights\" must match the atom count");
    }
    try {
      weights = j["weights"].get<std::vector<double>>();
    } catch (const json::exception&) {
      throw InputError(name + ": \"weights\" entries must be numbers");
    }
  } else {
    weights.assign(count, 1.0 / static_cast<double>(count));
  }
  try {
    return {DiscreteMeasure::from_flat(total, std::move(coords), std::move(weights)),
            std::move(dims)};
  } catch (const InputError& e) {
    throw InputError(name + ": invalid \"weights\": " + e.what());
  }
}

void write_text(const std::filesystem::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw InputError("cannot write " + file.string());
  out << text;
}

}  // namespace

ProductMeasure load_product_measure(const std::filesystem::path& file) {
  auto [m, dims] = parse_measure(load_json(file), file.string());
  return ProductMeasure(std::move(m), MetricSpec(2.0, std::move(dims)));
}

DiscreteMeasure load_measure(const std::filesystem::path& file) {
  return parse_measure(load_json(file), file.string()).first;
}

void save_measure(const ProductMeasure& m, const std::filesystem::path& file) {
  write_text(file, measure_to_json(m.base, m.spec.block_dims).dump(2) + "\n");
}

void save_measure(const DiscreteMeasure& m, const std::filesystem::path& file) {
  write_text(file, measure_to_json(m, {m.dim()}).dump(2) + "\n");
}

void save_plan_csv(const TransportPlan& plan, const std::filesystem::path& file,
                   const std::string& source_name, const std::string& target_name) {
  json header{{"source", source_name}, {"target", target_name}};
  std::string text = "# " + header.dump() + "\n";
  text += "row_atom_index,col_atom_index,mass\n";
  for (const auto& e : plan.nonzeros()) {
    text += std::to_string(e.row) + "," + std::to_string(e.col) + "," +
            format_double(e.mass) + "\n";
  }
  write_text(file, text);
}

void save_glued_csv(const ShadowResult& result, const std::filesystem::path& file,
                    const std::string& shadow_name, const std::string& rho_name) {
  json header{{"source", shadow_name}, {"target", rho_name}};
  std::string text = "# " + header.dump() + "\n";
  text += "row_atom_index,col_atom_index,mass\n";
  for (const GluedEntry& e : result.glued) {
    text += std::to_string(e.x) + "," + std::to_string(e.y) + "," +
            format_double(e.mass) + "\n";
  }
  write_text(file, text);
}

void save_shadow_result(const ShadowResult& result, const MetricSpec& spec,
                        const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  save_measure(result.shadow, dir / "shadow.json");
  save_glued_csv(result, dir / "glued.csv", "shadow.json", "rho");
  auto [lo, hi] = result.shadow.base.bounding_box();
  json summary;
  summary["value"] = result.value;
  summary["per_marginal_values"] = result.per_marginal_values;
  summary["map_induced"] = is_map_induced(result).is_map;
  summary["p"] = spec.is_inf() ? json("inf") : json(spec.p);
  summary["support_size"] = result.shadow.base.size();
  summary["bounding_box"] = {{"lo", lo}, {"hi", hi}};
  write_text(dir / "summary.json", summary.dump(2) + "\n");
}

void save_certificate(const ProjectionCertificate& cert, const MetricSpec& spec,
                      const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::string text = "# {\"source\":\"product-of-mu-supports\",\"target\":\"rho\"}\n";
  text += "row_atom_index,col_atom_index,mass\n";
  for (const CertificateEntry& e : cert.coupling) {
    text += std::to_string(e.x) + "," + std::to_string(e.y) + "," +
            format_double(e.mass) + "\n";
  }
  write_text(dir / "coupling.csv", text);
  save_measure(cert.projection, dir / "projection.json");
  json j;
  j["value"] = cert.value;
  j["distance"] = cert.distance;
  j["duality_gap"] = cert.gap;
  j["duals"] = cert.duals;
  j["p"] = spec.is_inf() ? json("inf") : json(spec.p);
  write_text(dir / "certificate.json", j.dump(2) + "\n");
}

CsvWriter::CsvWriter(std::vector<std::string> columns) : columns_(std::move(columns)) {}

void CsvWriter::add_row(const std::vector<std::string>& cells) {
  if (cells.size() != columns_.size()) throw InputError("CsvWriter: column mismatch");
  rows_.push_back(cells);
}

void CsvWriter::write(const std::filesystem::path& file) const {
  std::string text;
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    text += columns_[i];
    text += i + 1 < columns_.size() ? ',' : '\n';
  }
  for (const auto& row : rows_) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      text += row[i];
      text += i + 1 < row.size() ? ',' : '\n';
    }
  }
  write_text(file, text);
}

}  // namespace wproj
