#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "torusflow/evolution.hpp"
#include "torusflow/inverse_chart.hpp"
#include "torusflow/pullback.hpp"

namespace torusflow {

using Json = nlohmann::ordered_json;

/// {dim, components, order, real, coeffs: [[k, re_0, im_0, re_1, im_1, ...], ...]}, k an integer
/// lattice vector; only nonzero modes are written. Reading checks the lattice bound and the
/// mirror symmetry of real maps.
Json to_json(const FourierMap& f);
FourierMap fourier_map_from_json(const Json& j);

/// {dim, components, order, scale, grid: [...], pieces: [{kind, coeffs | poly, omega, cosine, sine}]}
Json to_json(const TimeDependentField& gamma);
TimeDependentField field_from_json(const Json& j);

/// {grid, values: [map...], derivative: field}
Json to_json(const ACPath& path);

/// {eps, nodes, grid, snapshots: [map...]} at the breakpoints.
Json to_json(const FlowPath& path);

/// {side, grid, snapshots}
Json to_json(const EvolutionResult& e);

/// {dim, terms: [{wPower: [p1, p2], coeffMap: map}]}; linear identity terms included.
Json to_json(const LocalAddition& alpha);
LocalAddition local_addition_from_json(const Json& j);

/// Full double precision ("%.17g").
std::string format_double(double x);

/// Comma-separated rows with a fixed header.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);
  CsvTable& row();
  CsvTable& operator<<(double x);
  CsvTable& operator<<(int x);
  CsvTable& operator<<(long x);
  CsvTable& operator<<(std::size_t x);
  CsvTable& operator<<(bool x);
  CsvTable& operator<<(const std::string& x);
  std::string str() const;

 private:
  void cell(const std::string& text);
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

CsvTable iteration_log_csv(const std::vector<IterationRecord>& log);
CsvTable pointwise_csv(const PointwiseReport& report);
CsvTable pullback_matrix_csv(const PullbackMatrix& m);
CsvTable ac_modulus_csv(const PullbackPath& path);

}  // namespace torusflow
