#include "torusflow/io.hpp"

#include <cstdio>
#include <sstream>

#include "torusflow/errors.hpp"

namespace torusflow {

namespace {

template <class T>
T get(const Json& j, const char* key) {
  require(j.is_object() && j.contains(key), std::string("missing key '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    fail(ErrorKind::InvalidArgument, std::string("key '") + key + "' has the wrong type");
  }
}

Json coeff_list(const FourierMap& f) {
  Json list = Json::array();
  const Lattice& lat = f.lattice();
  for (std::size_t m = 0; m < lat.size(); ++m) {
    bool nonzero = false;
    for (int i = 0; i < f.components(); ++i) nonzero = nonzero || f.raw(m, i) != Complex(0.0);
    if (!nonzero) continue;
    Json entry = Json::array();
    Json k = Json::array();
    for (int d = 0; d < f.dim(); ++d) k.push_back(lat[m][d]);
    entry.push_back(k);
    for (int i = 0; i < f.components(); ++i) {
      entry.push_back(f.raw(m, i).real());
      entry.push_back(f.raw(m, i).imag());
    }
    list.push_back(entry);
  }
  return list;
}

void read_coeffs(FourierMap& f, const Json& list) {
  require(list.is_array(), "'coeffs' must be an array");
  std::vector<std::pair<Index, std::vector<Complex>>> seen;
  for (const Json& entry : list) {
    require(entry.is_array() && entry.size() == 1 + 2 * static_cast<std::size_t>(f.components()),
            "each coefficient entry is [k, re, im] per component");
    const Json& kj = entry[0];
    require(kj.is_array() && kj.size() == static_cast<std::size_t>(f.dim()), "lattice vector has the wrong length");
    Index k{0, 0};
    std::vector<Complex> values;
    try {
      for (int d = 0; d < f.dim(); ++d) k[d] = kj[d].get<int>();
      for (int i = 0; i < f.components(); ++i) {
        values.emplace_back(entry[1 + 2 * i].get<double>(), entry[2 + 2 * i].get<double>());
      }
    } catch (const nlohmann::json::exception&) {
      fail(ErrorKind::InvalidArgument, "coefficient entries must be numbers");
    }
    require(l1_norm(k, f.dim()) <= f.order(), "coefficient outside the truncation");
    for (int i = 0; i < f.components(); ++i) f.set_coeff(k, i, values[i]);
    seen.emplace_back(k, std::move(values));
  }
  for (const auto& [k, values] : seen) {
    for (int i = 0; i < f.components(); ++i) {
      require(f.coeff(k, i) == values[i], "coefficients of a real map violate c_{-k} = conj(c_k)");
    }
  }
}

const char* kind_name(Piece::Kind k) {
  switch (k) {
    case Piece::Kind::Constant: return "constant";
    case Piece::Kind::Polynomial: return "polynomial";
    case Piece::Kind::Harmonic: return "harmonic";
    case Piece::Kind::Mixed: return "mixed";
  }
  return "constant";
}

Json grid_json(const TimeGrid& g) { return g.points(); }

TimeGrid grid_from(const Json& j) {
  require(j.is_array(), "'grid' must be an array of breakpoints");
  std::vector<double> pts;
  try {
    pts = j.get<std::vector<double>>();
  } catch (const nlohmann::json::exception&) {
    fail(ErrorKind::InvalidArgument, "'grid' must be an array of numbers");
  }
  return TimeGrid(pts);
}

Json snapshots(const std::vector<FourierMap>& maps) {
  Json out = Json::array();
  for (const auto& m : maps) out.push_back(to_json(m));
  return out;
}

}  // namespace

Json to_json(const FourierMap& f) {
  Json j;
  j["dim"] = f.dim();
  j["components"] = f.components();
  j["order"] = f.order();
  j["real"] = f.is_real();
  j["coeffs"] = coeff_list(f);
  return j;
}

FourierMap fourier_map_from_json(const Json& j) {
  const int dim = get<int>(j, "dim");
  const int components = j.contains("components") ? get<int>(j, "components") : dim;
  const int order = get<int>(j, "order");
  const bool real = j.contains("real") ? get<bool>(j, "real") : true;
  require(dim == 1 || dim == 2, "dim must be 1 or 2");
  require(order >= 0 && order <= 512, "order must lie in [0, 512]");
  FourierMap f = FourierMap::zero(dim, components, order, real);
  if (j.contains("coeffs")) read_coeffs(f, j.at("coeffs"));
  return f;
}

Json to_json(const TimeDependentField& gamma) {
  Json j;
  j["dim"] = gamma.dim();
  j["components"] = gamma.components();
  j["order"] = gamma.order();
  j["scale"] = gamma.scale();
  j["grid"] = grid_json(gamma.grid());
  Json pieces = Json::array();
  for (const Piece& p : gamma.pieces()) {
    Json pj;
    pj["kind"] = kind_name(p.kind());
    if (p.kind() == Piece::Kind::Constant) {
      pj["coeffs"] = coeff_list(p.shape());
    } else {
      Json poly = Json::array();
      for (const auto& c : p.poly) poly.push_back(coeff_list(c));
      pj["poly"] = poly;
    }
    if (p.has_harmonic()) {
      pj["omega"] = p.omega;
      pj["cosine"] = coeff_list(*p.cosine);
      pj["sine"] = coeff_list(*p.sine);
    }
    pieces.push_back(pj);
  }
  j["pieces"] = pieces;
  return j;
}

TimeDependentField field_from_json(const Json& j) {
  const int dim = get<int>(j, "dim");
  const int components = j.contains("components") ? get<int>(j, "components") : dim;
  const int order = get<int>(j, "order");
  require(dim == 1 || dim == 2, "dim must be 1 or 2");
  require(order >= 0 && order <= 512, "order must lie in [0, 512]");
  const double scale = get<double>(j, "scale");
  const TimeGrid grid = j.contains("grid") ? grid_from(j.at("grid")) : TimeGrid();
  require(j.contains("pieces") && j.at("pieces").is_array(), "'pieces' must be an array");
  auto map_from = [&](const Json& list) {
    FourierMap f = FourierMap::zero(dim, components, order);
    read_coeffs(f, list);
    return f;
  };
  std::vector<Piece> pieces;
  for (const Json& pj : j.at("pieces")) {
    const std::string kind = get<std::string>(pj, "kind");
    Piece p;
    if (kind == "constant") {
      p.poly.push_back(map_from(pj.contains("coeffs") ? pj.at("coeffs") : Json::array()));
    } else if (kind == "polynomial" || kind == "harmonic" || kind == "mixed") {
      if (pj.contains("poly")) {
        require(pj.at("poly").is_array(), "'poly' must be an array");
        for (const Json& c : pj.at("poly")) p.poly.push_back(map_from(c));
      } else {
        p.poly.push_back(map_from(Json::array()));
      }
      if (kind != "polynomial") {
        p.omega = get<double>(pj, "omega");
        p.cosine = map_from(pj.contains("cosine") ? pj.at("cosine") : Json::array());
        p.sine = map_from(pj.contains("sine") ? pj.at("sine") : Json::array());
      }
    } else {
      fail(ErrorKind::InvalidArgument, "unknown piece kind '" + kind + "'");
    }
    pieces.push_back(std::move(p));
  }
  return TimeDependentField(grid, std::move(pieces), scale);
}

Json to_json(const ACPath& path) {
  Json j;
  j["grid"] = grid_json(path.grid);
  j["values"] = snapshots(path.values);
  j["derivative"] = to_json(path.derivative);
  return j;
}

Json to_json(const FlowPath& path) {
  Json j;
  j["eps"] = path.eps();
  j["nodes"] = path.nodes();
  j["grid"] = grid_json(path.grid());
  j["snapshots"] = snapshots(path.breakpoints());
  return j;
}

Json to_json(const EvolutionResult& e) {
  Json j;
  j["side"] = e.side == Side::Left ? "left" : "right";
  j["grid"] = grid_json(e.path.grid());
  j["snapshots"] = snapshots(e.path.breakpoints());
  return j;
}

Json to_json(const LocalAddition& alpha) {
  Json j;
  j["dim"] = alpha.dim();
  Json terms = Json::array();
  for (int d = 0; d < alpha.dim(); ++d) {
    Index power{0, 0};
    power[d] = 1;
    double e[2] = {0.0, 0.0};
    e[d] = 1.0;
    terms.push_back({{"wPower", Json::array({power[0], power[1]})},
                     {"coeffMap", to_json(FourierMap::constant(alpha.dim(), 0, std::span<const double>(e, alpha.dim())))}});
  }
  for (const AdditionTerm& t : alpha.nonlinear_terms()) {
    terms.push_back({{"wPower", Json::array({t.power[0], t.power[1]})}, {"coeffMap", to_json(t.coeff)}});
  }
  j["terms"] = terms;
  return j;
}

LocalAddition local_addition_from_json(const Json& j) {
  const int dim = get<int>(j, "dim");
  require(j.contains("terms") && j.at("terms").is_array(), "'terms' must be an array");
  std::vector<AdditionTerm> terms;
  for (const Json& t : j.at("terms")) {
    const auto p = get<std::vector<int>>(t, "wPower");
    require(p.size() == 1 || p.size() == 2, "wPower has one entry per fiber coordinate");
    require(p[0] >= 0 && (p.size() == 1 || p[1] >= 0), "wPower entries are nonnegative");
    require(t.contains("coeffMap"), "missing key 'coeffMap'");
    terms.push_back({{p[0], p.size() == 2 ? p[1] : 0}, fourier_map_from_json(t.at("coeffMap"))});
  }
  return LocalAddition(dim, std::move(terms));
}

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

CsvTable& CsvTable::row() {
  require(rows_.empty() || rows_.back().size() == header_.size(), "previous csv row is incomplete");
  rows_.emplace_back();
  return *this;
}

void CsvTable::cell(const std::string& text) {
  require(!rows_.empty() && rows_.back().size() < header_.size(), "csv row overflow");
  rows_.back().push_back(text);
}

CsvTable& CsvTable::operator<<(double x) { cell(format_double(x)); return *this; }
CsvTable& CsvTable::operator<<(int x) { cell(std::to_string(x)); return *this; }
CsvTable& CsvTable::operator<<(long x) { cell(std::to_string(x)); return *this; }
CsvTable& CsvTable::operator<<(std::size_t x) { cell(std::to_string(x)); return *this; }
CsvTable& CsvTable::operator<<(bool x) { cell(x ? "true" : "false"); return *this; }
CsvTable& CsvTable::operator<<(const std::string& x) { cell(x); return *this; }

std::string CsvTable::str() const {
  std::ostringstream os;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
    os << '\n';
  };
  line(header_);
  for (const auto& r : rows_) line(r);
  return os.str();
}

CsvTable iteration_log_csv(const std::vector<IterationRecord>& log) {
  CsvTable t({"step", "sup_diff", "ratio"});
  for (const auto& r : log) t.row() << r.step << r.sup_diff << r.ratio;
  return t;
}

CsvTable pointwise_csv(const PointwiseReport& report) {
  CsvTable t({"probe", "time", "residual"});
  for (const auto& r : report.rows) t.row() << r.probe << r.time << r.residual;
  return t;
}

CsvTable pullback_matrix_csv(const PullbackMatrix& m) {
  CsvTable t({"j", "k", "re", "im"});
  const auto rows = Lattice::get(m.dim, m.rows_order);
  const auto cols = Lattice::get(m.dim, m.cols_order);
  auto label = [&](const Index& k) {
    return m.dim == 1 ? std::to_string(k[0]) : std::to_string(k[0]) + ";" + std::to_string(k[1]);
  };
  for (std::size_t j = 0; j < rows->size(); ++j) {
    for (std::size_t k = 0; k < cols->size(); ++k) {
      const Complex a = m.a(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k));
      t.row() << label((*rows)[j]) << label((*cols)[k]) << a.real() << a.imag();
    }
  }
  return t;
}

CsvTable ac_modulus_csv(const PullbackPath& path) {
  CsvTable t({"t_a", "t_b", "increment", "bound"});
  for (const auto& inc : path.increments) t.row() << inc.ta << inc.tb << inc.increment << inc.bound;
  return t;
}

}  // namespace torusflow
