#include "mf/io.h"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "mf/error.h"

namespace mf::io {
namespace {

[[noreturn]] void bad(const std::string &what) {
  throw Error(ErrorCode::ParseError, what);
}

const Json &field(const Json &j, const char *key) {
  if (!j.is_object())
    bad(std::string("expected an object holding '") + key + "'");
  const auto it = j.find(key);
  if (it == j.end())
    bad(std::string("missing field '") + key + "'");
  return *it;
}

int get_int(const Json &j, const char *key) {
  const Json &v = field(j, key);
  if (!v.is_number_integer())
    bad(std::string("field '") + key + "' must be an integer");
  return v.get<int>();
}

double as_double(const Json &v, const std::string &where) {
  if (!v.is_number())
    bad(where + " must be a number");
  return v.get<double>();
}

const Json &get_array(const Json &j, const char *key) {
  const Json &v = field(j, key);
  if (!v.is_array())
    bad(std::string("field '") + key + "' must be an array");
  return v;
}

Json matrix_rows(const Matrix &m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_rows(const Json &rows) {
  if (!rows.is_array() || rows.empty() || !rows[0].is_array())
    bad("matrix must be a non-empty array of rows");
  Matrix m(rows.size(), rows[0].size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (!rows[r].is_array() || rows[r].size() != rows[0].size())
      bad("matrix rows differ in length");
    for (std::size_t c = 0; c < rows[r].size(); ++c)
      m(r, c) = as_double(rows[r][c], "matrix entry");
  }
  return m;
}

Json number_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(); }

} // namespace

Json to_json(const Projector &p) {
  const int d = p.dim();
  Json entries = Json::array();
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c)
      entries.push_back(p.matrix()(r, c));
  return Json{{"d", d}, {"k", p.rank()}, {"entries", std::move(entries)}};
}

Projector projector_from_json(const Json &j) {
  const int d = get_int(j, "d");
  const int k = get_int(j, "k");
  const Json &entries = get_array(j, "entries");
  if (d < 1 || entries.size() != std::size_t(d) * d)
    bad("projector needs d*d entries");
  Matrix m(d, d);
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c)
      m(r, c) = as_double(entries[r * d + c], "projector entry");
  return Projector(std::move(m), k);
}

Json to_json(const CubatureRule &rule) {
  Json nodes = Json::array();
  for (const auto &p : rule.nodes)
    nodes.push_back(to_json(p));
  Json j{{"d", rule.d},
         {"k", rule.k},
         {"t", rule.t},
         {"gap", number_or_null(rule.gap)},
         {"nodes", std::move(nodes)},
         {"weights", rule.weights}};
  if (!rule.gaps_by_degree.empty()) {
    Json g = Json::object();
    for (const auto &[s, v] : rule.gaps_by_degree)
      g[std::to_string(s)] = number_or_null(v);
    j["gaps_by_degree"] = std::move(g);
  }
  return j;
}

CubatureRule rule_from_json(const Json &j) {
  CubatureRule rule;
  rule.d = get_int(j, "d");
  rule.k = get_int(j, "k");
  rule.t = get_int(j, "t");
  const Json &gap = field(j, "gap");
  rule.gap = gap.is_null() ? std::numeric_limits<double>::infinity()
                           : as_double(gap, "gap");
  for (const auto &n : get_array(j, "nodes"))
    rule.nodes.push_back(projector_from_json(n));
  for (const auto &w : get_array(j, "weights"))
    rule.weights.push_back(as_double(w, "weight"));
  if (j.contains("gaps_by_degree")) {
    const Json &g = j["gaps_by_degree"];
    if (!g.is_object())
      bad("gaps_by_degree must be an object");
    for (const auto &[key, v] : g.items()) {
      int s = 0;
      try {
        s = std::stoi(key);
      } catch (const std::exception &) {
        bad("gaps_by_degree key '" + key + "' is not a degree");
      }
      rule.gaps_by_degree[s] = v.is_null()
                                   ? std::numeric_limits<double>::infinity()
                                   : as_double(v, "gaps_by_degree value");
    }
  }
  rule.validate();
  return rule;
}

Json to_json(const MomentTensor &m) {
  Json values = Json::array();
  const MultiIndexSet &set = m.index_set();
  for (std::size_t i = 0; i < set.size(); ++i)
    values.push_back(Json{{"s", set[i].exponents()}, {"v", m[i]}});
  Json j{{"d", m.dim()}, {"p", m.max_degree()}, {"values", std::move(values)}};
  if (m.sphere_supported)
    j["sphere"] = true;
  if (m.approximate) {
    j["approximate"] = true;
    j["epsilon"] = m.epsilon;
  }
  return j;
}

MomentTensor moment_tensor_from_json(const Json &j) {
  const int d = get_int(j, "d");
  const int p = get_int(j, "p");
  if (d < 1 || p < 0)
    bad("moment tensor needs d >= 1 and p >= 0");
  MomentTensor m(d, p);
  const Json &values = get_array(j, "values");
  if (values.size() != m.size())
    bad("moment tensor lists " + std::to_string(values.size()) +
        " values, expected " + std::to_string(m.size()));
  const MultiIndexSet &set = m.index_set();
  for (std::size_t i = 0; i < values.size(); ++i) {
    const Json &s = get_array(values[i], "s");
    std::vector<int> e;
    for (const auto &x : s) {
      if (!x.is_number_integer())
        bad("multi-index entries must be integers");
      e.push_back(x.get<int>());
    }
    if (e != set[i].exponents())
      bad("moment values are not in graded-lexicographic order at entry " +
          std::to_string(i));
    m[i] = as_double(field(values[i], "v"), "moment value");
  }
  m.sphere_supported = j.value("sphere", false);
  m.approximate = j.value("approximate", false);
  if (m.approximate)
    m.epsilon = as_double(field(j, "epsilon"), "epsilon");
  return m;
}

Json to_json(const ProjectedMomentSet &set) {
  Json tensors = Json::array();
  for (const auto &m : set.tensors)
    tensors.push_back(to_json(m));
  Json j{{"convention", set.convention == Convention::PX ? "PX" : "QX"},
         {"p", set.p},
         {"tensors", std::move(tensors)}};
  if (set.sphere_supported)
    j["sphere"] = true;
  return j;
}

ProjectedMomentSet projected_from_json(const Json &j) {
  ProjectedMomentSet set;
  const Json &conv = field(j, "convention");
  if (conv == "PX")
    set.convention = Convention::PX;
  else if (conv == "QX")
    set.convention = Convention::QX;
  else
    bad("convention must be \"PX\" or \"QX\"");
  set.p = get_int(j, "p");
  for (const auto &t : get_array(j, "tensors"))
    set.tensors.push_back(moment_tensor_from_json(t));
  set.sphere_supported = j.value("sphere", false);
  set.validate();
  return set;
}

Json to_json(const MeasurementEnsemble &ens) {
  Json mats = Json::array();
  for (const auto &q : ens.matrices)
    mats.push_back(matrix_rows(q));
  return Json{{"d", ens.d}, {"k", ens.k}, {"matrices", std::move(mats)}};
}

MeasurementEnsemble ensemble_from_json(const Json &j) {
  MeasurementEnsemble ens;
  ens.d = get_int(j, "d");
  ens.k = get_int(j, "k");
  for (const auto &q : get_array(j, "matrices"))
    ens.matrices.push_back(matrix_from_rows(q));
  ens.validate();
  return ens;
}

Json to_json(const DiscreteDistribution &dist) {
  Json atoms = Json::array();
  for (const auto &a : dist.atoms)
    atoms.push_back(std::vector<double>(a.data(), a.data() + a.size()));
  Json j{{"atoms", std::move(atoms)}, {"probs", dist.probs}};
  if (dist.sphere)
    j["sphere"] = true;
  return j;
}

DiscreteDistribution distribution_from_json(const Json &j) {
  DiscreteDistribution dist;
  for (const auto &a : get_array(j, "atoms")) {
    if (!a.is_array())
      bad("atoms must be arrays");
    Vector v(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
      v(i) = as_double(a[i], "atom entry");
    dist.atoms.push_back(v);
  }
  for (const auto &p : get_array(j, "probs"))
    dist.probs.push_back(as_double(p, "probability"));
  dist.sphere = j.value("sphere", false);
  dist.validate();
  return dist;
}

void write_csv(std::ostream &os, const SampleBatch &batch) {
  for (int c = 0; c < batch.d; ++c)
    os << (c ? "," : "") << 'x' << c + 1;
  os << '\n';
  std::ostringstream cell;
  cell.precision(17);
  for (Eigen::Index r = 0; r < batch.data.rows(); ++r) {
    for (int c = 0; c < batch.d; ++c) {
      cell.str("");
      cell << batch.data(r, c);
      os << (c ? "," : "") << cell.str();
    }
    os << '\n';
  }
}

SampleBatch read_csv(std::istream &is) {
  std::string line;
  if (!std::getline(is, line))
    bad("empty CSV");
  int d = 0;
  {
    std::istringstream header(line);
    std::string name;
    while (std::getline(header, name, ',')) {
      if (!name.empty() && name.back() == '\r')
        name.pop_back();
      if (name != "x" + std::to_string(d + 1))
        bad("CSV header must read x1,...,xd");
      ++d;
    }
  }
  if (d == 0)
    bad("CSV header is empty");
  std::vector<double> values;
  std::size_t rows = 0;
  while (std::getline(is, line)) {
    if (line.empty() || line == "\r")
      continue;
    std::istringstream row(line);
    std::string cell;
    int c = 0;
    while (std::getline(row, cell, ',')) {
      std::size_t used = 0;
      double v = 0;
      try {
        v = std::stod(cell, &used);
      } catch (const std::exception &) {
        used = 0;
      }
      if (used == 0)
        bad("bad CSV number on data row " + std::to_string(rows + 1));
      values.push_back(v);
      ++c;
    }
    if (c != d)
      bad("CSV data row " + std::to_string(rows + 1) + " has " +
          std::to_string(c) + " fields, expected " + std::to_string(d));
    ++rows;
  }
  SampleBatch batch;
  batch.d = d;
  batch.descriptor = "csv";
  batch.data = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic,
                                              Eigen::Dynamic, Eigen::RowMajor>>(
      values.data(), rows, d);
  return batch;
}

std::string dump(const Json &j) { return j.dump(2) + "\n"; }

Json parse(const std::string &text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::exception &e) {
    bad(std::string("malformed JSON: ") + e.what());
  }
}

Json read_json_file(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw Error(ErrorCode::InvalidArgument, "cannot read '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse(text.str());
}

void write_text_file(const std::string &path, const std::string &text) {
  std::ofstream out(path);
  if (!out)
    throw Error(ErrorCode::InvalidArgument, "cannot write '" + path + "'");
  out << text;
  if (!out)
    throw Error(ErrorCode::InvalidArgument, "write to '" + path + "' failed");
}

void write_json_file(const std::string &path, const Json &j) {
  write_text_file(path, dump(j));
}

} // namespace mf::io
