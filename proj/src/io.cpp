#include "ssn/io.hpp"

#include <cmath>
#include <fstream>

namespace ssn::io {

namespace {

double parse_number(const Json& j, const std::string& field) {
  if (!j.is_number()) throw ParseError(field, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ParseError(field, "non-finite number");
  return v;
}

const Json& require(const Json& obj, const std::string& key) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(key, "missing field");
  return *it;
}

template <typename Fn>
auto wrap_validation(const std::string& kind, Fn&& fn) {
  try {
    return fn();
  } catch (const DimensionError& e) {
    throw ParseError(kind, e.what());
  } catch (const DomainError& e) {
    throw ParseError(kind, e.what());
  } catch (const SingularMatrixError& e) {
    throw ParseError(kind, e.what());
  }
}

}  // namespace

VectorXd parse_vector(const Json& j, const std::string& field) {
  if (!j.is_array()) throw ParseError(field, "expected an array of numbers");
  if (j.empty()) throw ParseError(field, "empty array");
  VectorXd v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    v(static_cast<Index>(i)) =
        parse_number(j[i], field + "[" + std::to_string(i) + "]");
  }
  return v;
}

MatrixXd parse_matrix(const Json& j, const std::string& field) {
  if (!j.is_array()) throw ParseError(field, "expected an array of rows");
  if (j.empty()) throw ParseError(field, "empty matrix");
  const std::size_t rows = j.size();
  if (!j[0].is_array()) throw ParseError(field + "[0]", "expected a row array");
  const std::size_t cols = j[0].size();
  if (cols == 0) throw ParseError(field + "[0]", "empty row");
  MatrixXd m(static_cast<Index>(rows), static_cast<Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    const std::string row_field = field + "[" + std::to_string(r) + "]";
    if (!j[r].is_array()) throw ParseError(row_field, "expected a row array");
    if (j[r].size() != cols) {
      throw ParseError(row_field, "row has " + std::to_string(j[r].size()) +
                                      " entries, expected " +
                                      std::to_string(cols));
    }
    for (std::size_t c = 0; c < cols; ++c) {
      m(static_cast<Index>(r), static_cast<Index>(c)) =
          parse_number(j[r][c], row_field + "[" + std::to_string(c) + "]");
    }
  }
  return m;
}

Problem parse_problem(const Json& j) {
  if (!j.is_object()) throw ParseError("<root>", "expected a JSON object");
  const Json& kind_j = require(j, "kind");
  if (!kind_j.is_string()) throw ParseError("kind", "expected a string");
  const std::string kind = kind_j.get<std::string>();

  if (kind == "pwls") {
    PwlsProblem<double> p{parse_matrix(require(j, "T"), "T"),
                          parse_vector(require(j, "b"), "b")};
    wrap_validation(kind, [&] { p.validate(); return 0; });
    return p;
  }
  if (kind == "qp") {
    const MatrixXd q = parse_matrix(require(j, "Q"), "Q");
    const VectorXd bt = parse_vector(require(j, "b_tilde"), "b_tilde");
    double c = 0.0;
    if (const auto it = j.find("c"); it != j.end()) c = parse_number(*it, "c");
    if (q.rows() != q.cols()) throw ParseError("Q", "matrix is not square");
    if (q.rows() != bt.size()) throw ParseError("b_tilde", "length does not match Q");
    return wrap_validation(kind, [&] { return QpProblem<double>::make(q, bt, c); });
  }
  if (kind == "cone") {
    ConeInstance<double> ci{parse_matrix(require(j, "A"), "A"),
                            parse_vector(require(j, "z"), "z")};
    wrap_validation(kind, [&] { ci.validate(); return 0; });
    return ci;
  }
  throw ParseError("kind", "unknown kind '" + kind + "' (expected pwls, qp or cone)");
}

namespace {

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), "cannot open file");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ParseError(path.string(), std::string("invalid JSON: ") + e.what());
  }
}

}  // namespace

Problem load_problem(const std::filesystem::path& path) {
  return parse_problem(read_json_file(path));
}

VectorXd load_vector(const std::filesystem::path& path) {
  return parse_vector(read_json_file(path), path.string());
}

Json vector_to_json(const VectorXd& v) {
  Json j = Json::array();
  for (Index i = 0; i < v.size(); ++i) j.push_back(v(i));
  return j;
}

Json matrix_to_json(const MatrixXd& m) {
  Json j = Json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    j.push_back(std::move(row));
  }
  return j;
}

Json to_json(const PwlsProblem<double>& p) {
  return {{"kind", "pwls"}, {"T", matrix_to_json(p.T)}, {"b", vector_to_json(p.b)}};
}

Json to_json(const QpProblem<double>& q) {
  return {{"kind", "qp"},
          {"Q", matrix_to_json(q.Q)},
          {"b_tilde", vector_to_json(q.b_tilde)},
          {"c", q.c}};
}

Json to_json(const ConeInstance<double>& ci) {
  return {{"kind", "cone"}, {"A", matrix_to_json(ci.A)}, {"z", vector_to_json(ci.z)}};
}

Json to_json(const GeneratedInstance& inst) {
  Json j = to_json(inst.q);
  j["known_solution"] = vector_to_json(inst.u);
  j["x0"] = vector_to_json(inst.x0);
  j["beta"] = inst.beta;
  return j;
}

Json report_to_json(const SolveReport<double>& r) {
  Json j;
  j["status"] = std::string(to_string(r.status));
  j["iterations"] = r.iterations;
  j["final_residual_norm"] = r.final_residual_norm;
  j["stop_measure"] = r.stop_measure;
  j["solution"] = r.solution ? vector_to_json(*r.solution) : Json(nullptr);
  j["last_iterate"] = vector_to_json(r.last_iterate);
  Json patterns = Json::array();
  for (const auto& p : r.pattern_trace) patterns.push_back(p.str());
  j["pattern_trace"] = std::move(patterns);
  if (r.cycle) {
    j["cycle"] = {{"start", r.cycle->start}, {"period", r.cycle->period}};
  } else {
    j["cycle"] = nullptr;
  }
  if (r.iterate_trace) {
    Json trace = Json::array();
    for (const auto& x : *r.iterate_trace) trace.push_back(vector_to_json(x));
    j["iterate_trace"] = std::move(trace);
  }
  return j;
}

}  // namespace ssn::io
