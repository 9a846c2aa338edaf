#pragma once

// JSON problem files:
//   {"kind":"pwls","T":[[...],...],"b":[...]}
//   {"kind":"qp","Q":[[...],...],"b_tilde":[...],"c":0.0}
//   {"kind":"cone","A":[[...],...],"z":[...]}
// Matrices are arrays of rows. Unknown keys are ignored.

#include <filesystem>
#include <stdexcept>
#include <string>
#include <variant>

#include <json.hpp>

#include "ssn/gen.hpp"
#include "ssn/qp.hpp"

namespace ssn::io {

using Json = nlohmann::json;

/// Malformed input; what() names the offending field.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

using Problem =
    std::variant<PwlsProblem<double>, QpProblem<double>, ConeInstance<double>>;

VectorXd parse_vector(const Json& j, const std::string& field);
MatrixXd parse_matrix(const Json& j, const std::string& field);

Problem parse_problem(const Json& j);
Problem load_problem(const std::filesystem::path& path);
VectorXd load_vector(const std::filesystem::path& path);

Json vector_to_json(const VectorXd& v);
Json matrix_to_json(const MatrixXd& m);

Json to_json(const PwlsProblem<double>& p);
Json to_json(const QpProblem<double>& q);
Json to_json(const ConeInstance<double>& ci);
/// QP problem object plus "known_solution", "x0" and "beta".
Json to_json(const GeneratedInstance& inst);

Json report_to_json(const SolveReport<double>& r);

}  // namespace ssn::io
