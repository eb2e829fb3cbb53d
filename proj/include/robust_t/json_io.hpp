#pragma once

#include <filesystem>
#include <string>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace robust_t {

// Deterministic serialization: object keys sorted (nlohmann default), floats
// with 17 significant digits, non-finite floats as the strings "inf", "-inf"
// and "nan".
std::string dump_json(const nlohmann::json& j, int indent = 2);

// Writes through a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

nlohmann::json read_json_file(const std::filesystem::path& path);

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_json(const nlohmann::json& j);

// Reads a number that may also be spelled "inf".
double number_from_json(const nlohmann::json& j);
nlohmann::json number_to_json(double v);

// Object keys for real parameters such as Schatten exponents: "2", "2.5", "inf".
std::string number_key(double v);
double number_from_key(const std::string& key);

}  // namespace robust_t
