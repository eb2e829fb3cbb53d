#include "robust_t/json_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "robust_t/error.hpp"

namespace robust_t {

namespace {

void write_string(std::ostringstream& os, const std::string& s) {
  // nlohmann handles escaping; dumping a lone string is cheap.
  os << nlohmann::json(s).dump();
}

void write_double(std::ostringstream& os, double v) {
  if (std::isnan(v)) {
    os << "\"nan\"";
  } else if (std::isinf(v)) {
    os << (v > 0 ? "\"inf\"" : "\"-inf\"");
  } else {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    std::string s(buf);
    if (s.find_first_of(".eE") == std::string::npos) s += ".0";
    os << s;
  }
}

void write(std::ostringstream& os, const nlohmann::json& j, int indent, int depth) {
  const auto newline = [&](int d) {
    if (indent < 0) return;
    os << '\n' << std::string(static_cast<std::size_t>(indent * d), ' ');
  };
  switch (j.type()) {
    case nlohmann::json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        return;
      }
      os << '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) os << ',';
        first = false;
        newline(depth + 1);
        write_string(os, it.key());
        os << (indent < 0 ? ":" : ": ");
        write(os, it.value(), indent, depth + 1);
      }
      newline(depth);
      os << '}';
      return;
    }
    case nlohmann::json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        return;
      }
      // Arrays of scalars stay on one line so matrices remain readable.
      bool scalars = true;
      for (const auto& e : j) scalars = scalars && !e.is_structured();
      os << '[';
      bool first = true;
      for (const auto& e : j) {
        if (!first) os << (scalars && indent >= 0 ? ", " : ",");
        first = false;
        if (!scalars) newline(depth + 1);
        write(os, e, indent, depth + 1);
      }
      if (!scalars) newline(depth);
      os << ']';
      return;
    }
    case nlohmann::json::value_t::number_float:
      write_double(os, j.get<double>());
      return;
    default:
      os << j.dump();
  }
}

}  // namespace

std::string dump_json(const nlohmann::json& j, int indent) {
  std::ostringstream os;
  write(os, j, indent, 0);
  os << '\n';
  return os.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("io.open", "cannot open output file", {{"path", tmp}});
    out << contents;
    if (!out) throw Error("io.write", "failed writing output file", {{"path", tmp}});
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error("io.rename", "cannot move output file into place", {{"path", path.string()}});
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("io.open", "cannot open input file", {{"path", path.string()}});
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error("io.json", std::string("input is not valid JSON: ") + e.what(), {{"path", path.string()}});
  }
}

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.empty()) throw Error("json.matrix", "matrix must be a nonempty array of rows");
  const std::size_t rows = j.size();
  const std::size_t cols = j.front().is_array() ? j.front().size() : 0;
  if (cols == 0) throw Error("json.matrix", "matrix rows must be nonempty arrays");
  Eigen::MatrixXd m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    if (!j[i].is_array() || j[i].size() != cols) throw Error("json.matrix", "ragged matrix rows");
    for (std::size_t k = 0; k < cols; ++k) {
      if (!j[i][k].is_number()) throw Error("json.matrix", "matrix entries must be numbers");
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = j[i][k].get<double>();
    }
  }
  return m;
}

double number_from_json(const nlohmann::json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
  }
  throw Error("json.number", "expected a number or \"inf\"");
}

nlohmann::json number_to_json(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

std::string number_key(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os.precision(15);
  os << v;
  return os.str();
}

double number_from_key(const std::string& key) {
  if (key == "inf") return std::numeric_limits<double>::infinity();
  try {
    std::size_t used = 0;
    const double v = std::stod(key, &used);
    if (used == key.size()) return v;
  } catch (const std::exception&) {
  }
  throw Error("json.key", "object key is not a number", {{"key", key}});
}

}  // namespace robust_t
