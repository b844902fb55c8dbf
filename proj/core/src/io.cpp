#include "gmmot/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "gmmot/error.hpp"

namespace gmmot {
namespace {

using nlohmann::json;

constexpr double kJsonWeightTol = 1e-6;

json vector_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

json matrix_json(const Matrix& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) out.push_back(vector_json(m.row(r).transpose()));
  return out;
}

Vector vector_from(const json& j, Eigen::Index expected, const char* what) {
  require(j.is_array() && static_cast<Eigen::Index>(j.size()) == expected, ErrorKind::kInvalidInput,
          std::string("gmm json: ") + what + " has the wrong length");
  Vector out(expected);
  for (Eigen::Index i = 0; i < expected; ++i) {
    const json& v = j[static_cast<std::size_t>(i)];
    require(v.is_number(), ErrorKind::kInvalidInput, std::string("gmm json: ") + what + " must be numeric");
    out(i) = v.get<double>();
  }
  return out;
}

Matrix matrix_from(const json& j, Eigen::Index d, const char* what) {
  require(j.is_array() && static_cast<Eigen::Index>(j.size()) == d, ErrorKind::kInvalidInput,
          std::string("gmm json: ") + what + " must be a d x d matrix");
  Matrix out(d, d);
  for (Eigen::Index r = 0; r < d; ++r) out.row(r) = vector_from(j[static_cast<std::size_t>(r)], d, what).transpose();
  return out;
}

bool parse_row(std::string_view line, std::vector<double>& out) {
  out.clear();
  std::size_t pos = 0;
  while (pos <= line.size()) {
    std::size_t end = line.find(',', pos);
    if (end == std::string_view::npos) end = line.size();
    std::string_view field = line.substr(pos, end - pos);
    while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
    while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r')) field.remove_suffix(1);
    if (!field.empty() && field.front() == '+') field.remove_prefix(1);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (field.empty() || ec != std::errc() || ptr != field.data() + field.size()) return false;
    out.push_back(value);
    pos = end + 1;
  }
  return true;
}

}  // namespace

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::kIo, "cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text_file(const std::string& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorKind::kIo, "cannot write " + path);
  out << text;
  require(static_cast<bool>(out), ErrorKind::kIo, "write failed: " + path);
}

std::string gmm_to_json(const Gmm& gmm) {
  json j;
  j["d"] = gmm.dim();
  j["weights"] = vector_json(gmm.weights());
  j["means"] = json::array();
  j["covs"] = json::array();
  for (const Gaussian& g : gmm.components()) {
    j["means"].push_back(vector_json(g.mean()));
    j["covs"].push_back(matrix_json(g.cov().matrix()));
  }
  return j.dump(2) + "\n";
}

Gmm gmm_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kInvalidInput, std::string("gmm json: ") + e.what());
  }
  require(j.is_object() && j.contains("d") && j.contains("weights") && j.contains("means") && j.contains("covs"),
          ErrorKind::kInvalidInput, "gmm json: expected fields d, weights, means, covs");
  require(j["d"].is_number_integer() && j["d"].get<long>() >= 1, ErrorKind::kInvalidInput,
          "gmm json: d must be a positive integer");
  const auto d = static_cast<Eigen::Index>(j["d"].get<long>());
  require(j["weights"].is_array() && !j["weights"].empty(), ErrorKind::kInvalidInput,
          "gmm json: weights must be a non-empty array");
  const auto k = static_cast<Eigen::Index>(j["weights"].size());
  Vector weights = vector_from(j["weights"], k, "weights");
  require(j["means"].is_array() && static_cast<Eigen::Index>(j["means"].size()) == k && j["covs"].is_array() &&
              static_cast<Eigen::Index>(j["covs"].size()) == k,
          ErrorKind::kDimensionMismatch, "gmm json: weights, means and covs differ in length");
  require(weights.allFinite() && (weights.array() >= 0.0).all(), ErrorKind::kInvalidInput,
          "gmm json: weights must be finite and non-negative");
  const double total = weights.sum();
  require(std::abs(total - 1.0) <= kJsonWeightTol, ErrorKind::kInvalidInput,
          "gmm json: weights sum to " + format_double(total));
  if (std::abs(total - 1.0) > 1e-12) weights /= total;

  std::vector<Gaussian> components;
  for (Eigen::Index c = 0; c < k; ++c) {
    const auto cc = static_cast<std::size_t>(c);
    components.emplace_back(vector_from(j["means"][cc], d, "mean"), SpdMatrix(matrix_from(j["covs"][cc], d, "cov")));
  }
  return Gmm(std::move(weights), std::move(components));
}

Gmm load_gmm(const std::string& path) { return gmm_from_json(read_text_file(path)); }

void save_gmm(const Gmm& gmm, const std::string& path) { write_text_file(path, gmm_to_json(gmm)); }

std::string plan_to_json(const TransportPlan& plan) {
  json j;
  j["weights"] = matrix_json(plan.coupling().weights);
  j["maps"] = json::array();
  for (const auto& [k, l] : plan.support()) {
    const auto& map = plan.map(k, l);
    if (!map) continue;
    json m;
    m["k"] = k;
    m["l"] = l;
    m["linear"] = matrix_json(map->linear);
    m["offset"] = vector_json(map->offset);
    j["maps"].push_back(std::move(m));
  }
  return j.dump(2) + "\n";
}

std::string coupling_to_json(const MultiCoupling& coupling) {
  json j;
  j["shape"] = coupling.weights.shape();
  j["entries"] = json::array();
  for (std::size_t flat : coupling.support()) {
    json e;
    e["index"] = coupling.weights.unravel(flat);
    e["weight"] = coupling.weights[flat];
    j["entries"].push_back(std::move(e));
  }
  return j.dump(2) + "\n";
}

PointCloud parse_csv(std::string_view text) {
  std::vector<std::vector<double>> rows;
  std::vector<double> row;
  std::size_t pos = 0;
  int line_no = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    if (!parse_row(line, row)) {
      require(rows.empty() && line_no == 1, ErrorKind::kInvalidInput,
              "csv: line " + std::to_string(line_no) + " is not a list of numbers");
      continue;  // header
    }
    require(rows.empty() || row.size() == rows.front().size(), ErrorKind::kDimensionMismatch,
            "csv: line " + std::to_string(line_no) + " has " + std::to_string(row.size()) + " fields");
    rows.push_back(row);
  }
  require(!rows.empty(), ErrorKind::kInvalidInput, "csv: no data rows");
  Matrix points(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      points(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  return PointCloud(std::move(points));
}

PointCloud load_csv(const std::string& path) { return parse_csv(read_text_file(path)); }

std::string to_csv(const Matrix& rows) {
  std::string out;
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    for (Eigen::Index c = 0; c < rows.cols(); ++c) {
      if (c > 0) out += ',';
      out += format_double(rows(r, c));
    }
    out += '\n';
  }
  return out;
}

std::string mw2kl_params_to_json(const CouplingParams1D& params, double lambda, double sigma_min,
                                 std::uint64_t seed) {
  json j;
  j["K"] = params.size();
  j["pi"] = vector_json(params.pi);
  j["m0"] = vector_json(params.m0);
  j["m1"] = vector_json(params.m1);
  j["s0"] = vector_json(params.s0);
  j["s1"] = vector_json(params.s1);
  j["lambda"] = lambda;
  j["sigma_min"] = sigma_min;
  j["seed"] = seed;
  return j.dump(2) + "\n";
}

std::string energy_trace_csv(const std::vector<double>& energy) {
  std::string out = "iteration,energy\n";
  for (std::size_t i = 0; i < energy.size(); ++i) out += std::to_string(i) + "," + format_double(energy[i]) + "\n";
  return out;
}

std::string format_double(double value) {
  // std::to_chars is locale-independent, unlike printf.
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value, std::chars_format::scientific, 16);
  return ec == std::errc() ? std::string(buffer, ptr) : std::string("nan");
}

}  // namespace gmmot
