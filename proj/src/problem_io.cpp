// SPDX-License-Identifier: Apache-2.0
#include <fstream>
#include <json.hpp>

#include "mkhbm/error.hpp"
#include "mkhbm/problems.hpp"

namespace mkhbm {

namespace {

using nlohmann::json;

json to_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Vector vector_from(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_array()) fail(ErrorKind::Format, std::string("problem.json lacks '") + key + "'");
  const auto values = j[key].get<std::vector<double>>();
  return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

}  // namespace

void save_problem(const ProblemInstance& p, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorKind::Io, "cannot create " + dir.string() + ": " + ec.message());
  write_matrix_market(dir / "A.mtx", p.a);

  json params = json::object();
  for (const auto& [k, v] : p.info.params) params[k] = v;
  json j = {
      {"generator", p.info.name},
      {"params", params},
      {"seed", p.info.seed},
      {"rows", p.rows()},
      {"cols", p.cols()},
      {"consistent", p.consistent},
      {"b", to_json(p.b)},
      {"x_planted", to_json(p.x_planted)},
      {"x_star", to_json(p.x_star)},
      {"sigma", p.sigma},
      {"residual_norm", p.r.norm()},
      {"lambda_min", p.spectrum.lambda_min},
      {"lambda_max", p.spectrum.lambda_max},
      {"kappa", p.spectrum.kappa},
      {"kappa_bar", p.spectrum.kappa_bar},
  };
  std::ofstream out(dir / "problem.json");
  if (!out) fail(ErrorKind::Io, "cannot write " + (dir / "problem.json").string());
  out << j.dump(2) << '\n';
}

ProblemInstance load_problem(const std::filesystem::path& dir) {
  std::ifstream in(dir / "problem.json");
  if (!in) fail(ErrorKind::Io, "cannot open " + (dir / "problem.json").string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    fail(ErrorKind::Format, std::string("problem.json: ") + e.what());
  }
  Matrix a = read_matrix_market(dir / "A.mtx");
  GeneratorInfo info;
  info.name = j.value("generator", std::string("file"));
  info.seed = j.value("seed", std::uint64_t{0});
  if (j.contains("params")) {
    for (const auto& [k, v] : j["params"].items()) info.params.emplace_back(k, v.get<double>());
  }
  return assemble_problem(std::move(a), vector_from(j, "b"), vector_from(j, "x_planted"), j.value("consistent", true),
                          std::move(info));
}

}  // namespace mkhbm
