#include "mrgap/trace_io.hpp"

#include <nlohmann/json.hpp>

#include <fstream>

namespace mrgap {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json cloud_points(const PointCloud& cloud) {
  json rows = json::array();
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < cloud.matrix().cols(); ++j) row.push_back(cloud.matrix()(static_cast<Eigen::Index>(i), j));
    rows.push_back(std::move(row));
  }
  return rows;
}

PointCloud parse_points(const json& rows, std::size_t index) {
  if (!rows.is_array() || rows.empty()) throw ParseError("trace: cloud " + std::to_string(index) + " has no points");
  const std::size_t dim = rows.front().size();
  std::vector<std::vector<double>> data;
  data.reserve(rows.size());
  for (const auto& row : rows) data.push_back(row.get<std::vector<double>>());
  return PointCloud(dim, data);
}

}  // namespace

void save_trace(const StoredTrace& stored, const fs::path& path, CloudStorage storage) {
  const DenoiseConfig& c = stored.config;
  const DenoiseTrace& t = stored.trace;
  json doc;
  doc["schema"] = kTraceSchema;
  json cfg{{"epsilon", c.epsilon},
           {"delta", c.delta},
           {"intrinsic_dim", c.intrinsic_dim},
           {"max_iter", c.max_iter},
           {"relative_sigma_tol", c.relative_sigma_tol}};
  if (c.sigma_tol) cfg["sigma_tol"] = *c.sigma_tol;
  doc["config"] = std::move(cfg);
  doc["rounds"] = t.rounds();
  json hypers = json::array();
  for (const auto& h : t.hypers) hypers.push_back({{"A", h.A}, {"rho", h.rho}, {"sigma", h.sigma}});
  doc["hypers"] = std::move(hypers);
  doc["sigma_history"] = t.sigma_history;
  doc["objectives"] = t.objectives;
  doc["variances"] = t.variances;

  json clouds = json::array();
  for (std::size_t i = 0; i < t.clouds.size(); ++i) {
    if (storage == CloudStorage::embedded) {
      clouds.push_back({{"points", cloud_points(t.clouds[i])}});
    } else {
      const std::string name = path.stem().string() + ".cloud" + std::to_string(i) + ".csv";
      save_csv(t.clouds[i], path.parent_path() / name);
      clouds.push_back({{"csv", name}});
    }
  }
  doc["clouds"] = std::move(clouds);

  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << doc.dump(1) << '\n';
  if (!out) throw InputError("failed writing " + path.string());
}

StoredTrace load_trace(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  try {
    if (!doc.contains("schema") || doc["schema"].get<int>() != kTraceSchema)
      throw ParseError(path.string() + ": unsupported trace schema");
    StoredTrace s;
    const json& cfg = doc.at("config");
    s.config.epsilon = cfg.at("epsilon").get<double>();
    s.config.delta = cfg.at("delta").get<double>();
    s.config.intrinsic_dim = cfg.at("intrinsic_dim").get<std::size_t>();
    s.config.max_iter = cfg.at("max_iter").get<std::size_t>();
    s.config.relative_sigma_tol = cfg.value("relative_sigma_tol", s.config.relative_sigma_tol);
    if (cfg.contains("sigma_tol")) s.config.sigma_tol = cfg["sigma_tol"].get<double>();

    for (const auto& h : doc.at("hypers"))
      s.trace.hypers.push_back({h.at("A").get<double>(), h.at("rho").get<double>(), h.at("sigma").get<double>()});
    s.trace.sigma_history = doc.at("sigma_history").get<std::vector<double>>();
    s.trace.objectives = doc.value("objectives", std::vector<double>{});
    s.trace.variances = doc.value("variances", std::vector<std::vector<double>>{});
    const auto& clouds = doc.at("clouds");
    for (std::size_t i = 0; i < clouds.size(); ++i) {
      const json& c = clouds[i];
      if (c.contains("points"))
        s.trace.clouds.push_back(parse_points(c["points"], i));
      else
        s.trace.clouds.push_back(load_csv(path.parent_path() / c.at("csv").get<std::string>()));
    }
    if (s.trace.clouds.size() != s.trace.hypers.size() + 1 || s.trace.sigma_history.size() != s.trace.hypers.size())
      throw ParseError(path.string() + ": inconsistent round counts");
    if (doc.at("rounds").get<std::size_t>() != s.trace.rounds())
      throw ParseError(path.string() + ": \"rounds\" does not match the hyperparameter list");
    return s;
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace mrgap
