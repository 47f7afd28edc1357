#include <fstream>
#include <json.hpp>
#include <sstream>

#include "otm/runs.hpp"

namespace otm {

namespace {

using nlohmann::json;

std::vector<int> int_list(const json& j) {
  std::vector<int> out;
  if (j.is_number_integer()) {
    out.push_back(j.get<int>());
  } else {
    for (const auto& v : j) out.push_back(v.get<int>());
  }
  return out;
}

}  // namespace

void apply_config_json(const std::string& json_text, RunConfig& cfg) {
  const json j = json::parse(json_text);
  if (!j.is_object()) throw std::runtime_error("config: expected an object");
  for (const auto& [key, value] : j.items()) {
    if (key == "inputs") {
      cfg.inputs = value.get<std::vector<std::string>>();
    } else if (key == "out") {
      cfg.out_dir = value.get<std::string>();
    } else if (key == "overwrite") {
      cfg.overwrite = value.get<bool>();
    } else if (key == "delta") {
      cfg.delta = value.get<double>();
    } else if (key == "gamma") {
      cfg.gamma = value.get<double>();
    } else if (key == "lambda_elastic") {
      cfg.lambda_elastic = value.get<double>();
    } else if (key == "mu_elastic") {
      cfg.mu_elastic = value.get<double>();
    } else if (key == "k") {
      cfg.k_schedule = int_list(value);
    } else if (key == "levels") {
      cfg.level_schedule = int_list(value);
    } else if (key == "grid_level") {
      cfg.grid_level = value.get<int>();
    } else if (key == "sweeps") {
      cfg.sweeps = value.get<int>();
    } else if (key == "boundary") {
      const std::string b = value.get<std::string>();
      if (b == "dirichlet")
        cfg.boundary = Boundary::DirichletIdentity;
      else if (b == "periodic")
        cfg.boundary = Boundary::Periodic;
      else
        throw std::runtime_error("config: boundary must be dirichlet|periodic");
    } else if (key == "threads") {
      cfg.threads = value.get<int>();
    } else if (key == "resample") {
      cfg.resample = value.get<bool>();
    } else if (key == "emit_source") {
      cfg.emit_source = value.get<bool>();
    } else if (key == "rescale_output") {
      cfg.rescale_output = value.get<bool>();
    } else if (key == "qp_check") {
      cfg.qp_check = value.get<bool>();
    } else if (key == "ncg_grad_tol") {
      cfg.ncg_grad_tol = value.get<double>();
    } else if (key == "ncg_max_iters") {
      cfg.ncg_max_iters = value.get<int>();
    } else if (key == "pcg_rel_tol") {
      cfg.pcg_rel_tol = value.get<double>();
    } else if (key == "pcg_max_iters") {
      cfg.pcg_max_iters = value.get<int>();
    } else if (key == "outer_stall_tol") {
      cfg.outer_stall_tol = value.get<double>();
    } else if (key == "weights") {
      cfg.weights = value.get<std::vector<double>>();
    } else if (key == "triangle_sweep") {
      cfg.triangle_sweep = value.get<bool>();
    } else if (key == "nt") {
      cfg.nt = value.get<int>();
    } else if (key == "r") {
      cfg.r = value.get<double>();
    } else if (key == "max_iters") {
      cfg.max_iters = value.get<int>();
    } else if (key == "bb_tol") {
      cfg.bb_tol = value.get<double>();
    } else if (key == "consistency_case") {
      cfg.consistency_case = value.get<std::string>();
    } else {
      throw std::runtime_error("config: unknown key '" + key + "'");
    }
  }
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  RunConfig cfg;
  apply_config_json(buffer.str(), cfg);
  return cfg;
}

}  // namespace otm
