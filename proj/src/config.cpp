#include "rover/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace rover {

namespace {

using nlohmann::json;

const std::set<std::string> kExperiments = {
    "ascend",        "descend",        "hessian-probe",    "scan-eigenvectors",
    "drive-top",     "levelset-energy", "levelset-distance", "calibrate"};

[[noreturn]] void fail(const std::string& msg) { throw config_error("config: " + msg); }

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& group) {
  for (const auto& item : obj.items()) {
    if (!allowed.count(item.key()))
      fail("unknown key \"" + (group.empty() ? item.key() : group + "." + item.key()) + "\"");
  }
}

const json* get(const json& obj, const char* key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

double num(const json& j, const std::string& where) {
  if (!j.is_number()) fail(where + " must be a number");
  return j.get<double>();
}

int integer(const json& j, const std::string& where) {
  if (!j.is_number_integer()) fail(where + " must be an integer");
  return j.get<int>();
}

uint64_t uinteger(const json& j, const std::string& where) {
  if (!j.is_number_unsigned()) fail(where + " must be a non-negative integer");
  return j.get<uint64_t>();
}

std::string str(const json& j, const std::string& where) {
  if (!j.is_string()) fail(where + " must be a string");
  return j.get<std::string>();
}

std::vector<double> num_array(const json& j, const std::string& where) {
  if (!j.is_array()) fail(where + " must be an array of numbers");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& e : j) {
    if (!e.is_number()) fail(where + " must contain only numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

std::vector<std::string> str_array(const json& j, const std::string& where) {
  if (j.is_string()) return {j.get<std::string>()};
  if (!j.is_array()) fail(where + " must be a string or an array of strings");
  std::vector<std::string> out;
  for (const auto& e : j) {
    if (!e.is_string()) fail(where + " must contain only strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

std::set<std::string> experiment_keys(const std::string& experiment) {
  std::set<std::string> keys = {"name", "seed", "x_init"};
  if (experiment == "hessian-probe") {
    keys.insert("at");
    keys.insert("trajectory");
  } else if (experiment == "scan-eigenvectors") {
    keys.insert("at");
    keys.insert("max_rel_distance");
    keys.insert("n_points");
  } else if (experiment == "drive-top") {
    keys.insert("at");
    keys.insert("n_iter");
    keys.insert("h_free");
  } else if (experiment == "levelset-energy") {
    keys.insert("n_iter");
    keys.insert("j0_target");
  } else if (experiment == "levelset-distance") {
    keys.insert("target_rel_distance");
    keys.insert("j0_target");
  }
  return keys;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (!kExperiments.count(experiment)) fail("unknown experiment \"" + experiment + "\"");
  system.validate();
  if (n_intervals < 1) fail("pulse.n_intervals must be >= 1");
  if (total_time <= 0.0) fail("pulse.total_time must be > 0");
  if (sigma < 0.0) fail("noise.sigma must be >= 0");
  if (budget && *budget == 0) fail("noise.budget must be >= 1");
  if (estimator.d <= 0.0) fail("estimator.d must be > 0");
  if (estimator.delta <= 0.0) fail("estimator.delta must be > 0");
  if (estimator.n_samples < 1) fail("estimator.n_samples must be >= 1");
  try {
    rover.validate();
  } catch (const std::invalid_argument& e) {
    fail(e.what());
  }
  if (out_dir.empty()) fail("out_dir must not be empty");
  if (x_init && static_cast<int>(x_init->size()) != dim())
    fail("experiment.x_init must have length " + std::to_string(dim()));
  if (!h_free.empty() && static_cast<int>(h_free.size()) != dim())
    fail("experiment.h_free must have length " + std::to_string(dim()));
  if (n_iter < 0) fail("experiment.n_iter must be >= 0");
  if (target_rel_distance <= 0.0) fail("experiment.target_rel_distance must be > 0");
  if (probe_at != "optimal" && probe_at != "minimal" && probe_at != "x-init")
    fail("experiment.at must be one of optimal, minimal, x-init");
  if (probe_at == "x-init" && !x_init) fail("experiment.at = x-init requires experiment.x_init");
  if (max_rel_distance <= 0.0) fail("experiment.max_rel_distance must be > 0");
  if (n_points < 5 || n_points % 2 == 0) fail("experiment.n_points must be odd and >= 5");
  if (j0_target <= 0.0 || j0_target >= 1.0) fail("experiment.j0_target must be in (0, 1)");
}

ExperimentConfig default_config(const std::string& experiment) {
  if (!kExperiments.count(experiment)) fail("unknown experiment \"" + experiment + "\"");
  ExperimentConfig c;
  c.experiment = experiment;
  c.estimator.d = 4.0;
  if (experiment == "hessian-probe" || experiment == "scan-eigenvectors") {
    c.estimator.delta = 8.0;
    c.estimator.n_samples = 500;
  } else if (experiment == "drive-top") {
    c.estimator.delta = 7.0;
    c.estimator.n_samples = 100;
    c.rover.step_len = 0.0;  // auto: 0.25 * ||x_top||
    c.n_iter = 10;
  } else if (experiment == "levelset-energy") {
    c.rover.step_len = 1.0;
    c.n_iter = 30;
  } else if (experiment == "levelset-distance") {
    c.rover.step_len = 3.0;
  }
  c.rover.j_scale = c.system.j_max;
  return c;
}

ExperimentConfig parse_config(const std::string& json_text, const std::string& experiment,
                              std::optional<uint64_t> fallback_seed) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    fail(std::string("not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) fail("document root must be an object");

  ExperimentConfig c = default_config(experiment);
  if (fallback_seed) c.seed = *fallback_seed;

  check_keys(doc, {"experiment", "system", "pulse", "noise", "estimator", "rover", "out_dir"}, "");

  if (const json* pulse = get(doc, "pulse")) {
    if (!pulse->is_object()) fail("pulse must be an object");
    check_keys(*pulse, {"n_intervals", "total_time"}, "pulse");
    if (const json* v = get(*pulse, "n_intervals")) c.n_intervals = integer(*v, "pulse.n_intervals");
    if (const json* v = get(*pulse, "total_time")) c.total_time = num(*v, "pulse.total_time");
  }

  if (const json* system = get(doc, "system")) {
    if (!system->is_object()) fail("system must be an object");
    check_keys(*system, {"calib_k", "detuning", "j_max"}, "system");
    if (const json* v = get(*system, "calib_k")) c.system.calib_k = num(*v, "system.calib_k");
    if (const json* v = get(*system, "detuning")) c.system.detuning = num(*v, "system.detuning");
    if (const json* v = get(*system, "j_max")) c.system.j_max = num(*v, "system.j_max");
  }
  c.rover.j_scale = c.system.j_max;

  if (const json* noise = get(doc, "noise")) {
    if (!noise->is_object()) fail("noise must be an object");
    check_keys(*noise, {"sigma", "budget"}, "noise");
    if (const json* v = get(*noise, "sigma")) c.sigma = num(*v, "noise.sigma");
    if (const json* v = get(*noise, "budget")) {
      if (!v->is_null()) c.budget = uinteger(*v, "noise.budget");
    }
  }

  if (const json* est = get(doc, "estimator")) {
    if (!est->is_object()) fail("estimator must be an object");
    check_keys(*est, {"d", "delta", "n_samples"}, "estimator");
    if (const json* v = get(*est, "d")) c.estimator.d = num(*v, "estimator.d");
    if (const json* v = get(*est, "delta")) c.estimator.delta = num(*v, "estimator.delta");
    if (const json* v = get(*est, "n_samples"))
      c.estimator.n_samples = integer(*v, "estimator.n_samples");
  }

  if (const json* rover = get(doc, "rover")) {
    if (!rover->is_object()) fail("rover must be an object");
    check_keys(*rover,
               {"alpha", "beta", "max_step_len", "max_iter", "grad_floor_factor",
                "converge_consecutive", "level_tolerance", "step_len", "null_tol", "repeats",
                "correction_cap"},
               "rover");
    if (const json* v = get(*rover, "alpha")) c.rover.alpha = num(*v, "rover.alpha");
    if (const json* v = get(*rover, "beta")) c.rover.beta = num(*v, "rover.beta");
    if (const json* v = get(*rover, "max_step_len"))
      c.rover.max_step_len = num(*v, "rover.max_step_len");
    if (const json* v = get(*rover, "max_iter")) c.rover.max_iter = integer(*v, "rover.max_iter");
    if (const json* v = get(*rover, "grad_floor_factor"))
      c.rover.grad_floor_factor = num(*v, "rover.grad_floor_factor");
    if (const json* v = get(*rover, "converge_consecutive"))
      c.rover.converge_consecutive = integer(*v, "rover.converge_consecutive");
    if (const json* v = get(*rover, "level_tolerance"))
      c.rover.level_tolerance = num(*v, "rover.level_tolerance");
    if (const json* v = get(*rover, "step_len")) c.rover.step_len = num(*v, "rover.step_len");
    if (const json* v = get(*rover, "null_tol")) c.rover.null_tol = num(*v, "rover.null_tol");
    if (const json* v = get(*rover, "repeats")) c.rover.repeats = integer(*v, "rover.repeats");
    if (const json* v = get(*rover, "correction_cap"))
      c.rover.correction_cap = integer(*v, "rover.correction_cap");
  }

  if (const json* expt = get(doc, "experiment")) {
    if (!expt->is_object()) fail("experiment must be an object");
    check_keys(*expt, experiment_keys(experiment), "experiment");
    if (const json* v = get(*expt, "name")) {
      const std::string name = str(*v, "experiment.name");
      if (name != experiment)
        fail("experiment.name \"" + name + "\" does not match the subcommand \"" + experiment +
             "\"");
    }
    if (const json* v = get(*expt, "seed")) c.seed = uinteger(*v, "experiment.seed");
    if (const json* v = get(*expt, "x_init")) c.x_init = num_array(*v, "experiment.x_init");
    if (const json* v = get(*expt, "n_iter")) c.n_iter = integer(*v, "experiment.n_iter");
    if (const json* v = get(*expt, "target_rel_distance"))
      c.target_rel_distance = num(*v, "experiment.target_rel_distance");
    if (const json* v = get(*expt, "h_free")) c.h_free = num_array(*v, "experiment.h_free");
    if (const json* v = get(*expt, "at")) c.probe_at = str(*v, "experiment.at");
    if (const json* v = get(*expt, "trajectory"))
      c.trajectories = str_array(*v, "experiment.trajectory");
    if (const json* v = get(*expt, "max_rel_distance"))
      c.max_rel_distance = num(*v, "experiment.max_rel_distance");
    if (const json* v = get(*expt, "n_points")) c.n_points = integer(*v, "experiment.n_points");
    if (const json* v = get(*expt, "j0_target")) c.j0_target = num(*v, "experiment.j0_target");
  }

  if (const json* v = get(doc, "out_dir")) c.out_dir = str(*v, "out_dir");

  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    fail(e.what());
  }
  return c;
}

ExperimentConfig load_config(const std::string& path, const std::string& experiment,
                             std::optional<uint64_t> fallback_seed) {
  std::ifstream in(path);
  if (!in) fail("cannot read \"" + path + "\"");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), experiment, fallback_seed);
}

nlohmann::json echo_config(const ExperimentConfig& c) {
  json expt = {{"name", c.experiment}, {"seed", c.seed}};
  if (c.x_init) expt["x_init"] = *c.x_init;
  const std::set<std::string> keys = experiment_keys(c.experiment);
  if (keys.count("at")) expt["at"] = c.probe_at;
  if (keys.count("trajectory")) expt["trajectory"] = c.trajectories;
  if (keys.count("n_iter")) expt["n_iter"] = c.n_iter;
  if (keys.count("h_free"))
    expt["h_free"] = c.h_free.empty() ? std::vector<double>(c.dim(), 1.0) : c.h_free;
  if (keys.count("target_rel_distance")) expt["target_rel_distance"] = c.target_rel_distance;
  if (keys.count("max_rel_distance")) expt["max_rel_distance"] = c.max_rel_distance;
  if (keys.count("n_points")) expt["n_points"] = c.n_points;
  if (keys.count("j0_target")) expt["j0_target"] = c.j0_target;

  json noise = {{"sigma", c.sigma}};
  noise["budget"] = c.budget ? json(*c.budget) : json(nullptr);

  return json{
      {"experiment", expt},
      {"system",
       {{"calib_k", c.system.calib_k},
        {"detuning", c.system.detuning},
        {"j_max", c.system.j_max}}},
      {"pulse", {{"n_intervals", c.n_intervals}, {"total_time", c.total_time}}},
      {"noise", noise},
      {"estimator",
       {{"d", c.estimator.d}, {"delta", c.estimator.delta}, {"n_samples", c.estimator.n_samples}}},
      {"rover",
       {{"alpha", c.rover.alpha},
        {"beta", c.rover.beta},
        {"max_step_len", c.rover.max_step_len},
        {"max_iter", c.rover.max_iter},
        {"grad_floor_factor", c.rover.grad_floor_factor},
        {"converge_consecutive", c.rover.converge_consecutive},
        {"level_tolerance", c.rover.level_tolerance},
        {"step_len", c.rover.step_len},
        {"null_tol", c.rover.null_tol},
        {"repeats", c.rover.repeats},
        {"correction_cap", c.rover.correction_cap}}},
      {"out_dir", c.out_dir},
  };
}

}  // namespace rover
