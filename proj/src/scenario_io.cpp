#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "delaylab/errors.hpp"
#include "delaylab/harness.hpp"
#include "delaylab/tasks.hpp"

namespace delaylab {

namespace {

using nlohmann::json;

json to_json_array(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Eigen::VectorXd vector_from_json(const json& arr, const std::string& what) {
  if (!arr.is_array() || arr.empty()) {
    throw ValidationError(what + " must be a non-empty array");
  }
  Eigen::VectorXd v(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_number()) {
      throw ValidationError(what + " must contain numbers only");
    }
    v[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
  }
  return v;
}

Eigen::MatrixXd matrix_from_json(const json& rows, const std::string& what) {
  if (!rows.is_array() || rows.empty() || !rows[0].is_array()) {
    throw ValidationError(what + " must be an array of rows");
  }
  const std::size_t n = rows.size();
  const std::size_t m = rows[0].size();
  Eigen::MatrixXd M(n, m);
  for (std::size_t i = 0; i < n; ++i) {
    if (!rows[i].is_array() || rows[i].size() != m) {
      throw ValidationError(what + " rows must have equal length");
    }
    for (std::size_t j = 0; j < m; ++j) {
      M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          rows[i][j].get<double>();
    }
  }
  return M;
}

json matrix_to_json(const Eigen::MatrixXd& M) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(row);
  }
  return rows;
}

Task task_from_json(const json& item) {
  if (!item.is_object() || !item.contains("kind") || !item.contains("target")) {
    throw ValidationError("schedule entries need kind and target");
  }
  Task task;
  const std::string kind = item["kind"].get<std::string>();
  if (kind == "setpoint") {
    task.kind = Task::Kind::Setpoint;
  } else if (kind == "setpoint_in_fixed_time") {
    task.kind = Task::Kind::SetpointFixedTime;
    if (!item.contains("T")) {
      throw ValidationError("fixed-time schedule entries need T");
    }
    task.horizon = item["T"].get<double>();
  } else {
    throw ValidationError("unknown task kind \"" + kind + "\"");
  }
  task.target = vector_from_json(item["target"], "task target");
  return task;
}

json task_to_json(double t, const Task& task) {
  json item;
  item["t"] = t;
  item["kind"] = task.kind == Task::Kind::Setpoint ? "setpoint"
                                                   : "setpoint_in_fixed_time";
  item["target"] = to_json_array(task.target);
  if (task.kind == Task::Kind::SetpointFixedTime) item["T"] = task.horizon;
  return item;
}

TaskSchedule schedule_from_json_value(const json& arr) {
  if (!arr.is_array()) {
    throw ValidationError("schedule must be a JSON array");
  }
  std::vector<double> times;
  std::vector<Task> tasks;
  for (const auto& item : arr) {
    if (!item.contains("t") || !item["t"].is_number()) {
      throw ValidationError("schedule entries need a numeric t");
    }
    times.push_back(item["t"].get<double>());
    tasks.push_back(task_from_json(item));
  }
  try {
    return TaskSchedule(std::move(times), std::move(tasks));
  } catch (const std::invalid_argument& e) {
    throw ValidationError(e.what());
  }
}

json parse_text(const std::string& text, const char* what) {
  json root = json::parse(text, nullptr, false);
  if (root.is_discarded()) {
    throw ValidationError(std::string(what) + ": malformed JSON");
  }
  return root;
}

json verdict_to_json(const SegmentVerdict& v) {
  json seg;
  seg["index"] = v.index;
  seg["begin"] = v.begin;
  seg["end"] = v.end;
  seg["pass"] = v.pass;
  seg["reason"] = v.reason;
  seg["cost"] = v.cost.value;
  if (v.cost.completion_time) seg["completion_time"] = *v.cost.completion_time;
  return seg;
}

}  // namespace

TaskSchedule schedule_from_json(const std::string& text) {
  return schedule_from_json_value(parse_text(text, "schedule"));
}

std::string schedule_to_json(const TaskSchedule& schedule) {
  json arr = json::array();
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    arr.push_back(task_to_json(schedule.switch_times()[i], schedule.tasks()[i]));
  }
  return arr.dump(2);
}

Scenario Scenario::from_json(const std::string& text) {
  const json root = parse_text(text, "scenario");
  if (!root.is_object()) {
    throw ValidationError("scenario must be a JSON object");
  }
  Scenario sc;

  if (!root.contains("plant") || !root["plant"].is_object() ||
      !root["plant"].contains("type")) {
    throw ValidationError("scenario needs plant.type");
  }
  const json& plant = root["plant"];
  const std::string type = plant["type"].get<std::string>();
  int dim = 0;
  if (type == "scalar_linear") {
    sc.plant = PlantKind::ScalarLinear;
    dim = 1;
  } else if (type == "min_jerk") {
    sc.plant = PlantKind::MinJerk;
    dim = 6;
  } else if (type == "linear") {
    sc.plant = PlantKind::Linear;
    if (!plant.contains("M") || !plant.contains("N")) {
      throw ValidationError("linear plant needs M and N");
    }
    LinearSystem sys;
    sys.M = matrix_from_json(plant["M"], "M");
    sys.N = matrix_from_json(plant["N"], "N");
    sc.system = std::move(sys);
    dim = static_cast<int>(sc.system->M.rows());
  } else {
    throw ValidationError("unknown plant type \"" + type + "\"");
  }
  sc.initial_state = plant.contains("x0")
                         ? vector_from_json(plant["x0"], "plant x0")
                         : State(State::Zero(dim));

  if (root.contains("delay")) sc.delay = root["delay"].get<double>();
  if (root.contains("step")) sc.step = root["step"].get<double>();
  if (root.contains("duration")) sc.duration = root["duration"].get<double>();
  if (root.contains("output_dir")) {
    sc.output_dir = root["output_dir"].get<std::string>();
  }

  if (!root.contains("controller") || !root["controller"].is_object() ||
      !root["controller"].contains("type")) {
    throw ValidationError("scenario needs controller.type");
  }
  const json& ctrl = root["controller"];
  const std::string ckind = ctrl["type"].get<std::string>();
  if (ckind == "forward_model") {
    sc.controller = ControllerKind::ForwardModel;
  } else if (ckind == "naive_delayed") {
    sc.controller = ControllerKind::NaiveDelayed;
  } else if (ckind == "undelayed_reference") {
    sc.controller = ControllerKind::UndelayedReference;
  } else if (ckind == "memoryless_binary") {
    sc.controller = ControllerKind::MemorylessBinary;
  } else if (ckind == "open_loop") {
    sc.controller = ControllerKind::OpenLoop;
    if (ctrl.contains("u")) {
      sc.open_loop_control = vector_from_json(ctrl["u"], "open-loop control");
    }
  } else {
    throw ValidationError("unknown controller type \"" + ckind + "\"");
  }

  if (root.contains("schedule")) {
    sc.schedule = schedule_from_json_value(root["schedule"]);
  }
  return sc;
}

Scenario Scenario::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ValidationError("cannot open scenario file " + path);
  }
  std::ostringstream text;
  text << in.rdbuf();
  return from_json(text.str());
}

std::string Scenario::to_json() const {
  json root;
  json plant;
  switch (this->plant) {
    case PlantKind::ScalarLinear: plant["type"] = "scalar_linear"; break;
    case PlantKind::MinJerk: plant["type"] = "min_jerk"; break;
    case PlantKind::Linear:
      plant["type"] = "linear";
      if (system) {
        plant["M"] = matrix_to_json(system->M);
        plant["N"] = matrix_to_json(system->N);
      }
      break;
  }
  plant["x0"] = to_json_array(initial_state);
  root["plant"] = plant;
  root["delay"] = delay;
  json ctrl;
  switch (controller) {
    case ControllerKind::ForwardModel: ctrl["type"] = "forward_model"; break;
    case ControllerKind::NaiveDelayed: ctrl["type"] = "naive_delayed"; break;
    case ControllerKind::UndelayedReference:
      ctrl["type"] = "undelayed_reference";
      break;
    case ControllerKind::MemorylessBinary:
      ctrl["type"] = "memoryless_binary";
      break;
    case ControllerKind::OpenLoop:
      ctrl["type"] = "open_loop";
      if (open_loop_control) ctrl["u"] = to_json_array(*open_loop_control);
      break;
  }
  root["controller"] = ctrl;
  json sched = json::array();
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    sched.push_back(task_to_json(schedule.switch_times()[i], schedule.tasks()[i]));
  }
  root["schedule"] = sched;
  root["step"] = step;
  root["duration"] = duration;
  if (!output_dir.empty()) root["output_dir"] = output_dir;
  return root.dump(2);
}

std::string SimResult::summary_json() const {
  json root;
  root["steps"] = trajectory.controls.size();
  root["end_time"] = trajectory.times.empty() ? 0.0 : trajectory.end_time();
  if (!trajectory.states.empty()) {
    root["final_state"] = to_json_array(trajectory.states.back());
  }
  root["controls_clamped"] = controls_clamped;
  if (!prediction_error.empty()) {
    double worst = 0.0;
    for (double e : prediction_error) worst = std::max(worst, e);
    root["max_prediction_error"] = worst;
  }
  json audit_json;
  audit_json["all_pass"] = audit.all_pass;
  json segs = json::array();
  for (const auto& seg : audit.segments) segs.push_back(verdict_to_json(seg));
  audit_json["segments"] = segs;
  root["audit"] = audit_json;
  return root.dump(2);
}

void SimResult::write_outputs(const std::string& dir) const {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  trajectory.write_csv((fs::path(dir) / "trajectory.csv").string());
  if (!prediction_error.empty()) {
    std::ofstream out(fs::path(dir) / "prediction_error.csv");
    out << "t,error\n";
    char buf[80];
    for (std::size_t i = 0; i < prediction_error.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", prediction_times[i],
                    prediction_error[i]);
      out << buf;
    }
  }
  std::ofstream out(fs::path(dir) / "summary.json");
  out << summary_json() << '\n';
}

std::string CounterexampleReport::to_json() const {
  json root;
  root["s1"] = s1;
  root["s2"] = s2;
  root["x_star"] = x_star;
  root["u1"] = u1;
  root["u2"] = u2;
  root["controls_differ"] = controls_differ;
  root["conclusion"] =
      "both starts share the observation and control history, so any "
      "controller reading only (task, switch flag, control memory, delayed "
      "observation) emits one control for both; correct behaviour needs "
      "opposite controls, which requires reconstructing the state from the "
      "recorded controls";
  return root.dump(2);
}

std::string NsctpVerdict::to_json() const {
  json root;
  root["problem"] = problem;
  root["nsctp"] = nsctp;
  root["detail"] = detail;
  if (witness_task) root["witness_task"] = *witness_task;
  if (witness_T) root["witness_T"] = *witness_T;
  if (jerk_gap != 0.0) root["jerk_gap"] = jerk_gap;
  return root.dump(2);
}

}  // namespace delaylab
