// Command-line front end: train tables, identify objects, run the full
// experiment sweep, dump tables, and render plots.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "graspid/graspid.hpp"

namespace fs = std::filesystem;
using namespace graspid;

namespace {

struct CliOptions {
  std::string config_path;
  std::string out_dir = "out";
  ExperimentConfig cfg;
  // raw string views of config values so flags can override the file
  std::map<std::string, std::string> file_values;
};

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    // trim
    auto b = item.find_first_not_of(" \t");
    auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

void apply_config_value(ExperimentConfig& cfg, const std::string& key,
                        const std::string& value) {
  if (key == "objects") cfg.objects = split_csv(value);
  else if (key == "L") cfg.grid_size = std::stoi(value);
  else if (key == "N") cfg.samples_per_grasp = std::stoi(value);
  else if (key == "sigma_distance") cfg.noise.sigma_distance = std::stod(value);
  else if (key == "sigma_angle") cfg.noise.sigma_angle = std::stod(value);
  else if (key == "distance_step") cfg.quantizer.distance_step = std::stod(value);
  else if (key == "angle_step") cfg.quantizer.angle_step = std::stod(value);
  else if (key == "betas") {
    cfg.betas.clear();
    for (const auto& b : split_csv(value)) cfg.betas.push_back(std::stod(b));
  } else if (key == "trials") cfg.trials_per_object = std::stoi(value);
  else if (key == "seed") cfg.seed = std::stoull(value);
  else if (key == "weighting") cfg.weighting = weighting_from_name(value);
  else if (key == "noise_mode")
    cfg.noise_mode = value == "feature" ? NoiseMode::FeatureSpace : NoiseMode::ContactSpace;
  else if (key == "max_grasps") cfg.max_grasps = std::stoi(value);
  else if (key == "hidden_rotation") cfg.hidden_rotation = value == "1" || value == "true";
  else if (key == "exclude_visited") cfg.exclude_visited = value == "1" || value == "true";
  else if (key == "workers") cfg.workers = std::stoi(value);
  else if (key == "standoff_radius") cfg.hand.standoff_radius = std::stod(value);
  else if (key == "approach_height") cfg.hand.approach_height = std::stod(value);
  else throw std::runtime_error("unknown config key: " + key);
}

void load_config_file(ExperimentConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      auto b = s.find_first_not_of(" \t");
      auto e = s.find_last_not_of(" \t");
      return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) continue;
    try {
      apply_config_value(cfg, key, value);
    } catch (const std::exception& ex) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + ex.what());
    }
  }
}

std::vector<TrialRecord> read_records_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open records file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty records file");
  std::vector<TrialRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto fields = split_csv(line);
    if (fields.size() < 9) throw std::runtime_error("malformed records row: " + line);
    TrialRecord r;
    r.truth = fields[0];
    r.method = method_from_name(fields[1]);
    r.policy = fields[2] == "active" ? Policy::Active : Policy::Passive;
    r.beta = std::stod(fields[3]);
    r.trial_id = std::stoi(fields[4]);
    r.grasps = std::stoi(fields[5]);
    r.decided = fields[6];
    r.correct = fields[7] == "1";
    r.capped = fields[8] == "1";
    records.push_back(r);
  }
  return records;
}

void default_objects(ExperimentConfig& cfg) {
  if (cfg.objects.empty())
    for (const auto& f : fixtures::fixture_list()) cfg.objects.push_back(f.name);
}

int cmd_train(const CliOptions& opt) {
  ExperimentConfig cfg = opt.cfg;
  default_objects(cfg);
  fs::create_directories(opt.out_dir);
  fs::create_directories(opt.out_dir + "/contacts");
  std::vector<PoseGrid> grids;
  for (const auto& name : cfg.objects) {
    PoseGrid grid =
        build_pose_grid(fixtures::make_fixture(name), name, cfg.grid_size, cfg.hand);
    save_contacts(grid, opt.out_dir + "/contacts/" + name + ".contacts");
    std::cout << name << ": " << grid.valid_count() << "/" << cfg.grid_size
              << " valid poses\n";
    grids.push_back(std::move(grid));
  }
  for (Method method : {Method::PN, Method::P}) {
    TrainConfig tc;
    tc.noise = cfg.noise;
    tc.noise.rng_seed = mix_seed({cfg.seed, 0x7261696eULL});
    tc.samples_per_grasp = cfg.samples_per_grasp;
    tc.quantizer = cfg.quantizer;
    tc.method = method;
    tc.noise_mode = cfg.noise_mode;
    auto tables = train(grids, tc);
    std::string path = opt.out_dir + "/tables_" + method_name(method) + ".bin";
    save_tables(tables, path);
    std::uint64_t total = 0;
    for (const auto& t : tables) total += t.total_count;
    std::cout << "wrote " << path << " (" << tables.size() << " objects, " << total
              << " key occurrences)\n";
  }
  return 0;
}

int cmd_identify(const CliOptions& opt, const std::string& tables_path,
                 const std::string& truth, const std::string& policy_str, double beta,
                 const std::string& contacts_path, const std::string& trace_path) {
  ExperimentConfig cfg = opt.cfg;
  default_objects(cfg);
  TrainedSet set;
  set.tables = load_tables(tables_path);
  if (set.tables.empty()) throw std::runtime_error("empty table set");
  Method method = set.tables.front().method;
  cfg.quantizer = set.tables.front().quantizer;
  for (const auto& t : set.tables) set.objects.push_back(t.object_name);
  // grids: either a single supplied contact file for the truth object, or the
  // live fixture simulator for all objects
  if (!contacts_path.empty()) {
    PoseGrid grid = load_contacts(contacts_path);
    for (const auto& name : set.objects) {
      if (name == grid.object_name) set.grids.push_back(grid);
      else {
        PoseGrid empty;
        empty.object_name = name;
        empty.grid_size = grid.grid_size;
        empty.poses.resize(static_cast<std::size_t>(grid.grid_size));
        set.grids.push_back(std::move(empty));
      }
    }
  } else {
    for (const auto& name : set.objects)
      set.grids.push_back(build_pose_grid(fixtures::make_fixture(name), name,
                                          set.tables.front().grid_size, cfg.hand));
  }
  set.predictions = build_predictions(set.tables, cfg.weighting);
  std::size_t truth_index = 0;
  bool found = false;
  for (std::size_t i = 0; i < set.objects.size(); ++i)
    if (set.objects[i] == truth) {
      truth_index = i;
      found = true;
    }
  if (!found) throw std::runtime_error("unknown object: " + truth);
  Policy policy = policy_str == "active" ? Policy::Active : Policy::Passive;
  TrialRecord rec = run_trial(truth_index, method, policy, beta, set, cfg, 0, true);
  for (const auto& row : rec.trace) {
    std::cout << "t=" << row.t << " pose=" << row.pose_index << " posterior:";
    for (std::size_t i = 0; i < set.objects.size(); ++i)
      std::cout << " " << set.objects[i] << "=" << fixed2(row.posterior[i] * 100) << "%";
    std::cout << "\n";
  }
  if (rec.capped)
    std::cout << "undecided after " << rec.grasps << " grasps (cap reached)\n";
  else
    std::cout << "decided: " << rec.decided << " after " << rec.grasps << " grasps ("
              << (rec.correct ? "correct" : "wrong") << ")\n";
  if (!trace_path.empty()) {
    fs::path parent = fs::path(trace_path).parent_path();
    if (!parent.empty()) fs::create_directories(parent);
    std::ofstream out(trace_path);
    if (!out) throw std::runtime_error("cannot open for writing: " + trace_path);
    emit_trace_csv(rec, set.objects, out);
  }
  return rec.capped ? 2 : 0;
}

int cmd_experiment(const CliOptions& opt) {
  ExperimentConfig cfg = opt.cfg;
  default_objects(cfg);
  cfg.validate();
  fs::create_directories(opt.out_dir);
  auto grids = build_fixture_grids(cfg);
  auto records = run_experiment(cfg, grids);
  auto summaries = summarize(records);
  {
    std::ofstream out(opt.out_dir + "/records.csv", std::ios::binary);
    emit_records_csv(records, out);
  }
  {
    std::ofstream out(opt.out_dir + "/summary.csv", std::ios::binary);
    emit_summary_csv(summaries, out);
  }
  emit_plots(summaries, records, opt.out_dir);
  std::cout << "wrote " << records.size() << " trial records to " << opt.out_dir
            << "/records.csv\n";
  return 0;
}

int cmd_dump_table(const std::string& tables_path, const std::string& object_name) {
  auto tables = load_tables(tables_path);
  for (const auto& t : tables) {
    if (!object_name.empty() && t.object_name != object_name) continue;
    std::cout << "# " << t.object_name << " method=" << method_name(t.method)
              << " total=" << t.total_count << "\n";
    dump_table_csv(t, std::cout);
  }
  return 0;
}

int cmd_plot(const std::string& records_path, const std::string& out_dir) {
  auto records = read_records_csv(records_path);
  auto summaries = summarize(records);
  fs::create_directories(out_dir);
  emit_plots(summaries, records, out_dir);
  std::cout << "wrote plots to " << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pose-free haptic object identification from multi-finger grasps"};
  app.require_subcommand(1);

  CliOptions opt;
  std::string seed_str;

  app.add_option("--config", opt.config_path, "key=value config file");
  app.add_option("--out", opt.out_dir, "output directory");

  // flag overrides applied after the config file
  std::vector<std::pair<std::string, std::string>> overrides;
  auto add_override = [&](const std::string& flag, const std::string& key,
                          const std::string& help) {
    app.add_option_function<std::string>(
        flag, [&overrides, key](const std::string& v) { overrides.emplace_back(key, v); },
        help);
  };
  add_override("--objects", "objects", "comma-separated fixture names");
  add_override("--grid-size,-L", "L", "pose grid size L");
  add_override("--samples,-N", "N", "noisy samples per grasp N");
  add_override("--sigma-distance", "sigma_distance", "position noise std [mm]");
  add_override("--sigma-angle", "sigma_angle", "normal noise std [rad]");
  add_override("--distance-step", "distance_step", "distance quantization step [mm]");
  add_override("--angle-step", "angle_step", "angle quantization step [rad]");
  add_override("--betas", "betas", "comma-separated confidence thresholds");
  add_override("--trials", "trials", "trials per object");
  add_override("--weighting", "weighting", "vote weighting: count|binary");
  add_override("--noise-mode", "noise_mode", "noise model: contact|feature");
  add_override("--max-grasps", "max_grasps", "grasp cap per trial");
  add_override("--hidden-rotation", "hidden_rotation", "passive hidden rotation: 1|0");
  add_override("--exclude-visited", "exclude_visited", "never revisit a pose: 1|0");
  add_override("--workers", "workers", "worker thread count");
  app.add_option("--seed", seed_str, "experiment seed (required for `experiment`)");

  auto* train_cmd = app.add_subcommand("train", "build contact files and hash tables");
  auto* identify_cmd = app.add_subcommand("identify", "run one identification session");
  auto* experiment_cmd = app.add_subcommand("experiment", "run the full sweep");
  auto* dump_cmd = app.add_subcommand("dump-table", "emit table contents as CSV");
  auto* plot_cmd = app.add_subcommand("plot", "render figures from a records CSV");

  std::string tables_path, truth, policy_str = "passive", contacts_path, trace_path;
  double beta = 0.99;
  identify_cmd->add_option("--tables", tables_path, "table file")->required();
  identify_cmd->add_option("--object", truth, "true object name")->required();
  identify_cmd->add_option("--policy", policy_str, "passive|active");
  identify_cmd->add_option("--beta", beta, "confidence threshold");
  identify_cmd->add_option("--contacts", contacts_path, "contact file for the object");
  identify_cmd->add_option("--trace", trace_path, "write per-grasp trace CSV here");

  std::string dump_tables_path, dump_object;
  dump_cmd->add_option("--tables", dump_tables_path, "table file")->required();
  dump_cmd->add_option("--object", dump_object, "restrict to one object");

  std::string records_path;
  plot_cmd->add_option("--records", records_path, "records.csv from `experiment`")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (!opt.config_path.empty()) load_config_file(opt.cfg, opt.config_path);
    for (const auto& [key, value] : overrides) apply_config_value(opt.cfg, key, value);
    if (!seed_str.empty()) opt.cfg.seed = std::stoull(seed_str);
    if (experiment_cmd->parsed() && seed_str.empty() &&
        opt.file_values.find("seed") == opt.file_values.end() && opt.config_path.empty())
      throw std::runtime_error("`experiment` requires --seed (or seed= in the config)");

    if (train_cmd->parsed()) return cmd_train(opt);
    if (identify_cmd->parsed())
      return cmd_identify(opt, tables_path, truth, policy_str, beta, contacts_path,
                          trace_path);
    if (experiment_cmd->parsed()) return cmd_experiment(opt);
    if (dump_cmd->parsed()) return cmd_dump_table(dump_tables_path, dump_object);
    if (plot_cmd->parsed()) return cmd_plot(records_path, opt.out_dir);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 0;
}
