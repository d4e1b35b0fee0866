#include "pcast/cli.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>

#include "pcast/pipeline.hpp"

namespace pcast {

namespace {

std::string flag_name(const std::string& key) {
  std::string flag = "--" + key;
  for (char& c : flag)
    if (c == '.' || c == '_') c = '-';
  return flag;
}

using Overrides = std::map<std::string, std::string>;

void add_config_flags(CLI::App* sub, Overrides& overrides) {
  for (const auto& key : config_keys()) {
    sub->add_option_function<std::string>(
           flag_name(key), [&overrides, key](const std::string& v) { overrides[key] = v; },
           "config key " + key)
        ->take_last();
  }
}

RunConfig merged_config(const std::string& config_path, const Overrides& overrides) {
  RunConfig cfg;
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw IoError("cannot open config file " + config_path);
    cfg = parse_config_file(in);
  }
  for (const auto& key : config_keys()) {
    auto it = overrides.find(key);
    if (it != overrides.end()) apply_kv(cfg, key, it->second);
  }
  return cfg;
}

void write_output(const std::string& path, const std::function<void(std::ostream&)>& fn) {
  if (path.empty()) {
    fn(std::cout);
    return;
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  fn(out);
  out.flush();
  if (!out) throw IoError("write failed for " + path);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const std::size_t comma = s.find(',', pos);
    const std::string item = s.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    if (!item.empty()) out.push_back(item);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

int dispatch(int argc, const char* const* argv) {
  CLI::App app{"profile-cast forwarding simulator"};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("-c,--config", config_path, "key = value config file")->expected(1);

  Overrides overrides;

  auto* gen = app.add_subcommand("gen-trace", "generate a synthetic association trace");
  std::string gen_out;
  bool gen_force = false;
  gen->add_option("-o,--out", gen_out, "trace file to write")->required();
  gen->add_flag("--force", gen_force, "overwrite an existing file");
  add_config_flags(gen, overrides);

  auto* screen = app.add_subcommand("screen", "keep only packets deliverable without an adversary");
  std::string screen_out;
  screen->add_option("-o,--out", screen_out, "packets file to write")->required();
  add_config_flags(screen, overrides);

  auto* sim = app.add_subcommand("simulate", "run one simulation and emit a metrics row");
  add_config_flags(sim, overrides);

  auto* sweep = app.add_subcommand("sweep", "run a parameter sweep and emit one metrics row per point");
  std::string sweep_param, sweep_values;
  int sweep_seeds = 1;
  sweep->add_option("--param", sweep_param, "config key to vary")->required();
  sweep->add_option("--values", sweep_values, "comma-separated values for the key")->required();
  sweep->add_option("--seeds", sweep_seeds, "seeds per value, starting at the base seed");
  add_config_flags(sweep, overrides);

  auto* cmp = app.add_subcommand("compare", "join two metric CSVs by sweep point");
  std::string cmp_a, cmp_b, cmp_out;
  cmp->add_option("a", cmp_a, "first metrics csv")->required();
  cmp->add_option("b", cmp_b, "second metrics csv")->required();
  cmp->add_option("-o,--out", cmp_out, "comparison csv to write");

  auto* conf = app.add_subcommand("config", "inspect the effective configuration");
  bool conf_dump = false;
  conf->add_flag("--dump", conf_dump, "print the merged configuration");
  add_config_flags(conf, overrides);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  if (gen->parsed()) {
    const RunConfig cfg = merged_config(config_path, overrides);
    if (std::filesystem::exists(gen_out) && !gen_force)
      throw IoError("refusing to overwrite " + gen_out + " (pass --force)");
    const auto records = generate_synthetic(cfg.synth);
    write_output(gen_out, [&](std::ostream& out) { write_trace(out, records); });
    std::cerr << "wrote " << records.size() << " records to " << gen_out << "\n";
    return 0;
  }

  if (screen->parsed()) {
    const RunConfig cfg = merged_config(config_path, overrides);
    validate(cfg);
    if (cfg.target_mode != "anchor")
      throw ValidationError("screen: only anchor targets can be written to a packets file");
    const World world = build_world(cfg);
    const auto packets = generate_packets(world, cfg);
    SimInputs in;
    in.packets = &packets;
    in.encounters = &world.encounters;
    in.profiles = &world.profiles;
    const auto kept = screen_deliverable(in, make_sim_config(cfg, world));
    write_output(screen_out, [&](std::ostream& out) { save_packets(out, kept); });
    std::cerr << "screened " << packets.size() << " packets, kept " << kept.size() << "\n";
    return 0;
  }

  if (sim->parsed()) {
    const RunConfig cfg = merged_config(config_path, overrides);
    validate(cfg);
    const World world = build_world(cfg);
    const auto packets = generate_packets(world, cfg);
    MaliciousAssignment preset;
    bool have_preset = false;
    if (!cfg.assignment_load.empty()) {
      std::ifstream in(cfg.assignment_load);
      if (!in) throw IoError("cannot open assignment file " + cfg.assignment_load);
      preset = load_assignment(in, cfg.p3);
      have_preset = true;
    }
    const RunArtifacts art = simulate_once(world, packets, cfg, have_preset ? &preset : nullptr);
    write_output(cfg.output, [&](std::ostream& out) { write_csv(out, {art.row}); });
    if (!cfg.log_file.empty())
      write_output(cfg.log_file, [&](std::ostream& out) { write_event_log(out, art.result.outcomes); });
    if (!cfg.assignment_dump.empty())
      write_output(cfg.assignment_dump, [&](std::ostream& out) {
        save_assignment(out, world.profiles.nodes, art.assignment);
      });
    return 0;
  }

  if (sweep->parsed()) {
    const RunConfig cfg = merged_config(config_path, overrides);
    validate(cfg);
    SweepSpec spec;
    spec.key = sweep_param;
    spec.values = split_list(sweep_values);
    spec.seeds = sweep_seeds;
    const auto rows = run_sweep(cfg, spec);
    write_output(cfg.output, [&](std::ostream& out) { write_csv(out, rows); });
    return 0;
  }

  if (cmp->parsed()) {
    auto read_rows = [](const std::string& path) {
      std::ifstream in(path);
      if (!in) throw IoError("cannot open metrics csv " + path);
      return read_csv(in);
    };
    const auto rows = compare(read_rows(cmp_a), read_rows(cmp_b));
    write_output(cmp_out, [&](std::ostream& out) { write_comparison(out, rows); });
    return 0;
  }

  if (conf->parsed()) {
    const RunConfig cfg = merged_config(config_path, overrides);
    if (!conf_dump) throw ValidationError("config: nothing to do (pass --dump)");
    validate(cfg);
    write_output(cfg.output, [&](std::ostream& out) { dump_config(out, cfg); });
    return 0;
  }

  return 1;
}

} // namespace

int run_cli(int argc, const char* const* argv) {
  try {
    return dispatch(argc, argv);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
}

} // namespace pcast
