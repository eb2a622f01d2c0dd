// Command line front end: run / analyze / sweep over a key-value config.

#include <CLI11.hpp>
#include <iostream>

#include "sgf/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"gradient flows of symmetric-matrix fields with repulsive potentials"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string traj_dir;

  CLI::App* run = app.add_subcommand("run", "integrate the flow and write snapshots + series");
  run->add_option("--config", config_path, "config file")->required();
  run->add_option("--out", out_dir, "output directory")->required();

  CLI::App* analyze =
      app.add_subcommand("analyze", "monotonicity / Moser / epsilon-regularity reports");
  analyze->add_option("--config", config_path, "config file")->required();
  analyze->add_option("--traj", traj_dir, "directory with snap_*.sgf files");
  analyze->add_option("--out", out_dir, "output directory")->required();

  CLI::App* sweep = app.add_subcommand("sweep", "bad-set and sup-e sweeps over analysis.b_sweep");
  sweep->add_option("--config", config_path, "config file")->required();
  sweep->add_option("--out", out_dir, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    const sgf::RunConfig cfg = sgf::load_config(config_path);
    sgf::ExitStatus status = sgf::ExitStatus::Ok;
    if (run->parsed()) {
      status = sgf::cmd_run(cfg, out_dir);
      if (status == sgf::ExitStatus::Diverged)
        std::cerr << "flow diverged; partial artifacts kept in " << out_dir << "\n";
    } else if (analyze->parsed()) {
      status = sgf::cmd_analyze(cfg, traj_dir.empty() ? out_dir : traj_dir, out_dir);
    } else if (sweep->parsed()) {
      status = sgf::cmd_sweep(cfg, out_dir);
    }
    return static_cast<int>(status);
  } catch (const sgf::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return static_cast<int>(sgf::ExitStatus::BadConfig);
  } catch (const sgf::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(sgf::ExitStatus::Failure);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(sgf::ExitStatus::Failure);
  }
}
