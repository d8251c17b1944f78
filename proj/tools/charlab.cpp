// charlab run|audit <config.json> [--tol X] [--out-dir D] [--seed S] [--stages a,b]

#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "charlab/config.hpp"
#include "charlab/pipeline.hpp"

namespace {

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"closed characteristics, Maslov indices and resonance identities"};
  app.require_subcommand(1);

  std::string config;
  std::optional<double> tol;
  std::optional<std::string> out_dir, stages;
  std::optional<std::uint64_t> seed;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", config, "run configuration (JSON)")->required();
    sub->add_option("--tol", tol, "integrator tolerance");
    sub->add_option("--out-dir", out_dir, "output directory");
    sub->add_option("--seed", seed, "seed for sampled probes");
    sub->add_option("--stages", stages, "comma separated subset of orbits,index,galerkin,resonance");
  };
  CLI::App* run = app.add_subcommand("run", "run the pipeline and write reports");
  CLI::App* audit = app.add_subcommand("audit", "audit existing orbit and index reports");
  add_common(run);
  add_common(audit);
  CLI11_PARSE(app, argc, argv);

  try {
    charlab::RunConfig c = charlab::load_config(config);
    if (tol) {
      if (!(*tol > 0)) throw charlab::UsageError("--tol must be positive");
      c.integrator_tol = *tol;
    }
    if (out_dir) c.out_dir = *out_dir;
    if (seed) c.seed = *seed;
    if (stages) {
      nlohmann::json j = {{"surface", charlab::to_json(c.surface)}, {"stages", split(*stages)}};
      c.stages = charlab::parse_config(j).stages;
    }
    return run->parsed() ? charlab::run(c, std::cout) : charlab::audit(c, std::cout);
  } catch (const charlab::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << charlab::describe_error(e) << "\n";
    return 1;
  }
}
