#pragma once

// Run configuration (JSON) for the batch driver.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "charlab/geometry.hpp"
#include "charlab/resonance.hpp"

namespace charlab {

struct SurfaceConfig {
  std::string kind = "ellipsoid";  // "ellipsoid" | "perturbed_ellipsoid"
  std::vector<double> radii;
  std::optional<QuarticPerturbation> perturbation;
};

struct RunConfig {
  SurfaceConfig surface;
  std::vector<std::string> stages = {"orbits", "index", "galerkin", "resonance"};

  // tolerances
  double integrator_tol = 1e-12;
  double closure_tol = 1e-10;
  double angle_tol = 1e-7;
  int q_max = 64;
  double identity_tol = 1e-6;

  // flow / index
  int samples = 1000;
  int iterates = 100;
  double alpha = 1.8;

  // Galerkin
  double K = 1.0;
  std::vector<double> K_grid;  // empty: five points K + 0.8 j 2pi/T
  int mode_cut = 0;            // 0: automatic per K
  double T = 1.0;
  std::optional<double> a;     // empty: per orbit, phi'(rho)/rho = ratio
  double ratio = 0.5;
  double theta = 0.25;

  // resonance
  std::vector<int> ladder = {50, 100, 200};
  std::vector<UserTypeEntry> type_rows;

  std::filesystem::path out_dir = "charlab-out";
  std::uint64_t seed = 7;
};

/// Reads and validates a config file. Relative paths inside (surface spec,
/// type tables, out_dir) resolve against the config's directory. Throws
/// UsageError naming the offending field or the parse position.
RunConfig load_config(const std::filesystem::path& file);
RunConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir = ".");

SurfaceConfig parse_surface(const nlohmann::json& j);
nlohmann::json to_json(const SurfaceConfig& s);
Hypersurface build_surface(const SurfaceConfig& s);

/// Rows {"orbit_id", "m", "k"}; accepts an array or {"rows": [...]}.
std::vector<UserTypeEntry> parse_type_rows(const nlohmann::json& j);

std::vector<double> effective_K_grid(const RunConfig& c);

/// Rejects K with K T within 1e-6 of 2 pi Z.
void check_K(double K, double T, const std::string& field);

}  // namespace charlab
