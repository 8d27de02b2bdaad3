#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <singulax/model.hpp>

namespace singulax {

/// Noise generator specification. Kinds:
///   "zero"    — all disturbances and noises zero
///   "example" — the deterministic bounded generators of the built-in
///               example (requires m = 2, p = 4)
///   "uniform" — seeded uniform draws in [-amplitude, amplitude]
/// With scale_to_budget set, the f/g amplitudes are jointly shrunk so the
/// realized constraint value stays at or below `budget`.
struct NoiseSpec {
  std::string kind = "uniform";
  double f_amplitude = 1.0;
  double g_amplitude = 1.0;
  double free_amplitude = 0.0;
  bool scale_to_budget = true;
  double budget = 0.9;
};

struct RunConfig {
  std::string system_name;  // "paper_example" or "inline"
  DescriptorSystem system;
  int steps = 10;
  double tol = 0.0;  // relative rank tolerance; 0 = library default
  std::uint64_t seed = 0;
  std::vector<Vector> directions;  // empty means coordinate axes e_1..e_n
  NoiseSpec noise;
  Vector x0;
  std::string output;
};

/// Loads and validates a JSON run configuration. Parse errors carry
/// line/column positions; schema errors carry the offending JSON path.
RunConfig load_config(const std::string& path);

/// Materialized noise realization for steps 0..N, deterministic given
/// (config, seed). `free_motion` drives the kernel component of the
/// simulation and does not enter the constraint budget.
struct NoiseRealization {
  std::vector<Vector> f;            // N entries
  std::vector<Vector> g;            // N+1 entries
  std::vector<Vector> free_motion;  // N entries
};

NoiseRealization make_noise(const RunConfig& cfg, int N);

/// The config's directions, defaulting to the coordinate axes.
std::vector<Vector> effective_directions(const RunConfig& cfg);

}  // namespace singulax
