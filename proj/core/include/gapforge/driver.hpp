#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "gapforge/lattice.hpp"
#include "gapforge/potential.hpp"
#include "gapforge/sdp.hpp"

namespace gapforge {

enum class InitStrategy { Cosine, RandomBangBang, DiskArray };

InitStrategy init_strategy_from_name(const std::string& name);
const char* init_strategy_name(InitStrategy s);

enum class KSampling { IBZPath, HalfBZ };

// Control block for the outer rearrangement loop.
struct OptimizeConfig {
  int m = 1;
  double V_plus = 100.0;
  LatticeParams lattice = LatticeParams::square();
  int dim = 2;  // init_potential also serves 1D starts; the loop itself is 2D
  int n = 32;   // grid points per axis

  KSampling sampling = KSampling::IBZPath;
  int k_per_side = 8;         // IBZ-path points per side (path has 3x this)
  int half_bz_resolution = 6; // half-BZ grid parameter

  int mu = 3;       // upper subspace dimension per k
  int max_outer = 40;
  double eps_V = 1e-5;  // stationary when |dV|_inf < eps_V * V_plus ...
  double eps_G = 1e-5;  // ... or |dG| < eps_G, three times in a row

  InitStrategy init = InitStrategy::DiskArray;
  std::uint64_t seed = 1;
  int threads = 0;
  SolveOptions sdp;

  // explicit start, used by the sweeps for warm starting; wins over `init`
  std::optional<PotentialGrid> init_override;

  void validate() const;
  // k-points implied by `sampling`; IBZPath requires a square or triangular
  // lattice (those are the only ones with a named boundary path)
  std::vector<Eigen::Vector2d> sample_ks() const;
};

// One outer iteration: the iterate's own spectral data plus the SDP solve
// launched from it (the solve that produced the next iterate).
struct OuterRecord {
  int iteration = 0;
  double G = 0, alpha = 0, beta = 0;
  double sdp_objective = 0;
  double dV_inf = 0;  // vs the previous accepted iterate
  double dG = 0;
  bool sdp_converged = true;
  KKTReport kkt;
  BangBangCheck bang;
};

struct OptimizeTrace {
  PotentialGrid V;
  double G = 0, alpha = 0, beta = 0;
  int iterations = 0;      // SDP solves performed
  std::string status;      // "stationary" | "budget" | "stalled"
  std::vector<OuterRecord> records;
  KKTReport final_kkt;
  BangBangCheck final_bang;
};

OptimizeTrace optimize_2d(const OptimizeConfig& cfg);

// Best of several runs over rotating strategies/seeds; provenance kept.
struct MultiStartResult {
  OptimizeTrace best;
  int best_index = -1;
  std::vector<double> run_G;
  std::vector<std::string> run_init;
};

MultiStartResult optimize_2d_multistart(const OptimizeConfig& cfg, int restarts = 5);

PotentialGrid init_potential(InitStrategy strategy, const OptimizeConfig& cfg);

// Ceiling potential with zero-disks at the given fractional centers; radii in
// the physical metric of the lattice.
PotentialGrid disk_array_potential(const LatticeParams& lattice, int n, double Vp,
                                   const std::vector<Eigen::Vector2d>& centers,
                                   const std::vector<double>& radii);

struct ContrastPoint {
  double Vp = 0;
  double G = 0;
  int components = 0;  // of {V < Vp/2} at the optimum
};

struct ContrastSweepResult {
  std::vector<ContrastPoint> points;
  // first Vp whose optimum opens the gap (G > eps_G); NaN if none does
  double threshold = std::numeric_limits<double>::quiet_NaN();
};

ContrastSweepResult contrast_sweep(int m, const LatticeParams& lattice,
                                   const std::vector<double>& Vp_list,
                                   const OptimizeConfig& base);

struct LatticePoint {
  double a = 0, b = 0;
  double G = 0;
};

struct LatticeSweepResult {
  std::vector<LatticePoint> table;  // canonical grid points only
  LatticePoint best;
};

LatticeSweepResult lattice_sweep(int m, double Vp,
                                 const std::vector<LatticeParams>& grid,
                                 const OptimizeConfig& base);

// 11x11 grid over the lattice-shape domain: a = i/20, b = (sqrt(3)/2)(1+j/8),
// so the triangular point (1/2, sqrt(3)/2) and the rectangular (0, sqrt(3))
// are exact grid nodes; non-canonical combinations are dropped.
std::vector<LatticeParams> lattice_sweep_default_grid();

struct ComponentStats {
  double area = 0;       // physical measure (unit-volume cell)
  double perimeter = 0;  // staircase-corrected
  double roundness = 0;  // 4 pi area / perimeter^2
};

struct ComponentReport {
  int count = 0;
  std::vector<ComponentStats> components;
};

// Connected components of {V < level}, 4-connected on the periodic grid.
// Areas and edge lengths are measured in the metric of the lattice cell.
ComponentReport component_analysis(const PotentialGrid& V, double level,
                                   const LatticeParams& lattice = LatticeParams::square());

}  // namespace gapforge
