#include "gapforge/driver.hpp"

#include <cmath>

#include "doctest.h"
#include "gapforge/bands.hpp"
#include "gapforge/errors.hpp"

using namespace gapforge;

namespace {

OptimizeConfig small_config() {
  OptimizeConfig cfg;
  cfg.m = 1;
  cfg.V_plus = 50.0;
  cfg.lattice = LatticeParams::square();
  cfg.n = 16;
  cfg.sampling = KSampling::IBZPath;
  cfg.k_per_side = 4;
  cfg.mu = 2;
  cfg.max_outer = 25;
  cfg.eps_V = 1e-4;
  cfg.init = InitStrategy::DiskArray;
  return cfg;
}

// shared across subcases; doctest re-enters the case body once per subcase
const OptimizeTrace& small_run() {
  static const OptimizeTrace tr = optimize_2d(small_config());
  return tr;
}

int ceiling_count(const PotentialGrid& V) {
  return static_cast<int>((V.v > 0.5 * V.V_plus).count());
}

bool two_level(const PotentialGrid& V, double tol = 1e-12) {
  return ((V.v < tol) || (V.v > V.V_plus - tol)).all();
}

}  // namespace

TEST_CASE("initialization strategies produce admissible two-level fields") {
  OptimizeConfig cfg = small_config();
  cfg.m = 2;

  SUBCASE("cosine stripes follow the first coordinate") {
    PotentialGrid V = init_potential(InitStrategy::Cosine, cfg);
    V.validate();
    CHECK(two_level(V));
    for (int j = 0; j < cfg.n; ++j)
      for (int i = 0; i < cfg.n; ++i) {
        const double want = std::cos(4.0 * M_PI * i / cfg.n) > 0 ? cfg.V_plus : 0.0;
        CHECK(V.v[i + cfg.n * j] == want);
      }
  }

  SUBCASE("1D cosine start matches the sign rule cell by cell") {
    cfg.dim = 1;
    cfg.n = 64;
    PotentialGrid V = init_potential(InitStrategy::Cosine, cfg);
    CHECK(V.dim == 1);
    CHECK(V.v.size() == 64);
    for (int l = 0; l < 64; ++l)
      CHECK(V.v[l] == (std::cos(4.0 * M_PI * l / 64.0) > 0 ? cfg.V_plus : 0.0));
  }

  SUBCASE("seeded random start replays and fills half the cell") {
    cfg.seed = 7;
    PotentialGrid V1 = init_potential(InitStrategy::RandomBangBang, cfg);
    PotentialGrid V2 = init_potential(InitStrategy::RandomBangBang, cfg);
    CHECK((V1.v - V2.v).abs().maxCoeff() == 0.0);
    CHECK(two_level(V1));
    const int N = cfg.n * cfg.n;
    CHECK(std::abs(ceiling_count(V1) - N / 2) <= 2);
    cfg.seed = 8;
    PotentialGrid V3 = init_potential(InitStrategy::RandomBangBang, cfg);
    CHECK((V1.v - V3.v).abs().maxCoeff() > 0.0);
  }

  SUBCASE("disk array drops m wells into the cell") {
    cfg.m = 3;
    cfg.n = 24;
    cfg.lattice = LatticeParams::triangular();
    PotentialGrid V = init_potential(InitStrategy::DiskArray, cfg);
    CHECK(two_level(V));
    CHECK(component_analysis(V, cfg.V_plus / 2, cfg.lattice).count == 3);
    // three radius-0.2 disks in a unit-volume cell
    const double frac = 1.0 - double(ceiling_count(V)) / (cfg.n * cfg.n);
    CHECK(frac == doctest::Approx(3 * M_PI * 0.04).epsilon(0.12));
  }
}

TEST_CASE("component census measures wells on the periodic cell") {
  const int n = 64;
  PotentialGrid V;
  V.dim = 2;
  V.n = n;
  V.V_plus = 10.0;

  SUBCASE("ceiling everywhere means no wells, zero everywhere wraps the torus") {
    V.v = Eigen::ArrayXd::Constant(n * n, V.V_plus);
    CHECK(component_analysis(V, V.V_plus / 2).count == 0);
    V.v.setZero();
    ComponentReport rep = component_analysis(V, V.V_plus / 2);
    CHECK(rep.count == 1);
    CHECK(rep.components[0].area == doctest::Approx(1.0));
    CHECK(rep.components[0].perimeter == 0.0);  // no boundary faces on the torus
    CHECK(rep.components[0].roundness == 0.0);
  }

  SUBCASE("a digitized disk is round and has the right area") {
    V = disk_array_potential(LatticeParams::square(), n, 10.0, {{0.3, 0.7}}, {0.2});
    ComponentReport rep = component_analysis(V, 5.0);
    REQUIRE(rep.count == 1);
    CHECK(rep.components[0].area == doctest::Approx(M_PI * 0.04).epsilon(0.03));
    CHECK(rep.components[0].roundness == doctest::Approx(1.0).epsilon(0.1));
  }

  SUBCASE("areas sort descending over several wells") {
    V = disk_array_potential(LatticeParams::square(), n, 10.0, {{0.25, 0.25}, {0.75, 0.7}},
                             {0.1, 0.15});
    ComponentReport rep = component_analysis(V, 5.0);
    REQUIRE(rep.count == 2);
    CHECK(rep.components[0].area > rep.components[1].area);
    CHECK(rep.components[0].area == doctest::Approx(M_PI * 0.0225).epsilon(0.05));
  }

  SUBCASE("area is metric-independent on a skewed cell") {
    V = disk_array_potential(LatticeParams::triangular(), n, 10.0, {{0.5, 0.5}}, {0.2});
    ComponentReport rep = component_analysis(V, 5.0, LatticeParams::triangular());
    REQUIRE(rep.count == 1);
    CHECK(rep.components[0].area == doctest::Approx(M_PI * 0.04).epsilon(0.03));
    CHECK(rep.components[0].roundness == doctest::Approx(1.0).epsilon(0.15));
  }
}

TEST_CASE("outer loop reaches a stationary two-level optimum on a small cell") {
  const OptimizeConfig cfg = small_config();
  const OptimizeTrace& tr = small_run();

  CHECK(tr.status == "stationary");
  CHECK(tr.iterations >= 1);
  REQUIRE(!tr.records.empty());
  CHECK(tr.G > 0.5);
  CHECK(tr.alpha < tr.beta);

  // ascent holds from a well-placed start; recorded, not enforced
  const double slack = 10 * cfg.sdp.tol;
  for (size_t i = 0; i + 1 < tr.records.size(); ++i)
    CHECK(tr.records[i + 1].G >= tr.records[i].G - slack);
  CHECK(tr.G >= tr.records.back().G - slack);

  for (const auto& rec : tr.records) {
    if (rec.beta > rec.alpha) CHECK(rec.bang.weak);
    if (rec.sdp_converged && rec.iteration < tr.iterations) CHECK(rec.kkt.worst() <= slack);
  }
  CHECK(tr.final_bang.weak);

  CHECK(tr.G <= high_contrast_g() + 1e-6);
  CHECK(tr.G <= upper_bound_2d(cfg.m, cfg.lattice, cfg.V_plus) + 1e-6);

  SUBCASE("restarting from the optimum terminates after one solve") {
    OptimizeConfig again = cfg;
    again.init_override = tr.V;
    OptimizeTrace tr2 = optimize_2d(again);
    CHECK(tr2.status == "stationary");
    CHECK(tr2.iterations == 1);
    CHECK(tr2.G == doctest::Approx(tr.G).epsilon(1e-6));
  }

  SUBCASE("the loop is deterministic") {
    OptimizeTrace tr2 = optimize_2d(cfg);
    CHECK(tr2.G == tr.G);
    CHECK((tr2.V.v - tr.V.v).abs().maxCoeff() == 0.0);
    CHECK(tr2.iterations == tr.iterations);
  }

  SUBCASE("a poor stripe start recovers through a transient gap collapse") {
    OptimizeConfig stripes = cfg;
    stripes.init = InitStrategy::Cosine;
    OptimizeTrace tr2 = optimize_2d(stripes);
    CHECK(tr2.status == "stationary");
    CHECK(tr2.G == doctest::Approx(tr.G).epsilon(5e-3));
  }
}

TEST_CASE("multistart rotates strategies and keeps the best run") {
  OptimizeConfig cfg = small_config();
  cfg.n = 12;
  cfg.k_per_side = 3;
  cfg.max_outer = 15;
  MultiStartResult ms = optimize_2d_multistart(cfg, 3);

  REQUIRE(ms.run_G.size() == 3);
  REQUIRE(ms.run_init.size() == 3);
  CHECK(ms.run_init[0] == "disk-array");
  CHECK(ms.run_init[1] == "cosine");
  CHECK(ms.run_init[2] == "random-bangbang/1001");
  double best = -1;
  int arg = -1;
  for (int r = 0; r < 3; ++r)
    if (ms.run_G[r] > best) {
      best = ms.run_G[r];
      arg = r;
    }
  CHECK(ms.best_index == arg);
  CHECK(ms.best.G == best);
  CHECK(ms.best.G <= high_contrast_g() + 1e-6);
}

TEST_CASE("contrast sweep warm-starts upward and finds the opening ceiling") {
  OptimizeConfig base = small_config();
  base.n = 12;
  base.k_per_side = 3;
  base.max_outer = 15;
  ContrastSweepResult sweep = contrast_sweep(1, LatticeParams::square(), {1.0, 5.0, 20.0, 60.0}, base);

  REQUIRE(sweep.points.size() == 4);
  for (size_t i = 0; i + 1 < sweep.points.size(); ++i)
    CHECK(sweep.points[i + 1].G >= sweep.points[i].G - 1e-4);  // larger ceiling, larger gap
  // the free square-cell bands overlap indirectly: alpha >= E_1(M;0) = 2 pi^2
  // while beta <= E_2(X;0) + V_plus = pi^2 + V_plus, so the first gap cannot
  // open below V_plus = pi^2; the first admissible ceiling in the list is 20
  CHECK(sweep.points[0].G <= 1e-5);
  CHECK(sweep.threshold == 20.0);
  CHECK(sweep.points.back().G > 0.3);
  CHECK(sweep.points.back().components >= 1);

  CHECK_THROWS_AS(contrast_sweep(1, LatticeParams::square(), {5.0, 5.0}, base), config_error);
}

TEST_CASE("coarse lattice sweep prefers the triangular cell for one well") {
  OptimizeConfig base = small_config();
  base.n = 12;
  base.half_bz_resolution = 3;
  base.max_outer = 15;
  std::vector<LatticeParams> grid = {LatticeParams::square(), {0.25, 1.0},
                                     LatticeParams::triangular()};
  LatticeSweepResult sweep = lattice_sweep(1, 100.0, grid, base);

  REQUIRE(sweep.table.size() == 3);
  CHECK(sweep.best.a == doctest::Approx(0.5));
  CHECK(sweep.best.b == doctest::Approx(std::sqrt(3.0) / 2));
  for (const auto& pt : sweep.table) {
    CHECK(pt.G > 0.3);
    CHECK(pt.G <= high_contrast_g() + 1e-6);
  }
}

TEST_CASE("default lattice grid covers the moduli wedge with exact landmarks") {
  auto grid = lattice_sweep_default_grid();
  CHECK(grid.size() == 106);
  bool has_tri = false, has_rect = false;
  for (const auto& p : grid) {
    CHECK(p.canonical(1e-9));
    if (std::abs(p.a - 0.5) < 1e-15 && std::abs(p.b - std::sqrt(3.0) / 2) < 1e-15) has_tri = true;
    if (p.a == 0.0 && std::abs(p.b - std::sqrt(3.0)) < 1e-12) has_rect = true;
  }
  CHECK(has_tri);
  CHECK(has_rect);
}

TEST_CASE("driver configs reject malformed input") {
  OptimizeConfig cfg = small_config();
  cfg.n = 6;
  CHECK_THROWS_AS(cfg.validate(), config_error);

  cfg = small_config();
  cfg.lattice = {0.3, 1.2};
  CHECK_THROWS_AS(cfg.sample_ks(), config_error);  // no named path for a generic cell
  cfg.sampling = KSampling::HalfBZ;
  CHECK(cfg.sample_ks().size() > 3);

  cfg = small_config();
  PotentialGrid wrong;
  wrong.dim = 2;
  wrong.n = 8;
  wrong.V_plus = cfg.V_plus;
  wrong.v = Eigen::ArrayXd::Zero(64);
  cfg.init_override = wrong;
  CHECK_THROWS_AS(cfg.validate(), config_error);
}
