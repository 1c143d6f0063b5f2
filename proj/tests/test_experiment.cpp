#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <optional>

#include "helpers.hpp"
#include "mrp/datagen.hpp"
#include "mrp/experiment.hpp"
#include "mrp/moments.hpp"
#include "mrp/rng.hpp"

using namespace mrp;

namespace {

ExperimentConfig small_config(std::uint64_t seed) {
  ExperimentConfig cfg;
  cfg.spec.T = 132;
  cfg.T_in = 66;
  cfg.T_out = 33;
  cfg.window_count = 2;
  cfg.seed = seed;
  return cfg;
}

LagMoments training_moments(std::uint64_t seed, Eigen::Index T, int p) {
  CointSpec spec;
  spec.seed = seed;
  spec.T = T;
  spec.fill_defaults();
  const SpreadPanel sp =
      build_spreads(generate_market(spec), SpreadMode::true_beta);
  return estimate_moments(sp.values, p);
}

}  // namespace

TEST_CASE("variance_scan_grid covers the singles and stays feasible") {
  const LagMoments lm = training_moments(2, 264, 3);
  const double nu_min = min_variance_level(lm);
  const std::vector<double> grid = variance_scan_grid(lm);

  CHECK(grid.size() >= 15);
  CHECK(std::is_sorted(grid.begin(), grid.end()));
  for (double nu : grid) CHECK(nu >= nu_min * 1.001);

  // Every single spread's own variance is a grid point, so the scan can
  // always fall back to (a rescaling of) each single spread.
  const Eigen::VectorXd diag = lm.M0().diagonal();
  for (Eigen::Index n = 0; n < diag.size(); ++n) {
    if (diag(n) <= nu_min * 1.001) continue;
    const bool found =
        std::any_of(grid.begin(), grid.end(),
                    [&](double nu) { return nu == diag(n); });
    CHECK(found);
  }
}

TEST_CASE("design_portfolio honors an explicit variance level") {
  const LagMoments lm = training_moments(3, 264, 3);
  MrpConfig base;
  const double nu = min_variance_level(lm) * 2.0;
  const DesignOutcome out = design_portfolio(lm, base, nu);
  CHECK_FALSE(out.scanned);
  CHECK(out.nu_used == nu);
  CHECK(out.portmanteau_value ==
        doctest::Approx(portmanteau(out.result.w, lm)));
  CHECK(std::abs(out.result.w.dot(lm.M0() * out.result.w) - nu) <= 1e-6 * nu);
}

TEST_CASE("scanned design is at least as mean-reverting as every single") {
  const LagMoments lm = training_moments(4, 264, 3);
  MrpConfig base;
  const DesignOutcome out = design_portfolio(lm, base, std::nullopt);
  CHECK(out.scanned);
  for (Eigen::Index n = 0; n < lm.N(); ++n) {
    const Eigen::VectorXd e = Eigen::VectorXd::Unit(lm.N(), n);
    CHECK(out.portmanteau_value <=
          portmanteau(e, lm) * (1.0 + 1e-9) + 1e-12);
  }
}

TEST_CASE("run_experiment produces a complete, internally consistent result") {
  const ExperimentConfig cfg = small_config(11);
  const ExperimentResult res = run_experiment(cfg);

  REQUIRE(res.windows.size() == 2);
  CHECK(res.prices.T() == 132);
  CHECK(res.prices.M() == 6);
  CHECK(res.spreads.N() == 5);

  REQUIRE(res.designed.windows.size() == 2);
  REQUIRE(res.designed_windows.size() == 2);
  REQUIRE(res.singles.size() == 5);

  for (const auto& d : res.designed_windows) {
    CHECK(d.w.size() == 5);
    CHECK(std::abs(d.w.sum() - 1.0) <= 1e-8);
    CHECK(d.nu_used > 0.0);
    CHECK(d.portmanteau_value >= 0.0);
    // w_p = hedge^T w.
    CHECK((d.w_p - res.spreads.hedge.transpose() * d.w).cwiseAbs().maxCoeff() <=
          1e-12);
  }

  const auto check_strategy = [&](const StrategyOutcome& s) {
    REQUIRE(s.windows.size() == 2);
    double total = 0.0;
    for (const auto& w : s.windows) {
      CHECK(w.positions.positions.size() == 33);
      // Forced flat at the end of each trading window.
      CHECK(w.positions.positions.back() == 0);
      CHECK(w.report.pnl.size() == 33);
      if (!w.report.cum_pnl.empty()) total += w.report.cum_pnl.back();
    }
    CHECK(s.total_cum_pnl == doctest::Approx(total));
  };
  check_strategy(res.designed);
  for (const auto& s : res.singles) check_strategy(s);
}

TEST_CASE("summary_json carries metadata, strategies and the open benchmark") {
  const ExperimentConfig cfg = small_config(12);
  const ExperimentResult res = run_experiment(cfg);
  const std::string text = summary_json(cfg, res);
  const nlohmann::json doc = nlohmann::json::parse(text);

  CHECK(doc["version"] == "0.1.0");
  CHECK(doc["seed"] == 12);
  CHECK(doc["config_hash"].is_string());
  CHECK(doc["config_hash"].get<std::string>().size() == 16);

  REQUIRE(doc["windows"].is_array());
  REQUIRE(doc["windows"].size() == 2);
  CHECK(doc["windows"][0]["train"][0] == 0);
  CHECK(doc["windows"][0]["train"][1] == 66);
  CHECK(doc["windows"][1]["trade"][1] == 132);

  REQUIRE(doc["strategies"].is_array());
  REQUIRE(doc["strategies"].size() == 6);  // designed + 5 singles
  CHECK(doc["strategies"][0]["name"] == "mrp");
  for (const auto& s : doc["strategies"]) {
    CHECK(s["windows"].size() == 2);
    CHECK((s["sharpe"].is_number() || s["sharpe"].is_null()));
  }

  REQUIRE(doc["designed"].is_array());
  REQUIRE(doc["designed"].size() == 2);
  CHECK(doc["designed"][0]["w"].size() == 5);

  CHECK(doc["benchmarks"]["existing_mrp_by_portmanteau"] == "unavailable");

  // reports_json shares the metadata and adds the per-period series.
  const nlohmann::json rep = nlohmann::json::parse(reports_json(cfg, res));
  CHECK(rep["config_hash"] == doc["config_hash"]);
  REQUIRE(rep["strategies"][0]["windows"][0]["positions"].is_array());
  CHECK(rep["strategies"][0]["windows"][0]["positions"].size() == 33);
}

TEST_CASE("canonical_config ignores the output directory") {
  ExperimentConfig a = small_config(5);
  ExperimentConfig b = small_config(5);
  a.out_dir = "/tmp/somewhere";
  b.out_dir = "/somewhere/else";
  CHECK(canonical_config(a) == canonical_config(b));

  b.seed = 6;
  CHECK(canonical_config(a) != canonical_config(b));

  ExperimentConfig c = small_config(5);
  c.nu = 0.25;
  CHECK(canonical_config(a) != canonical_config(c));
}

TEST_CASE("parallel window evaluation is byte-identical to serial") {
  ExperimentConfig serial = small_config(13);
  ExperimentConfig parallel = small_config(13);
  serial.parallel_windows = false;
  parallel.parallel_windows = true;

  const std::string a = summary_json(serial, run_experiment(serial));
  const std::string b = summary_json(parallel, run_experiment(parallel));
  CHECK(a == b);
}

TEST_CASE("series_csv lists every series with stable headers") {
  const ExperimentConfig cfg = small_config(14);
  const ExperimentResult res = run_experiment(cfg);
  const std::string csv = series_csv(res);

  CHECK(csv.rfind("kind,name,window,t,value\n", 0) == 0);
  CHECK(csv.find("log_price,asset1,") != std::string::npos);
  CHECK(csv.find("spread,spread5,") != std::string::npos);
  CHECK(csv.find("mrp_spread,mrp,0,") != std::string::npos);
  CHECK(csv.find("asset_weight,asset6,") != std::string::npos);
  CHECK(csv.find("position,mrp,1,") != std::string::npos);
  CHECK(csv.find("roi,spread3,0,") != std::string::npos);
}
