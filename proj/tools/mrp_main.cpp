#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "mrp/backtest.hpp"
#include "mrp/datagen.hpp"
#include "mrp/design.hpp"
#include "mrp/errors.hpp"
#include "mrp/experiment.hpp"
#include "mrp/market.hpp"
#include "mrp/moments.hpp"
#include "mrp/version.hpp"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

// Machine-readable failure document on stdout, human message on stderr.
int fail(const mrp::Error& e) {
  ordered_json doc;
  doc["error"]["code"] = e.exit_code();
  doc["error"]["message"] = e.what();
  std::cout << doc.dump(2) << "\n";
  std::cerr << "error: " << e.what() << "\n";
  return e.exit_code();
}

mrp::PriceScale parse_scale(const std::string& s) {
  if (s == "log") return mrp::PriceScale::log_prices;
  if (s == "raw") return mrp::PriceScale::raw_prices;
  throw mrp::Error(mrp::Errc::usage, "--prices must be 'log' or 'raw'");
}

mrp::PsiMode parse_psi(const std::string& s) {
  if (s == "spectral") return mrp::PsiMode::spectral;
  if (s == "frobenius") return mrp::PsiMode::frobenius;
  throw mrp::Error(mrp::Errc::usage,
                   "--psi must be 'spectral' or 'frobenius'");
}

std::vector<std::string> base_metadata_comments(std::uint64_t seed,
                                                const std::string& config) {
  return {
      "version=" + std::string(mrp::kVersion),
      "seed=" + std::to_string(seed),
      "config=" + mrp::config_hash_hex(config),
  };
}

Eigen::MatrixXd load_hedge_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw mrp::Error(mrp::Errc::data,
                     "cannot open hedge file '" + path + "'");
  }
  ordered_json doc;
  try {
    doc = ordered_json::parse(in);
  } catch (const std::exception& e) {
    throw mrp::Error(mrp::Errc::data, std::string("hedge file: ") + e.what());
  }
  const char* key = doc.contains("hedge") ? "hedge"
                    : doc.contains("beta") ? "beta"
                                           : nullptr;
  if (key == nullptr) {
    throw mrp::Error(mrp::Errc::data,
                     "hedge file needs a 'hedge' or 'beta' array");
  }
  const auto& rows = doc[key];
  if (!rows.is_array() || rows.empty() || !rows[0].is_array() ||
      rows[0].empty()) {
    throw mrp::Error(mrp::Errc::data,
                     "hedge entry must be a non-empty 2-D array");
  }
  Eigen::MatrixXd hedge(static_cast<Eigen::Index>(rows.size()),
                        static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows[0].size()) {
      throw mrp::Error(mrp::Errc::data, "hedge rows have unequal lengths");
    }
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      hedge(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          rows[i][j].get<double>();
    }
  }
  return hedge;
}

// Flat key=value config file; '#' starts a comment line.
std::map<std::string, std::string> read_config_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw mrp::Error(mrp::Errc::usage,
                     "cannot open config file '" + path.string() + "'");
  }
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw mrp::Error(mrp::Errc::usage,
                       "config line " + std::to_string(line_no) +
                           " is not key=value");
    }
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t");
      if (b == std::string::npos) return std::string();
      const auto e = s.find_last_not_of(" \t");
      return s.substr(b, e - b + 1);
    };
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

struct GenerateArgs {
  mrp::CointSpec spec;
  std::vector<double> ar, spread_sd, rw_sd;
  std::string out = ".";
};

int cmd_generate(GenerateArgs& args) {
  args.spec.ar_coeffs = args.ar;
  args.spec.spread_noise_sd = args.spread_sd;
  args.spec.rw_noise_sd = args.rw_sd;
  args.spec.fill_defaults();

  const mrp::SyntheticMarket market = mrp::generate_market(args.spec);
  const mrp::SpreadPanel spreads =
      mrp::build_spreads(market, mrp::SpreadMode::true_beta);
  const mrp::LagMoments lm = mrp::estimate_moments(spreads, 1);
  const double nu_min = mrp::min_variance_level(lm);

  std::ostringstream cfg;
  cfg << "generate;assets=" << args.spec.M << ";rank=" << args.spec.r
      << ";T=" << args.spec.T << ";seed=" << args.spec.seed;

  fs::create_directories(args.out);
  const fs::path prices_path = fs::path(args.out) / "prices.csv";
  mrp::write_csv(prices_path, market.prices,
                 base_metadata_comments(args.spec.seed, cfg.str()));

  ordered_json doc;
  doc["version"] = std::string(mrp::kVersion);
  doc["seed"] = args.spec.seed;
  doc["config_hash"] = mrp::config_hash_hex(cfg.str());
  doc["spec"]["assets"] = args.spec.M;
  doc["spec"]["rank"] = args.spec.r;
  doc["spec"]["T"] = args.spec.T;
  doc["spec"]["ar_coeffs"] = args.spec.ar_coeffs;
  doc["spec"]["spread_noise_sd"] = args.spec.spread_noise_sd;
  doc["spec"]["rw_noise_sd"] = args.spec.rw_noise_sd;
  doc["spec"]["mix"] = "random-orthogonal";
  doc["nu_min"] = nu_min;
  ordered_json beta = ordered_json::array();
  for (Eigen::Index i = 0; i < market.beta.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index j = 0; j < market.beta.cols(); ++j) {
      row.push_back(market.beta(i, j));
    }
    beta.push_back(row);
  }
  doc["beta"] = beta;
  mrp::write_text_file(fs::path(args.out) / "market.json",
                       doc.dump(2) + "\n");

  std::cout << "wrote " << prices_path.string() << " and market.json\n";
  std::cout << "minimum feasible variance level nu_min = " << nu_min << "\n";
  return 0;
}

struct DesignArgs {
  std::string prices_file;
  std::string hedge_file;
  std::string scale = "log";
  int p = 3;
  double nu = 0.0;  // <= 0: variance scan
  std::string psi = "spectral";
  Eigen::Index tin = 0;  // 0: whole sample
  std::uint64_t seed = 0;
  std::string out = ".";
};

int cmd_design(DesignArgs& args) {
  const mrp::LogPriceMatrix prices =
      mrp::load_csv(args.prices_file, parse_scale(args.scale));
  const Eigen::MatrixXd hedge = load_hedge_json(args.hedge_file);
  const mrp::SpreadPanel spreads = mrp::make_spreads(prices, hedge);
  const Eigen::Index train_len =
      (args.tin > 0 && args.tin <= spreads.T()) ? args.tin : spreads.T();
  const mrp::LagMoments lm =
      mrp::estimate_moments(spreads.values.topRows(train_len), args.p);

  mrp::MrpConfig mcfg;
  mcfg.p = args.p;
  mcfg.psi_mode = parse_psi(args.psi);
  std::optional<double> nu;
  if (args.nu > 0.0) nu = args.nu;

  const mrp::DesignOutcome outcome = mrp::design_portfolio(lm, mcfg, nu);
  const Eigen::VectorXd w_p = mrp::asset_weights(hedge, outcome.result.w);

  std::ostringstream cfg;
  cfg << "design;p=" << args.p << ";nu=" << (nu ? std::to_string(*nu) : "auto")
      << ";psi=" << args.psi << ";tin=" << train_len << ";seed=" << args.seed;

  ordered_json doc;
  doc["version"] = std::string(mrp::kVersion);
  doc["seed"] = args.seed;
  doc["config_hash"] = mrp::config_hash_hex(cfg.str());
  doc["nu_used"] = outcome.nu_used;
  doc["nu_min"] = mrp::min_variance_level(lm);
  doc["variance_scan"] = outcome.scanned;
  doc["w"] = std::vector<double>(
      outcome.result.w.data(), outcome.result.w.data() + outcome.result.w.size());
  doc["w_p"] = std::vector<double>(w_p.data(), w_p.data() + w_p.size());
  doc["objective_trace"] = outcome.result.objective_trace;
  doc["iterations"] = outcome.result.iterations;
  doc["converged"] = outcome.result.converged;
  doc["kkt_residual"] = outcome.result.kkt_residual;
  doc["portmanteau"] = outcome.portmanteau_value;

  fs::create_directories(args.out);
  mrp::write_text_file(fs::path(args.out) / "design.json", doc.dump(2) + "\n");
  std::cout << "wrote design.json (portmanteau = "
            << outcome.portmanteau_value << ", nu = " << outcome.nu_used
            << ")\n";

  if (!outcome.result.converged) {
    std::cerr << "warning: solver did not meet the convergence tests within "
              << outcome.result.iterations << " iterations\n";
    return static_cast<int>(mrp::Errc::non_convergence);
  }
  return 0;
}

struct BacktestArgs {
  std::string prices_file;
  std::string hedge_file;
  std::string design_file;
  std::string scale = "log";
  Eigen::Index tin = 264;
  Eigen::Index tout = 132;
  int windows = 2;
  std::uint64_t seed = 0;
  std::string out = ".";
};

int cmd_backtest(BacktestArgs& args) {
  const mrp::LogPriceMatrix prices =
      mrp::load_csv(args.prices_file, parse_scale(args.scale));

  std::ifstream din(args.design_file);
  if (!din) {
    throw mrp::Error(mrp::Errc::data,
                     "cannot open design file '" + args.design_file + "'");
  }
  ordered_json ddoc;
  try {
    ddoc = ordered_json::parse(din);
  } catch (const std::exception& e) {
    throw mrp::Error(mrp::Errc::data, std::string("design file: ") + e.what());
  }
  if (!ddoc.contains("w") || !ddoc["w"].is_array()) {
    throw mrp::Error(mrp::Errc::data, "design file needs a 'w' array");
  }
  Eigen::VectorXd w(static_cast<Eigen::Index>(ddoc["w"].size()));
  for (std::size_t i = 0; i < ddoc["w"].size(); ++i) {
    w(static_cast<Eigen::Index>(i)) = ddoc["w"][i].get<double>();
  }

  const Eigen::MatrixXd hedge = load_hedge_json(args.hedge_file);
  const mrp::SpreadPanel spreads = mrp::make_spreads(prices, hedge);
  if (w.size() != spreads.N()) {
    throw mrp::Error(mrp::Errc::data,
                     "designed weights and hedge dimensions disagree");
  }
  const auto windows =
      mrp::rolling_windows(prices.T(), args.tin, args.tout, args.windows);
  const Eigen::VectorXd w_p = mrp::asset_weights(hedge, w);
  const double gross = w_p.lpNorm<1>();
  const Eigen::VectorXd z_full = spreads.values * w;

  std::ostringstream cfg;
  cfg << "backtest;tin=" << args.tin << ";tout=" << args.tout
      << ";windows=" << args.windows << ";seed=" << args.seed;

  ordered_json doc;
  doc["version"] = std::string(mrp::kVersion);
  doc["seed"] = args.seed;
  doc["config_hash"] = mrp::config_hash_hex(cfg.str());
  doc["strategy"] = "mrp";
  doc["windows"] = ordered_json::array();

  for (std::size_t j = 0; j < windows.size(); ++j) {
    const auto& win = windows[j];
    std::vector<double> z_train(
        z_full.data() + win.train_begin, z_full.data() + win.train_end);
    std::vector<double> z_trade(
        z_full.data() + win.trade_begin, z_full.data() + win.trade_end);
    const mrp::TradingRule rule = mrp::calibrate_rule(z_train);
    mrp::PositionSeries pos = mrp::simulate_positions(z_trade, rule);
    if (!pos.positions.empty() && pos.positions.back() != 0) {
      pos.positions.back() = 0;
      pos.exits.push_back(
          static_cast<Eigen::Index>(pos.positions.size()) - 1);
    }
    const mrp::BacktestReport report =
        mrp::evaluate(z_trade, pos, gross, static_cast<int>(j));

    ordered_json jw;
    jw["window"] = j;
    jw["mu"] = rule.mu;
    jw["delta"] = rule.delta;
    jw["trades"] = pos.entries.size();
    jw["cum_pnl"] = report.cum_pnl.empty() ? 0.0 : report.cum_pnl.back();
    if (report.sharpe.has_value()) {
      jw["sharpe"] = *report.sharpe;
    } else {
      jw["sharpe"] = nullptr;
    }
    jw["positions"] = pos.positions;
    jw["pnl"] = report.pnl;
    jw["roi"] = report.roi;
    doc["windows"].push_back(jw);
  }

  fs::create_directories(args.out);
  mrp::write_text_file(fs::path(args.out) / "backtest.json",
                       doc.dump(2) + "\n");
  std::cout << "wrote backtest.json (" << windows.size() << " windows)\n";
  return 0;
}

struct ExperimentArgs {
  std::string config_file;
  std::string prices_file;
  std::string hedge_file;
  std::string scale = "log";
  Eigen::Index assets = 6, rank = 5, T = 528;
  int p = 3;
  double nu = 0.0;
  std::string psi = "spectral";
  Eigen::Index tin = 264, tout = 132;
  int windows = 2;
  std::uint64_t seed = 0;
  bool parallel_windows = false;
  bool no_singles = false;
  std::string out = ".";
};

int cmd_experiment(ExperimentArgs& args) {
  mrp::ExperimentConfig cfg;
  cfg.spec.M = args.assets;
  cfg.spec.r = args.rank;
  cfg.spec.T = args.T;
  cfg.prices_csv = args.prices_file;
  cfg.hedge_json = args.hedge_file;
  cfg.scale = parse_scale(args.scale);
  cfg.mrp.p = args.p;
  cfg.mrp.psi_mode = parse_psi(args.psi);
  if (args.nu > 0.0) cfg.nu = args.nu;
  cfg.T_in = args.tin;
  cfg.T_out = args.tout;
  cfg.window_count = args.windows;
  cfg.parallel_windows = args.parallel_windows;
  cfg.include_singles = !args.no_singles;
  cfg.seed = args.seed;
  cfg.out_dir = args.out;

  const mrp::ExperimentResult res = mrp::run_experiment(cfg);

  fs::create_directories(cfg.out_dir);
  mrp::write_text_file(cfg.out_dir / "summary.json", summary_json(cfg, res));
  mrp::write_text_file(cfg.out_dir / "reports.json", reports_json(cfg, res));
  mrp::write_text_file(cfg.out_dir / "series.csv", series_csv(res));

  std::cout << "wrote summary.json, reports.json, series.csv to "
            << cfg.out_dir.string() << "\n";
  std::cout << "designed total cumulative P&L = "
            << res.designed.total_cum_pnl << "\n";
  return 0;
}

void apply_config_file(ExperimentArgs& args, CLI::App* cmd) {
  if (args.config_file.empty()) return;
  const auto kv = read_config_file(args.config_file);
  auto use = [&](const char* flag, auto& slot) {
    const auto it = kv.find(flag);
    if (it == kv.end()) return;
    const CLI::Option* opt = cmd->get_option("--" + std::string(flag));
    if (opt != nullptr && opt->count() > 0) return;  // flag overrides file
    std::istringstream is(it->second);
    is >> slot;
    if (is.fail()) {
      throw mrp::Error(mrp::Errc::usage,
                       "config value for '" + std::string(flag) +
                           "' is malformed: " + it->second);
    }
  };
  use("prices-file", args.prices_file);
  use("hedge-file", args.hedge_file);
  use("prices", args.scale);
  use("assets", args.assets);
  use("rank", args.rank);
  use("T", args.T);
  use("p", args.p);
  use("nu", args.nu);
  use("psi", args.psi);
  use("tin", args.tin);
  use("tout", args.tout);
  use("windows", args.windows);
  use("seed", args.seed);
  use("out", args.out);
  const auto pw = kv.find("parallel-windows");
  if (pw != kv.end() &&
      cmd->get_option("--parallel-windows")->count() == 0) {
    args.parallel_windows = (pw->second == "1" || pw->second == "true");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mean-reverting portfolio design and backtesting"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(mrp::kVersion));

  GenerateArgs gen;
  CLI::App* cgen =
      app.add_subcommand("generate", "Generate a synthetic cointegrated "
                                     "log-price panel");
  cgen->add_option("--assets", gen.spec.M, "Number of assets");
  cgen->add_option("--rank", gen.spec.r, "Cointegration rank");
  cgen->add_option("--T", gen.spec.T, "Sample length");
  cgen->add_option("--seed", gen.spec.seed, "RNG seed");
  cgen->add_option("--ar", gen.ar, "Per-spread AR(1) coefficients");
  cgen->add_option("--spread-sd", gen.spread_sd,
                   "Per-spread innovation standard deviations");
  cgen->add_option("--rw-sd", gen.rw_sd,
                   "Random-walk innovation standard deviations");
  cgen->add_option("--out", gen.out, "Output directory");

  DesignArgs des;
  CLI::App* cdes = app.add_subcommand(
      "design", "Design the mean-reverting portfolio from a price panel");
  cdes->add_option("prices_csv", des.prices_file, "Price panel CSV")->required();
  cdes->add_option("hedge_json", des.hedge_file, "Hedge matrix JSON")->required();
  cdes->add_option("--prices", des.scale, "Price scale: log or raw");
  cdes->add_option("--p", des.p, "Lag order");
  cdes->add_option("--nu", des.nu,
                   "Variance level (omit for automatic scan)");
  cdes->add_option("--psi", des.psi, "Majorization bound: spectral|frobenius");
  cdes->add_option("--tin", des.tin, "Training range length (0 = all)");
  cdes->add_option("--seed", des.seed, "Seed recorded in outputs");
  cdes->add_option("--out", des.out, "Output directory");

  BacktestArgs bt;
  CLI::App* cbt = app.add_subcommand(
      "backtest", "Trade fixed designed weights over rolling windows");
  cbt->add_option("prices_csv", bt.prices_file, "Price panel CSV")->required();
  cbt->add_option("hedge_json", bt.hedge_file, "Hedge matrix JSON")->required();
  cbt->add_option("design_json", bt.design_file, "design.json with weights")
      ->required();
  cbt->add_option("--prices", bt.scale, "Price scale: log or raw");
  cbt->add_option("--tin", bt.tin, "In-sample window length");
  cbt->add_option("--tout", bt.tout, "Out-of-sample window length");
  cbt->add_option("--windows", bt.windows, "Window count");
  cbt->add_option("--seed", bt.seed, "Seed recorded in outputs");
  cbt->add_option("--out", bt.out, "Output directory");

  ExperimentArgs exp;
  CLI::App* cexp = app.add_subcommand(
      "experiment", "Full pipeline: data, design, rolling backtest, "
                    "comparison against single spreads");
  cexp->add_option("--config", exp.config_file, "Flat key=value config file");
  cexp->add_option("--prices-file", exp.prices_file,
                   "Price panel CSV (omit to generate synthetic data)");
  cexp->add_option("--hedge-file", exp.hedge_file,
                   "Hedge matrix JSON (with --prices-file)");
  cexp->add_option("--prices", exp.scale, "Price scale: log or raw");
  cexp->add_option("--assets", exp.assets, "Synthetic asset count");
  cexp->add_option("--rank", exp.rank, "Synthetic cointegration rank");
  cexp->add_option("--T", exp.T, "Synthetic sample length");
  cexp->add_option("--p", exp.p, "Lag order");
  cexp->add_option("--nu", exp.nu, "Variance level (omit for automatic scan)");
  cexp->add_option("--psi", exp.psi, "Majorization bound: spectral|frobenius");
  cexp->add_option("--tin", exp.tin, "In-sample window length");
  cexp->add_option("--tout", exp.tout, "Out-of-sample window length");
  cexp->add_option("--windows", exp.windows, "Window count");
  cexp->add_option("--seed", exp.seed, "RNG seed");
  cexp->add_flag("--parallel-windows", exp.parallel_windows,
                 "Evaluate windows concurrently");
  cexp->add_flag("--no-singles", exp.no_singles,
                 "Skip the single-spread baselines");
  cexp->add_option("--out", exp.out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help, --version
    app.exit(e);
    return static_cast<int>(mrp::Errc::usage);
  }

  try {
    if (cgen->parsed()) return cmd_generate(gen);
    if (cdes->parsed()) return cmd_design(des);
    if (cbt->parsed()) return cmd_backtest(bt);
    if (cexp->parsed()) {
      apply_config_file(exp, cexp);
      return cmd_experiment(exp);
    }
  } catch (const mrp::Error& e) {
    return fail(e);
  } catch (const std::exception& e) {
    return fail(mrp::Error(mrp::Errc::data, e.what()));
  }
  return static_cast<int>(mrp::Errc::usage);
}
