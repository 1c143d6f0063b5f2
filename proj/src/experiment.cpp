#include "mrp/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "mrp/errors.hpp"
#include "mrp/version.hpp"

namespace mrp {

namespace {

using ordered_json = nlohmann::ordered_json;

std::vector<double> to_std(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

ordered_json json_or_null(const std::optional<double>& v) {
  if (v.has_value()) return *v;
  return nullptr;
}

Eigen::MatrixXd hedge_from_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(Errc::data, "cannot open hedge file '" + path.string() + "'");
  }
  ordered_json doc;
  try {
    doc = ordered_json::parse(in);
  } catch (const std::exception& e) {
    throw Error(Errc::data,
                "hedge file '" + path.string() + "': " + e.what());
  }
  const char* key = doc.contains("hedge") ? "hedge"
                    : doc.contains("beta") ? "beta"
                                           : nullptr;
  if (key == nullptr || !doc[key].is_array() || doc[key].empty()) {
    throw Error(Errc::data, "hedge file needs a non-empty 'hedge' or 'beta' "
                            "array of rows");
  }
  const auto& rows = doc[key];
  const std::size_t cols = rows[0].size();
  Eigen::MatrixXd hedge(static_cast<Eigen::Index>(rows.size()),
                        static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != cols) {
      throw Error(Errc::data, "hedge rows have inconsistent lengths");
    }
    for (std::size_t j = 0; j < cols; ++j) {
      if (!rows[i][j].is_number()) {
        throw Error(Errc::data, "hedge entries must be numeric");
      }
      hedge(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          rows[i][j].get<double>();
    }
  }
  return hedge;
}

std::vector<double> segment(const Eigen::MatrixXd& S, const Eigen::VectorXd& w,
                            Eigen::Index begin, Eigen::Index end) {
  const Eigen::VectorXd z = S.middleRows(begin, end - begin) * w;
  return to_std(z);
}

void force_flat_at_end(PositionSeries& pos) {
  if (pos.positions.empty() || pos.positions.back() == 0) return;
  pos.positions.back() = 0;
  pos.exits.push_back(static_cast<Eigen::Index>(pos.positions.size()) - 1);
}

WindowOutcome trade_window(const std::vector<double>& z_train,
                           const std::vector<double>& z_trade,
                           double gross_exposure, int window_id) {
  WindowOutcome out;
  out.window_id = window_id;
  out.rule = calibrate_rule(z_train);
  out.positions = simulate_positions(z_trade, out.rule);
  force_flat_at_end(out.positions);
  out.report = evaluate(z_trade, out.positions, gross_exposure, window_id);
  out.trades = static_cast<int>(out.positions.entries.size());
  return out;
}

// Everything computed for one rolling window; filled independently per
// window so the window loop can run in parallel with deterministic output.
struct WindowSlot {
  WindowOutcome designed;
  DesignedWindow designed_info;
  std::vector<WindowOutcome> singles;
};

}  // namespace

std::vector<double> variance_scan_grid(const LagMoments& lm) {
  const double nu_min = min_variance_level(lm);
  const Eigen::VectorXd diag = lm.M0().diagonal();
  const double nu_eq =
      Eigen::VectorXd::Constant(lm.N(), 1.0 / static_cast<double>(lm.N()))
          .dot(lm.M0() *
               Eigen::VectorXd::Constant(lm.N(),
                                         1.0 / static_cast<double>(lm.N())));
  const double lo = nu_min * 1.02;
  const double hi = std::max(nu_eq, diag.maxCoeff()) * 20.0;

  std::vector<double> grid;
  const int n_log = 15;
  for (int i = 0; i < n_log; ++i) {
    const double f = static_cast<double>(i) / (n_log - 1);
    grid.push_back(lo * std::pow(hi / lo, f));
  }
  for (Eigen::Index n = 0; n < diag.size(); ++n) {
    if (diag(n) > nu_min * 1.001) grid.push_back(diag(n));
  }
  std::sort(grid.begin(), grid.end());
  return grid;
}

DesignOutcome design_portfolio(const LagMoments& lm, const MrpConfig& base,
                               std::optional<double> nu_override) {
  DesignOutcome out;
  MrpConfig cfg = base;
  if (nu_override.has_value() && *nu_override > 0.0) {
    cfg.nu = *nu_override;
    out.result = solve_mrp(lm, cfg);
    out.nu_used = cfg.nu;
    out.portmanteau_value = portmanteau(out.result.w, lm);
    return out;
  }

  out.scanned = true;
  bool have = false;
  for (const double nu : variance_scan_grid(lm)) {
    cfg.nu = nu;
    MrpResult res = solve_mrp(lm, cfg);
    const double por = portmanteau(res.w, lm);
    if (!have || por < out.portmanteau_value) {
      out.result = std::move(res);
      out.nu_used = nu;
      out.portmanteau_value = por;
      have = true;
    }
  }
  if (!have) {
    throw Error(Errc::non_convergence, "variance scan produced no solution");
  }
  return out;
}

std::optional<double> combined_sharpe(const std::vector<WindowOutcome>& ws) {
  std::vector<double> roi;
  for (const auto& w : ws) {
    for (std::size_t t = 1; t < w.report.roi.size(); ++t) {
      roi.push_back(w.report.roi[t]);
    }
  }
  if (roi.size() < 2) return std::nullopt;
  double mean = 0.0;
  for (double r : roi) mean += r;
  mean /= static_cast<double>(roi.size());
  double ss = 0.0;
  for (double r : roi) ss += (r - mean) * (r - mean);
  const double sd = std::sqrt(ss / static_cast<double>(roi.size() - 1));
  if (!(sd > 0.0)) return std::nullopt;
  return mean / sd;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  ExperimentResult res;

  if (cfg.prices_csv.empty()) {
    CointSpec spec = cfg.spec;
    spec.seed = cfg.seed;
    spec.fill_defaults();
    const SyntheticMarket market = generate_market(spec);
    res.prices = market.prices;
    res.spreads = build_spreads(market, SpreadMode::true_beta);
  } else {
    res.prices = load_csv(cfg.prices_csv, cfg.scale);
    res.spreads = make_spreads(res.prices, hedge_from_json(cfg.hedge_json));
  }

  res.windows =
      rolling_windows(res.prices.T(), cfg.T_in, cfg.T_out, cfg.window_count);
  const Eigen::MatrixXd& S = res.spreads.values;
  const Eigen::Index n_spreads = res.spreads.N();
  const int n_windows = static_cast<int>(res.windows.size());

  std::vector<WindowSlot> slots(static_cast<std::size_t>(n_windows));
  std::exception_ptr failure = nullptr;

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1) if (cfg.parallel_windows)
#endif
  for (int j = 0; j < n_windows; ++j) {
    try {
      const Window& win = res.windows[static_cast<std::size_t>(j)];
      WindowSlot& slot = slots[static_cast<std::size_t>(j)];

      const Eigen::MatrixXd train =
          S.middleRows(win.train_begin, win.train_end - win.train_begin);
      const LagMoments lm = estimate_moments(train, cfg.mrp.p);
      const DesignOutcome design = design_portfolio(lm, cfg.mrp, cfg.nu);

      const Eigen::VectorXd& w = design.result.w;
      const Eigen::VectorXd w_p = asset_weights(res.spreads.hedge, w);
      slot.designed = trade_window(
          segment(S, w, win.train_begin, win.train_end),
          segment(S, w, win.trade_begin, win.trade_end),
          w_p.lpNorm<1>(), j);
      slot.designed_info.w = w;
      slot.designed_info.w_p = w_p;
      slot.designed_info.nu_used = design.nu_used;
      slot.designed_info.portmanteau_value = design.portmanteau_value;
      slot.designed_info.kkt_residual = design.result.kkt_residual;
      slot.designed_info.iterations = design.result.iterations;
      slot.designed_info.converged = design.result.converged;

      if (cfg.include_singles) {
        slot.singles.reserve(static_cast<std::size_t>(n_spreads));
        for (Eigen::Index n = 0; n < n_spreads; ++n) {
          const Eigen::VectorXd e = Eigen::VectorXd::Unit(n_spreads, n);
          slot.singles.push_back(trade_window(
              segment(S, e, win.train_begin, win.train_end),
              segment(S, e, win.trade_begin, win.trade_end),
              res.spreads.hedge.row(n).lpNorm<1>(), j));
        }
      }
    } catch (...) {
#ifdef _OPENMP
#pragma omp critical
#endif
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  res.designed.name = "mrp";
  for (int j = 0; j < n_windows; ++j) {
    res.designed.windows.push_back(slots[static_cast<std::size_t>(j)].designed);
    res.designed_windows.push_back(
        slots[static_cast<std::size_t>(j)].designed_info);
  }
  if (cfg.include_singles) {
    for (Eigen::Index n = 0; n < n_spreads; ++n) {
      StrategyOutcome s;
      s.name = "spread" + std::to_string(n + 1);
      for (int j = 0; j < n_windows; ++j) {
        s.windows.push_back(
            slots[static_cast<std::size_t>(j)].singles[static_cast<std::size_t>(n)]);
      }
      res.singles.push_back(std::move(s));
    }
  }

  auto finalize = [](StrategyOutcome& s) {
    s.total_cum_pnl = 0.0;
    for (const auto& w : s.windows) {
      if (!w.report.cum_pnl.empty()) s.total_cum_pnl += w.report.cum_pnl.back();
    }
    s.combined_sharpe = combined_sharpe(s.windows);
  };
  finalize(res.designed);
  for (auto& s : res.singles) finalize(s);
  return res;
}

std::string canonical_config(const ExperimentConfig& cfg) {
  std::ostringstream os;
  os.precision(17);
  os << "source=" << (cfg.prices_csv.empty() ? "synthetic" : "csv");
  os << ";assets=" << cfg.spec.M << ";rank=" << cfg.spec.r
     << ";T=" << cfg.spec.T;
  os << ";seed=" << cfg.seed << ";p=" << cfg.mrp.p;
  os << ";nu=";
  if (cfg.nu.has_value()) {
    os << *cfg.nu;
  } else {
    os << "auto";
  }
  os << ";psi="
     << (cfg.mrp.psi_mode == PsiMode::spectral ? "spectral" : "frobenius");
  os << ";tin=" << cfg.T_in << ";tout=" << cfg.T_out
     << ";windows=" << cfg.window_count;
  os << ";scale="
     << (cfg.scale == PriceScale::log_prices ? "log" : "raw");
  os << ";singles=" << (cfg.include_singles ? 1 : 0);
  return os.str();
}

namespace {

ordered_json metadata(const ExperimentConfig& cfg) {
  ordered_json meta;
  meta["version"] = std::string(kVersion);
  meta["seed"] = cfg.seed;
  meta["config_hash"] = config_hash_hex(canonical_config(cfg));
  return meta;
}

ordered_json window_summary(const WindowOutcome& w) {
  ordered_json jw;
  jw["window"] = w.window_id;
  jw["mu"] = w.rule.mu;
  jw["delta"] = w.rule.delta;
  jw["trades"] = w.trades;
  jw["cum_pnl"] = w.report.cum_pnl.empty() ? 0.0 : w.report.cum_pnl.back();
  jw["sharpe"] = json_or_null(w.report.sharpe);
  return jw;
}

}  // namespace

std::string summary_json(const ExperimentConfig& cfg,
                         const ExperimentResult& res) {
  ordered_json doc = metadata(cfg);
  doc["windows"] = ordered_json::array();
  for (const auto& w : res.windows) {
    ordered_json jw;
    jw["train"] = {w.train_begin, w.train_end};
    jw["trade"] = {w.trade_begin, w.trade_end};
    doc["windows"].push_back(jw);
  }

  ordered_json strategies = ordered_json::array();
  auto add_strategy = [&](const StrategyOutcome& s) {
    ordered_json js;
    js["name"] = s.name;
    js["total_cum_pnl"] = s.total_cum_pnl;
    js["sharpe"] = json_or_null(s.combined_sharpe);
    js["windows"] = ordered_json::array();
    for (const auto& w : s.windows) js["windows"].push_back(window_summary(w));
    strategies.push_back(js);
  };
  add_strategy(res.designed);
  for (const auto& s : res.singles) add_strategy(s);
  doc["strategies"] = strategies;

  ordered_json designed = ordered_json::array();
  for (const auto& d : res.designed_windows) {
    ordered_json jd;
    jd["nu_used"] = d.nu_used;
    jd["portmanteau"] = d.portmanteau_value;
    jd["kkt_residual"] = d.kkt_residual;
    jd["iterations"] = d.iterations;
    jd["converged"] = d.converged;
    jd["w"] = to_std(d.w);
    jd["w_p"] = to_std(d.w_p);
    designed.push_back(jd);
  }
  doc["designed"] = designed;

  // The prior method's column from the reference comparison cannot be
  // reproduced without implementing that method; mark it rather than
  // approximating it.
  doc["benchmarks"] = {{"existing_mrp_by_portmanteau", "unavailable"}};
  return doc.dump(2) + "\n";
}

std::string reports_json(const ExperimentConfig& cfg,
                         const ExperimentResult& res) {
  ordered_json doc = metadata(cfg);
  ordered_json strategies = ordered_json::array();
  auto add = [&](const StrategyOutcome& s) {
    ordered_json js;
    js["name"] = s.name;
    js["windows"] = ordered_json::array();
    for (const auto& w : s.windows) {
      ordered_json jw = window_summary(w);
      jw["positions"] = w.positions.positions;
      jw["pnl"] = w.report.pnl;
      jw["cum_pnl"] = w.report.cum_pnl;
      jw["roi"] = w.report.roi;
      js["windows"].push_back(jw);
    }
    strategies.push_back(js);
  };
  add(res.designed);
  for (const auto& s : res.singles) add(s);
  doc["strategies"] = strategies;
  return doc.dump(2) + "\n";
}

std::string series_csv(const ExperimentResult& res) {
  std::ostringstream os;
  os.precision(17);
  os << "kind,name,window,t,value\n";
  for (Eigen::Index m = 0; m < res.prices.M(); ++m) {
    for (Eigen::Index t = 0; t < res.prices.T(); ++t) {
      os << "log_price," << res.prices.asset_names[static_cast<std::size_t>(m)]
         << ",,"  << t << "," << res.prices.values(t, m) << "\n";
    }
  }
  for (Eigen::Index n = 0; n < res.spreads.N(); ++n) {
    for (Eigen::Index t = 0; t < res.spreads.T(); ++t) {
      os << "spread,spread" << (n + 1) << ",," << t << ","
         << res.spreads.values(t, n) << "\n";
    }
  }
  for (std::size_t j = 0; j < res.designed_windows.size(); ++j) {
    const auto& d = res.designed_windows[j];
    const auto& win = res.windows[j];
    const Eigen::VectorXd z = res.spreads.values * d.w;
    for (Eigen::Index t = win.train_begin; t < win.trade_end; ++t) {
      os << "mrp_spread,mrp," << j << "," << t << "," << z(t) << "\n";
    }
    for (Eigen::Index m = 0; m < d.w_p.size(); ++m) {
      os << "asset_weight,asset" << (m + 1) << "," << j << "," << m << ","
         << d.w_p(m) << "\n";
    }
  }
  auto emit_strategy = [&](const StrategyOutcome& s) {
    for (std::size_t j = 0; j < s.windows.size(); ++j) {
      const auto& w = s.windows[j];
      const auto& win = res.windows[j];
      for (std::size_t t = 0; t < w.positions.positions.size(); ++t) {
        const Eigen::Index abs_t = win.trade_begin + static_cast<Eigen::Index>(t);
        os << "position," << s.name << "," << j << "," << abs_t << ","
           << w.positions.positions[t] << "\n";
        os << "pnl," << s.name << "," << j << "," << abs_t << ","
           << w.report.pnl[t] << "\n";
        os << "cum_pnl," << s.name << "," << j << "," << abs_t << ","
           << w.report.cum_pnl[t] << "\n";
        os << "roi," << s.name << "," << j << "," << abs_t << ","
           << w.report.roi[t] << "\n";
      }
    }
  };
  emit_strategy(res.designed);
  for (const auto& s : res.singles) emit_strategy(s);
  return os.str();
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error(Errc::data, "cannot write '" + path.string() + "'");
  }
  out << content;
  if (!out) {
    throw Error(Errc::data, "write failed for '" + path.string() + "'");
  }
}

}  // namespace mrp
