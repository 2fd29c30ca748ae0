#include "sunet/cli.hpp"

#include "sunet/experiments.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

namespace sunet {

namespace {

namespace fs = std::filesystem;

// JSON config: top-level keys are global flags, nested objects are
// subcommand sections, e.g. {"seed": 3, "sweep-sigma": {"trials": 50}}.
class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App*, bool, bool, std::string) const override {
    throw CLI::ConfigError("writing configs is not supported");
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& in) const override {
    Json j;
    try {
      in >> j;
    } catch (const Json::exception& e) {
      throw CLI::ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw CLI::ConfigError("config must be a JSON object");
    std::vector<CLI::ConfigItem> items;
    collect(j, {}, items);
    return items;
  }

 private:
  static std::string scalar(const Json& v, const std::string& key) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number()) return v.dump();
    throw CLI::ConfigError("config key '" + key + "' must hold a scalar or a list of scalars");
  }

  static void collect(const Json& j, const std::vector<std::string>& parents, std::vector<CLI::ConfigItem>& out) {
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (it->is_object()) {
        auto p = parents;
        p.push_back(it.key());
        collect(*it, p, out);
        continue;
      }
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = it.key();
      if (it->is_array())
        for (const auto& v : *it) item.inputs.push_back(scalar(v, it.key()));
      else
        item.inputs.push_back(scalar(*it, it.key()));
      out.push_back(std::move(item));
    }
  }
};

struct Globals {
  std::uint64_t seed = 1;
  std::string out = "out";
  std::string boundary = "periodic";
};

struct GridOpts {
  int d = 1;
  Eigen::Index n = 256;
  void add(CLI::App* app) {
    app->add_option("--d", d, "Dimension")->check(CLI::IsMember({1, 2}));
    app->add_option("--grid", n, "Grid points per axis (power of two)");
  }
  Grid make() const { return Grid(d, n); }
};

struct PriorOpts {
  double s = 1, L = 1;
  int j_max = -1;
  int m = 10;
  std::string law = "holder";
  void add(CLI::App* app) {
    app->add_option("--s", s, "Prior smoothness");
    app->add_option("--prior-L", L, "Prior scale");
    app->add_option("--j-max", j_max, "Prior depth (-1: log2(grid) - 2)");
    app->add_option("--prior-m", m, "Vanishing moments of the prior wavelet")->check(CLI::Range(1, 10));
    app->add_option("--law", law, "Prior level-variance law")->check(CLI::IsMember({"d-2s", "holder"}));
  }
  PriorParams make(const Grid& g) const {
    PriorParams p;
    p.s = s;
    p.L = L;
    p.J_max = j_max >= 0 ? j_max : std::max(0, g.levels() - 2);
    p.M = m;
    p.law = prior_law_from_string(law);
    p.validate(g);
    return p;
  }
};

struct OpOpts {
  std::string op = "identity";
  int L = 1;
  void add(CLI::App* app) {
    app->add_option("--op", op, "Forward operator")->check(CLI::IsMember({"identity", "sobolev"}));
    app->add_option("--L", L, "Order of the sobolev operator, symbol (1+|xi|^2)^-L")->check(CLI::PositiveNumber);
  }
  int level() const { return op == "identity" ? 0 : L; }
};

SmoothingOperator make_operator(int L, const Grid& g) {
  return L == 0 ? SmoothingOperator::identity(g) : SmoothingOperator::sobolev(L, g);
}

// Inverse of SmoothingOperator::describe for the kinds the CLI can build.
SmoothingOperator parse_operator(const std::string& s, const Grid& g) {
  if (s == "identity") return SmoothingOperator::identity(g);
  int L = 0;
  if (std::sscanf(s.c_str(), "sobolev(L=%d)", &L) == 1) return SmoothingOperator::sobolev(L, g);
  throw std::invalid_argument("cannot rebuild operator '" + s + "'");
}

struct TrainOpts {
  TrainConfig cfg;
  bool selected_rho = false;
  void add(CLI::App* app, int epochs, int min_epochs) {
    cfg.max_epochs = epochs;
    cfg.min_epochs = min_epochs;
    app->add_option("--eta", cfg.eta, "Initial step size");
    app->add_option("--epochs", cfg.max_epochs, "Maximum epochs");
    app->add_option("--min-epochs", cfg.min_epochs, "Epochs before the slack test applies");
    app->add_option("--batch", cfg.batch_size, "Minibatch size (0: full batch)");
    app->add_option("--rho", cfg.rho, "Per-sample slack against the preset's empirical risk");
    app->add_flag("--selected-rho", selected_rho, "Use the selected rho as the slack instead");
    app->add_option("--halving", cfg.halving, "Step-halving factor");
    app->add_option("--jitter", cfg.jitter, "Threshold jitter before differentiation");
  }
  TrainConfig make(double selected) const {
    TrainConfig c = cfg;
    if (selected_rho) c.rho = selected;
    return c;
  }
};

struct SelectOpts {
  int J = 0, J_cap = 0, M_cap = 10;
  std::string rule;
  void add(CLI::App* app, bool with_rule) {
    app->add_option("--j", J, "Depth override (0: selected)");
    app->add_option("--j-cap", J_cap, "Upper bound on the selected depth (0: none)");
    app->add_option("--m-cap", M_cap, "Cap on vanishing moments")->check(CLI::Range(1, 10));
    if (with_rule)
      app->add_option("--rule", rule, "Threshold rule (default: level for identity, global otherwise)")
          ->check(CLI::IsMember({"level", "global"}));
  }
  std::optional<ThresholdRule> threshold_rule() const {
    if (rule.empty()) return std::nullopt;
    return threshold_rule_from_string(rule);
  }
};

// Effective value of every option of a subcommand, for the run record.
Json option_values(const CLI::App* app) {
  Json j = Json::object();
  for (const CLI::Option* o : app->get_options()) {
    if (o->get_lnames().empty()) continue;
    const std::string& name = o->get_lnames().front();
    if (name == "help" || name == "out" || name == "config") continue;
    if (o->count() > 0) {
      const auto& r = o->results();
      j[name] = r.size() == 1 ? Json(r.front()) : Json(r);
    } else {
      j[name] = o->get_default_str();
    }
  }
  return j;
}

class Run {
 public:
  Run(std::string command, const Globals& g, const CLI::App* sub) : command_(std::move(command)), dir_(g.out) {
    record_["command"] = command_;
    record_["seed"] = g.seed;
    record_["boundary"] = g.boundary;
    record_["options"] = option_values(sub);
    fs::create_directories(dir_);
  }

  std::string path(const std::string& name) const { return (fs::path(dir_) / name).string(); }

  void json(const std::string& name, const Json& j) {
    write_json(path(name), j);
    outputs_.push_back(name);
  }
  void text(const std::string& name, const std::string& s) {
    write_text(path(name), s);
    outputs_.push_back(name);
  }
  void params(const SelectedParams& p) {
    record_["selected_params"].push_back(to_json(p));
    for (const auto& d : p.deviations) deviation(d);
  }
  void deviation(const std::string& d) {
    if (std::find(deviations_.begin(), deviations_.end(), d) == deviations_.end()) deviations_.push_back(d);
  }
  void set(const std::string& key, Json v) { record_[key] = std::move(v); }

  void finish(int status) {
    record_["deviations"] = deviations_;
    record_["outputs"] = outputs_;
    record_["exit_status"] = status;
    write_json(path("run.json"), record_);
  }

 private:
  std::string command_, dir_;
  Json record_;
  std::vector<std::string> outputs_, deviations_;
};

std::string join(const std::vector<std::string>& v, const char* sep) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? sep : "") + v[i];
  return s;
}

std::vector<double> default_sigmas() {
  std::vector<double> s;
  for (int k = 2; k <= 8; ++k) s.push_back(std::ldexp(1.0, -k));
  return s;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Simplified U-net estimators for linear inverse problems", "sunet"};
  app.config_formatter(std::make_shared<JsonConfig>());
  app.set_config("--config", "", "JSON file of option values (command-line flags win)");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  Globals g;
  app.add_option("--seed", g.seed, "Master seed");
  app.add_option("--out", g.out, "Output directory");
  app.add_option("--boundary", g.boundary, "Convolution boundary handling")
      ->check(CLI::IsMember({"paper", "periodic"}));

  std::map<std::string, std::function<int()>> handlers;

  // params -----------------------------------------------------------------
  auto* params = app.add_subcommand("params", "Parameter selection for given s, beta, sigma, N");
  struct {
    double s = 1, beta = 0, sigma = 0, N = 0, a1 = 1;
    int d = 1;
    SelectOpts sel;
  } po;
  params->add_option("--s", po.s, "Smoothness");
  params->add_option("--beta", po.beta, "Operator smoothing degree");
  params->add_option("--d", po.d, "Dimension")->check(CLI::IsMember({1, 2}));
  params->add_option("--sigma", po.sigma, "Noise level")->required();
  params->add_option("--n", po.N, "Training-set size N")->required();
  params->add_option("--a1", po.a1, "Lower symbol constant of the operator");
  po.sel.add(params, false);
  handlers["params"] = [&] {
    Run run("params", g, params);
    const auto p = select_parameters(po.s, po.beta, po.sigma, po.N, po.d, po.a1, po.sel.M_cap, po.sel.J, po.sel.J_cap);
    run.params(p);
    run.json("params.json", to_json(p));
    run.finish(kExitOk);
    out << to_json(p).dump(2) << "\n";
    return kExitOk;
  };

  // gen-data ---------------------------------------------------------------
  auto* gen = app.add_subcommand("gen-data", "Draw a training set");
  struct {
    GridOpts grid;
    PriorOpts prior;
    OpOpts op;
    int N = 64;
    double sigma = 0.25;
  } go;
  go.grid.add(gen);
  go.prior.add(gen);
  go.op.add(gen);
  gen->add_option("--n", go.N, "Number of pairs")->check(CLI::PositiveNumber);
  gen->add_option("--sigma", go.sigma, "Noise level");
  handlers["gen-data"] = [&] {
    Run run("gen-data", g, gen);
    const Grid grid = go.grid.make();
    const auto op = make_operator(go.op.level(), grid);
    const auto prior = go.prior.make(grid);
    const auto ts = make_training_set(op, prior, go.N, go.sigma, grid, CounterRng(g.seed), g.seed);
    run.json("data.json", training_set_to_json(ts));
    run.finish(kExitOk);
    out << "wrote " << ts.size() << " pairs (" << ts.op << ", sigma " << format_double(go.sigma) << ") to "
        << run.path("data.json") << "\n";
    return kExitOk;
  };

  // train ------------------------------------------------------------------
  auto* train = app.add_subcommand("train", "Projected-gradient training from a preset or random init");
  struct {
    std::string data, init = "preset";
    double s = 1;
    SelectOpts sel;
    TrainOpts tr;
  } to;
  train->add_option("--data", to.data, "Training set written by gen-data")->required();
  train->add_option("--init", to.init, "Initial net")->check(CLI::IsMember({"preset", "random"}));
  train->add_option("--s", to.s, "Smoothness used for parameter selection");
  to.sel.add(train, true);
  to.tr.add(train, 100, 20);
  handlers["train"] = [&] {
    Run run("train", g, train);
    const auto data = training_set_from_json(read_json(to.data));
    const auto op = parse_operator(data.op, data.grid);
    auto sel = select_parameters(to.s, op.beta, data.sigma, static_cast<double>(data.size()), data.grid.dim, op.a1,
                                 to.sel.M_cap, to.sel.J, to.sel.J_cap);
    const auto ref = make_reference(op, sel, data.sigma, data.grid, boundary_from_string(g.boundary),
                                    to.sel.threshold_rule());
    for (const auto& n : ref.notes) sel.deviations.push_back(n);
    run.params(sel);

    SUNet init = ref.net;
    if (to.init == "random") {
      RandomNetSpec spec;
      spec.J = sel.J;
      spec.dim = data.grid.dim;
      spec.M = sel.M;
      spec.taps = 2 * sel.M;
      spec.kappa_tau = ref.params.kappa_tau;
      spec.psi_noise = 0;
      spec.boundary = boundary_from_string(g.boundary);
      CounterRng rng = CounterRng(g.seed).derive(1);
      init = project_constraints(random_feasible_net(spec, data.grid, rng), ref.params);
    }
    TrainConfig cfg = to.tr.make(sel.rho);
    cfg.seed = CounterRng(g.seed).derive(2).key();
    cfg.reference_risk = empirical_risk(ref.net, data);
    const auto res = train_erm(init, data, ref.params, cfg);

    run.json("net.json", net_to_json(res.net, ref.params));
    run.text("history.csv", res.history.to_csv());
    Json summary{{"pairs", data.size()},
                 {"init", to.init},
                 {"initial_risk", res.history.initial_risk},
                 {"best_risk", res.history.best_risk},
                 {"best_epoch", res.history.best_epoch},
                 {"reference_risk", cfg.reference_risk},
                 {"rho", cfg.rho},
                 {"selected_rho", sel.rho},
                 {"within_selected_rho", (res.history.best_risk - cfg.reference_risk) / double(data.size()) <= sel.rho},
                 {"threshold_rule", to_string(ref.rule)},
                 {"stop_reason", res.history.stop_reason}};
    run.json("train.json", summary);
    run.finish(kExitOk);
    out << "best empirical risk " << format_double(res.history.best_risk) << " (preset "
        << format_double(cfg.reference_risk) << ", init " << format_double(res.history.initial_risk) << "), "
        << res.history.stop_reason << "\n";
    return kExitOk;
  };

  // eval -------------------------------------------------------------------
  auto* eval = app.add_subcommand("eval", "Monte Carlo test risk of a saved net");
  struct {
    std::string net;
    PriorOpts prior;
    OpOpts op;
    double sigma = 0.25;
    int trials = 100;
  } eo;
  eval->add_option("--net", eo.net, "Net written by train")->required();
  eo.prior.add(eval);
  eo.op.add(eval);
  eval->add_option("--sigma", eo.sigma, "Noise level");
  eval->add_option("--trials", eo.trials, "Monte Carlo trials")->check(CLI::Range(2, 1 << 30));
  handlers["eval"] = [&] {
    Run run("eval", g, eval);
    const SUNet net = net_from_json(read_json(eo.net));
    const auto op = make_operator(eo.op.level(), net.grid);
    const auto r = test_risk(net, op, eo.prior.make(net.grid), eo.sigma, eo.trials, CounterRng(g.seed));
    run.json("eval.json", Json{{"operator", op.describe()},
                               {"sigma", eo.sigma},
                               {"mean", r.mean},
                               {"std_error", r.std_error},
                               {"trials", r.trials}});
    run.finish(kExitOk);
    out << "test risk " << format_double(r.mean) << " +- " << format_double(r.std_error) << " (" << r.trials
        << " trials)\n";
    return kExitOk;
  };

  // sweeps -----------------------------------------------------------------
  struct SweepOpts {
    GridOpts grid;
    PriorOpts prior;
    OpOpts op;
    SelectOpts sel;
    TrainOpts tr;
    int trials = 100;
    std::vector<double> slope_range;
  };
  auto add_sweep = [](CLI::App* app, SweepOpts& o, Eigen::Index grid_n) {
    o.grid.n = grid_n;
    o.grid.add(app);
    o.prior.add(app);
    o.op.add(app);
    o.sel.add(app, true);
    o.tr.add(app, 60, 30);
    app->add_option("--trials", o.trials, "Test trials per point")->check(CLI::Range(2, 1 << 30));
    app->add_option("--slope-range", o.slope_range, "Fail unless the fitted slope lies in [lo, hi]")
        ->expected(2);
  };
  auto sweep_config = [&g](const SweepOpts& o) {
    SweepConfig c;
    c.d = o.grid.d;
    c.grid_n = o.grid.n;
    c.op_L = o.op.level();
    c.prior = o.prior.make(o.grid.make());
    c.trials = o.trials;
    c.J_override = o.sel.J;
    c.J_cap = o.sel.J_cap;
    c.M_cap = o.sel.M_cap;
    c.rule = o.sel.threshold_rule();
    c.train = o.tr.cfg;
    c.prescribed_rho = o.tr.selected_rho;
    c.boundary = boundary_from_string(g.boundary);
    c.seed = g.seed;
    return c;
  };
  // Sweep JSON plus the list of failed checks.
  auto judge_sweep = [](Run& run, const SweepResult& r, const SweepOpts& o) {
    for (const auto& p : r.points) run.params(p.params);
    Json j = r.to_json();
    std::vector<std::string> failures;
    if (!r.monotonicity_violations.empty()) failures.push_back("monotonicity: " + join(r.monotonicity_violations, "; "));
    if (o.slope_range.size() == 2) {
      j["slope_range"] = o.slope_range;
      if (!(r.slope && *r.slope >= o.slope_range[0] && *r.slope <= o.slope_range[1]))
        failures.push_back("slope outside [" + format_double(o.slope_range[0]) + ", " +
                           format_double(o.slope_range[1]) + "]");
    }
    return std::make_pair(std::move(j), std::move(failures));
  };

  auto* ssig = app.add_subcommand("sweep-sigma", "Risk against noise level");
  SweepOpts so;
  std::vector<double> sigmas = default_sigmas();
  double sel_N = 1e12;
  int train_N = 64;
  std::string estimator = "preset";
  add_sweep(ssig, so, 2048);
  ssig->add_option("--sigmas", sigmas, "Noise levels");
  ssig->add_option("--n", sel_N, "Training-set size N used in parameter selection");
  ssig->add_option("--train-n", train_N, "Pairs for the trained estimator")->check(CLI::PositiveNumber);
  ssig->add_option("--estimator", estimator, "Estimator")->check(CLI::IsMember({"preset", "trained"}));
  handlers["sweep-sigma"] = [&] {
    Run run("sweep-sigma", g, ssig);
    SweepConfig c = sweep_config(so);
    c.sigmas = sigmas;
    c.N = sel_N;
    c.train_N = train_N;
    c.estimator = estimator;
    const auto r = rate_sweep_sigma(c);
    auto [j, failures] = judge_sweep(run, r, so);
    j["failures"] = failures;
    run.text("sweep_sigma.csv", r.to_csv());
    run.json("sweep_sigma.json", j);
    const int status = failures.empty() ? kExitOk : kExitFailure;
    run.finish(status);
    out << r.to_csv() << "slope " << format_double(*r.slope) << " (95% CI " << format_double(*r.slope_lo) << " .. "
        << format_double(*r.slope_hi) << "), theory " << format_double(r.theory) << "\n";
    for (const auto& f : failures) err << "FAIL " << f << "\n";
    return status;
  };

  auto* sn = app.add_subcommand("sweep-n", "Trained-estimator risk against training-set size");
  SweepOpts no;
  std::vector<int> Ns{8, 32, 128};
  double n_sigma = 0.25, preset_ratio = 1.2;
  add_sweep(sn, no, 256);
  sn->add_option("--ns", Ns, "Training-set sizes");
  sn->add_option("--sigma", n_sigma, "Noise level");
  sn->add_option("--preset-ratio", preset_ratio, "Fail if risk at the largest N exceeds this multiple of the preset's");
  handlers["sweep-n"] = [&] {
    Run run("sweep-n", g, sn);
    SweepConfig c = sweep_config(no);
    c.Ns = Ns;
    c.sigma = n_sigma;
    c.estimator = "trained";
    const auto r = rate_sweep_N(c);
    auto [j, failures] = judge_sweep(run, r, no);
    const auto largest = std::max_element(r.points.begin(), r.points.end(),
                                          [](const SweepPoint& a, const SweepPoint& b) { return a.x < b.x; });
    const double ratio = largest->risk.mean / largest->preset_risk->mean;
    j["largest_N_risk_over_preset"] = ratio;
    if (!(ratio <= preset_ratio))
      failures.push_back("risk at N = " + format_double(largest->x) + " is " + format_double(ratio) +
                         " x the preset's (limit " + format_double(preset_ratio) + ")");
    j["failures"] = failures;
    run.text("sweep_n.csv", r.to_csv());
    run.json("sweep_n.json", j);
    const int status = failures.empty() ? kExitOk : kExitFailure;
    run.finish(status);
    out << r.to_csv();
    if (r.slope) out << "slope " << format_double(*r.slope) << " (reference " << format_double(r.theory) << ")\n";
    out << "largest-N risk / preset risk " << format_double(ratio) << "\n";
    for (const auto& f : failures) err << "FAIL " << f << "\n";
    return status;
  };

  // stability --------------------------------------------------------------
  auto* stab = app.add_subcommand("stability", "Randomized checks of the size, perturbation, distance and risk bounds");
  StabilityConfig sc;
  std::string replay;
  stab->add_option("--size-trials", sc.size_trials, "Size-bound trials")->check(CLI::NonNegativeNumber);
  stab->add_option("--perturbation-trials", sc.perturbation_trials, "Perturbation-bound trials")
      ->check(CLI::NonNegativeNumber);
  stab->add_option("--distance-trials", sc.distance_trials, "Net-distance trials")->check(CLI::NonNegativeNumber);
  stab->add_option("--risk-trials", sc.risk_trials, "Risk-bound instances")->check(CLI::NonNegativeNumber);
  stab->add_option("--risk-draws", sc.risk_draws, "Noise draws per risk instance")->check(CLI::Range(2, 1 << 30));
  stab->add_option("--replay", replay, "Re-evaluate a serialized instance instead of running the suite");
  handlers["stability"] = [&] {
    Run run("stability", g, stab);
    if (!replay.empty()) {
      const auto inst = instance_from_json(read_json(replay));
      const auto c = evaluate(inst);
      run.json("replay.json", Json{{"family", inst.family},
                                   {"trial", inst.trial},
                                   {"check", c.name},
                                   {"lhs", c.lhs},
                                   {"rhs", c.rhs},
                                   {"pass", c.pass}});
      const int status = c.pass ? kExitOk : kExitFailure;
      run.finish(status);
      out << inst.family << " trial " << inst.trial << ": " << c.name << " lhs " << format_double(c.lhs) << " rhs "
          << format_double(c.rhs) << (c.pass ? " PASS" : " FAIL") << "\n";
      return status;
    }
    sc.boundary = boundary_from_string(g.boundary);
    sc.seed = g.seed;
    const auto rep = stability_suite(sc);
    for (const auto& f : rep.families)
      if (f.failure) {
        fs::create_directories(run.path("failures"));
        run.json("failures/" + f.name + ".json", *f.failure);
      }
    run.json("stability.json", rep.to_json());
    run.text("stability.txt", rep.table());
    const int status = rep.pass() ? kExitOk : kExitFailure;
    run.finish(status);
    out << rep.table();
    return status;
  };

  // oracle-check -----------------------------------------------------------
  auto* oracle = app.add_subcommand("oracle-check", "Transform roundtrip and preset/oracle equivalence");
  int cases = 100;
  oracle->add_option("--cases", cases, "Random instances per check")->check(CLI::NonNegativeNumber);
  handlers["oracle-check"] = [&] {
    Run run("oracle-check", g, oracle);
    const auto rep = oracle_check(g.seed, cases);
    run.json("oracle_check.json", rep.to_json());
    const int status = rep.pass() ? kExitOk : kExitFailure;
    run.finish(status);
    out << "roundtrip max rel error " << format_double(rep.roundtrip_max_rel) << ", preset/oracle max rel error "
        << format_double(rep.equivalence_max_rel) << (rep.pass() ? " PASS" : " FAIL") << "\n";
    return status;
  };

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    return handlers.at(name)();
  } catch (const experiment_failure& e) {
    err << "experiment failed: " << e.what() << "\n";
    return kExitFailure;
  } catch (const numerical_failure& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitFailure;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace sunet
