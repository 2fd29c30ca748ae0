#include "sunet/experiments.hpp"

#include "sunet/daubechies.hpp"
#include "sunet/parallel.hpp"
#include "sunet/wavelets.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace sunet {

namespace {

// Sub-stream tags under the master seed.
enum Stream : std::uint64_t { kTest = 1, kTrain = 2, kFit = 3 };
enum Family : std::uint64_t { kSize = 1, kPerturbation = 2, kDistance = 3, kRisk = 4, kSmooth = 5 };

Family family_id(const std::string& f) {
  if (f == "size") return kSize;
  if (f == "perturbation") return kPerturbation;
  if (f == "distance") return kDistance;
  if (f == "risk") return kRisk;
  if (f == "smooth") return kSmooth;
  throw std::invalid_argument("unknown bound family '" + f + "'");
}

GridFunction<double> white(const Grid& g, CounterRng& rng) {
  std::normal_distribution<double> n;
  GridFunction<double> f = g.zeros();
  for (Eigen::Index i = 0; i < f.size(); ++i) f.data()[i] = n(rng);
  return f;
}

Tensor random_tensor(int d, Eigen::Index m, CounterRng& rng) {
  std::normal_distribution<double> n;
  auto t = Tensor::zeros(d, {0, 0}, {m - 1, d == 2 ? m - 1 : 0});
  for (Eigen::Index i = 0; i < t.size(); ++i) t.values().data()[i] = n(rng);
  return t;
}

double rel_inf(const Tensor& got, const Tensor& want) {
  if (!got.same_shape(want)) return std::numeric_limits<double>::infinity();
  const double scale = std::max(want.values().abs().maxCoeff(), std::numeric_limits<double>::min());
  return (got.values() - want.values()).abs().maxCoeff() / scale;
}

// On the torus a filter acting on a level with period P only sees its taps
// folded mod P, so the stored-tap norm can understate the operator norm.
// Scale such filters down until the folded norm is <= 1 as well.
void fold_filters(SUNet& net) {
  if (net.boundary != Boundary::Periodic) return;
  for (const auto& p : parameter_groups(net)) {
    if (p.group == ParamGroup::Tau || p.group == ParamGroup::Psi) continue;
    Tensor& t = filter(net, p);
    const Eigen::Index P = Eigen::Index(2) << p.level;
    Eigen::ArrayXXd folded = Eigen::ArrayXXd::Zero(P, net.dim == 2 ? P : 1);
    for (Eigen::Index j = t.lo(1); j <= t.hi(1); ++j)
      for (Eigen::Index i = t.lo(0); i <= t.hi(0); ++i)
        folded(i - P * detail::floor_div(i, P), net.dim == 2 ? j - P * detail::floor_div(j, P) : 0) += t(i, j);
    const double n = std::sqrt(folded.square().sum());
    if (n > 1) t.values() /= n;
  }
}

Json param_ref_to_json(const ParamRef& p) {
  return Json{{"group", to_string(p.group)}, {"level", p.level}, {"channel", p.channel}};
}

ParamRef param_ref_from_json(const Json& j) {
  return {param_group_from_string(j.at("group").get<std::string>()), j.at("level").get<int>(),
          j.at("channel").get<int>()};
}

Json risk_to_json(const RiskEstimate& r) {
  return Json{{"mean", r.mean}, {"std_error", r.std_error}, {"trials", r.trials}};
}

SmoothingOperator make_op(int L, const Grid& g) {
  return L == 0 ? SmoothingOperator::identity(g) : SmoothingOperator::sobolev(L, g);
}

void require_positive_trials(int trials) {
  if (trials < 2) throw std::invalid_argument("sweep: need at least 2 trials per point");
}

void check_monotone(SweepResult& res, bool increasing_x_lowers_risk) {
  // Points are ordered so risk should not grow from one to the next.
  std::vector<std::size_t> order(res.points.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return increasing_x_lowers_risk ? res.points[a].x < res.points[b].x : res.points[a].x > res.points[b].x;
  });
  for (std::size_t k = 0; k + 1 < order.size(); ++k) {
    const auto &p = res.points[order[k]], &q = res.points[order[k + 1]];
    const double pooled = std::hypot(p.risk.std_error, q.risk.std_error);
    if (q.risk.mean > p.risk.mean + 2 * pooled)
      res.monotonicity_violations.push_back(res.axis + " " + format_double(p.x) + " -> " + format_double(q.x) +
                                            ": risk " + format_double(p.risk.mean) + " -> " +
                                            format_double(q.risk.mean) + " (2 pooled se " +
                                            format_double(2 * pooled) + ")");
  }
}

void fit_slope(SweepResult& res) {
  std::vector<double> x, y;
  for (const auto& p : res.points)
    if (std::isfinite(p.risk.mean) && p.risk.mean > 0) {
      x.push_back(std::log(p.x));
      y.push_back(std::log(p.risk.mean));
    }
  if (x.size() < 4) return;
  const LineFit f = fit_line(x, y);
  const boost::math::students_t t(static_cast<double>(x.size() - 2));
  const double q = boost::math::quantile(boost::math::complement(t, 0.025));
  res.slope = f.slope;
  res.slope_lo = f.slope - q * f.slope_se;
  res.slope_hi = f.slope + q * f.slope_se;
}

}  // namespace

// ---------------------------------------------------------------------------
// Parameter selection

NetClassParams SelectedParams::class_params() const {
  NetClassParams p;
  p.r = r;
  p.R = R;
  p.S_filter = S_filter;
  p.kappa_tau = kappa_tau;
  p.C_psi_L2 = C_psi_L2;
  p.C_psi_Hr = C_psi_Hr;
  return p;
}

SelectedParams select_parameters(double s, double beta, double sigma, double N, int d, double a1, int M_cap,
                                 int J_override, int J_cap) {
  if (!(s > 0)) throw std::invalid_argument("select_parameters: s must be > 0");
  if (!(beta >= 0)) throw std::invalid_argument("select_parameters: beta must be >= 0");
  if (!(sigma > 0)) throw std::invalid_argument("select_parameters: sigma must be > 0");
  if (!(N > 1)) throw std::invalid_argument("select_parameters: N must be > 1 (ln N enters the thresholds)");
  if (d != 1 && d != 2) throw std::invalid_argument("select_parameters: d must be 1 or 2");
  if (!(a1 > 0)) throw std::invalid_argument("select_parameters: a1 must be > 0");
  if (M_cap < 1 || M_cap > kMaxVanishingMoments) throw std::invalid_argument("select_parameters: M cap must be in 1..10");
  if (J_override < 0 || J_cap < 0) throw std::invalid_argument("select_parameters: J override/cap must be >= 0");

  SelectedParams p;
  p.s = s;
  p.beta = beta;
  p.sigma = sigma;
  p.N = N;
  p.d = d;
  p.a1 = a1;
  const double D = 2 * s + 2 * beta + d, E = 2 * s + 2 * beta + 1.5 * d;
  const double lnN = std::log(N);

  // log2 min{sigma^-2, sqrt(N)^{D/E}} without forming huge powers
  const double lg = std::min(-2 * std::log2(sigma), 0.5 * std::log2(N) * D / E);
  p.J_formula = static_cast<int>(std::ceil(lg / D));
  p.J = std::max(1, p.J_formula);
  if (p.J != p.J_formula)
    p.deviations.push_back("J raised from " + std::to_string(p.J_formula) + " to the minimum depth 1");
  if (J_override > 0 && J_override != p.J) {
    p.deviations.push_back("J set to " + std::to_string(J_override) + " by override (selection gave " +
                           std::to_string(p.J) + ")");
    p.J = J_override;
  }
  if (J_cap > 0 && p.J > J_cap) {
    p.deviations.push_back("J capped at " + std::to_string(J_cap) + " (selection gave " + std::to_string(p.J) + ")");
    p.J = J_cap;
  }

  p.r = static_cast<int>(std::ceil(std::max({s, double(p.J), d / 2.0 + 1})));
  p.R = static_cast<int>(std::ceil(p.r + beta));
  p.S_filter_prescribed = std::pow(12.0 * p.R + 1, d);
  p.M_prescribed = 1 + 6 * p.R;
  p.M = std::min(p.M_prescribed, M_cap);
  p.S_filter = static_cast<int>(std::pow(2 * p.M, d));
  if (p.M < p.M_prescribed)
    p.deviations.push_back("vanishing moments capped at " + std::to_string(p.M) + " (prescribed " +
                           std::to_string(p.M_prescribed) + "); filter support " + std::to_string(p.S_filter) +
                           " instead of " + format_double(p.S_filter_prescribed));

  p.kappa_tau = sigma * std::exp2(p.J * beta) * lnN;
  p.C_psi_L2 = std::exp2(p.J * beta) / a1;
  p.C_psi_Hr = std::exp2(p.J * (beta + p.r)) / a1;
  p.rho = std::max(std::pow(sigma, 4 * s / D), std::pow(N, -s / E) * lnN * lnN * lnN);
  p.deviations.push_back("natural logarithm used in kappa_tau and rho");

  p.gamma_threshold = E / D;
  if (sigma >= 1) {
    p.regime = "indeterminate";
  } else {
    p.gamma = -0.5 * lnN / (2 * std::log(sigma));
    p.regime = *p.gamma >= p.gamma_threshold ? "oversampled" : "undersampled";
  }
  return p;
}

Json to_json(const SelectedParams& p) {
  Json j;
  j["inputs"] = Json{{"s", p.s}, {"beta", p.beta}, {"sigma", p.sigma}, {"N", p.N}, {"d", p.d}, {"a1", p.a1}};
  j["J"] = p.J;
  j["J_formula"] = p.J_formula;
  j["r"] = p.r;
  j["R"] = p.R;
  j["S_filter_prescribed"] = p.S_filter_prescribed;
  j["S_filter"] = p.S_filter;
  j["M_prescribed"] = p.M_prescribed;
  j["M"] = p.M;
  j["kappa_tau"] = p.kappa_tau;
  j["C_psi_L2"] = p.C_psi_L2;
  j["C_psi_Hr"] = p.C_psi_Hr;
  j["rho"] = p.rho;
  j["gamma"] = p.gamma ? Json(*p.gamma) : Json(nullptr);
  j["gamma_threshold"] = p.gamma_threshold;
  j["regime"] = p.regime;
  j["deviations"] = p.deviations;
  return j;
}

// ---------------------------------------------------------------------------
// Thresholds and reference estimators

std::vector<double> detail_noise_levels(const GridFunction<double>& psi, int M, int J, const Grid& grid) {
  grid.require(psi, "detail_noise_levels");
  if (J < 1 || (Eigen::Index(1) << J) > grid.n) throw std::invalid_argument("detail_noise_levels: bad depth");
  const int d = grid.dim;
  const auto bank = daubechies_filters<double>(M, d);
  std::vector<double> nu(static_cast<std::size_t>(J), 0.0);
  for (int j = 0; j < J; ++j)
    for (int e = 0; e < bank.detail_channels(); ++e) {
      WaveletCoefficients<double> c;
      c.depth = J;
      c.boundary = Boundary::Periodic;
      c.coarse = Tensor::zeros(d, {0, 0}, {0, 0});
      c.details.resize(static_cast<std::size_t>(J));
      for (int l = 0; l < J; ++l) {
        const Eigen::Index m = Eigen::Index(1) << l;
        for (int ch = 0; ch < bank.detail_channels(); ++ch)
          c.details[static_cast<std::size_t>(l)].push_back(Tensor::zeros(d, {0, 0}, {m - 1, d == 2 ? m - 1 : 0}));
      }
      c.details[static_cast<std::size_t>(j)][static_cast<std::size_t>(e)](0, 0) = 1;
      const auto w = expand_on_grid(dwt_inverse(c, bank), psi, J, grid);
      nu[static_cast<std::size_t>(j)] = std::max(nu[static_cast<std::size_t>(j)], quad_norm(grid, w));
    }
  return nu;
}

std::string to_string(ThresholdRule r) { return r == ThresholdRule::Level ? "level" : "global"; }

ThresholdRule threshold_rule_from_string(const std::string& s) {
  if (s == "level") return ThresholdRule::Level;
  if (s == "global") return ThresholdRule::Global;
  throw std::invalid_argument("unknown threshold rule '" + s + "'");
}

std::vector<double> universal_thresholds(double sigma, const std::vector<double>& nu, int d, ThresholdRule rule) {
  const int J = static_cast<int>(nu.size());
  std::vector<double> t;
  for (int j = 0; j < J; ++j) {
    const int lev = rule == ThresholdRule::Level ? j : J;
    t.push_back(sigma * nu[static_cast<std::size_t>(j)] * std::sqrt(2.0 * lev * d * std::log(2.0)));
  }
  return t;
}

Reference make_reference(const SmoothingOperator& op, const SelectedParams& sel, double sigma, const Grid& grid,
                         Boundary boundary, std::optional<ThresholdRule> rule) {
  const bool identity = op.kind == SmoothingOperator::Kind::Identity;
  Reference ref;
  ref.rule = rule.value_or(identity ? ThresholdRule::Level : ThresholdRule::Global);
  const auto psi = vaguelette(op, sel.M, sel.J, grid);
  ref.nu = detail_noise_levels(psi, sel.M, sel.J, grid);
  const auto taus = universal_thresholds(sigma, ref.nu, grid.dim, ref.rule);
  ref.net = identity ? preset_wavelet_thresholding(sel.M, sel.J, taus, grid, boundary)
                     : preset_wvd(op, sel.M, sel.J, taus, grid, boundary);

  ref.params = sel.class_params();
  const auto need = preset_class_params(ref.net, sel.kappa_tau, sel.r);
  auto loosen = [&](const char* name, double& have, double want) {
    if (want > have * (1 + 1e-9)) {
      ref.notes.push_back(std::string(name) + " raised from " + format_double(have) + " to " + format_double(want) +
                          " so the preset is feasible");
      have = want;
    }
  };
  loosen("kappa_tau", ref.params.kappa_tau, need.kappa_tau);
  loosen("C_psi_L2", ref.params.C_psi_L2, need.C_psi_L2);
  loosen("C_psi_Hr", ref.params.C_psi_Hr, need.C_psi_Hr);
  ref.params.S_filter = std::max(ref.params.S_filter, need.S_filter);
  return ref;
}

// ---------------------------------------------------------------------------
// Sweeps

SweepConfig::SweepConfig() {
  prior.s = 1;
  prior.J_max = 9;
  prior.M = 10;
  prior.law = PriorParams::Law::Holder;
  train.max_epochs = 60;
  train.min_epochs = 30;
}

SmoothingOperator SweepConfig::op(const Grid& grid) const { return make_op(op_L, grid); }

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit_line: need >= 2 paired points");
  const auto n = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd A(n, 2);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    A(i, 0) = 1;
    A(i, 1) = x[static_cast<std::size_t>(i)];
    b(i) = y[static_cast<std::size_t>(i)];
  }
  const Eigen::Vector2d c = A.colPivHouseholderQr().solve(b);
  LineFit f;
  f.intercept = c(0);
  f.slope = c(1);
  if (n > 2) {
    const double rss = (A * c - b).squaredNorm();
    const double xm = A.col(1).mean();
    const double sxx = (A.col(1).array() - xm).square().sum();
    f.slope_se = std::sqrt(rss / double(n - 2) / sxx);
  }
  return f;
}

std::string SweepResult::to_csv() const {
  std::ostringstream out;
  out << axis << ",J,r,M,S_filter,trials,risk,std_error,preset_risk,preset_std_error\n";
  for (const auto& p : points) {
    const RiskEstimate& pr = p.preset_risk ? *p.preset_risk : p.risk;
    out << format_double(p.x) << ',' << p.params.J << ',' << p.params.r << ',' << p.params.M << ','
        << p.params.S_filter << ',' << p.risk.trials << ',' << format_double(p.risk.mean) << ','
        << format_double(p.risk.std_error) << ',' << format_double(pr.mean) << ',' << format_double(pr.std_error)
        << "\n";
  }
  return out.str();
}

Json SweepResult::to_json() const {
  Json j;
  j["axis"] = axis;
  j["theory_exponent"] = theory;
  j["slope"] = slope ? Json(*slope) : Json(nullptr);
  j["slope_ci95"] = slope ? Json::array({*slope_lo, *slope_hi}) : Json(nullptr);
  j["monotonicity_violations"] = monotonicity_violations;
  Json pts = Json::array();
  for (const auto& p : points) {
    Json q;
    q[axis] = p.x;
    q["params"] = sunet::to_json(p.params);
    q["risk"] = risk_to_json(p.risk);
    if (p.preset_risk) q["preset_risk"] = risk_to_json(*p.preset_risk);
    if (p.history) {
      q["train"] = Json{{"initial_risk", p.history->initial_risk},
                        {"best_risk", p.history->best_risk},
                        {"best_epoch", p.history->best_epoch},
                        {"epochs", p.history->epochs.size()},
                        {"stop_reason", p.history->stop_reason}};
    }
    pts.push_back(std::move(q));
  }
  j["points"] = std::move(pts);
  return j;
}

namespace {

// Preset risk, plus a trained estimator on `N` pairs when asked.
SweepPoint run_point(const SweepConfig& cfg, const Grid& grid, const SmoothingOperator& op, double sigma, double N_sel,
                     int N_train, bool trained, std::size_t index) {
  const CounterRng master(cfg.seed);
  SweepPoint pt;
  pt.params = select_parameters(cfg.prior.s, op.beta, sigma, N_sel, cfg.d, op.a1, cfg.M_cap, cfg.J_override,
                                cfg.J_cap);
  if ((Eigen::Index(1) << pt.params.J) > grid.n)
    throw experiment_failure("depth J = " + std::to_string(pt.params.J) + " exceeds the grid; pass a J cap");
  const Reference ref = make_reference(op, pt.params, sigma, grid, cfg.boundary, cfg.rule);
  for (const auto& n : ref.notes) pt.params.deviations.push_back(n);
  const CounterRng test = master.derive(kTest);  // common random numbers across points
  pt.preset_risk = test_risk(ref.net, op, cfg.prior, sigma, cfg.trials, test);
  if (!trained) {
    pt.risk = *pt.preset_risk;
    return pt;
  }
  // Nested training sets: pair i is the same draw for every N.
  const auto data = make_training_set(op, cfg.prior, N_train, sigma, grid, master.derive(kTrain).derive(index), cfg.seed);
  TrainConfig tc = cfg.train;
  tc.seed = master.derive(kFit).derive(index).key();
  tc.reference_risk = empirical_risk(ref.net, data);
  if (cfg.prescribed_rho) tc.rho = pt.params.rho;
  auto res = train_erm(ref.net, data, ref.params, tc);
  pt.history = std::move(res.history);
  pt.risk = test_risk(res.net, op, cfg.prior, sigma, cfg.trials, test);
  return pt;
}

}  // namespace

SweepResult rate_sweep_sigma(const SweepConfig& cfg) {
  if (cfg.sigmas.size() < 4) throw experiment_failure("sigma sweep needs at least 4 noise levels");
  if (cfg.estimator != "preset" && cfg.estimator != "trained")
    throw std::invalid_argument("unknown estimator '" + cfg.estimator + "'");
  require_positive_trials(cfg.trials);
  const Grid grid(cfg.d, cfg.grid_n);
  const auto op = cfg.op(grid);
  SweepResult res;
  res.axis = "sigma";
  res.theory = 4 * cfg.prior.s / (2 * cfg.prior.s + 2 * op.beta + cfg.d);
  for (std::size_t i = 0; i < cfg.sigmas.size(); ++i) {
    SweepPoint pt = run_point(cfg, grid, op, cfg.sigmas[i], cfg.N, cfg.train_N, cfg.estimator == "trained",
                              cfg.estimator == "trained" ? 0 : i);
    pt.x = cfg.sigmas[i];
    res.points.push_back(std::move(pt));
  }
  fit_slope(res);
  if (!res.slope) throw experiment_failure("sigma sweep: fewer than 4 finite positive risks");
  check_monotone(res, false);
  return res;
}

SweepResult rate_sweep_N(const SweepConfig& cfg) {
  if (cfg.Ns.size() < 2) throw experiment_failure("N sweep needs at least 2 training-set sizes");
  require_positive_trials(cfg.trials);
  for (int n : cfg.Ns)
    if (n < 2) throw std::invalid_argument("N sweep: sizes must be >= 2");
  const Grid grid(cfg.d, cfg.grid_n);
  const auto op = cfg.op(grid);
  SweepResult res;
  res.axis = "N";
  res.theory = -cfg.prior.s / (2 * cfg.prior.s + 2 * op.beta + 1.5 * cfg.d);
  for (int n : cfg.Ns) {
    SweepPoint pt = run_point(cfg, grid, op, cfg.sigma, n, n, true, 0);
    pt.x = n;
    res.points.push_back(std::move(pt));
  }
  fit_slope(res);  // informational; only with >= 4 sizes
  check_monotone(res, true);
  return res;
}

// ---------------------------------------------------------------------------
// Stability suite

BoundInstance make_instance(const std::string& family, std::uint64_t seed, int trial, Boundary boundary,
                            int risk_draws) {
  const Family fam = family_id(family);
  CounterRng rng = CounterRng(seed).derive(fam).derive(static_cast<std::uint64_t>(trial));
  std::uniform_int_distribution<int> U(0, 1 << 20);
  std::uniform_real_distribution<double> unit(-1, 1);

  BoundInstance inst;
  inst.family = family;
  inst.seed = seed;
  inst.trial = trial;
  RandomNetSpec spec;
  spec.dim = 1 + U(rng) % 2;
  spec.J = 1 + U(rng) % (spec.dim == 1 ? 4 : 3);
  spec.taps = 1 + U(rng) % 4;
  spec.M = 2;
  spec.boundary = boundary;
  const Grid g(spec.dim, spec.dim == 1 ? 128 : 32);
  inst.net = random_feasible_net(spec, g, rng);
  fold_filters(inst.net);

  if (fam == kSmooth || fam == kRisk) {
    PriorParams p;
    p.J_max = g.levels() - 1;
    p.M = 2;
    inst.input = sample_prior(p, g, rng);
  } else {
    inst.input = white(g, rng);
  }

  switch (fam) {
    case kPerturbation: {
      const auto groups = parameter_groups(inst.net);
      const ParamRef p = groups[static_cast<std::size_t>(U(rng)) % groups.size()];
      inst.target = p;
      if (p.group == ParamGroup::Tau) {
        inst.scalar_delta = 0.3 * unit(rng);
      } else if (p.group == ParamGroup::Psi) {
        const auto w = white(g, rng);
        inst.psi_delta = 0.1 * w / quad_norm(g, w);
      } else {
        std::normal_distribution<double> n(0, 0.1);
        inst.filter_delta = filter(inst.net, p);
        for (Eigen::Index i = 0; i < inst.filter_delta.size(); ++i) inst.filter_delta.values().data()[i] = n(rng);
      }
      break;
    }
    case kDistance:
      inst.other = random_feasible_net(spec, g, rng);
      fold_filters(*inst.other);
      break;
    case kRisk:
      inst.sigma = trial % 2 == 0 ? 0.1 : 1.0;
      inst.op_L = U(rng) % 2;
      inst.draws = risk_draws;
      break;
    default:
      break;
  }
  return inst;
}

BoundCheck evaluate(const BoundInstance& inst) {
  const SUNet& net = inst.net;
  switch (family_id(inst.family)) {
    case kSize:
    case kSmooth: {
      const auto tr = forward(net, inst.input);
      const auto rep = verify_size_bounds(net, tr, max_coefficient(tr.s[static_cast<std::size_t>(net.J)]));
      // Report the tightest inequality.
      BoundCheck worst{"size", 0, 0, true};
      double ratio = -1;
      for (const auto& c : rep.checks) {
        const double q = c.rhs > 0 ? c.lhs / c.rhs : (c.lhs > 0 ? INFINITY : 0);
        if (!c.pass || q > ratio) {
          if (!worst.pass && c.pass) continue;
          worst = c;
          ratio = q;
        }
      }
      worst.pass = rep.pass();
      return worst;
    }
    case kPerturbation: {
      const ParamRef& p = *inst.target;
      if (p.group == ParamGroup::Tau) return verify_perturbation_bounds(net, p, inst.scalar_delta, inst.input);
      if (p.group == ParamGroup::Psi) return verify_perturbation_bounds(net, p, inst.psi_delta, inst.input);
      return verify_perturbation_bounds(net, p, inst.filter_delta, inst.input);
    }
    case kDistance:
      return verify_net_distance_bound(net, *inst.other, inst.input);
    case kRisk: {
      CounterRng noise = CounterRng(inst.seed).derive(kRisk).derive(static_cast<std::uint64_t>(inst.trial)).derive(1);
      const auto op = make_op(inst.op_L, net.grid);
      const auto r = verify_risk_bound(net, op, inst.input, inst.sigma, inst.draws, noise);
      return BoundCheck{"risk", r.mean, r.bound + 3 * r.std_error, r.pass};
    }
  }
  throw std::logic_error("evaluate: unreachable");
}

Json to_json(const BoundInstance& inst) {
  Json j;
  j["format"] = "sunet-bound-instance/1";
  j["family"] = inst.family;
  j["seed"] = inst.seed;
  j["trial"] = inst.trial;
  j["net"] = net_to_json(inst.net);
  if (inst.other) j["other"] = net_to_json(*inst.other);
  j["input"] = grid_function_to_json(inst.input);
  if (inst.target) {
    j["target"] = param_ref_to_json(*inst.target);
    switch (inst.target->group) {
      case ParamGroup::Tau: j["delta"] = inst.scalar_delta; break;
      case ParamGroup::Psi: j["delta"] = grid_function_to_json(inst.psi_delta); break;
      default: j["delta"] = tensor_to_json(inst.filter_delta);
    }
  }
  if (inst.family == "risk") {
    j["sigma"] = inst.sigma;
    j["draws"] = inst.draws;
    j["op_L"] = inst.op_L;
  }
  const auto c = evaluate(inst);
  j["check"] = Json{{"name", c.name}, {"lhs", c.lhs}, {"rhs", c.rhs}, {"pass", c.pass}};
  return j;
}

BoundInstance instance_from_json(const Json& j) {
  if (j.value("format", "") != "sunet-bound-instance/1")
    throw std::invalid_argument("instance_from_json: not a bound instance document");
  BoundInstance inst;
  inst.family = j.at("family").get<std::string>();
  family_id(inst.family);
  inst.seed = j.at("seed").get<std::uint64_t>();
  inst.trial = j.at("trial").get<int>();
  inst.net = net_from_json(j.at("net"));
  if (j.contains("other")) inst.other = net_from_json(j.at("other"));
  inst.input = grid_function_from_json(j.at("input"), inst.net.grid);
  if (j.contains("target")) {
    inst.target = param_ref_from_json(j.at("target"));
    switch (inst.target->group) {
      case ParamGroup::Tau: inst.scalar_delta = j.at("delta").get<double>(); break;
      case ParamGroup::Psi: inst.psi_delta = grid_function_from_json(j.at("delta"), inst.net.grid); break;
      default: inst.filter_delta = tensor_from_json(j.at("delta"));
    }
  }
  if (inst.family == "risk") {
    inst.sigma = j.at("sigma").get<double>();
    inst.draws = j.at("draws").get<int>();
    inst.op_L = j.at("op_L").get<int>();
  }
  return inst;
}

bool StabilityReport::pass() const {
  return std::all_of(families.begin(), families.end(), [](const FamilyReport& f) { return f.pass(); });
}

Json StabilityReport::to_json() const {
  Json j;
  j["pass"] = pass();
  Json fams = Json::array();
  for (const auto& f : families) {
    Json q{{"family", f.name}, {"trials", f.trials}, {"passed", f.passed}, {"worst_ratio", f.worst_ratio}};
    q["worst_margin"] = std::isfinite(f.worst_margin) ? Json(f.worst_margin) : Json(nullptr);
    if (f.failure) q["first_failure"] = *f.failure;
    fams.push_back(std::move(q));
  }
  j["families"] = std::move(fams);
  j["smooth_inputs_info"] = Json{{"trials", smooth_trials}, {"passed", smooth_passed}};
  return j;
}

std::string StabilityReport::table() const {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof line, "%-14s %8s %8s %12s %14s\n", "family", "trials", "passed", "worst l/r",
                "worst margin");
  out << line;
  for (const auto& f : families) {
    std::snprintf(line, sizeof line, "%-14s %8d %8d %12.6g %14.6g\n", f.name.c_str(), f.trials, f.passed,
                  f.worst_ratio, std::isfinite(f.worst_margin) ? f.worst_margin : 0.0);
    out << line;
  }
  std::snprintf(line, sizeof line, "(info) size bounds on smooth prior inputs: %d/%d\n", smooth_passed,
                smooth_trials);
  out << line;
  return out.str();
}

StabilityReport stability_suite(const StabilityConfig& cfg) {
  if (cfg.size_trials < 0 || cfg.perturbation_trials < 0 || cfg.distance_trials < 0 || cfg.risk_trials < 0)
    throw std::invalid_argument("stability_suite: trial counts must be >= 0");
  if (cfg.risk_trials > 0 && cfg.risk_draws < 2) throw std::invalid_argument("stability_suite: risk draws must be >= 2");
  StabilityReport rep;
  const std::pair<const char*, int> plan[] = {{"size", cfg.size_trials},
                                             {"perturbation", cfg.perturbation_trials},
                                             {"distance", cfg.distance_trials},
                                             {"risk", cfg.risk_trials},
                                             {"smooth", cfg.size_trials}};
  for (const auto& [name, trials] : plan) {
    std::vector<BoundCheck> checks(static_cast<std::size_t>(trials));
    parallel_for(checks.size(), [&](std::size_t t) {
      checks[t] = evaluate(make_instance(name, cfg.seed, static_cast<int>(t), cfg.boundary, cfg.risk_draws));
    });
    FamilyReport f;
    f.name = name;
    f.trials = trials;
    for (std::size_t t = 0; t < checks.size(); ++t) {
      const auto& c = checks[t];
      f.passed += c.pass;
      if (c.rhs > 0) f.worst_ratio = std::max(f.worst_ratio, c.lhs / c.rhs);
      f.worst_margin = std::min(f.worst_margin, c.margin());
      if (!c.pass && !f.failure)
        f.failure = to_json(make_instance(name, cfg.seed, static_cast<int>(t), cfg.boundary, cfg.risk_draws));
    }
    if (std::string(name) == "smooth") {
      rep.smooth_trials = f.trials;
      rep.smooth_passed = f.passed;
    } else {
      rep.families.push_back(std::move(f));
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Oracle check

Json OracleCheckReport::to_json() const {
  return Json{{"pass", pass()},
              {"roundtrip", Json{{"cases", roundtrip_cases}, {"max_rel_error", roundtrip_max_rel}}},
              {"preset_oracle", Json{{"cases", equivalence_cases},
                                     {"max_rel_error", equivalence_max_rel},
                                     {"max_rel_error_paper_mode", equivalence_paper_max_rel}}}};
}

OracleCheckReport oracle_check(std::uint64_t seed, int cases) {
  if (cases < 0) throw std::invalid_argument("oracle_check: cases must be >= 0");
  const CounterRng master(seed);
  OracleCheckReport rep;
  rep.roundtrip_cases = rep.equivalence_cases = cases;

  std::vector<double> rt(static_cast<std::size_t>(cases)), eq(rt.size()), eqp(rt.size());
  parallel_for(rt.size(), [&](std::size_t i) {
    CounterRng rng = master.derive(1).derive(i);
    std::uniform_int_distribution<int> U(0, 1 << 20);
    const int M = 1 + U(rng) % 5, d = 1 + U(rng) % 2;
    const int J = 1 + U(rng) % (d == 1 ? 8 : 5);
    const auto bank = daubechies_filters<double>(M, d);
    const auto x = random_tensor(d, Eigen::Index(1) << (d == 1 ? J + 1 : J), rng);
    rt[i] = rel_inf(dwt_inverse(dwt_forward(x, bank, J), bank), x);
  });
  parallel_for(eq.size(), [&](std::size_t i) {
    CounterRng rng = master.derive(2).derive(i);
    std::uniform_int_distribution<int> U(0, 1 << 20);
    std::uniform_real_distribution<double> tau(0, 1.5);
    const int M = 1 + U(rng) % 5, d = 1 + U(rng) % 2, J = 1 + U(rng) % 6;
    const Grid g(d, std::max<Eigen::Index>(Eigen::Index(1) << J, d == 1 ? 64 : 16));
    std::vector<double> taus;
    for (int j = 0; j < J; ++j) taus.push_back(tau(rng));
    const auto s = random_tensor(d, Eigen::Index(1) << J, rng);
    const auto bank = daubechies_filters<double>(M, d);
    for (auto bd : {Boundary::Periodic, Boundary::Paper}) {
      const auto net = preset_wavelet_thresholding(M, J, taus, g, bd);
      const double e = rel_inf(forward(net, s).sbar[static_cast<std::size_t>(J)],
                               wavelet_threshold_oracle(s, bank, taus, bd));
      (bd == Boundary::Periodic ? eq[i] : eqp[i]) = e;
    }
  });
  for (std::size_t i = 0; i < rt.size(); ++i) {
    rep.roundtrip_max_rel = std::max(rep.roundtrip_max_rel, rt[i]);
    rep.equivalence_max_rel = std::max({rep.equivalence_max_rel, eq[i], eqp[i]});
    rep.equivalence_paper_max_rel = std::max(rep.equivalence_paper_max_rel, eqp[i]);
  }
  return rep;
}

}  // namespace sunet
