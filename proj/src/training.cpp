#include "sunet/training.hpp"

#include "sunet/io.hpp"
#include "sunet/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <sstream>

namespace sunet {

namespace {

double sq_error(const SUNet& net, const GridFunction<double>& y, const GridFunction<double>& f) {
  const double e = quad_norm(net.grid, GridFunction<double>(forward(net, y).output - f));
  return e * e;
}

double batch_risk(const SUNet& net, const TrainingSet& data, const std::vector<std::size_t>& idx) {
  std::vector<double> parts(idx.size());
  parallel_for(idx.size(), [&](std::size_t i) { parts[i] = sq_error(net, data.Y[idx[i]], data.f[idx[i]]); });
  return std::accumulate(parts.begin(), parts.end(), 0.0);
}

NetGradient batch_gradient(const SUNet& net, const TrainingSet& data, const std::vector<std::size_t>& idx) {
  std::vector<NetGradient> parts(idx.size());
  parallel_for(idx.size(), [&](std::size_t i) {
    const auto tr = forward(net, data.Y[idx[i]]);
    parts[i] = backward(net, tr, GridFunction<double>(tr.output - data.f[idx[i]]));
  });
  NetGradient g = zero_gradient(net);
  for (const auto& p : parts) accumulate(g, p, 1.0 / static_cast<double>(idx.size()));
  return g;
}

bool same_params(const SUNet& x, const SUNet& y) {
  if (x.tau != y.tau || (x.psi != y.psi).any()) return false;
  for (const auto& p : parameter_groups(x)) {
    if (p.group == ParamGroup::Tau || p.group == ParamGroup::Psi) continue;
    const Tensor &a = filter(x, p), &b = filter(y, p);
    if (!a.same_shape(b) || (a.values() != b.values()).any()) return false;
  }
  return true;
}

bool finite(const NetGradient& g) { return std::isfinite(squared_norm(g)); }

}  // namespace

void TrainConfig::validate() const {
  if (!(eta > 0)) throw std::invalid_argument("TrainConfig: eta must be > 0");
  if (!(rho >= 0)) throw std::invalid_argument("TrainConfig: rho must be >= 0");
  if (!(halving > 0 && halving < 1)) throw std::invalid_argument("TrainConfig: halving factor must be in (0, 1)");
  if (max_epochs < 0 || min_epochs < 0 || batch_size < 0 || max_halvings < 0)
    throw std::invalid_argument("TrainConfig: counts must be >= 0");
  if (!(jitter >= 0)) throw std::invalid_argument("TrainConfig: jitter must be >= 0");
}

std::string TrainHistory::to_csv(bool with_timing) const {
  std::ostringstream out;
  out << "epoch,risk,best_risk,eta,accepted_steps,projections" << (with_timing ? ",seconds" : "") << "\n";
  for (const auto& e : epochs) {
    out << e.epoch << ',' << format_double(e.risk) << ',' << format_double(e.best_risk) << ','
        << format_double(e.eta) << ',' << e.accepted_steps << ',' << e.projections;
    if (with_timing) out << ',' << format_double(e.seconds);
    out << "\n";
  }
  return out.str();
}

double empirical_risk(const SUNet& net, const TrainingSet& data) {
  if (net.grid != data.grid) throw std::invalid_argument("empirical_risk: net and data grids differ");
  std::vector<std::size_t> idx(data.size());
  std::iota(idx.begin(), idx.end(), 0);
  return batch_risk(net, data, idx);
}

TrainResult train_erm(const SUNet& init, const TrainingSet& data, const NetClassParams& params,
                      const TrainConfig& cfg) {
  cfg.validate();
  if (data.size() == 0) throw std::invalid_argument("train_erm: empty training set");
  if (const auto v = class_violations(init, params); !v.empty())
    throw std::invalid_argument("train_erm: init outside the class: " + v.front());

  using Clock = std::chrono::steady_clock;
  const std::size_t N = data.size();
  const std::size_t batch = cfg.batch_size == 0 ? N : std::min<std::size_t>(N, cfg.batch_size);
  const CounterRng master(cfg.seed);

  TrainResult res{init, {}};
  SUNet net = init;
  double risk = empirical_risk(net, data);
  res.history.initial_risk = risk;
  res.history.best_risk = risk;

  auto within_slack = [&](double r) {
    if (std::isnan(cfg.reference_risk)) return false;
    // rho bounds the per-sample excess, as in the mean-risk form of the criterion.
    return (r - std::min(cfg.reference_risk, res.history.best_risk)) / static_cast<double>(N) <= cfg.rho;
  };
  if (cfg.min_epochs == 0 && within_slack(risk)) {
    res.history.stop_reason = "within rho of reference";
    return res;
  }

  double eta = cfg.eta;
  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    const auto t0 = Clock::now();
    CounterRng rng = master.derive(static_cast<std::uint64_t>(epoch));
    std::vector<std::size_t> order(N);
    std::iota(order.begin(), order.end(), 0);
    if (batch < N) std::shuffle(order.begin(), order.end(), rng);

    EpochRecord rec;
    rec.epoch = epoch;
    for (std::size_t start = 0; start < N; start += batch) {
      std::vector<std::size_t> idx(order.begin() + start, order.begin() + std::min(N, start + batch));
      SUNet probe = net;
      if (cfg.jitter > 0) {
        std::uniform_real_distribution<double> u(-cfg.jitter, cfg.jitter);
        for (double& t : probe.tau) t += u(rng);
      }
      NetGradient g = batch_gradient(probe, data, idx);
      if (!finite(g)) throw numerical_failure("train_erm: non-finite gradient at epoch " + std::to_string(epoch), epoch);
      g.psi /= net.grid.cell();  // Riesz representer in the quadrature L2 product
      const double current = batch_risk(net, data, idx);
      eta = std::min(cfg.eta, 2 * eta);
      for (int h = 0; h <= cfg.max_halvings; ++h, eta *= cfg.halving) {
        SUNet raw = net;
        apply_step(raw, g, -eta);
        SUNet cand = project_constraints(raw, params);
        const double r = batch_risk(cand, data, idx);
        if (!std::isfinite(r))
          throw numerical_failure("train_erm: non-finite risk at epoch " + std::to_string(epoch), epoch);
        if (r <= current) {
          rec.projections += !same_params(raw, cand);
          ++rec.accepted_steps;
          net = std::move(cand);
          break;
        }
      }
    }
    risk = empirical_risk(net, data);
    if (risk < res.history.best_risk) {
      res.history.best_risk = risk;
      res.history.best_epoch = epoch;
      res.net = net;
    }
    rec.risk = risk;
    rec.best_risk = res.history.best_risk;
    rec.eta = eta;
    rec.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    res.history.epochs.push_back(rec);

    if (epoch >= cfg.min_epochs && within_slack(risk)) {
      res.history.stop_reason = "within rho of reference";
      return res;
    }
    if (rec.accepted_steps == 0) {
      res.history.stop_reason = "no descent step found";
      return res;
    }
  }
  res.history.stop_reason = "epoch budget exhausted";
  return res;
}

RiskEstimate test_risk(const SUNet& net, const SmoothingOperator& op, const PriorParams& prior, double sigma,
                       int trials, const CounterRng& rng) {
  if (trials < 2) throw std::invalid_argument("test_risk: need at least 2 trials");
  if (op.grid != net.grid) throw std::invalid_argument("test_risk: operator and net grids differ");
  const PriorSampler sampler(prior, net.grid);
  std::vector<double> e(static_cast<std::size_t>(trials));
  parallel_for(e.size(), [&](std::size_t t) {
    CounterRng r = rng.derive(t);
    const auto f = sampler.draw(r);
    e[t] = sq_error(net, add_white_noise(apply(op, f), sigma, net.grid, r), f);
  });
  RiskEstimate out;
  out.trials = trials;
  double sum = 0, sum2 = 0;
  for (double x : e) {
    sum += x;
    sum2 += x * x;
  }
  out.mean = sum / trials;
  const double var = std::max(0.0, (sum2 - trials * out.mean * out.mean) / (trials - 1));
  out.std_error = std::sqrt(var / trials);
  return out;
}

}  // namespace sunet
