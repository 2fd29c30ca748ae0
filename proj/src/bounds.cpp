#include "sunet/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace sunet {

namespace {

double grid_norm(const Grid& g, const GridFunction<double>& f) { return quad_norm(g, f); }

double output_gap(const SUNet& F, const SUNet& G, const GridFunction<double>& input, double* scale = nullptr) {
  const auto a = forward(F, input).output;
  const auto b = forward(G, input).output;
  if (scale) *scale = grid_norm(F.grid, a) + grid_norm(G.grid, b);
  return grid_norm(F.grid, GridFunction<double>(a - b));
}

Tensor difference(const Tensor& x, const Tensor& y) {
  Tensor neg = y;
  neg.values() = -neg.values();
  return add(x, neg);
}

double level_scale(const SUNet& net) { return std::exp2(net.J * net.dim / 2.0); }

}  // namespace

BoundCheck make_check(std::string name, double lhs, double rhs, double floor) {
  BoundCheck c{std::move(name), lhs, rhs, true};
  c.pass = lhs <= rhs * (1 + 1e-8) + floor;
  return c;
}

bool BoundReport::pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const BoundCheck& c) { return c.pass; });
}

double BoundReport::worst_margin() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& c : checks) m = std::min(m, c.margin());
  return m;
}

const BoundCheck* BoundReport::first_failure() const {
  for (const auto& c : checks)
    if (!c.pass) return &c;
  return nullptr;
}

double max_coefficient(const Tensor& s) { return s.values().abs().maxCoeff(); }

BoundReport verify_size_bounds(const SUNet& net, const ForwardTrace& tr, double c_max) {
  const int J = net.J;
  if (tr.s.size() != static_cast<std::size_t>(J) + 1 || tr.sbar.size() != static_cast<std::size_t>(J) + 1)
    throw std::invalid_argument("verify_size_bounds: trace depth does not match net");
  BoundReport rep;
  rep.c_max = c_max;
  const double B = level_scale(net) * c_max;
  const double floor = 1e-12 * B;
  const double fan = std::exp2(net.dim);
  for (int j = 0; j <= J; ++j) {
    const std::string lv = "[" + std::to_string(j) + "]";
    rep.checks.push_back(make_check("s" + lv, l2_norm(tr.s[j]), B, floor));
    rep.checks.push_back(make_check("sbar" + lv, l2_norm(tr.sbar[j]), (1 + fan * j) * B, floor));
    if (j == J) break;
    for (int e = 0; e < net.channels(); ++e) {
      const std::string ch = "[" + std::to_string(j) + "," + std::to_string(e + 1) + "]";
      const double dn = l2_norm(tr.d[j][e]);
      rep.checks.push_back(make_check("d" + ch, dn, B, floor));
      rep.checks.push_back(make_check("dbar" + ch, l2_norm(tr.dbar[j][e]), dn, 1e-15 * dn));
    }
  }
  return rep;
}

SUNet perturbed(const SUNet& net, const ParamRef& target, const Tensor& delta) {
  if (target.group == ParamGroup::Tau || target.group == ParamGroup::Psi)
    throw std::invalid_argument("perturbed: " + to_string(target) + " takes a scalar or grid delta");
  SUNet out = net;
  Tensor& f = filter(out, target);
  if (delta.dim() != f.dim()) throw std::invalid_argument("perturbed: delta dimension differs from filter");
  f = add(f, delta);
  return out;
}

SUNet perturbed(const SUNet& net, const ParamRef& target, double delta) {
  if (target.group != ParamGroup::Tau) throw std::invalid_argument("perturbed: scalar delta needs a tau selector");
  if (target.level < 0 || target.level >= net.J) throw std::invalid_argument("perturbed: tau level out of range");
  SUNet out = net;
  out.tau[target.level] += delta;
  return out;
}

SUNet perturbed(const SUNet& net, const ParamRef& target, const GridFunction<double>& delta) {
  if (target.group != ParamGroup::Psi) throw std::invalid_argument("perturbed: grid delta needs the psi selector");
  net.grid.require(delta, "perturbed psi delta");
  SUNet out = net;
  out.psi += delta;
  return out;
}

double perturbation_rhs(const SUNet& net, const ParamRef& target, double delta_norm, double c_max) {
  const double phi = grid_norm(net.grid, net.phi);
  const double fan = std::exp2(net.dim);
  switch (target.group) {
    case ParamGroup::Alpha:
    case ParamGroup::A: return (1 + fan * target.level) * delta_norm * phi * level_scale(net) * c_max;
    case ParamGroup::Beta:
    case ParamGroup::B: return delta_norm * phi * level_scale(net) * c_max;
    case ParamGroup::Tau: return level_scale(net) * fan * phi * delta_norm;
    default: return (1 + fan * net.J) * phi * level_scale(net) * c_max;
  }
}

BoundCheck verify_perturbation_bounds(const SUNet& net, const ParamRef& target, const Tensor& delta,
                                      const GridFunction<double>& input) {
  const SUNet q = perturbed(net, target, delta);
  const double c = max_coefficient(first_layer(input, net.psi, net.J, net.grid));
  double scale = 0;
  const double lhs = output_gap(net, q, input, &scale);
  return make_check(to_string(target), lhs, perturbation_rhs(net, target, l2_norm(delta), c), 1e-13 * scale);
}

BoundCheck verify_perturbation_bounds(const SUNet& net, const ParamRef& target, double delta,
                                      const GridFunction<double>& input) {
  const SUNet q = perturbed(net, target, delta);
  double scale = 0;
  const double lhs = output_gap(net, q, input, &scale);
  return make_check(to_string(target), lhs, perturbation_rhs(net, target, std::abs(delta), 0), 1e-13 * scale);
}

BoundCheck verify_perturbation_bounds(const SUNet& net, const ParamRef& target, const GridFunction<double>& delta,
                                      const GridFunction<double>& input) {
  const SUNet q = perturbed(net, target, delta);
  const double c = max_coefficient(first_layer(input, delta, net.J, net.grid));
  double scale = 0;
  const double lhs = output_gap(net, q, input, &scale);
  return make_check(to_string(target), lhs, perturbation_rhs(net, target, 0, c), 1e-13 * scale);
}

BoundCheck verify_net_distance_bound(const SUNet& F, const SUNet& G, const GridFunction<double>& input) {
  F.validate();
  G.validate();
  if (F.J != G.J || F.dim != G.dim || F.M != G.M || F.grid != G.grid || F.boundary != G.boundary)
    throw std::invalid_argument("verify_net_distance_bound: nets differ in architecture");
  if ((F.phi != G.phi).any()) throw std::invalid_argument("verify_net_distance_bound: output filters differ");
  const double c_psi = max_coefficient(first_layer(input, GridFunction<double>(G.psi - F.psi), F.J, F.grid));
  const double c_max = max_coefficient(first_layer(input, G.psi, G.J, G.grid));
  double rhs = perturbation_rhs(F, ParamRef{ParamGroup::Psi, 0, 0}, 0, c_psi);
  for (const auto& p : parameter_groups(F)) {
    if (p.group == ParamGroup::Psi) continue;
    if (p.group == ParamGroup::Tau) {
      rhs += perturbation_rhs(F, p, std::abs(G.tau[p.level] - F.tau[p.level]), 0);
    } else {
      rhs += perturbation_rhs(F, p, l2_norm(difference(filter(G, p), filter(F, p))), c_max);
    }
  }
  double scale = 0;
  const double lhs = output_gap(F, G, input, &scale);
  return make_check("net distance", lhs, rhs, 1e-13 * scale);
}

RiskBoundCheck verify_risk_bound(const SUNet& net, const SmoothingOperator& op, const GridFunction<double>& f,
                                 double sigma, int draws, CounterRng& rng) {
  if (draws < 2) throw std::invalid_argument("verify_risk_bound: need at least 2 draws");
  const Grid& g = net.grid;
  const GridFunction<double> Tf = apply(op, f);
  double sum = 0, sum2 = 0;
  for (int t = 0; t < draws; ++t) {
    const auto y = add_white_noise(Tf, sigma, g, rng);
    const double e = grid_norm(g, GridFunction<double>(forward(net, y).output - f));
    sum += e * e;
    sum2 += e * e * e * e;
  }
  RiskBoundCheck r;
  r.mean = sum / draws;
  r.std_error = std::sqrt(std::max(0.0, (sum2 / draws - r.mean * r.mean) / (draws - 1)));
  const double fn2 = std::pow(grid_norm(g, f), 2), pn2 = std::pow(grid_norm(g, net.psi), 2);
  const double fan = std::exp2(net.dim) * net.J + 1;
  r.bound = 2 * fn2 + 4 * std::exp2(net.J * net.dim) * pn2 * fan * fan * (fn2 * op.C_T * op.C_T + sigma * sigma);
  r.pass = r.mean <= r.bound + 3 * r.std_error;
  return r;
}

}  // namespace sunet
