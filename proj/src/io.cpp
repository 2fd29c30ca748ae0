#include "sunet/io.hpp"

#include <charconv>
#include <fstream>
#include <stdexcept>

namespace sunet {

namespace {

[[noreturn]] void bad(const std::string& msg) { throw std::invalid_argument(msg); }

Json values_to_json(const double* p, Eigen::Index n) { return Json(std::vector<double>(p, p + n)); }

template <typename Array>
void values_from_json(const Json& j, Array& out, const char* who) {
  const auto v = j.get<std::vector<double>>();
  if (static_cast<Eigen::Index>(v.size()) != out.size()) bad(std::string(who) + ": wrong number of values");
  std::copy(v.begin(), v.end(), out.data());
}

}  // namespace

Json tensor_to_json(const Tensor& t) {
  Json j;
  j["dim"] = t.dim();
  j["lo"] = {t.lo(0), t.lo(1)};
  j["hi"] = {t.hi(0), t.hi(1)};
  j["values"] = values_to_json(t.values().data(), t.size());  // axis 0 fastest
  return j;
}

Tensor tensor_from_json(const Json& j) {
  const int dim = j.at("dim").get<int>();
  if (dim != 1 && dim != 2) bad("tensor: dim must be 1 or 2");
  const auto lo = j.at("lo").get<std::array<Eigen::Index, 2>>();
  const auto hi = j.at("hi").get<std::array<Eigen::Index, 2>>();
  if (hi[0] < lo[0] || hi[1] < lo[1] || (dim == 1 && lo[1] != hi[1])) bad("tensor: inconsistent bounds");
  auto t = Tensor::zeros(dim, {lo[0], lo[1]}, {hi[0], hi[1]});
  values_from_json(j.at("values"), t.values(), "tensor");
  return t;
}

Json grid_function_to_json(const GridFunction<double>& f) { return values_to_json(f.data(), f.size()); }

GridFunction<double> grid_function_from_json(const Json& j, const Grid& grid) {
  GridFunction<double> f = grid.zeros();
  values_from_json(j, f, "grid samples");
  return f;
}

Json class_params_to_json(const NetClassParams& p) {
  Json j;
  j["r"] = p.r;
  j["R"] = p.R;
  j["S_filter"] = p.S_filter;
  j["kappa_tau"] = p.kappa_tau;
  j["C_psi_L2"] = p.C_psi_L2;
  j["C_psi_Hr"] = std::isfinite(p.C_psi_Hr) ? Json(p.C_psi_Hr) : Json(nullptr);
  return j;
}

NetClassParams class_params_from_json(const Json& j) {
  NetClassParams p;
  p.r = j.at("r").get<int>();
  p.R = j.at("R").get<int>();
  p.S_filter = j.at("S_filter").get<int>();
  p.kappa_tau = j.at("kappa_tau").get<double>();
  p.C_psi_L2 = j.at("C_psi_L2").get<double>();
  if (!j.at("C_psi_Hr").is_null()) p.C_psi_Hr = j.at("C_psi_Hr").get<double>();
  return p;
}

Json net_to_json(const SUNet& net, const std::optional<NetClassParams>& params) {
  Json j;
  j["format"] = "sunet/1";
  j["J"] = net.J;
  j["d"] = net.dim;
  j["M"] = net.M;
  j["boundary"] = to_string(net.boundary);
  j["grid_n"] = net.grid.n;
  auto list = [](const std::vector<Tensor>& v) {
    Json a = Json::array();
    for (const auto& t : v) a.push_back(tensor_to_json(t));
    return a;
  };
  auto nested = [&](const std::vector<std::vector<Tensor>>& v) {
    Json a = Json::array();
    for (const auto& lv : v) a.push_back(list(lv));
    return a;
  };
  j["alpha"] = list(net.alpha);
  j["a"] = list(net.a);
  j["beta"] = nested(net.beta);
  j["b"] = nested(net.b);
  j["tau"] = net.tau;
  j["psi"] = grid_function_to_json(net.psi);
  j["phi"] = grid_function_to_json(net.phi);
  if (params) j["class"] = class_params_to_json(*params);
  return j;
}

SUNet net_from_json(const Json& j, NetClassParams* params) {
  if (j.value("format", "") != "sunet/1") bad("net: unrecognized format tag");
  SUNet net;
  net.J = j.at("J").get<int>();
  net.dim = j.at("d").get<int>();
  net.M = j.at("M").get<int>();
  net.boundary = boundary_from_string(j.at("boundary").get<std::string>());
  net.grid = Grid(net.dim, j.at("grid_n").get<Eigen::Index>());
  for (const auto& t : j.at("alpha")) net.alpha.push_back(tensor_from_json(t));
  for (const auto& t : j.at("a")) net.a.push_back(tensor_from_json(t));
  for (const auto& lv : j.at("beta")) {
    net.beta.emplace_back();
    for (const auto& t : lv) net.beta.back().push_back(tensor_from_json(t));
  }
  for (const auto& lv : j.at("b")) {
    net.b.emplace_back();
    for (const auto& t : lv) net.b.back().push_back(tensor_from_json(t));
  }
  net.tau = j.at("tau").get<std::vector<double>>();
  net.psi = grid_function_from_json(j.at("psi"), net.grid);
  net.phi = grid_function_from_json(j.at("phi"), net.grid);
  net.validate();
  if (params && j.contains("class")) *params = class_params_from_json(j.at("class"));
  return net;
}

Json training_set_to_json(const TrainingSet& ts) {
  Json j;
  j["format"] = "sunet-data/1";
  j["d"] = ts.grid.dim;
  j["grid_n"] = ts.grid.n;
  j["sigma"] = ts.sigma;
  j["op"] = ts.op;
  j["seed"] = ts.seed;
  Json pairs = Json::array();
  for (std::size_t i = 0; i < ts.size(); ++i)
    pairs.push_back({{"Y", grid_function_to_json(ts.Y[i])}, {"f", grid_function_to_json(ts.f[i])}});
  j["pairs"] = std::move(pairs);
  return j;
}

TrainingSet training_set_from_json(const Json& j) {
  if (j.value("format", "") != "sunet-data/1") bad("training set: unrecognized format tag");
  TrainingSet ts;
  ts.grid = Grid(j.at("d").get<int>(), j.at("grid_n").get<Eigen::Index>());
  ts.sigma = j.at("sigma").get<double>();
  ts.op = j.at("op").get<std::string>();
  ts.seed = j.at("seed").get<std::uint64_t>();
  for (const auto& p : j.at("pairs")) {
    ts.Y.push_back(grid_function_from_json(p.at("Y"), ts.grid));
    ts.f.push_back(grid_function_from_json(p.at("f"), ts.grid));
  }
  return ts;
}

Json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

void write_json(const std::string& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

std::string format_double(double x) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

}  // namespace sunet
