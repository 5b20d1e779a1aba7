#include "rulkit/optim.hpp"

#include <cmath>

#include "rulkit/errors.hpp"

namespace rulkit::nn {

void RmsProp::step(NamedParams& params) {
  for (auto& [name, p] : params) {
    const std::vector<double>& g = p.grad();
    std::vector<double>& acc = accum_[name];
    if (acc.size() != g.size()) acc.assign(g.size(), 0.0);
    std::vector<double>& v = p.values();
    for (std::size_t i = 0; i < g.size(); ++i) {
      acc[i] = rho_ * acc[i] + (1.0 - rho_) * g[i] * g[i];
      v[i] -= lr_ * g[i] / (std::sqrt(acc[i]) + eps_);
    }
    p.zero_grad();
  }
}

NamedParams RmsProp::state() const {
  NamedParams out;
  for (const auto& [name, acc] : accum_) {
    out.emplace_back("opt." + name + ".accum",
                     Tensor::from_data(acc, {acc.size()}));
  }
  return out;
}

void RmsProp::load_state(const NamedParams& entries) {
  accum_.clear();
  const std::string prefix = "opt.";
  const std::string suffix = ".accum";
  for (const auto& [name, t] : entries) {
    if (name.size() <= prefix.size() + suffix.size()) continue;
    if (name.compare(0, prefix.size(), prefix) != 0) continue;
    if (name.compare(name.size() - suffix.size(), suffix.size(), suffix) != 0) continue;
    std::string key = name.substr(prefix.size(), name.size() - prefix.size() - suffix.size());
    accum_[key] = t.values();
  }
}

void Adam::step(NamedParams& params) {
  ++t_;
  double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (auto& [name, p] : params) {
    const std::vector<double>& g = p.grad();
    std::vector<double>& m = m_[name];
    std::vector<double>& v = v_[name];
    if (m.size() != g.size()) m.assign(g.size(), 0.0);
    if (v.size() != g.size()) v.assign(g.size(), 0.0);
    std::vector<double>& val = p.values();
    for (std::size_t i = 0; i < g.size(); ++i) {
      m[i] = beta1_ * m[i] + (1.0 - beta1_) * g[i];
      v[i] = beta2_ * v[i] + (1.0 - beta2_) * g[i] * g[i];
      double mhat = m[i] / c1;
      double vhat = v[i] / c2;
      val[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
    }
    p.zero_grad();
  }
}

NamedParams Adam::state() const {
  NamedParams out;
  for (const auto& [name, m] : m_)
    out.emplace_back("opt." + name + ".m", Tensor::from_data(m, {m.size()}));
  for (const auto& [name, v] : v_)
    out.emplace_back("opt." + name + ".v", Tensor::from_data(v, {v.size()}));
  out.emplace_back("opt.t", Tensor::scalar(static_cast<double>(t_)));
  return out;
}

void Adam::load_state(const NamedParams& entries) {
  m_.clear();
  v_.clear();
  t_ = 0;
  for (const auto& [name, t] : entries) {
    if (name == "opt.t") {
      t_ = static_cast<std::uint64_t>(t.item());
      continue;
    }
    const std::string prefix = "opt.";
    if (name.size() <= prefix.size() + 2) continue;
    if (name.compare(0, prefix.size(), prefix) != 0) continue;
    if (name.compare(name.size() - 2, 2, ".m") == 0)
      m_[name.substr(prefix.size(), name.size() - prefix.size() - 2)] = t.values();
    else if (name.compare(name.size() - 2, 2, ".v") == 0)
      v_[name.substr(prefix.size(), name.size() - prefix.size() - 2)] = t.values();
  }
}

std::unique_ptr<Optimizer> make_optimizer(const std::string& kind, double lr) {
  if (kind == "rmsprop") return std::make_unique<RmsProp>(lr);
  if (kind == "adam") return std::make_unique<Adam>(lr);
  throw ConfigError("unknown optimizer '" + kind + "' (expected rmsprop or adam)");
}

}  // namespace rulkit::nn
