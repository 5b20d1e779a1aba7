#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "rulkit/layers.hpp"

namespace rulkit::nn {

// In-place gradient descent over named parameters. step() consumes the
// gradients of the current graph and zeros them afterwards, so each training
// step builds a fresh graph. Accumulator state is exposed as named tensors
// for checkpointing.
class Optimizer {
 public:
  virtual ~Optimizer() = default;
  virtual void step(NamedParams& params) = 0;
  virtual std::string kind() const = 0;
  virtual NamedParams state() const = 0;
  virtual void load_state(const NamedParams& entries) = 0;
};

class RmsProp : public Optimizer {
 public:
  explicit RmsProp(double lr = 1e-3, double rho = 0.9, double eps = 1e-8)
      : lr_(lr), rho_(rho), eps_(eps) {}
  void step(NamedParams& params) override;
  std::string kind() const override { return "rmsprop"; }
  NamedParams state() const override;
  void load_state(const NamedParams& entries) override;

 private:
  double lr_, rho_, eps_;
  std::map<std::string, std::vector<double>> accum_;
};

class Adam : public Optimizer {
 public:
  explicit Adam(double lr = 1e-3, double beta1 = 0.9, double beta2 = 0.999,
                double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}
  void step(NamedParams& params) override;
  std::string kind() const override { return "adam"; }
  NamedParams state() const override;
  void load_state(const NamedParams& entries) override;

 private:
  double lr_, beta1_, beta2_, eps_;
  std::uint64_t t_ = 0;
  std::map<std::string, std::vector<double>> m_, v_;
};

// Factory for the config-selected optimizer ("rmsprop" or "adam").
std::unique_ptr<Optimizer> make_optimizer(const std::string& kind, double lr);

}  // namespace rulkit::nn
