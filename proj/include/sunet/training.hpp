#pragma once

#include "sunet/forward_model.hpp"
#include "sunet/network.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace sunet {

struct TrainConfig {
  double eta = 0.5;  // initial step; psi moves along its L2 (quadrature) gradient
  int max_epochs = 100;
  // The slack test is skipped before this many epochs, so a preset init
  // still gets trained when the caller wants it to.
  int min_epochs = 0;
  int batch_size = 0;  // 0: full batch
  double rho = 0;
  double halving = 0.5;
  int max_halvings = 30;
  std::uint64_t seed = 0;
  double jitter = 0;  // thresholds perturbed by up to this much before differentiating
  // Risk of the reference preset on the same data; NaN disables the slack test.
  double reference_risk = std::numeric_limits<double>::quiet_NaN();

  void validate() const;
};

struct EpochRecord {
  int epoch = 0;
  double risk = 0;
  double best_risk = 0;
  double eta = 0;
  int accepted_steps = 0;
  int projections = 0;  // accepted steps where the projection changed the candidate
  double seconds = 0;
};

struct TrainHistory {
  double initial_risk = 0;
  double best_risk = 0;
  int best_epoch = 0;
  std::string stop_reason;
  std::vector<EpochRecord> epochs;

  /// epoch,risk,best_risk,eta,accepted_steps,projections[,seconds]. Wall
  /// clock is optional because it breaks byte-identical reruns.
  std::string to_csv(bool with_timing = false) const;
};

struct numerical_failure : std::runtime_error {
  int epoch;
  numerical_failure(const std::string& what, int e) : std::runtime_error(what), epoch(e) {}
};

/// Sum over the set of quadrature squared errors ||F(Y_i) - f_i||^2.
double empirical_risk(const SUNet& net, const TrainingSet& data);

/// Projected gradient descent on the empirical risk. Each minibatch step
/// averages gradients, steps, projects, and halves the step until the
/// minibatch risk does not increase. The best iterate (by full risk) is
/// returned. Stops once (risk - min(reference, best)) / N <= rho after
/// min_epochs, or when epochs run out.
struct TrainResult {
  SUNet net;
  TrainHistory history;
};

TrainResult train_erm(const SUNet& init, const TrainingSet& data, const NetClassParams& params,
                      const TrainConfig& cfg);

struct RiskEstimate {
  double mean = 0;
  double std_error = 0;
  int trials = 0;
};

/// Monte Carlo estimate of E ||F(T f + sigma dW) - f||^2 over fresh prior
/// draws; trial t uses rng.derive(t).
RiskEstimate test_risk(const SUNet& net, const SmoothingOperator& op, const PriorParams& prior, double sigma,
                       int trials, const CounterRng& rng);

}  // namespace sunet
