#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

namespace satsense {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Non-owning view of one parameter tensor, used to walk a model's weights
/// generically (optimizer, checkpointing, gradient checks).
struct ParamView {
  std::string name;
  double* data = nullptr;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;

  std::size_t size() const { return static_cast<std::size_t>(rows * cols); }
};

ParamView view_of(std::string name, Matrix& m);
ParamView view_of(std::string name, Vector& v);

void zero_all(std::span<const ParamView> params);

/// Per-epoch learning rate: linear warmup to the peak over the first
/// `warmup_epochs`, cosine annealing towards `min_lr` afterwards.
struct TrainSchedule {
  std::size_t epochs = 30;
  std::size_t batch_size = 128;
  double peak_lr = 1e-3;
  std::size_t warmup_epochs = 5;
  double min_lr = 0.0;
  std::uint64_t seed = 1;

  // `epoch` is 1-based.
  double learning_rate(std::size_t epoch) const;
};

void to_json(nlohmann::json& j, const TrainSchedule& s);
void from_json(const nlohmann::json& j, TrainSchedule& s);

class Adam {
 public:
  struct Options {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
  };

  Adam() = default;
  explicit Adam(Options opts) : opts_(opts) {}

  void step(std::span<const ParamView> params, std::span<const ParamView> grads, double lr);
  std::size_t steps() const { return t_; }

 private:
  Options opts_;
  std::size_t t_ = 0;
  std::vector<Eigen::ArrayXd> m_;
  std::vector<Eigen::ArrayXd> v_;
};

/// Uniform(-limit, limit) with limit = 1 / sqrt(fan_in).
void fan_in_uniform(Matrix& w, std::size_t fan_in, std::uint64_t seed);

}  // namespace satsense
