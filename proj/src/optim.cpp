#include "satsense/optim.hpp"

#include <cmath>
#include <numbers>

#include "satsense/error.hpp"
#include "satsense/rng.hpp"

namespace satsense {

ParamView view_of(std::string name, Matrix& m) { return {std::move(name), m.data(), m.rows(), m.cols()}; }

ParamView view_of(std::string name, Vector& v) { return {std::move(name), v.data(), v.rows(), 1}; }

void zero_all(std::span<const ParamView> params) {
  for (const ParamView& p : params) Eigen::Map<Eigen::ArrayXd>(p.data, static_cast<Eigen::Index>(p.size())).setZero();
}

double TrainSchedule::learning_rate(std::size_t epoch) const {
  if (epoch == 0) throw InvalidArgument("epochs are numbered from 1");
  if (warmup_epochs > 0 && epoch <= warmup_epochs) {
    return peak_lr * static_cast<double>(epoch) / static_cast<double>(warmup_epochs);
  }
  if (epochs <= warmup_epochs) return peak_lr;
  // Cosine over the remaining epochs; the last epoch stays strictly above min_lr.
  const double progress = static_cast<double>(epoch - warmup_epochs) / static_cast<double>(epochs - warmup_epochs + 1);
  return min_lr + 0.5 * (peak_lr - min_lr) * (1.0 + std::cos(std::numbers::pi * progress));
}

void to_json(nlohmann::json& j, const TrainSchedule& s) {
  j = nlohmann::json{{"epochs", s.epochs},   {"batch_size", s.batch_size}, {"lr", s.peak_lr},
                     {"warmup_epochs", s.warmup_epochs}, {"min_lr", s.min_lr}, {"seed", s.seed}};
}

void from_json(const nlohmann::json& j, TrainSchedule& s) {
  s.epochs = j.value("epochs", s.epochs);
  s.batch_size = j.value("batch_size", s.batch_size);
  s.peak_lr = j.value("lr", s.peak_lr);
  s.warmup_epochs = j.value("warmup_epochs", s.warmup_epochs);
  s.min_lr = j.value("min_lr", s.min_lr);
  s.seed = j.value("seed", s.seed);
}

void Adam::step(std::span<const ParamView> params, std::span<const ParamView> grads, double lr) {
  if (params.size() != grads.size()) throw InvalidArgument("adam: parameter/gradient count mismatch");
  if (m_.empty()) {
    for (const ParamView& p : params) {
      m_.push_back(Eigen::ArrayXd::Zero(static_cast<Eigen::Index>(p.size())));
      v_.push_back(Eigen::ArrayXd::Zero(static_cast<Eigen::Index>(p.size())));
    }
  }
  if (m_.size() != params.size()) throw InvalidArgument("adam: parameter set changed between steps");
  ++t_;
  const double bc1 = 1.0 - std::pow(opts_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(opts_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto n = static_cast<Eigen::Index>(params[i].size());
    if (grads[i].size() != params[i].size()) throw InvalidArgument("adam: gradient shape mismatch for " + params[i].name);
    Eigen::Map<Eigen::ArrayXd> p(params[i].data, n);
    Eigen::Map<const Eigen::ArrayXd> g(grads[i].data, n);
    m_[i] = opts_.beta1 * m_[i] + (1.0 - opts_.beta1) * g;
    v_[i] = opts_.beta2 * v_[i] + (1.0 - opts_.beta2) * g.square();
    p -= lr * (m_[i] / bc1) / ((v_[i] / bc2).sqrt() + opts_.epsilon);
  }
}

void fan_in_uniform(Matrix& w, std::size_t fan_in, std::uint64_t seed) {
  Rng rng(seed);
  const double limit = 1.0 / std::sqrt(static_cast<double>(fan_in));
  for (Eigen::Index c = 0; c < w.cols(); ++c) {
    for (Eigen::Index r = 0; r < w.rows(); ++r) w(r, c) = rng.uniform(-limit, limit);
  }
}

}  // namespace satsense
