#pragma once

// Shared minibatch loop for the occupancy classifiers (GLSS and DCS).

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "satsense/error.hpp"
#include "satsense/glss.hpp"
#include "satsense/rng.hpp"

namespace satsense::detail {

template <typename Model, typename LossFn, typename PredictFn>
ClassifierTraining<Model> fit_classifier(Model model, std::span<const LabeledGraph> train,
                                         std::span<const LabeledGraph> val, const TrainSchedule& schedule,
                                         LossFn&& loss_fn, PredictFn&& predict, const EpochLogger& logger,
                                         const char* name) {
  if (train.empty()) throw InvalidArgument(std::string(name) + ": empty training set");
  if (schedule.batch_size == 0 || schedule.epochs == 0) throw InvalidArgument("schedule needs epochs and batch size");

  ClassifierTraining<Model> result{std::move(model), {}, {}};
  Model grads = zeros_like(result.model);
  std::vector<ParamView> params = result.model.parameters();
  std::vector<ParamView> grad_views = grads.parameters();
  Adam adam;
  Rng order_rng(derive_seed(schedule.seed, 0x5EED));

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<std::vector<std::uint8_t>> val_truth;
  for (const LabeledGraph& g : val) val_truth.push_back(g.label);

  for (std::size_t epoch = 1; epoch <= schedule.epochs; ++epoch) {
    const double lr = schedule.learning_rate(epoch);
    std::shuffle(order.begin(), order.end(), order_rng.engine());
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += schedule.batch_size) {
      const std::size_t count = std::min(schedule.batch_size, order.size() - start);
      const std::span<const std::size_t> batch(order.data() + start, count);
      zero_all(grad_views);
      const double loss = loss_fn(result.model, train, batch, &grads);
      if (!std::isfinite(loss)) {
        result.history.push_back(loss);
        throw TrainingFailure(std::string(name) + " training diverged in epoch " + std::to_string(epoch),
                              result.history);
      }
      epoch_loss += loss * static_cast<double>(count);
      adam.step(params, grad_views, lr);
    }
    result.history.push_back(epoch_loss / static_cast<double>(train.size()));

    double val_acc = std::numeric_limits<double>::quiet_NaN();
    if (!val.empty()) {
      std::vector<OccupancyPrediction> preds;
      preds.reserve(val.size());
      for (const LabeledGraph& g : val) preds.push_back(predict(g.graph, result.model));
      val_acc = accuracy_metric(preds, val_truth);
      result.val_accuracy.push_back(val_acc);
    }
    if (logger) logger(epoch, lr, result.history.back(), val_acc);
  }
  return result;
}

}  // namespace satsense::detail
