#include "satsense/error.hpp"

#include <utility>

namespace satsense {

TrainingFailure::TrainingFailure(const std::string& what, std::vector<double> history)
    : Error(what), history_(std::move(history)) {}

}  // namespace satsense
