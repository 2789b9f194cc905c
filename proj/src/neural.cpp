#include "trajnorm/neural.hpp"

namespace trajnorm {

std::string_view activation_name(Activation activation) {
  switch (activation) {
    case Activation::relu:
      return "relu";
    case Activation::sigmoid:
      return "sigmoid";
    case Activation::identity:
      return "identity";
  }
  return "unknown";
}

Activation parse_activation(std::string_view name) {
  if (name == "relu") return Activation::relu;
  if (name == "sigmoid") return Activation::sigmoid;
  if (name == "identity") return Activation::identity;
  throw Error("unknown activation '" + std::string(name) + "'");
}

void TrainConfig::validate() const {
  if (batch_size < 1) throw Error("train: batch_size must be >= 1");
  if (epochs < 1) throw Error("train: epochs must be >= 1");
  if (!(learning_rate > 0)) throw Error("train: learning_rate must be > 0");
  if (!(rmsprop_decay >= 0 && rmsprop_decay < 1)) throw Error("train: rmsprop_decay must be in [0,1)");
  if (!(rmsprop_epsilon > 0)) throw Error("train: rmsprop_epsilon must be > 0");
  if (!(cv_fraction > 0 && cv_fraction < 1)) throw Error("train: cv_fraction must be in (0,1)");
}

}  // namespace trajnorm
