#pragma once

#include <cmath>

#include "entrolab/chain.hpp"

namespace entrolab::testing {

inline Generator two_state_flip() {
  std::vector<Move> moves;
  moves.push_back(Move{"flip", "flip", [](const Configuration& c) {
                         return Configuration{-c[0]};
                       }});
  moves.push_back(null_move());
  return build_generator({{-1}, {1}}, moves,
                         [](const Configuration&, const Move& mv) {
                           return mv.is_null() ? 0.0 : 1.0;
                         });
}

inline LatticeModel poisson_model(double lambda) {
  LatticeModel model;
  model.d = 1;
  model.moves.push_back(Move{"inc0", "dec0", [](const Configuration& c) {
                               return Configuration{c[0] + 1};
                             }});
  model.moves.push_back(Move{"dec0", "inc0", [](const Configuration& c) {
                               return c[0] > 0 ? Configuration{c[0] - 1} : c;
                             }});
  model.moves.push_back(null_move());
  model.rate_fn = [lambda](const Configuration& eta, const Move& mv) {
    if (mv.is_null()) return 0.0;
    return mv.id == "inc0" ? 1.0 : lambda * eta[0];
  };
  model.log_weight = [lambda](const Configuration& eta) {
    return -(std::log(lambda) * eta[0] + std::lgamma(eta[0] + 1.0));
  };
  return model;
}

}  // namespace entrolab::testing
