#pragma once

#include "stochlat/mmd.hpp"

namespace stochlat {

// Everything one adversarial step needs, as graph nodes: real snapshots H,
// synthetic H-tilde, reconstructed H-hat, and the three latent batches
// (encoded real, encoded synthetic, fresh prior draws).
struct BatchBundle {
  SampleNodes real;
  SampleNodes generated;
  SampleNodes reconstructed;
  SampleNodes z_real;
  SampleNodes z_gen;
  SampleNodes z_prior;

  void validate() const;
};

// Generator loss (minimized): latent match of encoded synthetic snapshots to
// the prior plus distribution match of synthetic to real snapshots.
NodeId generator_objective(Graph& g, const BatchBundle& bundle, const MmdConfig& config,
                           MmdGranularity granularity = MmdGranularity::Batch);

// Encoder score (maximized; the trainer negates for its descent update):
// separation of encoded synthetic from the prior, minus drift of encoded
// real data from the prior, minus per-pair reconstruction distance.
NodeId encoder_objective(Graph& g, const BatchBundle& bundle, const MmdConfig& config,
                         MmdGranularity granularity = MmdGranularity::Batch);

}  // namespace stochlat
