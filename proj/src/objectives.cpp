#include "stochlat/objectives.hpp"

#include <stdexcept>

namespace stochlat {

void BatchBundle::validate() const {
  size_t n = real.size();
  if (n == 0) throw std::runtime_error("objective: empty batch");
  for (const SampleNodes* s : {&generated, &reconstructed, &z_real, &z_gen, &z_prior})
    if (s->size() != n) throw std::runtime_error("objective: batch count mismatch");
  size_t snap_dim = real[0].size();
  size_t latent_dim = z_prior[0].size();
  for (const SampleNodes* s : {&real, &generated, &reconstructed})
    for (const auto& row : *s)
      if (row.size() != snap_dim) throw std::runtime_error("objective: snapshot length mismatch");
  for (const SampleNodes* s : {&z_real, &z_gen, &z_prior})
    for (const auto& row : *s)
      if (row.size() != latent_dim) throw std::runtime_error("objective: latent length mismatch");
}

NodeId generator_objective(Graph& g, const BatchBundle& bundle, const MmdConfig& config,
                           MmdGranularity granularity) {
  bundle.validate();
  if (granularity == MmdGranularity::Batch)
    return g.add(mmd_biased(g, bundle.z_gen, bundle.z_prior, config),
                 mmd_biased(g, bundle.generated, bundle.real, config));
  return g.add(pair_mmd_mean(g, bundle.z_gen, bundle.z_prior, config),
               pair_mmd_mean(g, bundle.generated, bundle.real, config));
}

NodeId encoder_objective(Graph& g, const BatchBundle& bundle, const MmdConfig& config,
                         MmdGranularity granularity) {
  bundle.validate();
  NodeId gen_term, real_term;
  if (granularity == MmdGranularity::Batch) {
    gen_term = mmd_biased(g, bundle.z_gen, bundle.z_prior, config);
    real_term = mmd_biased(g, bundle.z_real, bundle.z_prior, config);
  } else {
    gen_term = pair_mmd_mean(g, bundle.z_gen, bundle.z_prior, config);
    real_term = pair_mmd_mean(g, bundle.z_real, bundle.z_prior, config);
  }
  // Reconstruction is per-pair in both granularities: each H-hat is tied to
  // the snapshot it was encoded from.
  NodeId recon = pair_mmd_mean(g, bundle.reconstructed, bundle.real, config);
  return g.sub(gen_term, g.add(real_term, recon));
}

}  // namespace stochlat
