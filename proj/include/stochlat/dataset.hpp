#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "stochlat/elliptic.hpp"
#include "stochlat/gp.hpp"
#include "stochlat/problem.hpp"

namespace stochlat {

// One realization's sensor readings. Any block may be empty depending on
// the problem mode.
struct Snapshot {
  std::vector<double> k, u, f, b;
};

struct DatasetProvenance {
  ProblemMode mode = ProblemMode::Forward;
  uint64_t seed = 0;
  GaussKernelSpec k_spec;  // spec of the latent field behind k; unused in process mode
  GaussKernelSpec f_spec;
  int train_count = 0;  // N drawn per epoch; the stored pool may be larger
};

struct SnapshotSet {
  SensorLayout layout;
  std::vector<Snapshot> snapshots;
  DatasetProvenance provenance;

  size_t count() const { return snapshots.size(); }
  // K|U|F|B concatenation, the encoder's input vector.
  std::vector<double> concat(size_t i) const;
  // count x total() matrix of concatenated snapshots.
  Eigen::MatrixXd matrix() const;

  void validate() const;
};

// Generates exactly `count` snapshots. Process mode samples f directly at
// its sensors; equation modes sample the latent field and forcing on the
// fine grid, form k = exp(sin-trend + latent), solve for u, and read every
// block off the grid by linear interpolation (boundary reads land on grid
// nodes). Snapshot i draws from the (seed, i) substream.
std::vector<Snapshot> generate_snapshots(const ProblemSpec& problem,
                                         const GaussKernelSpec& k_hat_spec,
                                         const GaussKernelSpec& f_spec, int count, uint64_t seed,
                                         const FineGrid& grid);

// Training dataset: a pool of max(train_count, pool_floor) snapshots, so
// epoch-level resampling always has the reference 1000 paths to draw from.
SnapshotSet build_dataset(const ProblemSpec& problem, const GaussKernelSpec& k_hat_spec,
                          const GaussKernelSpec& f_spec, int train_count, uint64_t seed,
                          int pool_floor = 1000);

// Text format: "key: value" header then one CSV row per snapshot (blocks in
// K,U,F,B order), every double printed with 17 significant digits so the
// round trip is bit-exact.
void save_dataset(std::ostream& out, const SnapshotSet& set);
SnapshotSet load_dataset(std::istream& in);
void save_dataset_file(const std::string& path, const SnapshotSet& set);
SnapshotSet load_dataset_file(const std::string& path);

// 17-significant-digit decimal, the round-trip-exact form used everywhere.
std::string fmt_g17(double v);

}  // namespace stochlat
