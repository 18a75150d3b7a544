#include "stochlat/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "stochlat/elliptic.hpp"

namespace stochlat {

std::string fmt_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<double> SnapshotSet::concat(size_t i) const {
  const Snapshot& s = snapshots[i];
  std::vector<double> out;
  out.reserve(layout.total());
  out.insert(out.end(), s.k.begin(), s.k.end());
  out.insert(out.end(), s.u.begin(), s.u.end());
  out.insert(out.end(), s.f.begin(), s.f.end());
  out.insert(out.end(), s.b.begin(), s.b.end());
  return out;
}

Eigen::MatrixXd SnapshotSet::matrix() const {
  Eigen::MatrixXd m(count(), layout.total());
  for (size_t i = 0; i < count(); ++i) {
    std::vector<double> row = concat(i);
    for (size_t j = 0; j < row.size(); ++j) m(i, j) = row[j];
  }
  return m;
}

void SnapshotSet::validate() const {
  layout.validate();
  for (size_t i = 0; i < snapshots.size(); ++i) {
    const Snapshot& s = snapshots[i];
    if (s.k.size() != layout.n_k() || s.u.size() != layout.n_u() ||
        s.f.size() != layout.n_f() || s.b.size() != layout.n_b())
      throw std::runtime_error("snapshot " + std::to_string(i) + " block sizes do not match layout");
    for (const auto* block : {&s.k, &s.u, &s.f, &s.b})
      for (double v : *block)
        if (!std::isfinite(v))
          throw std::runtime_error("snapshot " + std::to_string(i) + " contains non-finite value");
  }
}

namespace {

double k_trend(double x) { return 0.2 * std::sin(1.5 * M_PI * (x + 1.0)); }

std::vector<double> read_at(const std::vector<double>& nodes, const FineGrid& grid,
                            const std::vector<double>& coords) {
  std::vector<double> out(coords.size());
  for (size_t i = 0; i < coords.size(); ++i) out[i] = interpolate_on_grid(nodes, grid, coords[i]);
  return out;
}

}  // namespace

std::vector<Snapshot> generate_snapshots(const ProblemSpec& problem,
                                         const GaussKernelSpec& k_hat_spec,
                                         const GaussKernelSpec& f_spec, int count, uint64_t seed,
                                         const FineGrid& grid) {
  problem.validate();
  std::vector<Snapshot> out(count);

  if (problem.mode == ProblemMode::Process) {
    GpSampler f_sampler(f_spec, problem.layout.coords_f);
    for (int i = 0; i < count; ++i) {
      Rng rng = Rng::stream(seed, static_cast<uint64_t>(i));
      Eigen::VectorXd path = f_sampler.draw(rng);
      out[i].f.assign(path.data(), path.data() + path.size());
    }
    return out;
  }

  GpSampler k_sampler(k_hat_spec, grid.coords);
  GpSampler f_sampler(f_spec, grid.coords);
  const int G = grid.nodes;
  std::vector<double> k_nodes(G), f_nodes(G);
  for (int i = 0; i < count; ++i) {
    Rng rng = Rng::stream(seed, static_cast<uint64_t>(i));
    Eigen::VectorXd k_hat = k_sampler.draw(rng);
    Eigen::VectorXd f_path = f_sampler.draw(rng);
    for (int j = 0; j < G; ++j) {
      k_nodes[j] = std::exp(k_trend(grid.coords[j]) + k_hat[j]);
      f_nodes[j] = f_path[j];
    }
    std::vector<double> u_nodes;
    try {
      u_nodes = solve_elliptic(k_nodes, f_nodes, grid);
    } catch (const std::exception& e) {
      throw std::runtime_error("snapshot " + std::to_string(i) + ": " + e.what());
    }
    out[i].k = read_at(k_nodes, grid, problem.layout.coords_k);
    out[i].u = read_at(u_nodes, grid, problem.layout.coords_u);
    out[i].f = read_at(f_nodes, grid, problem.layout.coords_f);
    out[i].b = read_at(u_nodes, grid, problem.layout.coords_b);
  }
  return out;
}

SnapshotSet build_dataset(const ProblemSpec& problem, const GaussKernelSpec& k_hat_spec,
                          const GaussKernelSpec& f_spec, int train_count, uint64_t seed,
                          int pool_floor) {
  if (train_count < 1) throw std::runtime_error("build_dataset: train_count must be >= 1");
  int pool = std::max(train_count, pool_floor);
  SnapshotSet set;
  set.layout = problem.layout;
  set.snapshots =
      generate_snapshots(problem, k_hat_spec, f_spec, pool, seed, FineGrid::uniform());
  set.provenance = {problem.mode, seed, k_hat_spec, f_spec, train_count};
  set.validate();
  return set;
}

namespace {

std::string join_g17(const std::vector<double>& xs) {
  std::string out;
  for (size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ',';
    out += fmt_g17(xs[i]);
  }
  return out;
}

std::vector<double> split_doubles(const std::string& line) {
  std::vector<double> out;
  const char* p = line.c_str();
  while (*p) {
    char* end = nullptr;
    double v = std::strtod(p, &end);
    if (end == p) throw std::runtime_error("bad numeric field in '" + line + "'");
    out.push_back(v);
    p = end;
    if (*p == ',') ++p;
  }
  return out;
}

std::string header_value(std::istream& in, const std::string& key) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("dataset header truncated at '" + key + "'");
  std::string prefix = key + ":";
  if (line.rfind(prefix, 0) != 0)
    throw std::runtime_error("dataset header: expected '" + key + "', got '" + line + "'");
  std::string value = line.substr(prefix.size());
  if (!value.empty() && value.front() == ' ') value.erase(0, 1);
  return value;
}

GaussKernelSpec parse_spec(const std::string& s) {
  std::istringstream ss(s);
  GaussKernelSpec spec;
  if (!(ss >> spec.mean >> spec.variance >> spec.width))
    throw std::runtime_error("bad kernel spec line '" + s + "'");
  return spec;
}

}  // namespace

void save_dataset(std::ostream& out, const SnapshotSet& set) {
  const DatasetProvenance& p = set.provenance;
  out << "stochlat-dataset v1\n"
      << "problem: " << problem_mode_name(p.mode) << "\n"
      << "pool: " << set.count() << "\n"
      << "train_count: " << p.train_count << "\n"
      << "seed: " << p.seed << "\n"
      << "k_spec: " << fmt_g17(p.k_spec.mean) << ' ' << fmt_g17(p.k_spec.variance) << ' '
      << fmt_g17(p.k_spec.width) << "\n"
      << "f_spec: " << fmt_g17(p.f_spec.mean) << ' ' << fmt_g17(p.f_spec.variance) << ' '
      << fmt_g17(p.f_spec.width) << "\n"
      << "coords_k: " << join_g17(set.layout.coords_k) << "\n"
      << "coords_u: " << join_g17(set.layout.coords_u) << "\n"
      << "coords_f: " << join_g17(set.layout.coords_f) << "\n"
      << "coords_b: " << join_g17(set.layout.coords_b) << "\n"
      << "data:\n";
  for (size_t i = 0; i < set.count(); ++i) out << join_g17(set.concat(i)) << "\n";
  if (!out) throw std::runtime_error("save_dataset: write failed");
}

SnapshotSet load_dataset(std::istream& in) {
  std::string magic;
  std::getline(in, magic);
  if (magic != "stochlat-dataset v1")
    throw std::runtime_error("load_dataset: bad magic '" + magic + "'");
  SnapshotSet set;
  DatasetProvenance& p = set.provenance;
  p.mode = parse_problem_mode(header_value(in, "problem"));
  size_t pool = std::stoull(header_value(in, "pool"));
  p.train_count = std::stoi(header_value(in, "train_count"));
  p.seed = std::stoull(header_value(in, "seed"));
  p.k_spec = parse_spec(header_value(in, "k_spec"));
  p.f_spec = parse_spec(header_value(in, "f_spec"));
  auto coords = [&](const char* key) {
    std::string v = header_value(in, key);
    return v.empty() ? std::vector<double>{} : split_doubles(v);
  };
  set.layout.coords_k = coords("coords_k");
  set.layout.coords_u = coords("coords_u");
  set.layout.coords_f = coords("coords_f");
  set.layout.coords_b = coords("coords_b");
  std::string marker;
  std::getline(in, marker);
  if (marker != "data:") throw std::runtime_error("load_dataset: missing data marker");

  set.snapshots.resize(pool);
  const SensorLayout& L = set.layout;
  for (size_t i = 0; i < pool; ++i) {
    std::string line;
    if (!std::getline(in, line))
      throw std::runtime_error("load_dataset: truncated at row " + std::to_string(i));
    std::vector<double> row = split_doubles(line);
    if (row.size() != L.total())
      throw std::runtime_error("load_dataset: row " + std::to_string(i) + " has " +
                               std::to_string(row.size()) + " fields, expected " +
                               std::to_string(L.total()));
    auto it = row.begin();
    Snapshot& s = set.snapshots[i];
    s.k.assign(it, it + L.n_k()); it += L.n_k();
    s.u.assign(it, it + L.n_u()); it += L.n_u();
    s.f.assign(it, it + L.n_f()); it += L.n_f();
    s.b.assign(it, it + L.n_b());
  }
  set.validate();
  return set;
}

void save_dataset_file(const std::string& path, const SnapshotSet& set) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  save_dataset(out, set);
}

SnapshotSet load_dataset_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return load_dataset(in);
}

}  // namespace stochlat
