#include "mfl/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

#include "mfl/stats.hpp"

namespace mfl::cluster {

int edge_count(int k) { return k * (k - 1) / 2; }

int edge_index(int i, int j, int k) {
  if (i > j) std::swap(i, j);
  // edges (0,1),(0,2),...,(0,k-1),(1,2),...
  return i * k - i * (i + 1) / 2 + (j - i - 1);
}

std::pair<int, int> edge_vertices(int index, int k) {
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j)
      if (edge_index(i, j, k) == index) return {i, j};
  throw std::out_of_range("edge_vertices: bad edge index");
}

bool is_connected(EdgeMask edges, int k) {
  std::uint32_t reached = 1u, frontier = 1u;
  while (frontier) {
    std::uint32_t next = 0;
    for (int e = 0; e < edge_count(k); ++e) {
      if (!(edges >> e & 1u)) continue;
      const auto [i, j] = edge_vertices(e, k);
      if (frontier >> i & 1u) next |= 1u << j;
      if (frontier >> j & 1u) next |= 1u << i;
    }
    frontier = next & ~reached;
    reached |= next;
  }
  return reached == (1u << k) - 1u;
}

EdgeWeights::EdgeWeights(int k) : k_(k), h_(static_cast<std::size_t>(k) * k, 0.0) {
  if (k < 2) throw std::invalid_argument("EdgeWeights: need k >= 2");
}

void EdgeWeights::set(int i, int j, double value) {
  if (i == j) throw std::invalid_argument("EdgeWeights: diagonal must stay zero");
  h_[i * k_ + j] = value;
  h_[j * k_ + i] = value;
}

double EdgeWeights::edge(int index) const {
  const auto [i, j] = edge_vertices(index, k_);
  return (*this)(i, j);
}

EdgeWeights EdgeWeights::random(int k, Engine& rng, double lo, double hi) {
  EdgeWeights w(k);
  std::uniform_real_distribution<double> u(lo, hi);
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j) w.set(i, j, u(rng));
  return w;
}

std::vector<EdgeMask> enumerate_connected_graphs(int k) {
  if (k < 2 || k > 5) throw std::invalid_argument("enumerate_connected_graphs: need 2 <= k <= 5");
  const EdgeMask total = 1u << edge_count(k);
  std::vector<EdgeMask> out;
  for (EdgeMask g = 1; g < total; ++g)
    if (is_connected(g, k)) out.push_back(g);
  return out;
}

namespace {

// Cached per-k tables so that quadrature loops do not re-enumerate.
struct GraphTables {
  std::vector<EdgeMask> connected;
  std::vector<LabeledTree> trees;
  std::vector<EdgeMask> residual;
};

const GraphTables& tables(int k) {
  static const std::vector<GraphTables> cache = [] {
    std::vector<GraphTables> t(6);
    for (int kk = 2; kk <= 5; ++kk) {
      t[kk].connected = enumerate_connected_graphs(kk);
      t[kk].trees = enumerate_trees(kk);
      for (const auto& tr : t[kk].trees) t[kk].residual.push_back(penrose_residual(tr, kk));
    }
    return t;
  }();
  if (k < 2 || k > 5) throw std::invalid_argument("graph tables: need 2 <= k <= 5");
  return cache[k];
}

double edge_product(EdgeMask mask, const double* h, int n_edges) {
  double p = 1.0;
  for (int e = 0; e < n_edges; ++e)
    if (mask >> e & 1u) p *= h[e];
  return p;
}

double connected_sum_flat(const GraphTables& t, const double* h, int n_edges) {
  double s = 0.0;
  for (EdgeMask g : t.connected) s += edge_product(g, h, n_edges);
  return s;
}

}  // namespace

double connected_graph_sum(const EdgeWeights& w) {
  const int k = w.k();
  std::vector<double> h(edge_count(k));
  for (int e = 0; e < edge_count(k); ++e) h[e] = w.edge(e);
  return connected_sum_flat(tables(k), h.data(), edge_count(k));
}

std::vector<LabeledTree> enumerate_trees(int k) {
  if (k < 2 || k > 7) throw std::invalid_argument("enumerate_trees: need 2 <= k <= 7");
  std::vector<LabeledTree> out;
  std::set<EdgeMask> seen;
  const int len = k - 2;
  std::int64_t n_seq = 1;
  for (int i = 0; i < len; ++i) n_seq *= k;
  std::vector<int> seq(len), degree(k);
  for (std::int64_t code = 0; code < n_seq; ++code) {
    std::int64_t c = code;
    for (int i = 0; i < len; ++i) {
      seq[i] = static_cast<int>(c % k);
      c /= k;
    }
    // standard Pruefer decoding
    std::fill(degree.begin(), degree.end(), 1);
    for (int s : seq) ++degree[s];
    EdgeMask mask = 0;
    for (int s : seq) {
      int leaf = 0;
      while (degree[leaf] != 1) ++leaf;
      mask |= 1u << edge_index(leaf, s, k);
      --degree[leaf];
      --degree[s];
    }
    int u = -1, v = -1;
    for (int i = 0; i < k; ++i)
      if (degree[i] == 1) (u < 0 ? u : v) = i;
    mask |= 1u << edge_index(u, v, k);
    if (!seen.insert(mask).second) continue;

    LabeledTree t;
    t.edges = mask;
    t.parent.assign(k, -2);
    t.depth.assign(k, -1);
    t.parent[0] = -1;
    t.depth[0] = 0;
    std::vector<int> queue{0};
    for (std::size_t q = 0; q < queue.size(); ++q) {
      const int a = queue[q];
      for (int b = 0; b < k; ++b)
        if (b != a && t.depth[b] < 0 && (mask >> edge_index(a, b, k) & 1u)) {
          t.parent[b] = a;
          t.depth[b] = t.depth[a] + 1;
          queue.push_back(b);
        }
    }
    if (static_cast<int>(queue.size()) != k)
      throw std::logic_error("enumerate_trees: decoded graph is not spanning");
    out.push_back(std::move(t));
  }
  return out;
}

std::int64_t cayley_count(int k) { return static_cast<std::int64_t>(enumerate_trees(k).size()); }

EdgeMask penrose_residual(const LabeledTree& tree, int k) {
  EdgeMask r = 0;
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j) {
      const int e = edge_index(i, j, k);
      if (tree.edges >> e & 1u) continue;
      const int di = tree.depth[i], dj = tree.depth[j];
      bool admissible = di == dj;
      if (dj == di + 1) admissible = i > tree.parent[j];
      if (di == dj + 1) admissible = j > tree.parent[i];
      if (admissible) r |= 1u << e;
    }
  return r;
}

namespace {

double penrose_sum_flat(const GraphTables& t, const double* h, int n_edges, double* bare) {
  double s = 0.0, b = 0.0;
  for (std::size_t i = 0; i < t.trees.size(); ++i) {
    const double tree_part = edge_product(t.trees[i].edges, h, n_edges);
    double res = 1.0;
    for (int e = 0; e < n_edges; ++e)
      if (t.residual[i] >> e & 1u) res *= 1.0 + h[e];
    s += tree_part * res;
    b += tree_part;
  }
  if (bare) *bare = b;
  return s;
}

}  // namespace

double penrose_tree_sum(const EdgeWeights& w) {
  const int k = w.k();
  std::vector<double> h(edge_count(k));
  for (int e = 0; e < edge_count(k); ++e) h[e] = w.edge(e);
  return penrose_sum_flat(tables(k), h.data(), edge_count(k), nullptr);
}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

MayerFunctions mayer_functions(const FourierKernel& kernel, int n_particles, double beta,
                               int grid_size) {
  if (kernel.dimension() != 1) throw std::invalid_argument("mayer_functions: requires d = 1");
  if (grid_size < 4 * kernel.cutoff())
    throw std::invalid_argument("mayer_functions: grid_size must be >= 4*cutoff");
  MayerFunctions m;
  m.beta = beta;
  m.n_particles = n_particles;
  m.grid_size = grid_size;
  const auto w = kernel.sample_grid(grid_size);
  m.f.resize(grid_size);
  for (int i = 0; i < grid_size; ++i) m.f[i] = std::expm1(-(beta / n_particles) * w[i]);
  m.c0 = pairwise_sum(m.f) / grid_size;
  m.h.resize(grid_size);
  std::vector<double> a(grid_size), sq(grid_size);
  for (int i = 0; i < grid_size; ++i) {
    m.h[i] = (m.f[i] - m.c0) / (1.0 + m.c0);
    a[i] = std::abs(m.h[i]);
    sq[i] = m.h[i] * m.h[i];
  }
  m.h_l1 = pairwise_sum(a) / grid_size;
  m.h_l2 = std::sqrt(pairwise_sum(sq) / grid_size);
  m.w_l2_squared = kernel.l2_squared();
  for (double x : w) m.w_neg_sup = std::max(m.w_neg_sup, -x);
  return m;
}

namespace {

int wrap(int a, int n) { return ((a % n) + n) % n; }

// Fills the k(k-1)/2 edge values at grid point (idx_0..idx_{k-2}, 0).
void edge_values(const MayerFunctions& m, int k, const int* idx, double* h) {
  const int n = m.grid_size;
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j) {
      const int xi = i < k - 1 ? idx[i] : 0;
      const int xj = j < k - 1 ? idx[j] : 0;
      h[edge_index(i, j, k)] = m.h[wrap(xi - xj, n)];
    }
}

struct PointSums {
  double graph = 0.0;
  double tree = 0.0;
  std::vector<double> bare;  // per tree
};

PointSums accumulate_slice(const MayerFunctions& m, int k, int first_index) {
  const auto& t = tables(k);
  const int n = m.grid_size;
  const int ne = edge_count(k);
  const int free_dims = k - 1;
  std::int64_t inner = 1;
  for (int i = 1; i < free_dims; ++i) inner *= n;
  PointSums out;
  out.bare.assign(t.trees.size(), 0.0);
  std::vector<double> graph_vals(inner), tree_vals(inner);
  std::vector<std::vector<double>> bare_vals(t.trees.size(), std::vector<double>(inner));
  int idx[4] = {first_index, 0, 0, 0};
  double h[10];
  for (std::int64_t r = 0; r < inner; ++r) {
    std::int64_t c = r;
    for (int d = free_dims - 1; d >= 1; --d) {
      idx[d] = static_cast<int>(c % n);
      c /= n;
    }
    edge_values(m, k, idx, h);
    graph_vals[r] = connected_sum_flat(t, h, ne);
    double bare_total = 0.0;
    const double pen = penrose_sum_flat(t, h, ne, &bare_total);
    tree_vals[r] = pen - bare_total;
    for (std::size_t ti = 0; ti < t.trees.size(); ++ti)
      bare_vals[ti][r] = edge_product(t.trees[ti].edges, h, ne);
  }
  out.graph = pairwise_sum(graph_vals);
  out.tree = pairwise_sum(tree_vals);
  for (std::size_t ti = 0; ti < t.trees.size(); ++ti) out.bare[ti] = pairwise_sum(bare_vals[ti]);
  return out;
}

PhiValue reduce_slices(const std::vector<PointSums>& slices, int k, int n) {
  const double volume = std::pow(static_cast<double>(n), k - 1);
  std::vector<double> g(slices.size()), t(slices.size());
  for (std::size_t i = 0; i < slices.size(); ++i) {
    g[i] = slices[i].graph;
    t[i] = slices[i].tree;
  }
  PhiValue out;
  out.graph_route = pairwise_sum(g) / volume;
  out.tree_route = pairwise_sum(t) / volume;
  const std::size_t n_trees = slices.front().bare.size();
  for (std::size_t ti = 0; ti < n_trees; ++ti) {
    std::vector<double> b(slices.size());
    for (std::size_t i = 0; i < slices.size(); ++i) b[i] = slices[i].bare[ti];
    out.max_bare_tree = std::max(out.max_bare_tree, std::abs(pairwise_sum(b) / volume));
  }
  return out;
}

void check_phi_args(const MayerFunctions& m, int k) {
  if (k < 2 || k > 4) throw std::invalid_argument("phi_k: k must be in {2,3,4}");
  if (m.grid_size < 1) throw std::invalid_argument("phi_k: empty Mayer table");
}

}  // namespace

PhiValue phi_k(const MayerFunctions& mayer, int k) {
  check_phi_args(mayer, k);
  const int n = mayer.grid_size;
  std::vector<PointSums> slices(n);
#pragma omp parallel for schedule(dynamic)
  for (int a = 0; a < n; ++a) slices[a] = accumulate_slice(mayer, k, a);
  return reduce_slices(slices, k, n);
}

namespace serial {
PhiValue phi_k(const MayerFunctions& mayer, int k) {
  check_phi_args(mayer, k);
  const int n = mayer.grid_size;
  std::vector<PointSums> slices(n);
  for (int a = 0; a < n; ++a) slices[a] = accumulate_slice(mayer, k, a);
  return reduce_slices(slices, k, n);
}
}  // namespace serial

PhiValue phi_k_refined(const FourierKernel& kernel, int n_particles, double beta, int k,
                       int start_grid, double tol, int max_grid) {
  int n = std::max(start_grid, 4 * kernel.cutoff());
  PhiValue prev = phi_k(mayer_functions(kernel, n_particles, beta, n), k);
  while (2 * n <= max_grid) {
    n *= 2;
    PhiValue next = phi_k(mayer_functions(kernel, n_particles, beta, n), k);
    const bool done = std::abs(next.graph_route - prev.graph_route) < tol;
    prev = next;
    if (done) break;
  }
  return prev;
}

double exact_log_zh(const MayerFunctions& m) {
  const int big_n = m.n_particles;
  if (big_n < 2 || big_n > 4) throw std::invalid_argument("exact_log_zh: need 2 <= N <= 4");
  const int n = m.grid_size;
  const int free_dims = big_n - 1;
  std::int64_t inner = 1;
  for (int i = 1; i < free_dims; ++i) inner *= n;
  std::vector<double> slices(n);
#pragma omp parallel for schedule(static)
  for (int a = 0; a < n; ++a) {
    std::vector<double> vals(inner);
    int idx[4] = {a, 0, 0, 0};
    for (std::int64_t r = 0; r < inner; ++r) {
      std::int64_t c = r;
      for (int d = free_dims - 1; d >= 1; --d) {
        idx[d] = static_cast<int>(c % n);
        c /= n;
      }
      double p = 1.0;
      for (int i = 0; i < big_n; ++i)
        for (int j = i + 1; j < big_n; ++j) {
          const int xi = i < big_n - 1 ? idx[i] : 0;
          const int xj = j < big_n - 1 ? idx[j] : 0;
          p *= 1.0 + m.h[wrap(xi - xj, n)];
        }
      vals[r] = p;
    }
    slices[a] = pairwise_sum(vals);
  }
  return std::log(pairwise_sum(slices) / std::pow(static_cast<double>(n), free_dims));
}

double varphi_bound_rhs(const MayerFunctions& m, int k, double c) {
  const double n = m.n_particles;
  return std::exp(m.beta * k * m.w_neg_sup) * std::pow(c, k) * n * n * m.h_l2 * m.h_l2 *
         std::pow(n * m.h_l1, k - 2);
}

TruncatedLogZh log_zh_truncated(const MayerFunctions& mayer, int kmax, double c) {
  if (kmax < 2 || kmax > 4) throw std::invalid_argument("log_zh_truncated: kmax in {2,3,4}");
  TruncatedLogZh out;
  for (int k = 2; k <= std::min(kmax, mayer.n_particles); ++k) {
    const double phi = phi_k(mayer, k).graph_route;
    out.phi.push_back(phi);
    out.log_zh += binomial(mayer.n_particles, k) * phi;
  }
  for (int k = kmax + 1; k <= mayer.n_particles; ++k) out.dropped_bound += varphi_bound_rhs(mayer, k, c);
  return out;
}

VarphiBound varphi_bound_check(const MayerFunctions& mayer, int k, double c) {
  VarphiBound out;
  out.lhs = binomial(mayer.n_particles, k) * std::abs(phi_k(mayer, k).graph_route);
  out.rhs = varphi_bound_rhs(mayer, k, c);
  const double unit = varphi_bound_rhs(mayer, k, 1.0);
  out.minimal_c = unit > 0 ? std::pow(out.lhs / unit, 1.0 / k) : 0.0;
  return out;
}

std::pair<double, double> cycle_trace_check(const MayerFunctions& m) {
  const int n = m.grid_size;
  std::vector<double> rows(n);
  for (int a = 0; a < n; ++a) {
    std::vector<double> v(n);
    for (int b = 0; b < n; ++b) v[b] = m.h[wrap(a - b, n)] * m.h[b] * m.h[a];
    rows[a] = pairwise_sum(v);
  }
  const double lhs = std::abs(pairwise_sum(rows)) / (static_cast<double>(n) * n);
  return {lhs, m.h_l2 * m.h_l2 * m.h_l1};
}

}  // namespace mfl::cluster
