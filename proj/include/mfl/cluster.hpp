#pragma once

// Brute-force machinery for the Mayer cluster expansion of the spatial
// partition function: connected-graph sums, a concrete Penrose tree-graph
// partition, Cayley counts and the cluster coefficients phi([k]) by tensor
// quadrature on the one-dimensional torus.

#include <cstdint>
#include <utility>
#include <vector>

#include "mfl/kernels.hpp"
#include "mfl/rng.hpp"

namespace mfl::cluster {

// Edges {i<j} of the complete graph on k vertices are numbered
// lexicographically; a graph is a bitmask over that numbering.
using EdgeMask = std::uint32_t;

int edge_index(int i, int j, int k);
int edge_count(int k);
std::pair<int, int> edge_vertices(int index, int k);
bool is_connected(EdgeMask edges, int k);

class EdgeWeights {
 public:
  explicit EdgeWeights(int k);
  int k() const { return k_; }
  double operator()(int i, int j) const { return h_[i * k_ + j]; }
  void set(int i, int j, double value);
  double edge(int index) const;

  // Symmetric weights with independent entries uniform in [lo, hi].
  static EdgeWeights random(int k, Engine& rng, double lo = -1.0, double hi = 1.0);

 private:
  int k_;
  std::vector<double> h_;
};

// All connected simple graphs on {0..k-1}, 2 <= k <= 5.
std::vector<EdgeMask> enumerate_connected_graphs(int k);

// sum over connected G of prod_{e in G} h_e.
double connected_graph_sum(const EdgeWeights& w);

struct LabeledTree {
  EdgeMask edges = 0;
  std::vector<int> parent;  // parent[0] == -1, root is vertex 0
  std::vector<int> depth;
};

// Labeled trees on k vertices decoded from all Pruefer sequences. Throws
// for k outside [2, 7].
std::vector<LabeledTree> enumerate_trees(int k);
std::int64_t cayley_count(int k);

// Penrose partition rooted at vertex 0: every connected graph G is
// T(G) plus a subset of R(T(G)), where T(G) assigns each vertex its
// lowest-index neighbour one BFS level closer to the root. R(T) holds
// the non-tree edges joining vertices of equal depth, and edges {i, j}
// with depth(j) = depth(i) + 1 and i > parent(j).
EdgeMask penrose_residual(const LabeledTree& tree, int k);

// sum over trees T of prod_{E(T)} h_e prod_{R(T)} (1 + h_e).
double penrose_tree_sum(const EdgeWeights& w);

// Mayer functions f = exp(-(beta/N) W) - 1, c0 = int f, h = (f - c0)/(1 + c0)
// tabulated on a uniform grid of the one-dimensional torus. c0 is the grid
// mean so that h has zero grid mean.
struct MayerFunctions {
  double beta = 0.0;
  int n_particles = 2;
  int grid_size = 0;
  std::vector<double> f;
  std::vector<double> h;
  double c0 = 0.0;
  double h_l1 = 0.0;
  double h_l2 = 0.0;
  double w_l2_squared = 0.0;  // ||W||_{L2}^2 (Parseval)
  double w_neg_sup = 0.0;     // ||W_-||_inf on the grid
};

MayerFunctions mayer_functions(const FourierKernel& kernel, int n_particles, double beta,
                               int grid_size);

struct PhiValue {
  double graph_route = 0.0;   // sum over connected graphs, then integrate
  double tree_route = 0.0;    // tree representation with bare trees removed
  double max_bare_tree = 0.0; // max over trees |int prod_{E(T)} h|
};

// phi([k]) for k in {2,3,4} by (k-1)-dimensional periodic quadrature with the
// last vertex pinned at the origin.
PhiValue phi_k(const MayerFunctions& mayer, int k);

namespace serial {
PhiValue phi_k(const MayerFunctions& mayer, int k);
}

// Doubles the grid until successive graph-route values differ by < tol.
PhiValue phi_k_refined(const FourierKernel& kernel, int n_particles, double beta, int k,
                       int start_grid = 16, double tol = 1e-9, int max_grid = 256);

// log Z_h by direct quadrature of int prod_{i<j} (1 + h(x_i - x_j)), N <= 4.
double exact_log_zh(const MayerFunctions& mayer);

struct TruncatedLogZh {
  double log_zh = 0.0;
  std::vector<double> phi;      // phi([k]) for k = 2..kmax
  double dropped_bound = 0.0;   // sum_{k=kmax+1}^{N} of the per-k cluster bound
};

// sum_{k=2}^{kmax} binom(N,k) phi([k]); phi([k]) depends only on |S| by
// exchangeability.
TruncatedLogZh log_zh_truncated(const MayerFunctions& mayer, int kmax, double c = 1.0);

struct VarphiBound {
  double lhs = 0.0;
  double rhs = 0.0;
  double minimal_c = 0.0;
  bool holds() const { return lhs <= rhs; }
};

// lhs = binom(N,k)|phi([k])|,
// rhs = exp(beta k ||W_-||_inf) C^k N^2 ||h||_2^2 (N ||h||_1)^{k-2}.
VarphiBound varphi_bound_check(const MayerFunctions& mayer, int k, double c);

// Cluster bound right-hand side alone (used for tail sums).
double varphi_bound_rhs(const MayerFunctions& mayer, int k, double c);

// |int h12 h23 h31| against ||h||_2^2 ||h||_1.
std::pair<double, double> cycle_trace_check(const MayerFunctions& mayer);

double binomial(int n, int k);

}  // namespace mfl::cluster
