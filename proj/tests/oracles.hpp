#ifndef EXPLICABLE_TESTS_ORACLES_HPP_
#define EXPLICABLE_TESTS_ORACLES_HPP_

// Independent reference computations used to freeze expected values. Nothing
// here calls into the library's algorithms.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <numeric>
#include <queue>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

struct Tree {
  std::vector<std::string> names;
  std::vector<std::pair<std::size_t, std::size_t>> edges;  // parent, child

  std::string edge_text() const {
    std::string out;
    for (auto [p, c] : edges) out += names[p] + "\t" + names[c] + "\n";
    return out;
  }
};

/// Random rooted tree with `n` nodes; node k > 0 attaches to a uniformly
/// chosen earlier node. Edge lines are shuffled.
inline Tree random_tree(std::size_t n, std::mt19937_64& rng) {
  Tree t;
  for (std::size_t k = 0; k < n; ++k) t.names.push_back("n" + std::to_string(k));
  for (std::size_t k = 1; k < n; ++k) {
    std::uniform_int_distribution<std::size_t> pick(0, k - 1);
    t.edges.emplace_back(pick(rng), k);
  }
  std::shuffle(t.edges.begin(), t.edges.end(), rng);
  return t;
}

/// All-pairs shortest path lengths by BFS over the undirected edge set.
inline std::vector<std::vector<std::size_t>> bfs_all_pairs(const Tree& t) {
  const std::size_t n = t.names.size();
  std::vector<std::vector<std::size_t>> adj(n);
  for (auto [p, c] : t.edges) {
    adj[p].push_back(c);
    adj[c].push_back(p);
  }
  const auto inf = static_cast<std::size_t>(-1);
  std::vector<std::vector<std::size_t>> dist(n, std::vector<std::size_t>(n, inf));
  for (std::size_t s = 0; s < n; ++s) {
    std::queue<std::size_t> q;
    q.push(s);
    dist[s][s] = 0;
    while (!q.empty()) {
      auto u = q.front();
      q.pop();
      for (auto v : adj[u]) {
        if (dist[s][v] == inf) {
          dist[s][v] = dist[s][u] + 1;
          q.push(v);
        }
      }
    }
  }
  return dist;
}

/// Central differences of f at x with step h.
inline std::vector<double> central_difference(const std::function<double(const std::vector<double>&)>& f,
                                              std::vector<double> x, double h) {
  std::vector<double> g(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double saved = x[j];
    x[j] = saved + h;
    const double up = f(x);
    x[j] = saved - h;
    const double down = f(x);
    x[j] = saved;
    g[j] = (up - down) / (2.0 * h);
  }
  return g;
}

/// Direct -sum w log p via the textbook softmax (no max shift), for
/// moderate logits only.
inline double naive_weighted_cce_of_logits(const std::vector<double>& w, const std::vector<double>& z) {
  double s = 0.0;
  for (double v : z) s += std::exp(v);
  double loss = 0.0;
  for (std::size_t j = 0; j < z.size(); ++j) loss -= w[j] * (z[j] - std::log(s));
  return loss;
}

/// Exact rational a/b.
struct Fraction {
  long long num = 0;
  long long den = 1;

  Fraction& operator+=(Fraction o) {
    const long long l = std::lcm(den, o.den);
    num = num * (l / den) + o.num * (l / o.den);
    den = l;
    const long long g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
    return *this;
  }
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

struct BruteScores {
  std::vector<long long> hard;
  std::vector<Fraction> soft;
};

/// Enumerates, for every instance and classifier, whether that classifier
/// beats or ties every rival by pairwise comparison.
inline BruteScores brute_force_scores(const std::vector<std::vector<double>>& v_per_instance,
                                      std::size_t classifiers) {
  BruteScores out{std::vector<long long>(classifiers, 0), std::vector<Fraction>(classifiers)};
  for (const auto& v : v_per_instance) {
    std::vector<bool> at_max(classifiers, true), strict(classifiers, true);
    for (std::size_t c = 0; c < classifiers; ++c) {
      for (std::size_t r = 0; r < classifiers; ++r) {
        if (r == c) continue;
        if (v[r] > v[c]) at_max[c] = false;
        if (!(v[c] > v[r])) strict[c] = false;
      }
    }
    long long ties = 0;
    for (std::size_t c = 0; c < classifiers; ++c) ties += at_max[c] ? 1 : 0;
    for (std::size_t c = 0; c < classifiers; ++c) {
      if (strict[c]) ++out.hard[c];
      if (at_max[c]) out.soft[c] += Fraction{1, ties};
    }
  }
  return out;
}

}  // namespace oracle

#endif  // EXPLICABLE_TESTS_ORACLES_HPP_
