#include "transport.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <utility>

namespace metagrid::detail {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double cost_slack(double reference) { return 1e-9 * std::max(1.0, std::abs(reference)); }

// Successive shortest paths with Dijkstra on reduced costs. All arc costs are
// nonnegative, so zero initial potentials are valid.
class FlowNetwork {
 public:
  struct Edge {
    int to = 0;
    int rev = 0;
    int cap = 0;
    double cost = 0.0;
  };

  explicit FlowNetwork(int nodes) : adj_(nodes), potential_(nodes, 0.0) {}

  std::pair<int, int> add_edge(int from, int to, int cap, double cost) {
    const int fwd = static_cast<int>(adj_[from].size());
    const int bwd = static_cast<int>(adj_[to].size()) + (from == to ? 1 : 0);
    adj_[from].push_back({to, bwd, cap, cost});
    adj_[to].push_back({from, fwd, 0, -cost});
    return {from, fwd};
  }

  // Primal-dual: one Dijkstra to refresh the potentials, then a blocking flow
  // over the arcs whose reduced cost is zero.
  int run(int source, int sink, int required) {
    const int n = static_cast<int>(adj_.size());
    double max_cost = 0.0;
    for (const auto& list : adj_)
      for (const Edge& e : list) max_cost = std::max(max_cost, std::abs(e.cost));
    tolerance_ = cost_slack(max_cost);

    std::vector<double> dist(n);
    std::vector<char> settled(n);
    int sent = 0;
    while (sent < required) {
      // Dense Dijkstra: the networks are small and nearly complete bipartite.
      std::fill(dist.begin(), dist.end(), kInf);
      std::fill(settled.begin(), settled.end(), 0);
      dist[source] = 0.0;
      while (true) {
        int u = -1;
        for (int v = 0; v < n; ++v)
          if (!settled[v] && dist[v] < kInf && (u < 0 || dist[v] < dist[u])) u = v;
        if (u < 0 || u == sink) break;
        settled[u] = 1;
        for (const Edge& e : adj_[u]) {
          if (e.cap <= 0 || settled[e.to]) continue;
          const double nd = dist[u] + std::max(0.0, e.cost + potential_[u] - potential_[e.to]);
          if (nd < dist[e.to]) dist[e.to] = nd;
        }
      }
      if (dist[sink] == kInf) break;

      // Nodes beyond the sink keep their reduced costs nonnegative when
      // capped at its distance.
      const double reach = dist[sink];
      for (int v = 0; v < n; ++v) potential_[v] += std::min(dist[v], reach);

      while (sent < required && admissible_levels(source, sink)) {
        next_.assign(n, 0);
        while (sent < required) {
          const int pushed = augment(source, sink, required - sent);
          if (pushed == 0) break;
          sent += pushed;
        }
      }
    }
    return sent;
  }

  const Edge& edge(std::pair<int, int> handle) const { return adj_[handle.first][handle.second]; }
  const std::vector<std::vector<Edge>>& adjacency() const { return adj_; }
  double potential(int v) const { return potential_[v]; }

  // True when the residual graph holds a zero-cost cycle that is not just an
  // edge paired with its own reverse, i.e. another flow of equal cost exists.
  bool has_alternative_optimum(double tolerance) const {
    const int n = static_cast<int>(adj_.size());
    std::vector<int> root(n);
    std::iota(root.begin(), root.end(), 0);
    std::function<int(int)> find = [&](int v) { return root[v] == v ? v : root[v] = find(root[v]); };

    std::vector<std::pair<int, int>> directed;
    for (int u = 0; u < n; ++u) {
      for (const Edge& e : adj_[u]) {
        if (e.cap <= 0) continue;
        const double rc = e.cost + potential_[u] - potential_[e.to];
        if (rc > tolerance) continue;
        const Edge& back = adj_[e.to][e.rev];
        if (back.cap > 0) {
          if (u < e.to) {
            const int a = find(u);
            const int b = find(e.to);
            if (a == b) return true;
            root[a] = b;
          }
        } else {
          directed.emplace_back(u, e.to);
        }
      }
    }

    std::vector<std::vector<int>> out(n);
    for (auto [u, v] : directed) {
      const int a = find(u);
      const int b = find(v);
      if (a == b) return true;
      out[a].push_back(b);
    }
    // 0 = unvisited, 1 = on stack, 2 = done
    std::vector<int> color(n, 0);
    for (int start = 0; start < n; ++start) {
      if (color[start] != 0) continue;
      std::vector<std::pair<int, std::size_t>> stack{{start, 0}};
      color[start] = 1;
      while (!stack.empty()) {
        auto& [u, next] = stack.back();
        if (next < out[u].size()) {
          const int v = out[u][next++];
          if (color[v] == 1) return true;
          if (color[v] == 0) {
            color[v] = 1;
            stack.emplace_back(v, 0);
          }
        } else {
          color[u] = 2;
          stack.pop_back();
        }
      }
    }
    return false;
  }

 private:
  bool admissible(int u, const Edge& e) const {
    return e.cap > 0 && e.cost + potential_[u] - potential_[e.to] <= tolerance_;
  }

  bool admissible_levels(int source, int sink) {
    level_.assign(adj_.size(), -1);
    std::vector<int> queue{source};
    level_[source] = 0;
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const int u = queue[head];
      for (const Edge& e : adj_[u]) {
        if (level_[e.to] >= 0 || !admissible(u, e)) continue;
        level_[e.to] = level_[u] + 1;
        queue.push_back(e.to);
      }
    }
    return level_[sink] >= 0;
  }

  int augment(int u, int sink, int limit) {
    if (u == sink) return limit;
    for (int& k = next_[u]; k < static_cast<int>(adj_[u].size()); ++k) {
      Edge& e = adj_[u][k];
      if (level_[e.to] != level_[u] + 1 || !admissible(u, e)) continue;
      const int pushed = augment(e.to, sink, std::min(limit, e.cap));
      if (pushed > 0) {
        e.cap -= pushed;
        adj_[e.to][e.rev].cap += pushed;
        return pushed;
      }
    }
    return 0;
  }

  std::vector<std::vector<Edge>> adj_;
  std::vector<double> potential_;
  std::vector<int> level_;
  std::vector<int> next_;
  double tolerance_ = 0.0;
};

class BranchAndBound {
 public:
  BranchAndBound(const TransportProblem& problem, TransportStats& stats) : problem_(problem), stats_(stats) {
    job_vars_.resize(problem.demand.size());
    for (int v = 0; v < static_cast<int>(problem.vars.size()); ++v) job_vars_[problem.vars[v].job].push_back(v);
    by_budget_ = job_vars_;
    for (auto& list : by_budget_)
      std::stable_sort(list.begin(), list.end(),
                       [&](int a, int b) { return problem.vars[a].budget < problem.vars[b].budget; });
  }

  /// Best solution strictly cheaper than `incumbent_cost`.
  std::optional<std::vector<int>> improve(std::vector<int> lower, std::vector<int> upper,
                                          double incumbent_cost = kInf) {
    first_ = false;
    best_.reset();
    best_cost_ = incumbent_cost;
    done_ = false;
    explore(lower, upper);
    return best_;
  }

  /// First solution found with cost <= cutoff.
  std::optional<std::vector<int>> first_within(std::vector<int> lower, std::vector<int> upper, double cutoff) {
    first_ = true;
    best_.reset();
    best_cost_ = cutoff;
    done_ = false;
    explore(lower, upper);
    return best_;
  }

  double best_cost() const { return best_cost_; }

 private:
  // Cheapest possible budget use of every job under the bounds, ignoring
  // capacity. A job that cannot stay within its limit prunes the node.
  bool budget_reachable(const std::vector<int>& lower, const std::vector<int>& upper) const {
    for (std::size_t j = 0; j < by_budget_.size(); ++j) {
      int remaining = problem_.demand[j];
      double used = 0.0;
      for (int v : by_budget_[j]) {
        remaining -= lower[v];
        used += problem_.vars[v].budget * lower[v];
      }
      if (remaining < 0) return false;
      for (int v : by_budget_[j]) {
        if (remaining == 0) break;
        const int take = std::min(remaining, upper[v] - lower[v]);
        used += problem_.vars[v].budget * take;
        remaining -= take;
      }
      if (remaining > 0) return false;
      if (used > problem_.budget_limit[j] + cost_slack(problem_.budget_limit[j])) return false;
    }
    return true;
  }

  void explore(std::vector<int>& lower, std::vector<int>& upper) {
    if (done_) return;
    ++stats_.nodes;
    if (!budget_reachable(lower, upper)) return;
    ++stats_.flow_solves;
    auto flow = solve_flow(problem_, lower, upper);
    if (!flow) return;
    if (first_) {
      if (flow->cost > best_cost_ + cost_slack(best_cost_)) return;
    } else if (best_cost_ < kInf && flow->cost >= best_cost_ - cost_slack(best_cost_)) {
      return;
    }

    int worst_job = -1;
    double worst_excess = 0.0;
    for (std::size_t j = 0; j < job_vars_.size(); ++j) {
      double used = 0.0;
      for (int v : job_vars_[j]) used += problem_.vars[v].budget * flow->value[v];
      const double limit = problem_.budget_limit[j];
      if (used <= limit + cost_slack(limit)) continue;
      const double excess = (used - limit) / std::max(1.0, limit);
      if (excess > worst_excess) {
        worst_excess = excess;
        worst_job = static_cast<int>(j);
      }
    }
    if (worst_job < 0) {
      best_ = std::move(flow->value);
      best_cost_ = flow->cost;
      if (first_) done_ = true;
      return;
    }

    int pick = -1;
    for (int v : job_vars_[worst_job]) {
      if (flow->value[v] <= 0 || lower[v] == upper[v]) continue;
      if (pick < 0 || problem_.vars[v].budget > problem_.vars[pick].budget) pick = v;
    }
    // Every used variable of the job is fixed, so its budget row stays violated.
    if (pick < 0) return;

    const int value = flow->value[pick];
    const int lo = lower[pick];
    const int hi = upper[pick];
    if (value - 1 >= lo) {
      upper[pick] = value - 1;
      explore(lower, upper);
      upper[pick] = hi;
    }
    lower[pick] = upper[pick] = value;
    explore(lower, upper);
    lower[pick] = lo;
    upper[pick] = hi;
    if (value + 1 <= hi) {
      lower[pick] = value + 1;
      explore(lower, upper);
      lower[pick] = lo;
    }
  }

  const TransportProblem& problem_;
  TransportStats& stats_;
  std::vector<std::vector<int>> job_vars_;
  std::vector<std::vector<int>> by_budget_;
  bool first_ = false;
  bool done_ = false;
  std::optional<std::vector<int>> best_;
  double best_cost_ = kInf;
};

bool within_budgets(const TransportProblem& problem, const std::vector<int>& value) {
  std::vector<double> used(problem.demand.size(), 0.0);
  for (std::size_t v = 0; v < problem.vars.size(); ++v) used[problem.vars[v].job] += problem.vars[v].budget * value[v];
  for (std::size_t j = 0; j < used.size(); ++j)
    if (used[j] > problem.budget_limit[j] + cost_slack(problem.budget_limit[j])) return false;
  return true;
}

double total_cost(const TransportProblem& problem, const std::vector<int>& value) {
  double cost = 0.0;
  for (std::size_t v = 0; v < problem.vars.size(); ++v) cost += problem.vars[v].cost * value[v];
  return cost;
}

}  // namespace

std::optional<FlowSolution> solve_flow(const TransportProblem& problem, std::span<const int> lower,
                                       std::span<const int> upper, bool want_duals) {
  const int jobs = static_cast<int>(problem.demand.size());
  const int resources = static_cast<int>(problem.capacity.size());
  std::vector<int> demand = problem.demand;
  std::vector<int> capacity = problem.capacity;
  for (std::size_t v = 0; v < problem.vars.size(); ++v) {
    if (lower[v] > upper[v]) return std::nullopt;
    demand[problem.vars[v].job] -= lower[v];
    capacity[problem.vars[v].resource] -= lower[v];
  }
  if (std::any_of(demand.begin(), demand.end(), [](int d) { return d < 0; })) return std::nullopt;
  if (std::any_of(capacity.begin(), capacity.end(), [](int c) { return c < 0; })) return std::nullopt;

  const int source = 0;
  const int sink = jobs + resources + 1;
  FlowNetwork net(jobs + resources + 2);
  int required = 0;
  for (int j = 0; j < jobs; ++j) {
    if (demand[j] > 0) net.add_edge(source, 1 + j, demand[j], 0.0);
    required += demand[j];
  }
  std::vector<std::pair<int, int>> handle(problem.vars.size(), {-1, -1});
  for (std::size_t v = 0; v < problem.vars.size(); ++v) {
    const auto& var = problem.vars[v];
    const int room = upper[v] - lower[v];
    if (room <= 0 || capacity[var.resource] <= 0 || demand[var.job] <= 0) continue;
    handle[v] = net.add_edge(1 + var.job, 1 + jobs + var.resource, room, var.cost);
  }
  for (int i = 0; i < resources; ++i)
    if (capacity[i] > 0) net.add_edge(1 + jobs + i, sink, capacity[i], 0.0);

  if (net.run(source, sink, required) < required) return std::nullopt;

  FlowSolution out;
  out.value.assign(lower.begin(), lower.end());
  double max_cost = 0.0;
  for (std::size_t v = 0; v < problem.vars.size(); ++v) {
    max_cost = std::max(max_cost, std::abs(problem.vars[v].cost));
    if (handle[v].first < 0) continue;
    const auto& e = net.edge(handle[v]);
    out.value[v] += (upper[v] - lower[v]) - e.cap;
  }
  out.cost = total_cost(problem, out.value);
  if (want_duals) {
    out.reduced_cost.resize(problem.vars.size());
    for (std::size_t v = 0; v < problem.vars.size(); ++v) {
      const auto& var = problem.vars[v];
      out.reduced_cost[v] = var.cost + net.potential(1 + var.job) - net.potential(1 + jobs + var.resource);
    }
    out.unique = !net.has_alternative_optimum(cost_slack(max_cost));
  }
  return out;
}

std::optional<std::vector<int>> solve_transport(const TransportProblem& problem, TransportStats* stats) {
  TransportStats local;
  TransportStats& st = stats ? *stats : local;
  const std::size_t count = problem.vars.size();
  std::vector<int> lower(count, 0);
  std::vector<int> upper(count);
  double max_cost = 0.0;
  for (std::size_t v = 0; v < count; ++v) {
    upper[v] = problem.vars[v].upper;
    max_cost = std::max(max_cost, std::abs(problem.vars[v].cost));
  }

  ++st.flow_solves;
  auto root = solve_flow(problem, lower, upper, true);
  if (!root) return std::nullopt;

  BranchAndBound search(problem, st);
  std::vector<int> witness;
  double optimum = 0.0;
  if (within_budgets(problem, root->value)) {
    st.root_tight = true;
    witness = root->value;
    optimum = root->cost;
    if (root->unique) {
      st.unique = true;
      return witness;
    }
    // Every optimum of the full problem is also a flow optimum, so variables
    // with nonzero reduced cost sit at the bound complementary slackness picks.
    const double slack = cost_slack(max_cost);
    for (std::size_t v = 0; v < count; ++v) {
      const auto& var = problem.vars[v];
      if (upper[v] == 0 || problem.capacity[var.resource] == 0 || problem.demand[var.job] == 0)
        upper[v] = 0;
      else if (root->reduced_cost[v] > slack)
        upper[v] = lower[v];
      else if (root->reduced_cost[v] < -slack)
        lower[v] = upper[v];
    }
  } else {
    auto best = search.improve(lower, upper);
    if (!best) return std::nullopt;
    witness = std::move(*best);
    optimum = total_cost(problem, witness);
  }

  // Lexicographic descent over the optimal face: fix variables in order, each
  // to the smallest value that still admits a completion within the optimum.
  const double cutoff = optimum + cost_slack(optimum);
  for (std::size_t k = 0; k < count; ++k) {
    if (lower[k] == upper[k]) continue;
    bool fixed = false;
    for (int v = lower[k]; v < witness[k]; ++v) {
      auto lo = lower;
      auto hi = upper;
      lo[k] = hi[k] = v;
      if (auto found = search.first_within(std::move(lo), std::move(hi), cutoff)) {
        witness = std::move(*found);
        lower[k] = upper[k] = v;
        fixed = true;
        break;
      }
    }
    if (!fixed) lower[k] = upper[k] = witness[k];
  }
  return witness;
}

std::optional<std::vector<int>> find_feasible(const TransportProblem& problem) {
  TransportStats stats;
  std::vector<int> lower(problem.vars.size(), 0);
  std::vector<int> upper(problem.vars.size());
  for (std::size_t v = 0; v < problem.vars.size(); ++v) upper[v] = problem.vars[v].upper;
  BranchAndBound search(problem, stats);
  return search.first_within(std::move(lower), std::move(upper), kInf);
}

}  // namespace metagrid::detail
