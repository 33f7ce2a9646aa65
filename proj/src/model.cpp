/* Copyright 2026 The tpsched Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "tpsched/model.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <queue>

#include <fmt/format.h>

namespace tpsched {

//---------------------------------------------------------------------------
void TaskGraph::add_task(const TaskId& task) {
  tasks_.insert(task);
  parents_[task];
  children_[task];
}

void TaskGraph::add_edge(const TaskId& parent, const TaskId& child, Bytes file_size) {
  Edge key{parent, child};
  if (edges_.contains(key))
    throw ModelError(fmt::format("duplicate edge {} -> {}", parent.str(), child.str()));
  edges_.emplace(key, file_size);
  children_[parent].insert(child);
  parents_[child].insert(parent);
}

void TaskGraph::remove_edge(const TaskId& parent, const TaskId& child) {
  edges_.erase({parent, child});
  if (auto it = children_.find(parent); it != children_.end()) it->second.erase(child);
  if (auto it = parents_.find(child); it != parents_.end()) it->second.erase(parent);
}

void TaskGraph::remove_task(const TaskId& task) {
  for (const auto& p : parents(task)) remove_edge(p, task);
  for (const auto& c : children(task)) remove_edge(task, c);
  tasks_.erase(task);
  parents_.erase(task);
  children_.erase(task);
  origins_.erase(task);
}

void TaskGraph::set_origin(const TaskId& duplicate, const TaskId& original) {
  origins_[duplicate] = origin(original);
}

const TaskId& TaskGraph::origin(const TaskId& task) const {
  auto it = origins_.find(task);
  return it == origins_.end() ? task : it->second;
}

std::vector<TaskId> TaskGraph::parents(const TaskId& task) const {
  auto it = parents_.find(task);
  if (it == parents_.end()) return {};
  return {it->second.begin(), it->second.end()};
}

std::vector<TaskId> TaskGraph::children(const TaskId& task) const {
  auto it = children_.find(task);
  if (it == children_.end()) return {};
  return {it->second.begin(), it->second.end()};
}

std::size_t TaskGraph::parent_count(const TaskId& task) const {
  auto it = parents_.find(task);
  return it == parents_.end() ? 0 : it->second.size();
}

std::optional<Bytes> TaskGraph::file_size(const TaskId& parent, const TaskId& child) const {
  auto it = edges_.find({parent, child});
  if (it == edges_.end()) return std::nullopt;
  return it->second;
}

std::vector<TaskId> TaskGraph::sources() const {
  std::vector<TaskId> out;
  for (const auto& t : tasks_)
    if (parent_count(t) == 0) out.push_back(t);
  return out;
}

std::optional<std::vector<TaskId>> TaskGraph::topological_order() const {
  std::map<TaskId, std::size_t> indegree;
  for (const auto& t : tasks_) indegree[t] = 0;
  for (const auto& [edge, size] : edges_) {
    if (!tasks_.contains(edge.first) || !tasks_.contains(edge.second)) continue;
    ++indegree[edge.second];
  }
  std::set<TaskId> ready;
  for (const auto& [t, d] : indegree)
    if (d == 0) ready.insert(t);
  std::vector<TaskId> order;
  while (!ready.empty()) {
    TaskId t = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(t);
    for (const auto& c : children(t)) {
      if (!tasks_.contains(c)) continue;
      if (--indegree[c] == 0) ready.insert(c);
    }
  }
  if (order.size() != tasks_.size()) return std::nullopt;
  return order;
}

std::set<TaskId> TaskGraph::ancestors_of(const TaskId& target) const {
  std::set<TaskId> seen{target};
  std::deque<TaskId> work{target};
  while (!work.empty()) {
    TaskId t = work.front();
    work.pop_front();
    for (const auto& p : parents(t))
      if (seen.insert(p).second) work.push_back(p);
  }
  return seen;
}

std::set<TaskId> TaskGraph::descendants_of(const std::vector<TaskId>& roots) const {
  std::set<TaskId> seen(roots.begin(), roots.end());
  std::deque<TaskId> work(roots.begin(), roots.end());
  while (!work.empty()) {
    TaskId t = work.front();
    work.pop_front();
    for (const auto& c : children(t))
      if (seen.insert(c).second) work.push_back(c);
  }
  return seen;
}

//---------------------------------------------------------------------------
Seconds transfer_time(const LinkProfile& profile, Bytes size) {
  const double s = static_cast<double>(size);
  const double t = profile.a * s * s + profile.b * s + profile.c;
  if (t < 0.0 || !std::isfinite(t))
    throw ModelError(fmt::format("link profile (a={}, b={}, c={}) predicts invalid time {} at {} bytes",
                                 profile.a, profile.b, profile.c, t, size));
  return t;
}

LinkProfile scaled(const LinkProfile& profile, double factor) {
  LinkProfile out = profile;
  out.a *= factor;
  out.b *= factor;
  out.c *= factor;
  return out;
}

void Cluster::add_node(const NodeId& node) { nodes_.insert(node); }

void Cluster::set_link(const NodeId& src, const NodeId& dst, const LinkProfile& profile) {
  if (src == dst) throw ModelError(fmt::format("link {} -> {} must join distinct nodes", src.str(), dst.str()));
  links_[{src, dst}] = profile;
}

bool Cluster::has_link(const NodeId& src, const NodeId& dst) const { return links_.contains({src, dst}); }

const LinkProfile& Cluster::link(const NodeId& src, const NodeId& dst) const {
  auto it = links_.find({src, dst});
  if (it == links_.end()) throw ModelError(fmt::format("no link profile for {} -> {}", src.str(), dst.str()));
  return it->second;
}

Seconds Cluster::transfer_time(const NodeId& src, const NodeId& dst, Bytes size) const {
  if (src == dst) return 0.0;
  return tpsched::transfer_time(link(src, dst), size);
}

//---------------------------------------------------------------------------
void ExecutionMatrix::set(const TaskId& task, const NodeId& node, Seconds time) { entries_[{task, node}] = time; }

Seconds ExecutionMatrix::at(const TaskId& task, const NodeId& node) const {
  auto it = entries_.find({task, node});
  if (it == entries_.end())
    throw ModelError(fmt::format("no execution time for ({}, {})", task.str(), node.str()));
  return it->second;
}

std::optional<Seconds> ExecutionMatrix::find(const TaskId& task, const NodeId& node) const {
  auto it = entries_.find({task, node});
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

ExecutionMatrix scaled(const ExecutionMatrix& exec, double factor) {
  ExecutionMatrix out;
  for (const auto& [key, t] : exec.entries()) out.set(key.first, key.second, t * factor);
  return out;
}

//---------------------------------------------------------------------------
const std::vector<Placement>& Schedule::placements(const TaskId& task) const {
  auto it = assignment.find(task);
  if (it == assignment.end()) throw ModelError(fmt::format("task {} is not scheduled", task.str()));
  return it->second;
}

std::vector<std::pair<TaskId, double>> Schedule::tasks_on(const NodeId& node) const {
  std::vector<std::pair<TaskId, double>> out;
  for (const auto& [task, list] : assignment)
    for (const auto& p : list)
      if (p.node == node) out.emplace_back(task, p.portion);
  return out;
}

std::set<NodeId> Schedule::used_nodes() const {
  std::set<NodeId> out;
  for (const auto& [task, list] : assignment)
    for (const auto& p : list) out.insert(p.node);
  return out;
}

bool Schedule::is_unsplit() const {
  return std::all_of(assignment.begin(), assignment.end(), [](const auto& kv) { return kv.second.size() == 1; });
}

const NodeId& Schedule::node_of(const TaskId& task) const {
  const auto& list = placements(task);
  if (list.size() != 1) throw ModelError(fmt::format("task {} is split across {} nodes", task.str(), list.size()));
  return list.front().node;
}

Schedule make_schedule(const TaskGraph& graph, const std::map<TaskId, NodeId>& mapping) {
  Schedule s;
  s.graph = graph;
  for (const auto& [task, node] : mapping) s.assignment[task] = {Placement{node, 1.0}};
  return s;
}

//---------------------------------------------------------------------------
std::string Resource::name() const {
  if (is_node()) return src.str();
  return src.str() + "->" + dst.str();
}

const char* to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::cycle: return "cycle";
    case ViolationKind::dangling_edge: return "dangling edge endpoint";
    case ViolationKind::missing_exec_entry: return "missing exec entry";
    case ViolationKind::nonpositive_exec_entry: return "non-positive exec entry";
    case ViolationKind::missing_link_profile: return "missing link profile";
    case ViolationKind::negative_transfer_time: return "negative transfer time";
    case ViolationKind::bad_entry_or_exit: return "bad entry or exit";
    case ViolationKind::unreachable_task: return "unreachable task";
    case ViolationKind::bad_schedule: return "bad schedule";
  }
  return "unknown";
}

bool ValidationReport::has(ViolationKind kind) const {
  return std::any_of(violations.begin(), violations.end(), [&](const Violation& v) { return v.kind == kind; });
}

std::string ValidationReport::summary() const {
  std::string out;
  for (const auto& v : violations) out += fmt::format("{}: {}\n", to_string(v.kind), v.detail);
  return out;
}

void require_ok(const ValidationReport& report) {
  if (!report.ok()) throw ModelError(report.summary());
}

ValidationReport validate(const TaskGraph& graph, const Cluster& cluster, const ExecutionMatrix& exec) {
  ValidationReport r;
  auto add = [&](ViolationKind k, std::string detail) { r.violations.push_back({k, std::move(detail)}); };

  if (graph.tasks().empty()) add(ViolationKind::bad_entry_or_exit, "graph has no tasks");
  if (cluster.nodes().empty()) add(ViolationKind::missing_link_profile, "cluster has no nodes");

  bool dangling = false;
  for (const auto& [edge, size] : graph.edges()) {
    for (const auto* end : {&edge.first, &edge.second}) {
      if (!graph.contains(*end)) {
        add(ViolationKind::dangling_edge, fmt::format("edge {} -> {} references unknown task {}",
                                                      edge.first.str(), edge.second.str(), end->str()));
        dangling = true;
      }
    }
    if (edge.first == edge.second) add(ViolationKind::cycle, fmt::format("self-loop on {}", edge.first.str()));
  }

  const bool has_entry = !graph.entry().empty() && graph.contains(graph.entry());
  const bool has_exit = !graph.exit().empty() && graph.contains(graph.exit());
  if (!has_entry) add(ViolationKind::bad_entry_or_exit, fmt::format("entry task '{}' is not in the graph", graph.entry().str()));
  if (!has_exit) add(ViolationKind::bad_entry_or_exit, fmt::format("exit task '{}' is not in the graph", graph.exit().str()));
  if (has_entry && graph.parent_count(graph.entry()) != 0)
    add(ViolationKind::bad_entry_or_exit, fmt::format("entry task {} has parents", graph.entry().str()));
  if (has_exit && !graph.children(graph.exit()).empty())
    add(ViolationKind::bad_entry_or_exit, fmt::format("exit task {} has children", graph.exit().str()));

  auto order = graph.topological_order();
  if (!order && !r.has(ViolationKind::cycle)) add(ViolationKind::cycle, "edges contain a directed cycle");

  if (order && has_entry && has_exit && !dangling) {
    // Parentless tasks other than the entry are allowed only as copies of it.
    std::vector<TaskId> roots;
    for (const auto& s : graph.sources()) {
      if (s == graph.entry() || graph.origin(s) == graph.origin(graph.entry()))
        roots.push_back(s);
      else
        add(ViolationKind::unreachable_task, fmt::format("task {} has no parents but is not the entry", s.str()));
    }
    const auto from_entry = graph.descendants_of(roots);
    const auto to_exit = graph.ancestors_of(graph.exit());
    for (const auto& t : graph.tasks()) {
      if (!from_entry.contains(t))
        add(ViolationKind::unreachable_task, fmt::format("task {} is not reachable from the entry", t.str()));
      if (!to_exit.contains(t))
        add(ViolationKind::unreachable_task, fmt::format("exit is not reachable from task {}", t.str()));
    }
  }

  for (const auto& t : graph.tasks()) {
    for (const auto& n : cluster.nodes()) {
      auto v = exec.find(graph.origin(t), n);
      if (!v)
        add(ViolationKind::missing_exec_entry, fmt::format("({}, {})", t.str(), n.str()));
      else if (!(*v > 0.0) || !std::isfinite(*v))
        add(ViolationKind::nonpositive_exec_entry, fmt::format("({}, {}) = {}", t.str(), n.str(), *v));
    }
  }

  std::set<Bytes> sizes;
  for (const auto& [edge, size] : graph.edges()) sizes.insert(size);
  for (const auto& u : cluster.nodes()) {
    for (const auto& v : cluster.nodes()) {
      if (u == v) continue;
      if (!cluster.has_link(u, v)) {
        add(ViolationKind::missing_link_profile, fmt::format("{} -> {}", u.str(), v.str()));
        continue;
      }
      const auto& p = cluster.link(u, v);
      for (Bytes s : sizes) {
        const double t = p.a * double(s) * double(s) + p.b * double(s) + p.c;
        if (t < 0.0 || !std::isfinite(t)) {
          add(ViolationKind::negative_transfer_time,
              fmt::format("{} -> {} predicts {} s for {} bytes", u.str(), v.str(), t, s));
          break;
        }
      }
      if (!sizes.empty() && p.min_size && p.max_size &&
          (*sizes.begin() < *p.min_size || *sizes.rbegin() > *p.max_size))
        r.warnings.push_back(fmt::format("{} -> {} is extrapolated outside fitted sizes [{}, {}]", u.str(), v.str(),
                                         *p.min_size, *p.max_size));
    }
  }
  return r;
}

ValidationReport validate_schedule(const Schedule& schedule, const Cluster& cluster) {
  ValidationReport r;
  auto add = [&](std::string detail) { r.violations.push_back({ViolationKind::bad_schedule, std::move(detail)}); };
  for (const auto& t : schedule.graph.tasks())
    if (!schedule.assignment.contains(t)) add(fmt::format("task {} has no placement", t.str()));
  for (const auto& [task, list] : schedule.assignment) {
    if (!schedule.graph.contains(task)) add(fmt::format("placement for unknown task {}", task.str()));
    if (list.empty()) add(fmt::format("task {} has an empty placement list", task.str()));
    double sum = 0.0;
    std::set<NodeId> seen;
    for (const auto& p : list) {
      if (!cluster.contains(p.node)) add(fmt::format("task {} placed on unknown node {}", task.str(), p.node.str()));
      if (!(p.portion > 0.0) || p.portion > 1.0 + kPortionTolerance)
        add(fmt::format("task {} has portion {} on {}", task.str(), p.portion, p.node.str()));
      if (!seen.insert(p.node).second) add(fmt::format("task {} placed twice on {}", task.str(), p.node.str()));
      sum += p.portion;
    }
    if (!list.empty() && std::abs(sum - 1.0) > kPortionTolerance)
      add(fmt::format("portions of task {} sum to {}", task.str(), sum));
  }
  return r;
}

//---------------------------------------------------------------------------
Seconds CostModel::transfer(const TaskId& parent, const TaskId& child, const NodeId& src, const NodeId& dst) const {
  if (src == dst) return 0.0;
  auto size = graph_.file_size(parent, child);
  if (!size) throw ModelError(fmt::format("no edge {} -> {}", parent.str(), child.str()));
  return cluster_.transfer_time(src, dst, *size);
}

Seconds mean_exec(const TaskGraph& graph, const Cluster& cluster, const ExecutionMatrix& exec, const TaskId& task) {
  if (cluster.nodes().empty()) return 0.0;
  double sum = 0.0;
  for (const auto& n : cluster.nodes()) sum += exec.at(graph.origin(task), n);
  return sum / double(cluster.size());
}

Seconds mean_transfer(const Cluster& cluster, Bytes size) {
  if (cluster.links().empty()) return 0.0;
  double sum = 0.0;
  for (const auto& [key, profile] : cluster.links()) sum += transfer_time(profile, size);
  return sum / double(cluster.links().size());
}

std::map<TaskId, double> upward_rank(const TaskGraph& graph, const Cluster& cluster, const ExecutionMatrix& exec) {
  auto order = graph.topological_order();
  if (!order) throw ModelError("upward rank requires an acyclic graph");
  std::map<TaskId, double> rank;
  for (auto it = order->rbegin(); it != order->rend(); ++it) {
    double best = 0.0;
    for (const auto& child : graph.children(*it)) {
      const double via = mean_transfer(cluster, *graph.file_size(*it, child)) + rank.at(child);
      best = std::max(best, via);
    }
    rank[*it] = mean_exec(graph, cluster, exec, *it) + best;
  }
  return rank;
}

std::vector<TaskId> rank_order(const TaskGraph& graph, const std::map<TaskId, double>& ranks) {
  auto higher = [&](const TaskId& x, const TaskId& y) {
    const double rx = ranks.at(x), ry = ranks.at(y);
    if (rx != ry) return rx > ry;
    return x < y;
  };
  std::map<TaskId, std::size_t> pending;
  for (const auto& t : graph.tasks()) pending[t] = graph.parent_count(t);
  std::set<TaskId, decltype(higher)> ready(higher);
  for (const auto& [t, n] : pending)
    if (n == 0) ready.insert(t);
  std::vector<TaskId> out;
  while (!ready.empty()) {
    TaskId t = *ready.begin();
    ready.erase(ready.begin());
    out.push_back(t);
    for (const auto& c : graph.children(t))
      if (--pending[c] == 0) ready.insert(c);
  }
  if (out.size() != graph.size()) throw ModelError("rank order requires an acyclic graph");
  return out;
}

}  // namespace tpsched
