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

#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "tpsched/errors.hpp"
#include "tpsched/ids.hpp"

namespace tpsched {

//---------------------------------------------------------------------------
// Application DAG
//---------------------------------------------------------------------------

/// Directed acyclic graph of tasks whose edges carry file sizes.
///
/// Edges may reference tasks that were never added; `validate` reports them
/// as dangling instead of the graph rejecting them on insertion, so that a
/// whole input file can be diagnosed at once.
///
/// Tasks created by duplication remember the task they copy (`origin`), so
/// execution costs are looked up under the original name.
class TaskGraph {
 public:
  using Edge = std::pair<TaskId, TaskId>;

  void add_task(const TaskId& task);
  /// Throws ModelError if the ordered pair already has an edge.
  void add_edge(const TaskId& parent, const TaskId& child, Bytes file_size);
  void remove_edge(const TaskId& parent, const TaskId& child);
  /// Removes the task and all incident edges.
  void remove_task(const TaskId& task);

  void set_entry(const TaskId& task) { entry_ = task; }
  void set_exit(const TaskId& task) { exit_ = task; }
  const TaskId& entry() const { return entry_; }
  const TaskId& exit() const { return exit_; }

  void set_origin(const TaskId& duplicate, const TaskId& original);
  /// The task whose costs `task` inherits; `task` itself unless it is a duplicate.
  const TaskId& origin(const TaskId& task) const;
  bool is_duplicate(const TaskId& task) const { return origins_.contains(task); }
  const std::map<TaskId, TaskId>& origins() const { return origins_; }

  bool contains(const TaskId& task) const { return tasks_.contains(task); }
  const std::set<TaskId>& tasks() const { return tasks_; }
  std::size_t size() const { return tasks_.size(); }
  const std::map<Edge, Bytes>& edges() const { return edges_; }

  std::vector<TaskId> parents(const TaskId& task) const;
  std::vector<TaskId> children(const TaskId& task) const;
  std::size_t parent_count(const TaskId& task) const;
  std::optional<Bytes> file_size(const TaskId& parent, const TaskId& child) const;
  /// Tasks without parents, in id order.
  std::vector<TaskId> sources() const;

  /// Kahn order with id tie-breaking; nullopt when the edges contain a cycle.
  std::optional<std::vector<TaskId>> topological_order() const;
  /// Tasks from which `target` can be reached (including `target`).
  std::set<TaskId> ancestors_of(const TaskId& target) const;
  /// Tasks reachable from any of `roots` (including the roots).
  std::set<TaskId> descendants_of(const std::vector<TaskId>& roots) const;

  friend bool operator==(const TaskGraph&, const TaskGraph&) = default;

 private:
  std::set<TaskId> tasks_;
  std::map<Edge, Bytes> edges_;
  std::map<TaskId, std::set<TaskId>> parents_;
  std::map<TaskId, std::set<TaskId>> children_;
  std::map<TaskId, TaskId> origins_;
  TaskId entry_;
  TaskId exit_;
};

//---------------------------------------------------------------------------
// Cluster
//---------------------------------------------------------------------------

/// Quadratic transfer-time model of one directed virtual link:
/// time(s) = a*s^2 + b*s + c.
struct LinkProfile {
  double a = 0.0;  ///< seconds / byte^2
  double b = 0.0;  ///< seconds / byte
  double c = 0.0;  ///< seconds
  /// Size range the profile was fitted on, when known.
  std::optional<Bytes> min_size;
  std::optional<Bytes> max_size;

  friend bool operator==(const LinkProfile&, const LinkProfile&) = default;
};

/// Evaluates the profile. Throws ModelError when the prediction is negative.
Seconds transfer_time(const LinkProfile& profile, Bytes size);

/// Profile with every coefficient multiplied by `factor`.
LinkProfile scaled(const LinkProfile& profile, double factor);

/// Nodes plus one profile per ordered node pair.
class Cluster {
 public:
  void add_node(const NodeId& node);
  void set_link(const NodeId& src, const NodeId& dst, const LinkProfile& profile);

  bool contains(const NodeId& node) const { return nodes_.contains(node); }
  const std::set<NodeId>& nodes() const { return nodes_; }
  std::size_t size() const { return nodes_.size(); }

  bool has_link(const NodeId& src, const NodeId& dst) const;
  /// Throws ModelError if the link is not profiled.
  const LinkProfile& link(const NodeId& src, const NodeId& dst) const;
  const std::map<std::pair<NodeId, NodeId>, LinkProfile>& links() const { return links_; }

  /// Zero for src == dst, otherwise the link profile evaluated at `size`.
  Seconds transfer_time(const NodeId& src, const NodeId& dst, Bytes size) const;

  friend bool operator==(const Cluster&, const Cluster&) = default;

 private:
  std::set<NodeId> nodes_;
  std::map<std::pair<NodeId, NodeId>, LinkProfile> links_;
};

//---------------------------------------------------------------------------
// Execution matrix
//---------------------------------------------------------------------------

class ExecutionMatrix {
 public:
  void set(const TaskId& task, const NodeId& node, Seconds time);
  /// Throws ModelError when the entry is missing.
  Seconds at(const TaskId& task, const NodeId& node) const;
  std::optional<Seconds> find(const TaskId& task, const NodeId& node) const;
  const std::map<std::pair<TaskId, NodeId>, Seconds>& entries() const { return entries_; }

  friend bool operator==(const ExecutionMatrix&, const ExecutionMatrix&) = default;

 private:
  std::map<std::pair<TaskId, NodeId>, Seconds> entries_;
};

/// Matrix with every entry multiplied by `factor`.
ExecutionMatrix scaled(const ExecutionMatrix& exec, double factor);

//---------------------------------------------------------------------------
// Schedules
//---------------------------------------------------------------------------

struct Placement {
  NodeId node;
  double portion = 1.0;

  friend bool operator==(const Placement&, const Placement&) = default;
};

/// Task-to-node mapping over the graph it schedules. A task with several
/// placements is split: each placement is a replica serving `portion` of the
/// instance stream, in replica order.
struct Schedule {
  TaskGraph graph;
  std::map<TaskId, std::vector<Placement>> assignment;

  const std::vector<Placement>& placements(const TaskId& task) const;
  /// (task, portion) pairs placed on `node`, in task id order.
  std::vector<std::pair<TaskId, double>> tasks_on(const NodeId& node) const;
  /// Nodes carrying at least one placement.
  std::set<NodeId> used_nodes() const;
  bool is_unsplit() const;
  /// Single node of an unsplit task. Throws ModelError for split tasks.
  const NodeId& node_of(const TaskId& task) const;

  friend bool operator==(const Schedule&, const Schedule&) = default;
};

/// Builds an unsplit schedule from a task-to-node map.
Schedule make_schedule(const TaskGraph& graph, const std::map<TaskId, NodeId>& mapping);

inline constexpr double kPortionTolerance = 1e-9;

//---------------------------------------------------------------------------
// Resources
//---------------------------------------------------------------------------

/// A node or a directed link. Orders nodes before links, then by ids.
struct Resource {
  enum class Kind { node = 0, link = 1 };
  Kind kind = Kind::node;
  NodeId src;
  NodeId dst;  ///< empty for nodes

  static Resource node(const NodeId& n) { return {Kind::node, n, NodeId{}}; }
  static Resource link(const NodeId& from, const NodeId& to) { return {Kind::link, from, to}; }

  bool is_node() const { return kind == Kind::node; }
  bool is_link() const { return kind == Kind::link; }
  /// "n1" for nodes, "n1->n2" for links.
  std::string name() const;

  friend auto operator<=>(const Resource&, const Resource&) = default;
  friend bool operator==(const Resource&, const Resource&) = default;
};

//---------------------------------------------------------------------------
// Validation
//---------------------------------------------------------------------------

enum class ViolationKind {
  cycle,
  dangling_edge,
  missing_exec_entry,
  nonpositive_exec_entry,
  missing_link_profile,
  negative_transfer_time,
  bad_entry_or_exit,
  unreachable_task,
  bad_schedule,
};

const char* to_string(ViolationKind kind);

struct Violation {
  ViolationKind kind;
  std::string detail;
};

struct ValidationReport {
  std::vector<Violation> violations;
  /// Non-fatal findings, e.g. edge sizes outside a profile's fitted range.
  std::vector<std::string> warnings;

  bool ok() const { return violations.empty(); }
  bool has(ViolationKind kind) const;
  /// One violation per line.
  std::string summary() const;
};

/// Checks the model triple and returns every violation found.
ValidationReport validate(const TaskGraph& graph, const Cluster& cluster, const ExecutionMatrix& exec);

/// Checks portions, node membership and task coverage of a schedule.
ValidationReport validate_schedule(const Schedule& schedule, const Cluster& cluster);

/// Throws ModelError with the report summary when the report is not ok.
void require_ok(const ValidationReport& report);

//---------------------------------------------------------------------------
// Costs
//---------------------------------------------------------------------------

/// Read-only view bundling the cost lookups every algorithm needs.
class CostModel {
 public:
  CostModel(const TaskGraph& graph, const Cluster& cluster, const ExecutionMatrix& exec)
      : graph_(graph), cluster_(cluster), exec_(exec) {}

  /// Execution time, resolving duplicates to their origin task.
  Seconds exec(const TaskId& task, const NodeId& node) const {
    return exec_.at(graph_.origin(task), node);
  }
  /// Time to move the parent->child file from `src` to `dst`.
  Seconds transfer(const TaskId& parent, const TaskId& child, const NodeId& src, const NodeId& dst) const;

  const TaskGraph& graph() const { return graph_; }
  const Cluster& cluster() const { return cluster_; }
  const ExecutionMatrix& matrix() const { return exec_; }

 private:
  const TaskGraph& graph_;
  const Cluster& cluster_;
  const ExecutionMatrix& exec_;
};

/// Mean execution time of `task` over all nodes.
Seconds mean_exec(const TaskGraph& graph, const Cluster& cluster, const ExecutionMatrix& exec, const TaskId& task);

/// Mean transfer time of `size` bytes over all inter-node ordered links (0 on a single node).
Seconds mean_transfer(const Cluster& cluster, Bytes size);

/// rank(n) = mean_exec(n) + max over children k of (mean_transfer(n,k) + rank(k)).
std::map<TaskId, double> upward_rank(const TaskGraph& graph, const Cluster& cluster, const ExecutionMatrix& exec);

/// Tasks by descending rank, ties by id, constrained to parents-first.
std::vector<TaskId> rank_order(const TaskGraph& graph, const std::map<TaskId, double>& ranks);

}  // namespace tpsched
