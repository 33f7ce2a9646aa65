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

#include "tpsched/simulator.hpp"

#include <algorithm>
#include <ostream>
#include <queue>
#include <set>
#include <tuple>

#include <fmt/format.h>

#include "sim_internal.hpp"

namespace tpsched {

namespace detail {

std::size_t SimModel::link(std::size_t src, std::size_t dst) {
  auto [it, inserted] = link_index.try_emplace({src, dst}, resources.size());
  if (inserted) resources.push_back(Resource::link(nodes[src], nodes[dst]));
  return it->second;
}

SimModel compile(const Schedule& schedule, const Cluster& cluster, const ExecutionMatrix& exec) {
  require_ok(validate(schedule.graph, cluster, exec));
  require_ok(validate_schedule(schedule, cluster));
  const CostModel costs(schedule.graph, cluster, exec);
  const auto& graph = schedule.graph;

  SimModel m;
  m.cluster = &cluster;
  std::map<NodeId, std::size_t> node_index;
  for (const auto& n : cluster.nodes()) {
    node_index[n] = m.nodes.size();
    m.nodes.push_back(n);
    m.resources.push_back(Resource::node(n));
  }
  std::map<TaskId, std::size_t> task_index;
  for (const auto& t : graph.tasks()) {
    task_index[t] = m.tasks.size();
    m.tasks.push_back(SimTask{});
    m.tasks.back().id = t;
  }
  for (auto& st : m.tasks) {
    st.replicas = schedule.placements(st.id);
    for (const auto& p : st.replicas) {
      st.replica_node.push_back(node_index.at(p.node));
      st.replica_exec.push_back(costs.exec(st.id, p.node));
    }
    for (const auto& c : graph.children(st.id)) st.children.emplace_back(task_index.at(c), *graph.file_size(st.id, c));
    st.parent_count = graph.parent_count(st.id);
    st.mode = routing_mode_for(graph, st.id);
    st.is_exit = st.id == graph.exit();
    if (st.parent_count == 0) m.sources.push_back(task_index.at(st.id));
  }
  return m;
}

Recorder::Recorder(SimModel& model, const SimConfig& config) : model_(model), config_(config) {
  std::seed_seq route_seed{std::uint32_t(config.seed), std::uint32_t(config.seed >> 32), 0x5eedu};
  std::seed_seq jitter_seed{std::uint32_t(config.seed), std::uint32_t(config.seed >> 32), 0x717eu};
  route_rng_.seed(route_seed);
  jitter_rng_.seed(jitter_seed);
  for (auto& t : model_.tasks) {
    t.selector.emplace(t.replicas, config.hashing.placement);
    result_.replica_load[t.id].assign(t.replicas.size(), 0);
  }
  done_.assign(config.num_instances, false);
}

Seconds Recorder::jittered(Seconds d) {
  if (config_.jitter == 0.0) return d;
  return d * (1.0 + config_.jitter * (2.0 * unit_draw(jitter_rng_) - 1.0));
}

std::size_t Recorder::route(std::uint64_t instance, std::size_t task) {
  const auto& t = model_.tasks[task];
  if (t.replicas.size() == 1) return 0;
  if (config_.routing == ReplicaRouting::per_file_independent) return t.selector->by_probability(unit_draw(route_rng_));
  if (t.mode == RoutingMode::hash) return t.selector->by_hash(config_.hashing.hash(std::to_string(instance)));
  auto [it, fresh] = memo_.try_emplace({instance, task}, 0);
  if (fresh) it->second = t.selector->by_probability(unit_draw(route_rng_));
  const std::size_t r = it->second;
  if (t.parent_count <= 1) memo_.erase(it);
  return r;
}

void Recorder::audit_delivery(std::uint64_t instance, std::size_t child, std::size_t replica) {
  const std::size_t parents = model_.tasks[child].parent_count;
  auto [it, fresh] = delivered_.try_emplace({instance, child});
  auto& d = it->second;
  if (fresh) d.first_replica = replica;
  if (replica != d.first_replica && !d.misrouted) {
    d.misrouted = true;
    ++result_.misrouted_instances;
  }
  if (++d.count == parents) {
    delivered_.erase(it);
    memo_.erase({instance, child});
  }
}

void Recorder::busy(std::size_t resource, Seconds start, Seconds end) {
  if (intervals_.size() <= resource) intervals_.resize(resource + 1);
  intervals_[resource].emplace_back(start, end);
}

void Recorder::event(Seconds t, std::size_t resource, SimEventKind kind, std::uint64_t instance, std::size_t task,
                     std::size_t peer, std::size_t replica) {
  if (!config_.record_events) return;
  SimEvent e;
  e.time = t;
  e.resource = model_.resources[resource];
  e.kind = kind;
  e.instance = instance;
  e.task = model_.tasks[task].id;
  if (peer != task) e.peer = model_.tasks[peer].id;
  e.replica = replica;
  result_.events.push_back(std::move(e));
}

void Recorder::completed(std::uint64_t instance, Seconds t) {
  if (instance >= done_.size() || done_[instance])
    throw ModelError(fmt::format("instance {} completed twice", instance));
  done_[instance] = true;
  ++result_.instances_completed;
  result_.completions.push_back({instance, t});
}

SimResult Recorder::finish() {
  if (result_.instances_completed != result_.instances_injected) {
    std::string pending;
    for (const auto& [key, d] : delivered_) {
      if (pending.size() > 400) {
        pending += " ...";
        break;
      }
      pending += fmt::format(" [instance {} at {}: {}/{} files]", key.first, model_.tasks[key.second].id.str(), d.count,
                             model_.tasks[key.second].parent_count);
    }
    throw DeadlockError(fmt::format("no runnable events with {} of {} instances unfinished; waiting buckets:{}",
                                    result_.instances_injected - result_.instances_completed,
                                    result_.instances_injected, pending.empty() ? " none" : pending));
  }
  auto& c = result_.completions;
  std::stable_sort(c.begin(), c.end(), [](const Completion& x, const Completion& y) { return x.time < y.time; });

  const std::size_t n = c.size();
  result_.warmup = config_.warmup_instances.value_or(0);
  result_.throughput = measure_throughput(c, result_.warmup);
  result_.steady_state_period = 1.0 / result_.throughput;

  const std::size_t w = result_.warmup;
  const std::size_t last = (n - 1 - w > w) ? n - 1 - w : n - 1;
  const Seconds lo = c[w].time, hi = c[last].time;
  intervals_.resize(model_.resources.size());
  for (std::size_t r = 0; r < model_.resources.size(); ++r) {
    Seconds total = 0.0, inside = 0.0;
    for (const auto& [s, e] : intervals_[r]) {
      total += e - s;
      inside += std::max(0.0, std::min(e, hi) - std::max(s, lo));
    }
    const Resource& res = model_.resources[r];
    result_.busy_time[res] = total;
    result_.busy_fraction[res] = hi > lo ? std::min(1.0, inside / (hi - lo)) : 0.0;
  }
  return std::move(result_);
}

//---------------------------------------------------------------------------
// Event-driven mode
//---------------------------------------------------------------------------

namespace {

/// Work waiting for a resource. Oldest instance first, then ready time,
/// then task ids, then enqueue order.
struct WorkItem {
  std::uint64_t instance;
  Seconds ready;
  std::size_t task;     ///< executing task, or sending task for transfers
  std::size_t child;    ///< receiving task (transfers only)
  std::size_t replica;  ///< executing replica, or receiving replica for transfers
  std::uint64_t seq;

  auto key() const { return std::tie(instance, ready, task, child, seq); }
  friend bool operator>(const WorkItem& x, const WorkItem& y) { return x.key() > y.key(); }
};

using WorkQueue = std::priority_queue<WorkItem, std::vector<WorkItem>, std::greater<>>;

enum class EventType { exec_done, transfer_done, arrival };

struct Event {
  Seconds time;
  std::uint64_t seq;
  EventType type;
  std::size_t resource;
  WorkItem item;

  friend bool operator>(const Event& x, const Event& y) { return std::tie(x.time, x.seq) > std::tie(y.time, y.seq); }
};

}  // namespace

SimResult simulate_event_driven(const Schedule& schedule, const Cluster& cluster, const ExecutionMatrix& exec,
                                const SimConfig& config) {
  SimModel m = compile(schedule, cluster, exec);
  Recorder rec(m, config);

  std::vector<WorkQueue> queues(m.resources.size());
  std::vector<bool> busy(m.resources.size(), false);
  std::priority_queue<Event, std::vector<Event>, std::greater<>> events;
  std::map<std::tuple<std::uint64_t, std::size_t, std::size_t>, std::size_t> buckets;
  std::set<std::size_t> dirty;
  std::uint64_t seq = 0;

  auto grow = [&] {
    if (queues.size() < m.resources.size()) {
      queues.resize(m.resources.size());
      busy.resize(m.resources.size(), false);
    }
  };
  auto enqueue_exec = [&](std::uint64_t instance, std::size_t task, std::size_t replica, Seconds t) {
    const std::size_t node = m.tasks[task].replica_node[replica];
    queues[node].push(WorkItem{instance, t, task, task, replica, seq++});
    dirty.insert(node);
  };
  auto deliver = [&](std::uint64_t instance, std::size_t parent, std::size_t child, std::size_t replica, Seconds t) {
    rec.audit_delivery(instance, child, replica);
    rec.event(t, m.tasks[child].replica_node[replica], SimEventKind::deliver, instance, parent, child, replica);
    auto key = std::make_tuple(instance, child, replica);
    if (++buckets[key] == m.tasks[child].parent_count) {
      buckets.erase(key);
      enqueue_exec(instance, child, replica, t);
    }
  };
  auto inject = [&](std::uint64_t instance, Seconds t) {
    rec.injected();
    for (std::size_t s : m.sources) enqueue_exec(instance, s, rec.route(instance, s), t);
  };

  if (config.input_interarrival > 0.0) {
    for (std::uint64_t i = 0; i < config.num_instances; ++i)
      events.push(Event{double(i) * config.input_interarrival, seq++, EventType::arrival, 0,
                        WorkItem{i, 0.0, 0, 0, 0, 0}});
  } else {
    for (std::uint64_t i = 0; i < config.num_instances; ++i) inject(i, 0.0);
  }

  Seconds now = 0.0;
  while (true) {
    // Start everything that can start at `now`, in resource order.
    for (std::size_t r : dirty) {
      if (busy[r] || queues[r].empty()) continue;
      WorkItem item = queues[r].top();
      queues[r].pop();
      busy[r] = true;
      const auto& task = m.tasks[item.task];
      Seconds d;
      if (m.resources[r].is_node()) {
        d = rec.jittered(task.replica_exec[item.replica]);
        rec.event(now, r, SimEventKind::exec_start, item.instance, item.task, item.task, item.replica);
        events.push(Event{now + d, seq++, EventType::exec_done, r, item});
      } else {
        const auto& [child, size] = *std::find_if(task.children.begin(), task.children.end(),
                                                  [&](const auto& c) { return c.first == item.child; });
        d = rec.jittered(cluster.transfer_time(m.resources[r].src, m.resources[r].dst, size));
        rec.event(now, r, SimEventKind::transfer_start, item.instance, item.task, child, item.replica);
        events.push(Event{now + d, seq++, EventType::transfer_done, r, item});
      }
      rec.busy(r, now, now + d);
    }
    dirty.clear();
    if (events.empty()) break;

    // Apply every event at the next timestamp before anything starts.
    now = events.top().time;
    while (!events.empty() && events.top().time == now) {
      Event ev = events.top();
      events.pop();
      const WorkItem& item = ev.item;
      switch (ev.type) {
        case EventType::arrival:
          inject(item.instance, now);
          break;
        case EventType::exec_done: {
          busy[ev.resource] = false;
          dirty.insert(ev.resource);
          const auto& task = m.tasks[item.task];
          rec.executed(item.task, item.replica);
          rec.event(now, ev.resource, SimEventKind::exec_end, item.instance, item.task, item.task, item.replica);
          if (task.is_exit) {
            rec.completed(item.instance, now);
            rec.event(now, ev.resource, SimEventKind::complete, item.instance, item.task, item.task, item.replica);
          }
          const std::size_t from = task.replica_node[item.replica];
          for (const auto& [child, size] : task.children) {
            const std::size_t rep = rec.route(item.instance, child);
            const std::size_t to = m.tasks[child].replica_node[rep];
            if (to == from) {
              deliver(item.instance, item.task, child, rep, now);
              continue;
            }
            const std::size_t link = m.link(from, to);
            grow();
            queues[link].push(WorkItem{item.instance, now, item.task, child, rep, seq++});
            dirty.insert(link);
          }
          break;
        }
        case EventType::transfer_done:
          busy[ev.resource] = false;
          dirty.insert(ev.resource);
          rec.event(now, ev.resource, SimEventKind::transfer_end, item.instance, item.task, item.child, item.replica);
          deliver(item.instance, item.task, item.child, item.replica, now);
          break;
      }
    }
  }
  return rec.finish();
}

}  // namespace detail

//---------------------------------------------------------------------------

std::size_t default_warmup(const TaskGraph& graph, std::size_t num_instances) {
  const std::size_t w = std::max<std::size_t>(2 * graph.size(), 20);
  if (w + 2 <= num_instances / 2) return w;
  return num_instances / 4;
}

double measure_throughput(const std::vector<Completion>& completions, std::size_t warmup) {
  if (completions.size() < warmup + 2)
    throw ModelError(fmt::format("need at least 2 completions after {} warmup, have {}", warmup, completions.size()));
  const Seconds first = completions[warmup].time, last = completions.back().time;
  if (!(last > first)) throw ModelError("post-warmup completions span zero time");
  return double(completions.size() - warmup - 1) / (last - first);
}

SimResult simulate(const Schedule& schedule, const Cluster& cluster, const ExecutionMatrix& exec,
                   const SimConfig& config) {
  if (config.num_instances < 1) throw ModelError("num_instances must be at least 1");
  SimConfig resolved = config;
  if (!resolved.warmup_instances) resolved.warmup_instances = default_warmup(schedule.graph, config.num_instances);
  if (*resolved.warmup_instances >= config.num_instances)
    throw ModelError(fmt::format("warmup ({}) must be below num_instances ({})", *resolved.warmup_instances,
                                 config.num_instances));
  if (resolved.jitter < 0.0 || resolved.jitter >= 1.0) throw ModelError("jitter must be in [0, 1)");
  if (resolved.mode == SimMode::lockstep) return detail::simulate_lockstep(schedule, cluster, exec, resolved);
  return detail::simulate_event_driven(schedule, cluster, exec, resolved);
}

const char* to_string(SimEventKind kind) {
  switch (kind) {
    case SimEventKind::exec_start: return "exec_start";
    case SimEventKind::exec_end: return "exec_end";
    case SimEventKind::transfer_start: return "transfer_start";
    case SimEventKind::transfer_end: return "transfer_end";
    case SimEventKind::deliver: return "deliver";
    case SimEventKind::complete: return "complete";
  }
  return "unknown";
}

void write_event_log_csv(std::ostream& out, const std::vector<SimEvent>& events) {
  out << "time,resource,event,instance,task\n";
  for (const auto& e : events) {
    std::string task = e.task.str();
    if (!e.peer.empty()) task += "->" + e.peer.str() + "#" + std::to_string(e.replica);
    else if (e.kind == SimEventKind::exec_start || e.kind == SimEventKind::exec_end)
      task += "#" + std::to_string(e.replica);
    out << fmt::format("{:.9g},{},{},{},{}\n", e.time, e.resource.name(), to_string(e.kind), e.instance, task);
  }
}

}  // namespace tpsched
