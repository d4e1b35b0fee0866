#include "pcast/simcore.hpp"

#include <algorithm>
#include <memory>
#include <unordered_map>
#include <unordered_set>

namespace pcast {

namespace {

struct Copy {
  int packet = 0;
  NodeId holder = 0;
  std::vector<NodeId> footer;
  double spread = 0.0;      // reputation delivery factor accumulated by the current holder
  bool used_trusted = false;
  Timestamp next_offer = 0; // retransmission backoff
  bool retried = false;     // a drop happened on this custody, re-offers log as retransmit
  bool alive = true;
};

struct Engine {
  const SimInputs& in;
  const SimConfig& cfg;
  PolicyRuntime& policy;
  const PolicyKind kind;

  std::unordered_map<NodeId, int> node_index;
  std::vector<NodeId> nodes;
  std::vector<std::vector<double>> sims; // per packet, similarity of each node to its target
  std::vector<Rng> packet_rng;
  std::vector<std::shared_ptr<const TargetProfile>> targets;
  AssociationIndex schedule;

  std::vector<PacketOutcome> outcomes;
  std::vector<Copy> copies;
  std::vector<std::vector<int>> held;          // node index -> live copy ids
  std::vector<std::unordered_set<int>> holders; // packet -> node indices holding a live copy
  std::vector<int> live;                        // packet -> live copy count
  SimResult result;

  Engine(const SimInputs& inputs, const SimConfig& config, PolicyRuntime& runtime)
      : in(inputs), cfg(config), policy(runtime), kind(runtime.config.kind) {}

  void log(int packet, Timestamp t, EventKind kind_, NodeId from, NodeId to) {
    if (cfg.collect_logs) outcomes[packet].log.push_back({t, kind_, from, to});
  }

  void note_drop(NodeId n, Timestamp t) {
    auto it = result.first_drop.find(n);
    if (it == result.first_drop.end()) result.first_drop[n] = t;
  }

  void note_flag(NodeId n, Timestamp t) {
    auto it = result.first_flag.find(n);
    if (it == result.first_flag.end() || it->second > t) result.first_flag[n] = t;
  }

  void validate() {
    if (cfg.horizon <= 0) throw ValidationError("run: horizon must be positive");
    if (cfg.delta <= 0.0 || cfg.delta > 1.0) throw ValidationError("run: delta must be in (0, 1]");
    if (in.packets == nullptr || in.encounters == nullptr || in.profiles == nullptr)
      throw ValidationError("run: packets, encounters and profiles are required");
    if (in.adversary && in.adversary->p3 > cfg.delta)
      throw ValidationError("run: p3 above the delivery threshold delta");
    if (kind == PolicyKind::Reputation && in.associations == nullptr)
      throw ValidationError("run: the reputation scheme needs the association records");
    const auto& set = *in.profiles;
    if (set.nodes.empty() || set.nodes.size() != set.profiles.size())
      throw ValidationError("run: empty or inconsistent profile set");
    for (std::size_t i = 0; i < set.nodes.size(); ++i)
      if (!node_index.emplace(set.nodes[i], static_cast<int>(i)).second)
        throw ValidationError("run: duplicate profile for node " + std::to_string(set.nodes[i]));
    nodes = set.nodes;
    for (const auto& e : *in.encounters)
      if (!node_index.count(e.a) || !node_index.count(e.b))
        throw ValidationError("run: encounter references a node without a profile");
    for (const auto& p : *in.packets) {
      if (!node_index.count(p.origin))
        throw ValidationError("run: packet " + std::to_string(p.id) + " origin has no profile");
      if (p.created_at < 0 || p.created_at >= cfg.horizon)
        throw ValidationError("run: packet " + std::to_string(p.id) + " created outside the horizon");
      if (p.target.rank() == 0)
        throw ValidationError("run: packet " + std::to_string(p.id) + " has an empty target profile");
    }
  }

  void precompute() {
    const auto& set = *in.profiles;
    const auto& packets = *in.packets;
    sims.resize(packets.size());
    targets.resize(packets.size());
    outcomes.resize(packets.size());
    // packets anchored at the same node share one similarity vector
    std::unordered_map<NodeId, int> anchor_cache;
    for (std::size_t p = 0; p < packets.size(); ++p) {
      targets[p] = std::make_shared<const TargetProfile>(packets[p].target);
      const NodeId anchor = packets[p].target_anchor;
      if (anchor >= 0) {
        auto hit = anchor_cache.find(anchor);
        if (hit != anchor_cache.end()) {
          sims[p] = sims[hit->second];
          continue;
        }
        anchor_cache[anchor] = static_cast<int>(p);
      }
      sims[p].resize(set.nodes.size());
      for (std::size_t i = 0; i < set.nodes.size(); ++i)
        sims[p][i] = similarity(set.profiles[i], packets[p].target);
    }
    packet_rng.reserve(packets.size());
    for (const auto& pk : packets)
      packet_rng.emplace_back(derive_seed(cfg.seed, static_cast<std::uint64_t>(pk.id)));
    held.assign(set.nodes.size(), {});
    holders.assign(packets.size(), {});
    live.assign(packets.size(), 0);
    if (kind == PolicyKind::Reputation) schedule = AssociationIndex::build(*in.associations);
  }

  void spawn_copy(int p, NodeId holder, std::vector<NodeId> footer) {
    const int ci = static_cast<int>(copies.size());
    Copy c;
    c.packet = p;
    c.holder = holder;
    c.footer = std::move(footer);
    copies.push_back(std::move(c));
    const int hi = node_index.at(holder);
    held[hi].push_back(ci);
    holders[p].insert(hi);
    ++live[p];
    outcomes[p].hops = std::max(outcomes[p].hops, static_cast<int>(copies[ci].footer.size()));
  }

  void kill_copy(int ci, bool keep_path) {
    Copy& c = copies[ci];
    if (!c.alive) return;
    c.alive = false;
    const int hi = node_index.at(c.holder);
    std::erase(held[hi], ci);
    holders[c.packet].erase(hi);
    --live[c.packet];
    PacketOutcome& po = outcomes[c.packet];
    if (keep_path && po.state != PacketState::Delivered &&
        static_cast<int>(c.footer.size()) >= static_cast<int>(po.footer.size())) {
      po.footer = c.footer;
      po.hops = static_cast<int>(c.footer.size());
    }
  }

  void deliver(int p, const std::vector<NodeId>& footer, NodeId at, Timestamp t) {
    PacketOutcome& po = outcomes[p];
    if (po.state != PacketState::Delivered) {
      po.state = PacketState::Delivered;
      po.delivered_at = t;
      po.footer = footer;
      po.hops = static_cast<int>(footer.size());
    }
    if (kind == PolicyKind::Reputation && !footer.empty()) {
      result.ack_messages += static_cast<long>(footer.size());
      policy.reputation.schedule_acks(footer, at, (*in.packets)[p].id, targets[p], t, schedule);
    }
  }

  void reputation_tick(Timestamp t) {
    for (NodeId reader : policy.reputation.tick(t)) policy.note_storage(reader);
  }

  void process_creation(std::size_t p) {
    const Packet& pk = (*in.packets)[p];
    PacketOutcome& po = outcomes[p];
    po.packet_id = pk.id;
    po.created_at = pk.created_at;
    const Timestamp t = pk.created_at;
    if (kind == PolicyKind::Credit) {
      const bool ok = policy.credit.try_originate(pk.origin);
      policy.note_storage(pk.origin);
      if (!ok) {
        po.state = PacketState::Blocked;
        log(static_cast<int>(p), t, EventKind::Block, pk.origin, pk.origin);
        return;
      }
    }
    if (sims[p][node_index.at(pk.origin)] >= cfg.delta) {
      log(static_cast<int>(p), t, EventKind::Deliver, pk.origin, pk.origin);
      deliver(static_cast<int>(p), {}, pk.origin, t);
      return;
    }
    spawn_copy(static_cast<int>(p), pk.origin, {});
  }

  bool adversary_drop(int p, NodeId receiver, double sim) {
    if (kind == PolicyKind::Game)
      return policy.game.decide_drop(receiver, sim, in.adversary, packet_rng[p]);
    if (in.adversary == nullptr) return false;
    return decide_drop(receiver, sim, *in.adversary, packet_rng[p]);
  }

  // one custody offer: copy ci from its holder toward n at time t
  void offer(int ci, NodeId n, Timestamp t) {
    Copy& c = copies[ci];
    const int p = c.packet;
    PacketOutcome& po = outcomes[p];
    const NodeId h = c.holder;
    const double sn = sims[p][node_index.at(n)];

    TrustTier tier = TrustTier::Unknown;
    if (kind == PolicyKind::Reputation) {
      tier = policy.reputation.lookup(h, *targets[p], n, t);
      policy.note_storage(h);
    }

    ++po.transmissions;
    const bool again = kind == PolicyKind::Retransmit && c.retried;
    log(p, t, again ? EventKind::Retransmit : EventKind::Offer, h, n);

    bool drop = adversary_drop(p, n, sn);
    if (kind == PolicyKind::Credit && drop && !policy.credit.allow_drop(n)) drop = false;

    if (kind == PolicyKind::Game) {
      policy.game.on_transaction(h, n, !drop, in.adversary);
      policy.note_storage(h);
      policy.note_storage(n);
    }

    if (drop) {
      ++po.drops;
      note_drop(n, t);
      log(p, t, EventKind::Drop, h, n);
      switch (kind) {
        case PolicyKind::Retransmit: {
          c.next_offer = t + policy.config.retransmit.timer;
          c.retried = true;
          if (policy.config.retransmit.blocking) {
            const Timestamp effective = t + policy.config.retransmit.timer;
            policy.retransmit.flag(h, n, effective);
            policy.note_storage(h);
            note_flag(n, effective);
            log(p, effective, EventKind::Block, h, n);
          }
          break;
        }
        case PolicyKind::Reputation:
          c.spread += policy.reputation.increment(tier);
          if (tier != TrustTier::Unknown) c.used_trusted = true;
          break;
        default:
          kill_copy(ci, true);
          if (po.state == PacketState::InTransit && live[p] == 0) po.state = PacketState::Dropped;
          break;
      }
      return;
    }

    // accepted
    if (kind == PolicyKind::Credit) {
      policy.credit.reward_forward(n);
      policy.note_storage(n);
    }
    if (kind == PolicyKind::Retransmit) ++result.ack_messages;

    if (kind == PolicyKind::Reputation) {
      std::vector<NodeId> child_footer = c.footer;
      child_footer.push_back(h);
      c.spread += policy.reputation.increment(tier);
      if (tier != TrustTier::Unknown) c.used_trusted = true;
      log(p, t, EventKind::Accept, h, n);
      if (sn >= cfg.delta) {
        log(p, t, EventKind::Deliver, h, n);
        deliver(p, child_footer, n, t);
      } else {
        spawn_copy(p, n, std::move(child_footer));
      }
      return;
    }

    // single-copy schemes move custody
    const int hi = node_index.at(h);
    const int ni = node_index.at(n);
    std::erase(held[hi], ci);
    holders[p].erase(hi);
    held[ni].push_back(ci);
    holders[p].insert(ni);
    c.holder = n;
    c.footer.push_back(h);
    c.next_offer = 0;
    c.retried = false;
    po.hops = std::max(po.hops, static_cast<int>(c.footer.size()));
    log(p, t, EventKind::Accept, h, n);
    if (sn >= cfg.delta) {
      log(p, t, EventKind::Deliver, h, n);
      deliver(p, c.footer, n, t);
      kill_copy(ci, false);
    }
  }

  void process_side(NodeId h, NodeId n, Timestamp t) {
    const int hi = node_index.at(h);
    const int ni = node_index.at(n);
    if (held[hi].empty()) return;
    std::vector<int> snapshot = held[hi];
    std::sort(snapshot.begin(), snapshot.end(), [&](int x, int y) {
      return std::tie(copies[x].packet, x) < std::tie(copies[y].packet, y);
    });
    for (int ci : snapshot) {
      Copy& c = copies[ci];
      if (!c.alive || c.holder != h) continue;
      const int p = c.packet;
      const double sh = sims[p][hi];
      const double sn = sims[p][ni];
      if (!(sn > sh)) continue; // strictly better neighbors only

      if (kind == PolicyKind::Retransmit) {
        if (t < c.next_offer) continue;
        if (policy.config.retransmit.blocking && policy.retransmit.blocked(h, n, t)) continue;
      }
      if (kind == PolicyKind::Reputation) {
        if (holders[p].count(ni)) continue; // n already carries this packet
        if (c.spread >= policy.config.reputation.c4) {
          // spread budget exhausted; a still-unknown neighbor passed over by
          // trusted picks is the scheme's detection signal
          if (c.used_trusted &&
              policy.reputation.lookup(h, *targets[p], n, t) == TrustTier::Unknown) {
            note_flag(n, t);
            log(p, t, EventKind::Block, h, n);
          }
          continue;
        }
      }
      offer(ci, n, t);
    }
  }

  SimResult finish() {
    if (kind == PolicyKind::Reputation) reputation_tick(cfg.horizon);
    std::vector<const Copy*> deepest(outcomes.size(), nullptr);
    for (const auto& c : copies)
      if (c.alive) {
        const Copy*& d = deepest[c.packet];
        if (!d || c.footer.size() > d->footer.size()) d = &c;
      }
    for (std::size_t p = 0; p < outcomes.size(); ++p) {
      PacketOutcome& po = outcomes[p];
      if (po.state != PacketState::InTransit) continue;
      po.state = PacketState::Expired;
      if (deepest[p]) {
        // report the deepest surviving path
        po.footer = deepest[p]->footer;
        po.hops = static_cast<int>(deepest[p]->footer.size());
        log(static_cast<int>(p), cfg.horizon, EventKind::Expire, deepest[p]->holder, deepest[p]->holder);
      }
    }
    for (auto& po : outcomes)
      std::stable_sort(po.log.begin(), po.log.end(),
                       [](const LogEntry& x, const LogEntry& y) { return x.time < y.time; });
    result.outcomes = std::move(outcomes);
    result.storage_peak = policy.storage_peak;
    return std::move(result);
  }

  SimResult run() {
    validate();
    precompute();

    // creation events interleave with encounters; creations first on ties
    std::vector<std::size_t> order(in.packets->size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
      const auto& a = (*in.packets)[x];
      const auto& b = (*in.packets)[y];
      return std::tie(a.created_at, a.id) < std::tie(b.created_at, b.id);
    });
    std::vector<EncounterEvent> encounters = *in.encounters;
    std::sort(encounters.begin(), encounters.end(), [](const EncounterEvent& x, const EncounterEvent& y) {
      return std::tie(x.start, x.location, x.a, x.b) < std::tie(y.start, y.location, y.a, y.b);
    });

    std::size_t pc = 0, ec = 0;
    while (pc < order.size() || ec < encounters.size()) {
      const bool creation =
          pc < order.size() &&
          (ec >= encounters.size() || (*in.packets)[order[pc]].created_at <= encounters[ec].start);
      if (creation) {
        process_creation(order[pc++]);
        continue;
      }
      const EncounterEvent& e = encounters[ec++];
      if (e.start >= cfg.horizon) break;
      if (kind == PolicyKind::Reputation) reputation_tick(e.start);
      process_side(e.a, e.b, e.start);
      process_side(e.b, e.a, e.start);
    }
    while (pc < order.size()) process_creation(order[pc++]);
    return finish();
  }
};

} // namespace

SimResult run(const SimInputs& in, const SimConfig& cfg, PolicyRuntime* persistent) {
  if (persistent) {
    Engine engine(in, cfg, *persistent);
    return engine.run();
  }
  PolicyRuntime runtime(cfg.policy);
  Engine engine(in, cfg, runtime);
  return engine.run();
}

std::vector<Packet> screen_deliverable(const SimInputs& in, const SimConfig& cfg) {
  SimInputs clean = in;
  clean.adversary = nullptr;
  SimConfig base = cfg;
  base.policy = PolicyConfig{};
  base.collect_logs = false;
  SimResult r = run(clean, base);
  std::vector<Packet> kept;
  for (std::size_t i = 0; i < r.outcomes.size(); ++i)
    if (r.outcomes[i].state == PacketState::Delivered) kept.push_back((*in.packets)[i]);
  return kept;
}

} // namespace pcast
