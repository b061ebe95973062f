#include <map>

#include "graphwave/consistency.hpp"

namespace graphwave {
namespace {

bool differs(const Pose& a, const Pose& b, double translation_tolerance, double rotation_tolerance) {
  const Pose delta = a.inverse() * b;
  return delta.translation().norm() > translation_tolerance || delta.angle() > rotation_tolerance;
}

}  // namespace

const LedgerEntry* ConstraintLedger::find(NodeId from, NodeId to) const {
  const auto it = entries_.find({from, to});
  return it == entries_.end() ? nullptr : &it->second;
}

void ConstraintLedger::record(const ConstraintCandidate& candidate, double now) {
  entries_[{candidate.from_id, candidate.to_id}] = {candidate, now};
}

LedgerDecision ledger_apply(ConstraintLedger& ledger, std::span<const ConstraintCandidate> candidates,
                            double translation_tolerance, double rotation_tolerance, double now) {
  LedgerDecision decision;
  for (const ConstraintCandidate& c : candidates) {
    const LedgerEntry* entry = ledger.find(c.from_id, c.to_id);
    if (!entry) {
      decision.to_add.push_back(c);
    } else if (differs(entry->candidate.measurement, c.measurement, translation_tolerance,
                       rotation_tolerance)) {
      decision.to_update.push_back(c);
    } else {
      continue;
    }
    ledger.record(c, now);
  }
  return decision;
}

std::vector<ConstraintCandidate> ledger_refresh(ConstraintLedger& ledger,
                                                std::span<const SyncedNode> nodes,
                                                double translation_tolerance,
                                                double rotation_tolerance, double now) {
  std::map<NodeId, const SyncedNode*> by_onboard;
  for (const SyncedNode& n : nodes) by_onboard[n.onboard_id] = &n;

  std::vector<ConstraintCandidate> refreshed;
  for (const auto& [key, entry] : ledger.entries()) {
    const auto from = by_onboard.find(key.first);
    const auto to = by_onboard.find(key.second);
    if (from == by_onboard.end() || to == by_onboard.end()) continue;
    const Pose current = from->second->server_pose.inverse() * to->second->server_pose;
    if (!differs(entry.candidate.measurement, current, translation_tolerance, rotation_tolerance)) {
      continue;
    }
    ConstraintCandidate c = entry.candidate;
    c.measurement = current;
    refreshed.push_back(c);
  }
  for (const ConstraintCandidate& c : refreshed) ledger.record(c, now);
  return refreshed;
}

}  // namespace graphwave
