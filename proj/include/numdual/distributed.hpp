#pragma once

#include <functional>

#include "numdual/solvers.hpp"

namespace numdual {

enum class MessageKind { kPriceUpdate, kRateReport };

struct ActorId {
  bool is_link = false;
  int index = 0;
};

// One link<->user message on the synchronous tick clock.  PriceUpdate flows
// link -> user carrying a price, RateReport flows user -> link carrying a
// rate.  Messages only ever traverse pairs with C_k^j = 1.
struct Message {
  MessageKind kind = MessageKind::kPriceUpdate;
  ActorId from;
  ActorId to;
  double payload = 0.0;
  long long tick = 0;
};

using MessageHook = std::function<void(const Message&)>;

struct DistributedResult {
  SolverReport report;
  long long message_count = 0;
};

// Runs the distributed protocol of FGM, SGM (one-sample primal estimate) or
// RGEM as in-memory actors exchanging messages in a deterministic order
// (ascending link id, then user id).  The resulting dual trajectory is
// bit-identical to the centralized solver under the same configuration.
// The hook, when set, observes every delivered message.
DistributedResult run_distributed(const NetworkProblem& p, Method method,
                                  const SolverConfig& config,
                                  const MessageHook& hook = nullptr);

// Largest sup-norm deviation of dual iterates over the iterations recorded
// in both reports (requires record_duals on both runs).
double compare_traces(const SolverReport& a, const SolverReport& b);

}  // namespace numdual
