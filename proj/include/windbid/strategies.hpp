#pragma once

#include <functional>
#include <memory>
#include <string>

#include "windbid/ddpg.hpp"
#include "windbid/environment.hpp"
#include "windbid/market.hpp"

namespace windbid {

// Commit the whole forecast in hours where the day-ahead price is strictly
// above the forecast real-time price, nothing otherwise.
BidVector benchmark_bid(const MarketDay& day);
BidVector zero_bid(const MarketDay& day);
BidVector full_bid(const MarketDay& day);

// A bidding rule as seen by the evaluation harness. Must be safe to call
// concurrently.
struct Policy {
  std::string name;
  std::function<BidVector(const EpisodeState&)> bid;
};

Policy benchmark_policy(std::string name = "bench");
Policy zero_policy(std::string name = "zero");
Policy full_policy(std::string name = "full");
// Bids the actor's output on the episode's observation.
Policy agent_policy(std::string name, std::shared_ptr<const Agent> agent);
// Oracle: first stage of the full stochastic program on the episode's own
// scenarios. Not a realisable bidder; used for self-consistency checks.
Policy sp_policy(std::string name = "sp_bid", MarketOptions options = {});

}  // namespace windbid
