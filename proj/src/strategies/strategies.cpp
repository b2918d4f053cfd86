#include "windbid/strategies.hpp"

#include "windbid/errors.hpp"

namespace windbid {

BidVector benchmark_bid(const MarketDay& day) {
  day.validate();
  BidVector bid;
  for (int t = 0; t < day.horizon(); ++t)
    bid.p_da.push_back(day.da_price[t] > day.rt_price_forecast[t] ? day.wind_forecast[t] : 0.0);
  return bid;
}

BidVector zero_bid(const MarketDay& day) {
  day.validate();
  return BidVector{std::vector<double>(static_cast<std::size_t>(day.horizon()), 0.0)};
}

BidVector full_bid(const MarketDay& day) {
  day.validate();
  return BidVector{day.wind_forecast};
}

Policy benchmark_policy(std::string name) {
  return {std::move(name), [](const EpisodeState& s) { return benchmark_bid(s.day); }};
}

Policy zero_policy(std::string name) {
  return {std::move(name), [](const EpisodeState& s) { return zero_bid(s.day); }};
}

Policy full_policy(std::string name) {
  return {std::move(name), [](const EpisodeState& s) { return full_bid(s.day); }};
}

Policy agent_policy(std::string name, std::shared_ptr<const Agent> agent) {
  if (!agent) throw Error("agent policy needs an agent");
  return {std::move(name), [agent](const EpisodeState& s) {
            return action_to_bid(s.day, actor_forward(agent->actor, make_observation(s)));
          }};
}

Policy sp_policy(std::string name, MarketOptions options) {
  return {std::move(name), [options](const EpisodeState& s) {
            const auto rep = solve_full_sp(s.day, s.battery, s.scenarios, options);
            if (!rep.optimal()) throw SolverError(std::string("full SP ended ") + to_string(rep.status));
            return rep.first_stage;
          }};
}

}  // namespace windbid
