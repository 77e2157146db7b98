#include "geodragon/scorer_external.hpp"

#include <cmath>

#include <httplib.h>
#include <json.hpp>

namespace geodragon::retrieval {

namespace {

using nlohmann::json;

class ExternalScorer final : public SequenceScorer {
 public:
  ExternalScorer(std::string host, int port, double timeout_s)
      : host_(std::move(host)), port_(port), timeout_s_(timeout_s) {}

  TokenDistribution score(const std::string& query, const QueryCues& cues,
                          std::span<const std::string> prefix) const override {
    json req;
    req["query"] = query;
    req["cues"]["category_hint"] =
        cues.category_hint ? json(*cues.category_hint) : json(nullptr);
    req["cues"]["modifiers"] = cues.modifiers;
    req["cues"]["negations"] = cues.negations;
    req["prefix_tokens"] = std::vector<std::string>(prefix.begin(), prefix.end());

    httplib::Client client(host_, port_);
    client.set_connection_timeout(std::chrono::milliseconds(
        static_cast<int>(timeout_s_ * 1000)));
    client.set_read_timeout(std::chrono::milliseconds(static_cast<int>(timeout_s_ * 1000)));

    auto res = client.Post("/score", req.dump(), "application/json");
    require(res != nullptr, Errc::IoError, "external scorer at ", host_, ":", port_,
            " is unreachable");
    require(res->status == 200, Errc::IoError, "external scorer returned HTTP ",
            res->status);

    json body;
    try {
      body = json::parse(res->body);
    } catch (const json::exception& e) {
      raise(Errc::IoError, "external scorer response: ", e.what());
    }
    TokenDistribution dist;
    for (const auto& [token, lp] : body.at("logprobs").items())
      dist.probs[token] = std::exp(lp.get<double>());
    return dist;
  }

 private:
  std::string host_;
  int port_;
  double timeout_s_;
};

}  // namespace

std::unique_ptr<SequenceScorer> external_scorer(const std::string& host, int port,
                                                double timeout_s) {
  return std::make_unique<ExternalScorer>(host, port, timeout_s);
}

}  // namespace geodragon::retrieval
