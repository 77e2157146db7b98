#pragma once

#include <memory>
#include <string>

#include "geodragon/retrieval.hpp"

namespace geodragon::retrieval {

// Adapter for an out-of-process scorer speaking the documented JSON contract
// over a local HTTP socket:
//
//   POST /score
//   request:  {"query": str, "cues": {"category_hint": str|null,
//              "modifiers": [str], "negations": [str]},
//              "prefix_tokens": [str]}
//   response: {"logprobs": {token: logprob}}
//
// Log-probabilities are exponentiated into the TokenDistribution consumed by
// the decoder. Connection or protocol failures raise Errc::IoError.
std::unique_ptr<SequenceScorer> external_scorer(const std::string& host, int port,
                                                double timeout_s = 5.0);

}  // namespace geodragon::retrieval
