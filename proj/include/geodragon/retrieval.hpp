#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "geodragon/kb.hpp"
#include "geodragon/trie.hpp"

namespace geodragon::retrieval {

// Next-token distribution over the scorer's vocabulary plus the
// end-of-sequence token. Well-behaved scorers return non-negative
// probabilities summing to 1 before masking.
struct TokenDistribution {
  std::map<std::string, double> probs;
};

struct QueryCues {
  std::optional<std::string> category_hint;
  std::vector<std::string> modifiers;
  std::vector<std::string> negations;
};

// Stand-in for the language-model decoder: deterministic per
// (query, cues, prefix) for a fixed configuration.
class SequenceScorer {
 public:
  virtual ~SequenceScorer() = default;
  virtual TokenDistribution score(const std::string& query, const QueryCues& cues,
                                  std::span<const std::string> prefix) const = 0;
};

struct MaskedDistribution {
  TokenDistribution dist;
  bool used_uniform_fallback = false;
};

// Zeroes tokens that are not valid trie continuations of the prefix and
// renormalizes the surviving mass. If the scorer put no mass on any admissible
// token, falls back to a uniform distribution over them (flagged).
MaskedDistribution mask_distribution(const TokenDistribution& dist, const EntityTrie& trie,
                                     std::span<const std::string> prefix);

// Ordered keyword table: earlier categories win score ties.
struct LexiconEntry {
  std::string category;
  std::vector<std::string> keywords;
};

class QueryLexicon {
 public:
  static QueryLexicon defaults();
  static QueryLexicon from_json(std::string_view json_text);
  explicit QueryLexicon(std::vector<LexiconEntry> entries) : entries_(std::move(entries)) {}
  const std::vector<LexiconEntry>& entries() const { return entries_; }

 private:
  std::vector<LexiconEntry> entries_;
};

// Deterministic cue extraction: category hint by keyword overlap, salient
// modifiers from capitalized/quoted spans, definite noun phrases and ordinal
// phrases, negated spans after negation markers.
QueryCues analyze_query(const std::string& query, const QueryLexicon& lexicon);

struct RetrievalResult {
  struct Entry {
    std::string rendered_id;
    std::int64_t osm_id = -1;
    double log_score = 0.0;  // length-normalized
  };
  std::vector<Entry> entries;        // scores non-increasing, ties lexicographic
  bool used_uniform_fallback = false;
};

// Length-normalized beam search where every expansion is masked by the trie,
// so each returned id is a terminal of the trie by construction.
RetrievalResult constrained_beam_search(const std::string& query, const QueryCues& cues,
                                        const EntityTrie& trie, const SequenceScorer& scorer,
                                        int beam_width, int top_k);

// Deterministic offline stand-in for the language model: smoothed character
// trigram overlap against candidate continuations, a category-match bonus and
// a negated-span penalty.
std::unique_ptr<SequenceScorer> lexical_baseline_scorer(const kb::KnowledgeBase& kb);

// Test/benchmark scorer that routes all mass along a gold id per query.
std::unique_ptr<SequenceScorer> oracle_scorer(
    std::map<std::string, std::string> gold_by_query);

// Seeded random scorer used by the fuzzing harnesses. `adversarial` draws
// include mass on out-of-vocabulary tokens and all-zero distributions.
std::unique_ptr<SequenceScorer> random_scorer(const EntityTrie& trie, std::uint64_t seed,
                                              bool adversarial);

struct RetrievedTarget {
  RetrievalResult result;
  const kb::OsmEntity* top_entity = nullptr;  // geometry of the rank-1 id
};

class Retriever {
 public:
  Retriever(const kb::KnowledgeBase& kb, QueryLexicon lexicon);

  RetrievedTarget retrieve(const std::string& query, const SequenceScorer& scorer,
                           int top_k, int beam_width = 5) const;

  const EntityTrie& trie() const { return trie_; }
  const QueryLexicon& lexicon() const { return lexicon_; }

 private:
  const kb::KnowledgeBase& kb_;
  QueryLexicon lexicon_;
  EntityTrie trie_;
};

}  // namespace geodragon::retrieval
