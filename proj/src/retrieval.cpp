#include "geodragon/retrieval.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <random>
#include <set>
#include <unordered_map>

#include <json.hpp>

namespace geodragon::retrieval {

namespace {

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string strip_punct(std::string_view w) {
  std::size_t b = 0, e = w.size();
  auto is_word = [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '#' || c == '-' || c == '\'';
  };
  while (b < e && !is_word(w[b])) ++b;
  while (e > b && !is_word(w[e - 1])) --e;
  return std::string(w.substr(b, e - b));
}

const std::set<std::string>& span_stopwords() {
  static const std::set<std::string> kStop = {
      "the", "a",    "an",   "is",  "are",  "was",  "were", "where", "what",
      "which", "who", "find", "go",  "to",   "and",  "or",   "but",   "not",
      "no",  "in",   "on",   "at",  "of",   "for",  "me",   "please", "how",
      "do",  "i",    "get",  "take", "then", "near", "with", "there",  "that",
      "this", "need", "want", "looking", "look", "show", "bring", "head"};
  return kStop;
}

bool is_capitalized(const std::string& w) {
  return !w.empty() && std::isupper(static_cast<unsigned char>(w[0]));
}

bool is_ordinal(const std::string& lw) {
  static const std::set<std::string> kOrd = {"first", "second", "third", "fourth",
                                             "fifth", "1st",    "2nd",   "3rd",
                                             "4th",   "5th"};
  return kOrd.count(lw) > 0;
}

struct Span {
  std::size_t start = 0;  // word index
  std::string text;
};

}  // namespace

QueryLexicon QueryLexicon::defaults() {
  return QueryLexicon({
      {"Study Area", {"library", "study", "read", "book", "quiet"}},
      {"Dining", {"eat", "food", "restaurant", "cafe", "cafeteria", "canteen", "dining",
                  "lunch", "dinner", "breakfast", "hungry", "coffee"}},
      {"Teaching Area", {"class", "classroom", "lecture", "teach", "lab", "laboratory",
                         "seminar", "course"}},
      {"Dormitory Area", {"dorm", "dormitory", "sleep", "residence", "live", "housing"}},
      {"Sports Area", {"gym", "sport", "exercise", "basketball", "stadium", "swim",
                       "field", "run", "fitness"}},
      {"Administrative Area", {"admin", "administration", "office", "registrar",
                               "paperwork", "registration"}},
      {"Medical Area", {"clinic", "hospital", "doctor", "nurse", "medical", "sick",
                        "pharmacy"}},
  });
}

QueryLexicon QueryLexicon::from_json(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    raise(Errc::ConfigError, "query lexicon: ", e.what());
  }
  std::vector<LexiconEntry> entries;
  for (const auto& e : doc.at("categories")) {
    entries.push_back({e.at("category").get<std::string>(),
                       e.at("keywords").get<std::vector<std::string>>()});
  }
  return QueryLexicon(std::move(entries));
}

QueryCues analyze_query(const std::string& query, const QueryLexicon& lexicon) {
  require(!query.empty(), Errc::ValidationError, "empty query");
  QueryCues cues;

  // Word list with punctuation stripped; empty words keep their slot so span
  // positions stay aligned with the raw text.
  std::vector<std::string> words;
  std::vector<bool> boundary_after;  // punctuation boundary behind this word
  {
    std::string cur;
    std::vector<std::string> raw;
    for (char c : query) {
      if (std::isspace(static_cast<unsigned char>(c))) {
        if (!cur.empty()) raw.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
    if (!cur.empty()) raw.push_back(cur);
    for (const std::string& w : raw) {
      words.push_back(strip_punct(w));
      const char last = w.empty() ? ' ' : w.back();
      boundary_after.push_back(last == ',' || last == '.' || last == ';' ||
                               last == '?' || last == '!');
    }
  }

  std::vector<Span> spans;

  // Quoted spans take the raw quoted text.
  for (char quote : {'"', '\''}) {
    std::size_t pos = 0;
    while (true) {
      const std::size_t open = query.find(quote, pos);
      if (open == std::string::npos) break;
      const std::size_t close = query.find(quote, open + 1);
      if (close == std::string::npos) break;
      std::string inner = query.substr(open + 1, close - open - 1);
      if (!inner.empty()) spans.push_back({0, inner});
      pos = close + 1;
    }
  }

  // Capitalized spans: maximal runs of capitalized non-stopwords; a run is
  // salient unless it is a single sentence-initial word.
  for (std::size_t i = 0; i < words.size();) {
    const std::string lw = to_lower(words[i]);
    if (words[i].empty() || !is_capitalized(words[i]) || span_stopwords().count(lw)) {
      ++i;
      continue;
    }
    std::size_t j = i;
    std::string text = words[i];
    while (j + 1 < words.size() && !boundary_after[j] && is_capitalized(words[j + 1]) &&
           !span_stopwords().count(to_lower(words[j + 1]))) {
      ++j;
      text += " " + words[j];
    }
    if (i > 0 || j > i) spans.push_back({i, text});
    i = j + 1;
  }

  // Definite noun phrases: up to three words after "the".
  for (std::size_t i = 0; i + 1 < words.size(); ++i) {
    if (to_lower(words[i]) != "the") continue;
    std::string text;
    std::size_t j = i + 1;
    for (; j < words.size() && j <= i + 3; ++j) {
      if (words[j].empty() || span_stopwords().count(to_lower(words[j]))) break;
      if (!text.empty()) text += " ";
      text += words[j];
      if (boundary_after[j]) {
        ++j;
        break;
      }
    }
    if (!text.empty()) spans.push_back({i + 1, text});
  }

  // Ordinal phrases: ordinal plus the following word.
  for (std::size_t i = 0; i + 1 < words.size(); ++i) {
    if (!is_ordinal(to_lower(words[i]))) continue;
    if (words[i + 1].empty() || span_stopwords().count(to_lower(words[i + 1]))) continue;
    spans.push_back({i, words[i] + " " + words[i + 1]});
  }

  // Negation markers claim the immediately following span.
  std::set<std::string> negated;
  for (std::size_t i = 0; i < words.size(); ++i) {
    const std::string lw = to_lower(words[i]);
    if (lw != "not" && lw != "except") continue;
    const Span* best = nullptr;
    for (const Span& s : spans) {
      if (s.start >= i && s.start <= i + 2 && (!best || s.start < best->start)) best = &s;
    }
    if (best) negated.insert(best->text);
  }

  std::sort(spans.begin(), spans.end(),
            [](const Span& a, const Span& b) { return a.start < b.start; });
  std::set<std::string> seen;
  for (const Span& s : spans) {
    if (!seen.insert(s.text).second) continue;
    if (negated.count(s.text)) {
      cues.negations.push_back(s.text);
    } else {
      cues.modifiers.push_back(s.text);
    }
  }

  // Category hint by keyword overlap; earlier lexicon entries win ties.
  int best_score = 0;
  for (const LexiconEntry& entry : lexicon.entries()) {
    int score = 0;
    for (const std::string& w : words) {
      const std::string lw = to_lower(w);
      if (lw.empty()) continue;
      for (const std::string& kw : entry.keywords) {
        if (lw == kw || (lw.size() > kw.size() && lw.rfind(kw, 0) == 0)) {
          ++score;
          break;
        }
      }
    }
    if (score > best_score) {
      best_score = score;
      cues.category_hint = entry.category;
    }
  }
  return cues;
}

MaskedDistribution mask_distribution(const TokenDistribution& dist, const EntityTrie& trie,
                                     std::span<const std::string> prefix) {
  const EntityTrie::Node* node = trie.walk(prefix);
  require(node != nullptr, Errc::InvalidPrefix, "prefix is not a path in the trie");
  require(!node->children.empty(), Errc::InvalidPrefix,
          "prefix is already a complete sequence");

  MaskedDistribution out;
  double total = 0.0;
  for (const auto& [tok, child] : node->children) {
    auto it = dist.probs.find(tok);
    const double p = (it == dist.probs.end()) ? 0.0 : std::max(0.0, it->second);
    out.dist.probs.emplace(tok, p);
    total += p;
  }
  if (total <= 0.0) {
    const double uniform = 1.0 / static_cast<double>(node->children.size());
    for (auto& [tok, p] : out.dist.probs) p = uniform;
    out.used_uniform_fallback = true;
  } else {
    for (auto& [tok, p] : out.dist.probs) p /= total;
  }
  return out;
}

namespace {

struct Beam {
  std::vector<std::string> prefix;
  double sum_log = 0.0;
  int scored = 0;

  double norm() const { return scored == 0 ? 0.0 : sum_log / scored; }
  std::string key() const {
    std::string k;
    for (const auto& t : prefix) {
      k += t;
      k += '\x1f';
    }
    return k;
  }
};

}  // namespace

RetrievalResult constrained_beam_search(const std::string& query, const QueryCues& cues,
                                        const EntityTrie& trie, const SequenceScorer& scorer,
                                        int beam_width, int top_k) {
  require(trie.terminal_count() > 0, Errc::EmptyCorpus, "empty identifier corpus");
  require(beam_width >= top_k && top_k >= 1, Errc::ValidationError,
          "need beam_width >= top_k >= 1");

  RetrievalResult result;
  std::vector<Beam> beams{Beam{}};
  struct Done {
    double norm;
    std::string rendered;
    std::int64_t osm_id;
  };
  std::vector<Done> done;

  while (!beams.empty()) {
    std::vector<Beam> next;
    for (const Beam& b : beams) {
      const MaskedDistribution masked =
          mask_distribution(scorer.score(query, cues, b.prefix), trie, b.prefix);
      result.used_uniform_fallback |= masked.used_uniform_fallback;
      for (const auto& [tok, p] : masked.dist.probs) {
        if (p <= 0.0) continue;
        Beam nb;
        nb.prefix = b.prefix;
        nb.prefix.push_back(tok);
        nb.sum_log = b.sum_log + std::log(p);
        nb.scored = b.scored + 1;
        if (tok == tokens::kEos) {
          const EntityTrie::Node* terminal = trie.walk(nb.prefix);
          done.push_back({nb.norm(), terminal->terminal_rendered, terminal->terminal_osm_id});
        } else {
          next.push_back(std::move(nb));
        }
      }
    }
    std::sort(next.begin(), next.end(), [](const Beam& a, const Beam& b) {
      const double na = a.norm(), nb = b.norm();
      if (na != nb) return na > nb;
      return a.key() < b.key();
    });
    if (static_cast<int>(next.size()) > beam_width) next.resize(beam_width);
    beams = std::move(next);
  }

  std::sort(done.begin(), done.end(), [](const Done& a, const Done& b) {
    if (a.norm != b.norm) return a.norm > b.norm;
    return a.rendered < b.rendered;
  });
  if (static_cast<int>(done.size()) > top_k) done.resize(top_k);
  for (const Done& d : done)
    result.entries.push_back({d.rendered, d.osm_id, d.norm});
  return result;
}

// ---------------------------------------------------------------------------
// Scorers
// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> char_trigrams(std::string_view s) {
  const std::string padded = "  " + std::string(s) + "  ";
  std::vector<std::string> out;
  out.reserve(padded.size());
  for (std::size_t i = 0; i + 3 <= padded.size(); ++i) out.push_back(padded.substr(i, 3));
  std::sort(out.begin(), out.end());
  return out;
}

// Dice coefficient over trigram multisets (both sorted).
double trigram_dice(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  if (a.empty() || b.empty()) return 0.0;
  std::size_t i = 0, j = 0, hits = 0;
  while (i < a.size() && j < b.size()) {
    const int c = a[i].compare(b[j]);
    if (c == 0) {
      ++hits;
      ++i;
      ++j;
    } else if (c < 0) {
      ++i;
    } else {
      ++j;
    }
  }
  return 2.0 * static_cast<double>(hits) / static_cast<double>(a.size() + b.size());
}

class LexicalScorer final : public SequenceScorer {
 public:
  explicit LexicalScorer(const kb::KnowledgeBase& kb) {
    require(!kb.id_index().empty(), Errc::EmptyCorpus,
            "knowledge base has no assigned ids");
    for (const auto& [rendered, osm_id] : kb.id_index()) {
      Candidate c;
      c.tokens = tokens::tokenize(rendered);
      c.lower = to_lower(rendered);
      c.trigrams = char_trigrams(c.lower);
      const kb::OsmEntity& e = kb.entity(osm_id);
      c.category_part = tokens::canonicalize(e.category);
      c.name_trigrams = char_trigrams(to_lower(e.name));
      candidates_.push_back(std::move(c));
    }
    std::set<std::string> vocab;
    for (const Candidate& c : candidates_) {
      std::string key;
      prefix_index_[key].push_back(static_cast<int>(&c - candidates_.data()));
      for (const std::string& t : c.tokens) {
        vocab.insert(t);
        key += t;
        key += '\x1f';
        prefix_index_[key].push_back(static_cast<int>(&c - candidates_.data()));
      }
    }
    vocabulary_.assign(vocab.begin(), vocab.end());
    vocabulary_.push_back(tokens::kEos);
  }

  TokenDistribution score(const std::string& query, const QueryCues& cues,
                          std::span<const std::string> prefix) const override {
    std::string key;
    for (const auto& t : prefix) {
      key += t;
      key += '\x1f';
    }
    TokenDistribution dist;
    constexpr double kFloor = 1e-4;
    for (const std::string& t : vocabulary_) dist.probs[t] = kFloor;

    auto it = prefix_index_.find(key);
    if (it != prefix_index_.end()) {
      const std::vector<double>& scores = candidate_scores(query, cues);
      for (int idx : it->second) {
        const Candidate& c = candidates_[idx];
        const std::string& next = (prefix.size() < c.tokens.size())
                                      ? c.tokens[prefix.size()]
                                      : std::string(tokens::kEos);
        double& slot = dist.probs[next];
        slot = std::max(slot, kFloor + std::max(0.0, scores[idx]));
      }
    }
    double total = 0.0;
    for (const auto& [t, p] : dist.probs) total += p;
    for (auto& [t, p] : dist.probs) p /= total;
    return dist;
  }

 private:
  struct Candidate {
    std::vector<std::string> tokens;
    std::string lower;
    std::string category_part;
    std::vector<std::string> trigrams;
    std::vector<std::string> name_trigrams;
  };

  // Per-thread memo of candidate scores for the active query.
  const std::vector<double>& candidate_scores(const std::string& query,
                                              const QueryCues& cues) const {
    struct Memo {
      const void* owner = nullptr;
      std::string query_key;
      std::vector<double> scores;
    };
    thread_local Memo memo;

    std::string query_key = query;
    query_key += '\x1e';
    if (cues.category_hint) query_key += *cues.category_hint;
    for (const auto& m : cues.modifiers) {
      query_key += '\x1e';
      query_key += m;
    }
    for (const auto& g : cues.negations) {
      query_key += '\x1d';
      query_key += g;
    }
    if (memo.owner == this && memo.query_key == query_key) return memo.scores;

    std::string target = to_lower(query);
    for (const auto& m : cues.modifiers) target += " " + to_lower(m);
    const std::vector<std::string> target_tri = char_trigrams(target);

    std::vector<std::vector<std::string>> negation_tri;
    for (const auto& g : cues.negations) negation_tri.push_back(char_trigrams(to_lower(g)));

    memo.owner = this;
    memo.query_key = std::move(query_key);
    memo.scores.assign(candidates_.size(), 0.0);
    for (std::size_t i = 0; i < candidates_.size(); ++i) {
      const Candidate& c = candidates_[i];
      double s = trigram_dice(target_tri, c.trigrams);
      if (cues.category_hint && *cues.category_hint == c.category_part) s += 0.25;
      for (const auto& neg : negation_tri) {
        if (trigram_dice(neg, c.name_trigrams) >= 0.5) {
          s -= 0.5;
          break;
        }
      }
      memo.scores[i] = s;
    }
    return memo.scores;
  }

  std::vector<Candidate> candidates_;
  std::unordered_map<std::string, std::vector<int>> prefix_index_;
  std::vector<std::string> vocabulary_;
};

class OracleScorer final : public SequenceScorer {
 public:
  OracleScorer(std::map<std::string, std::string> gold) : gold_(std::move(gold)) {}

  TokenDistribution score(const std::string& query, const QueryCues&,
                          std::span<const std::string> prefix) const override {
    auto it = gold_.find(query);
    if (it != gold_.end()) {
      const std::vector<std::string> gold_toks = tokens::tokenize(it->second);
      if (prefix.size() <= gold_toks.size() &&
          std::equal(prefix.begin(), prefix.end(), gold_toks.begin())) {
        const std::string next = (prefix.size() < gold_toks.size())
                                     ? gold_toks[prefix.size()]
                                     : std::string(tokens::kEos);
        TokenDistribution dist;
        dist.probs[next] = 1.0;
        return dist;
      }
    }
    // Off the gold path: no information, spread the mass.
    TokenDistribution dist;
    dist.probs[tokens::kEos] = 1.0;
    return dist;
  }

 private:
  std::map<std::string, std::string> gold_;
};

class RandomScorer final : public SequenceScorer {
 public:
  RandomScorer(std::vector<std::string> vocab, std::uint64_t seed, bool adversarial)
      : vocab_(std::move(vocab)), seed_(seed), adversarial_(adversarial) {}

  TokenDistribution score(const std::string& query, const QueryCues&,
                          std::span<const std::string> prefix) const override {
    std::uint64_t h = seed_ ^ 0x9e3779b97f4a7c15ULL;
    auto mix = [&h](std::string_view s) {
      for (char c : s) {
        h ^= static_cast<std::uint64_t>(static_cast<unsigned char>(c));
        h *= 0x100000001b3ULL;
      }
      h ^= h >> 31;
    };
    mix(query);
    for (const auto& t : prefix) mix(t);
    std::mt19937_64 rng(h);

    TokenDistribution dist;
    if (adversarial_) {
      switch (rng() % 4) {
        case 0:  // all-zero distribution
          return dist;
        case 1:  // mass only on out-of-vocabulary garbage
          dist.probs["__oov__" + std::to_string(rng() % 1000)] = 1.0;
          return dist;
        case 2: {  // negative and unnormalized values
          for (const std::string& t : vocab_)
            dist.probs[t] = static_cast<double>(static_cast<std::int64_t>(rng() % 21) - 10);
          return dist;
        }
        default: break;  // fall through to the random simplex draw
      }
    }
    double total = 0.0;
    for (const std::string& t : vocab_) {
      const double w = static_cast<double>(rng() % 1000) / 1000.0;
      dist.probs[t] = w;
      total += w;
    }
    if (total > 0.0)
      for (auto& [t, p] : dist.probs) p /= total;
    return dist;
  }

 private:
  std::vector<std::string> vocab_;
  std::uint64_t seed_;
  bool adversarial_;
};

}  // namespace

std::unique_ptr<SequenceScorer> lexical_baseline_scorer(const kb::KnowledgeBase& kb) {
  return std::make_unique<LexicalScorer>(kb);
}

std::unique_ptr<SequenceScorer> oracle_scorer(std::map<std::string, std::string> gold_by_query) {
  return std::make_unique<OracleScorer>(std::move(gold_by_query));
}

std::unique_ptr<SequenceScorer> random_scorer(const EntityTrie& trie, std::uint64_t seed,
                                              bool adversarial) {
  return std::make_unique<RandomScorer>(trie.vocabulary(), seed, adversarial);
}

Retriever::Retriever(const kb::KnowledgeBase& kb, QueryLexicon lexicon)
    : kb_(kb), lexicon_(std::move(lexicon)) {
  require(kb.indexed(), Errc::ValidationError, "knowledge base has no id index");
  std::vector<std::pair<std::string, std::int64_t>> ids(kb.id_index().begin(),
                                                        kb.id_index().end());
  trie_ = EntityTrie::build(ids);
}

RetrievedTarget Retriever::retrieve(const std::string& query, const SequenceScorer& scorer,
                                    int top_k, int beam_width) const {
  const QueryCues cues = analyze_query(query, lexicon_);
  RetrievedTarget out;
  out.result = constrained_beam_search(query, cues, trie_, scorer, beam_width, top_k);
  if (!out.result.entries.empty())
    out.top_entity = &kb_.entity(out.result.entries.front().osm_id);
  return out;
}

}  // namespace geodragon::retrieval
