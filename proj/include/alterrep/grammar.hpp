#pragma once

// Template generation of relative-clause training sentences, matched
// coordination controls, token-level in/out-of-RC probe labels, and masked
// copula agreement items.

#include <algorithm>
#include <array>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "alterrep/error.hpp"

namespace alterrep::grammar {

// ---------------------------------------------------------------------------
// Vocabulary

enum class Number { singular, plural };
enum class NounClass { human, thing };
enum class ObjectClass { human, thing, any };
enum class Partition { train, eval };

inline std::string_view to_string(Number n) { return n == Number::singular ? "sg" : "pl"; }

inline Number parse_number(std::string_view s) {
  if (s == "sg") return Number::singular;
  if (s == "pl") return Number::plural;
  fail(ErrorCode::format, "unknown number '" + std::string(s) + "'");
}

inline Number other(Number n) { return n == Number::singular ? Number::plural : Number::singular; }

struct Noun {
  std::string singular;
  std::string plural;
  NounClass cls = NounClass::human;
  Partition partition = Partition::train;

  const std::string& form(Number n) const { return n == Number::singular ? singular : plural; }
};

struct Verb {
  std::string lemma;  // also the plural present form
  std::string present_singular;
  std::string past;
  std::string participle;
  ObjectClass object = ObjectClass::any;
  Partition partition = Partition::train;

  const std::string& present(Number n) const { return n == Number::singular ? present_singular : lemma; }
  bool takes(NounClass c) const {
    return object == ObjectClass::any || (object == ObjectClass::human) == (c == NounClass::human);
  }
};

struct Lexicon {
  std::vector<Noun> nouns;
  std::vector<Verb> verbs;
  std::vector<std::string> attributive_adjectives;  // training objects
  std::vector<std::string> adverbs;                 // training main verbs
  std::vector<std::string> predicate_adjectives;    // agreement items
  std::vector<std::string> degree_modifiers;        // agreement items
  std::vector<std::string> complement_verbs;        // past tense, agreement items

  std::vector<const Noun*> nouns_where(Partition p, NounClass c) const {
    std::vector<const Noun*> out;
    for (const auto& n : nouns) {
      if (n.partition == p && n.cls == c) out.push_back(&n);
    }
    return out;
  }

  std::vector<const Verb*> verbs_where(Partition p, NounClass object) const {
    std::vector<const Verb*> out;
    for (const auto& v : verbs) {
      if (v.partition == p && v.takes(object)) out.push_back(&v);
    }
    return out;
  }
};

namespace detail {

inline NounClass parse_noun_class(std::string_view s, int line) {
  if (s == "human") return NounClass::human;
  if (s == "thing") return NounClass::thing;
  fail(ErrorCode::format, "lexicon line " + std::to_string(line) + ": unknown noun class '" + std::string(s) + "'");
}

inline ObjectClass parse_object_class(std::string_view s, int line) {
  if (s == "human") return ObjectClass::human;
  if (s == "thing") return ObjectClass::thing;
  if (s == "any") return ObjectClass::any;
  fail(ErrorCode::format, "lexicon line " + std::to_string(line) + ": unknown object class '" + std::string(s) + "'");
}

inline Partition parse_partition(std::string_view s, int line) {
  if (s == "train") return Partition::train;
  if (s == "eval") return Partition::eval;
  fail(ErrorCode::format, "lexicon line " + std::to_string(line) + ": unknown partition '" + std::string(s) + "'");
}

}  // namespace detail

/// Line-oriented lexicon format; '#' starts a comment.
///
///   noun  <sg> <pl> <human|thing> <train|eval>
///   verb  <lemma> <3sg-present> <past> <participle> <object: human|thing|any> <train|eval>
///   adj   <word> <attributive|predicative>
///   adv   <word>
///   deg   <word>
///   cverb <past-tense complement-taking verb>
inline Lexicon parse_lexicon(std::istream& in) {
  Lexicon lex;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    std::istringstream line(raw);
    std::vector<std::string> f;
    for (std::string w; line >> w;) f.push_back(w);
    if (f.empty()) continue;
    auto arity = [&](std::size_t n) {
      require(f.size() == n, ErrorCode::format,
              "lexicon line " + std::to_string(line_no) + ": '" + f[0] + "' expects " + std::to_string(n - 1) +
                  " fields");
    };
    if (f[0] == "noun") {
      arity(5);
      lex.nouns.push_back({f[1], f[2], detail::parse_noun_class(f[3], line_no), detail::parse_partition(f[4], line_no)});
    } else if (f[0] == "verb") {
      arity(7);
      lex.verbs.push_back({f[1], f[2], f[3], f[4], detail::parse_object_class(f[5], line_no),
                           detail::parse_partition(f[6], line_no)});
    } else if (f[0] == "adj") {
      arity(3);
      if (f[2] == "attributive") {
        lex.attributive_adjectives.push_back(f[1]);
      } else if (f[2] == "predicative") {
        lex.predicate_adjectives.push_back(f[1]);
      } else {
        fail(ErrorCode::format, "lexicon line " + std::to_string(line_no) + ": unknown adjective role '" + f[2] + "'");
      }
    } else if (f[0] == "adv") {
      arity(2);
      lex.adverbs.push_back(f[1]);
    } else if (f[0] == "deg") {
      arity(2);
      lex.degree_modifiers.push_back(f[1]);
    } else if (f[0] == "cverb") {
      arity(2);
      lex.complement_verbs.push_back(f[1]);
    } else {
      fail(ErrorCode::format, "lexicon line " + std::to_string(line_no) + ": unknown entry kind '" + f[0] + "'");
    }
  }
  return lex;
}

inline Lexicon load_lexicon(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCode::io, "cannot open lexicon '" + path + "'");
  return parse_lexicon(in);
}

inline constexpr std::string_view kBuiltinLexicon = R"(
# training nouns
noun employee employees human train
noun cousin cousins human train
noun author authors human train
noun pilot pilots human train
noun surgeon surgeons human train
noun senator senators human train
noun manager managers human train
noun teacher teachers human train
noun farmer farmers human train
noun doctor doctors human train
noun lawyer lawyers human train
noun athlete athletes human train
noun painter painters human train
noun soldier soldiers human train
noun driver drivers human train
noun reporter reporters human train
noun nurse nurses human train
noun chef chefs human train
noun clerk clerks human train
noun judge judges human train
noun country countries thing train
noun building buildings thing train
noun book books thing train
noun movie movies thing train
noun plan plans thing train
noun report reports thing train
noun song songs thing train
noun car cars thing train
noun house houses thing train
noun letter letters thing train
noun painting paintings thing train
noun project projects thing train
# evaluation nouns
noun skater skaters human eval
noun officer officers human eval
noun banker bankers human eval
noun customer customers human eval
noun minister ministers human eval
noun dancer dancers human eval
noun executive executives human eval
noun architect architects human eval
noun guard guards human eval
noun consultant consultants human eval
noun parent parents human eval
noun student students human eval
noun mechanic mechanics human eval
noun pastor pastors human eval
# training verbs (past tense only in training sentences)
verb welcome welcomes welcomed welcomed human train
verb thank thanks thanked thanked human train
verb praise praises praised praised human train
verb call calls called called human train
verb help helps helped helped human train
verb visit visits visited visited human train
verb blame blames blamed blamed human train
verb trust trusts trusted trusted human train
verb greet greets greeted greeted human train
verb follow follows followed followed human train
verb interview interviews interviewed interviewed human train
verb support supports supported supported human train
verb contact contacts contacted contacted human train
verb meet meets met met human train
verb criticize criticizes criticized criticized any train
verb buy buys bought bought thing train
verb sell sells sold sold thing train
verb write writes wrote written thing train
verb describe describes described described thing train
verb discuss discusses discussed discussed thing train
verb divide divides divided divided thing train
verb search searches searched searched thing train
verb destroy destroys destroyed destroyed thing train
verb build builds built built thing train
verb borrow borrows borrowed borrowed thing train
verb study studies studied studied thing train
# evaluation verbs (present tense inside agreement items)
verb love loves loved loved human eval
verb like likes liked liked human eval
verb admire admires admired admired human eval
verb hate hates hated hated human eval
verb respect respects respected respected human eval
verb annoy annoys annoyed annoyed human eval
verb amuse amuses amused amused human eval
verb inspire inspires inspired inspired human eval
adj beautiful attributive
adj old attributive
adj new attributive
adj famous attributive
adj expensive attributive
adj strange attributive
adj large attributive
adj small attributive
adv quickly
adv slowly
adv suddenly
adv quietly
adv eagerly
adv recently
adv finally
adv carefully
adj happy predicative
adj nice predicative
adj tall predicative
adj young predicative
adj smart predicative
adj brave predicative
adj rich predicative
adj polite predicative
adj tired predicative
adj funny predicative
deg very
deg quite
deg really
deg so
deg extremely
deg rather
deg truly
deg fairly
cverb knew
cverb said
cverb thought
cverb believed
cverb assumed
cverb hoped
)";

inline const Lexicon& builtin_lexicon() {
  static const Lexicon lex = [] {
    std::istringstream in{std::string(kBuiltinLexicon)};
    return parse_lexicon(in);
  }();
  return lex;
}

// ---------------------------------------------------------------------------
// Sentences

enum class Construction { ORC, ORRC, PRC, PRRC, SRC, COORD_PO, COORD_S };

inline constexpr std::array<Construction, 7> kConstructions = {
    Construction::ORC, Construction::ORRC,     Construction::PRC,    Construction::PRRC,
    Construction::SRC, Construction::COORD_PO, Construction::COORD_S};

inline constexpr std::array<Construction, 5> kRcTypes = {Construction::ORC, Construction::ORRC, Construction::PRC,
                                                          Construction::PRRC, Construction::SRC};

inline std::string_view to_string(Construction c) {
  switch (c) {
    case Construction::ORC: return "ORC";
    case Construction::ORRC: return "ORRC";
    case Construction::PRC: return "PRC";
    case Construction::PRRC: return "PRRC";
    case Construction::SRC: return "SRC";
    case Construction::COORD_PO: return "COORD_PO";
    case Construction::COORD_S: return "COORD_S";
  }
  return "?";
}

inline Construction parse_construction(std::string_view s) {
  for (auto c : kConstructions) {
    if (to_string(c) == s) return c;
  }
  fail(ErrorCode::format, "unknown construction '" + std::string(s) + "'");
}

inline bool is_rc(Construction c) { return c != Construction::COORD_PO && c != Construction::COORD_S; }

/// Coordination control lexically matched to an RC type.
inline Construction matched_coordination(Construction rc) {
  return rc == Construction::SRC ? Construction::COORD_S : Construction::COORD_PO;
}

/// Inclusive token range.
struct Span {
  long first = 0;
  long last = 0;

  bool contains(long i) const { return i >= first && i <= last; }
  friend bool operator==(const Span&, const Span&) = default;
};

struct SentenceRecord {
  std::string id;
  Construction construction = Construction::ORC;
  std::vector<std::string> tokens;
  std::optional<Span> rc_span;
  std::uint64_t lexical_seed = 0;

  std::string text() const {
    std::string out;
    for (const auto& t : tokens) {
      if (!out.empty()) out += ' ';
      out += t;
    }
    return out;
  }
};

inline void validate(const SentenceRecord& r) {
  require(r.rc_span.has_value() == is_rc(r.construction), ErrorCode::invalid_argument,
          r.id + ": rc_span must be present exactly for RC constructions");
  if (r.rc_span) {
    require(r.rc_span->first >= 0 && r.rc_span->first <= r.rc_span->last &&
                r.rc_span->last < static_cast<long>(r.tokens.size()),
            ErrorCode::invalid_argument, r.id + ": rc_span outside token bounds");
  }
}

/// Lexical material shared by the seven constructions of one lexical seed.
/// Words are stored already inflected.
struct LexicalTuple {
  std::string head;       // RC head / object of the RC verb
  Number head_number = Number::singular;
  std::string embedded;   // subject of the RC verb
  std::string rc_verb;    // past tense
  std::string rc_participle;
  std::string main_verb;  // past tense
  std::optional<std::string> adjective;
  std::string object;
  std::string src_main_verb;
  std::optional<std::string> adverb;
  std::string src_object;
};

namespace detail {

inline std::string capitalized(std::string w) {
  if (!w.empty() && w[0] >= 'a' && w[0] <= 'z') w[0] = static_cast<char>(w[0] - 'a' + 'A');
  return w;
}

}  // namespace detail

/// Renders one construction of a lexical tuple; returns tokens and RC span.
inline std::pair<std::vector<std::string>, std::optional<Span>> render(Construction c, const LexicalTuple& t) {
  std::vector<std::string> tok;
  std::optional<Span> span;
  auto push = [&](const std::string& w) { tok.push_back(w); };
  auto main_vp = [&] {
    push(t.main_verb);
    push("the");
    if (t.adjective) push(*t.adjective);
    push(t.object);
  };
  auto src_vp = [&] {
    if (t.adverb) push(*t.adverb);
    push(t.src_main_verb);
    push("the");
    push(t.src_object);
  };
  const std::string aux = t.head_number == Number::singular ? "was" : "were";

  push("The");
  switch (c) {
    case Construction::ORC:
      push(t.head);
      push("that"), push("the"), push(t.embedded), push(t.rc_verb);
      span = Span{2, 5};
      main_vp();
      break;
    case Construction::ORRC:
      push(t.head);
      push("the"), push(t.embedded), push(t.rc_verb);
      span = Span{2, 4};
      main_vp();
      break;
    case Construction::PRC:
      push(t.head);
      push("that"), push(aux), push(t.rc_participle), push("by"), push("the"), push(t.embedded);
      span = Span{2, 7};
      main_vp();
      break;
    case Construction::PRRC:
      push(t.head);
      push(t.rc_participle), push("by"), push("the"), push(t.embedded);
      span = Span{2, 5};
      main_vp();
      break;
    case Construction::SRC:
      push(t.embedded);
      push("that"), push(t.rc_verb), push("the"), push(t.head);
      span = Span{2, 5};
      src_vp();
      break;
    case Construction::COORD_PO:
      push(t.head);
      push(t.rc_verb), push("the"), push(t.embedded), push("and");
      main_vp();
      break;
    case Construction::COORD_S:
      push(t.embedded);
      push(t.rc_verb), push("the"), push(t.head), push("and");
      src_vp();
      break;
  }
  push(".");
  return {std::move(tok), span};
}

/// Training sentences for every construction; `by_construction[i]` follows
/// kConstructions order and row j of every set shares lexical seed j.
struct TrainingSets {
  std::array<std::vector<SentenceRecord>, 7> by_construction;

  const std::vector<SentenceRecord>& operator[](Construction c) const {
    return by_construction[static_cast<std::size_t>(c)];
  }
};

/// Training verbs must have a past form distinct from both present forms, so
/// the sentences carry no overt present-tense agreement.
inline void check_past_tense_lexicon(const Lexicon& lex) {
  for (const auto& v : lex.verbs) {
    if (v.partition != Partition::train) continue;
    require(v.past != v.lemma && v.past != v.present_singular, ErrorCode::invalid_argument,
            "training verb '" + v.lemma + "' has a past form identical to a present form");
  }
}

inline TrainingSets generate_training_sets(const Lexicon& lex, long n_per_set = 4800, std::uint64_t seed = 0) {
  require(n_per_set >= 1, ErrorCode::invalid_argument, "n_per_set must be >= 1");
  check_past_tense_lexicon(lex);
  const auto humans = lex.nouns_where(Partition::train, NounClass::human);
  const auto things = lex.nouns_where(Partition::train, NounClass::thing);
  const auto rc_verbs = lex.verbs_where(Partition::train, NounClass::human);
  const auto main_verbs = lex.verbs_where(Partition::train, NounClass::thing);
  require(humans.size() >= 2 && !things.empty() && !rc_verbs.empty() && !main_verbs.empty(),
          ErrorCode::invalid_argument,
          "lexicon needs >= 2 human training nouns, a thing noun, a human-object verb and a thing-object verb");

  std::mt19937_64 rng(seed);
  auto pick = [&rng](const auto& pool) -> decltype(auto) {
    std::uniform_int_distribution<std::size_t> d(0, pool.size() - 1);
    return pool[d(rng)];
  };
  auto number = [&rng] { return std::bernoulli_distribution(0.5)(rng) ? Number::plural : Number::singular; };
  auto maybe = [&rng](const std::vector<std::string>& pool) -> std::optional<std::string> {
    if (pool.empty() || !std::bernoulli_distribution(0.5)(rng)) return std::nullopt;
    return pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)];
  };

  TrainingSets sets;
  std::array<std::unordered_set<std::string>, 7> seen;
  const long max_attempts = 50 * n_per_set + 1000;
  long attempts = 0;
  std::uint64_t lexical_seed = 0;
  while (static_cast<long>(sets.by_construction[0].size()) < n_per_set) {
    require(++attempts <= max_attempts, ErrorCode::invalid_argument,
            "lexicon too small for " + std::to_string(n_per_set) + " distinct sentences per set");
    const Noun* head = pick(humans);
    const Noun* embedded = pick(humans);
    if (head == embedded) continue;
    const Verb* rc = pick(rc_verbs);
    const Verb* main = pick(main_verbs);
    const Verb* src_main = pick(main_verbs);
    if (main == rc || src_main == rc) continue;

    LexicalTuple t;
    t.head_number = number();
    t.head = head->form(t.head_number);
    t.embedded = embedded->form(number());
    t.rc_verb = rc->past;
    t.rc_participle = rc->participle;
    t.main_verb = main->past;
    t.adjective = maybe(lex.attributive_adjectives);
    t.object = pick(things)->form(number());
    t.src_main_verb = src_main->past;
    t.adverb = maybe(lex.adverbs);
    t.src_object = pick(things)->form(number());

    std::array<std::pair<std::vector<std::string>, std::optional<Span>>, 7> rendered;
    bool duplicate = false;
    for (std::size_t i = 0; i < kConstructions.size(); ++i) {
      rendered[i] = render(kConstructions[i], t);
      SentenceRecord probe;
      probe.tokens = rendered[i].first;
      if (seen[i].contains(probe.text())) duplicate = true;
    }
    if (duplicate) continue;

    for (std::size_t i = 0; i < kConstructions.size(); ++i) {
      SentenceRecord r;
      const auto count = sets.by_construction[i].size();
      std::ostringstream id;
      id << "train-" << to_string(kConstructions[i]) << '-' << count;
      r.id = id.str();
      r.construction = kConstructions[i];
      r.tokens = std::move(rendered[i].first);
      r.rc_span = rendered[i].second;
      r.lexical_seed = lexical_seed;
      seen[i].insert(r.text());
      sets.by_construction[i].push_back(std::move(r));
    }
    ++lexical_seed;
  }
  return sets;
}

inline const std::unordered_set<std::string>& function_words() {
  static const std::unordered_set<std::string> words = {"the", "The", "that", "was", "were", "by", "and", "."};
  return words;
}

/// Content lemmas of a token sequence, sorted; function words are dropped
/// and inflected forms mapped to their lexicon lemma.
inline std::vector<std::string> content_lemmas(const std::vector<std::string>& tokens, const Lexicon& lex) {
  std::unordered_map<std::string, std::string> lemma_of;
  for (const auto& n : lex.nouns) lemma_of[n.singular] = n.singular, lemma_of[n.plural] = n.singular;
  for (const auto& v : lex.verbs) {
    for (const auto* form : {&v.lemma, &v.present_singular, &v.past, &v.participle}) lemma_of[*form] = v.lemma;
  }
  std::vector<std::string> out;
  for (const auto& t : tokens) {
    if (function_words().contains(t)) continue;
    auto it = lemma_of.find(t);
    out.push_back(it == lemma_of.end() ? t : it->second);
  }
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Probe labels

struct ProbeExample {
  std::string sentence_id;
  long token_index = 0;
  std::uint8_t label = 0;  // 1 = inside an RC

  friend bool operator==(const ProbeExample&, const ProbeExample&) = default;
};

struct ProbeLabelOptions {
  /// Drop the sentence-initial determiner and head noun from the negatives.
  bool exclude_initial_head = false;
  std::uint64_t seed = 0;
};

struct ProbeLabels {
  std::vector<ProbeExample> examples;
  long positives = 0;
  long negatives = 0;
  /// Positive and negative counts per sentence id after balancing.
  std::map<std::string, std::pair<long, long>> per_sentence;
};

/// Every candidate token before balancing. Positive: tokens inside the RC
/// span of RC sentences. Negative: tokens outside the span in RC sentences
/// plus every token of coordination controls. Punctuation is skipped.
inline std::vector<ProbeExample> label_tokens(const std::vector<SentenceRecord>& records,
                                              const ProbeLabelOptions& options = {}) {
  std::vector<ProbeExample> all;
  for (const auto& r : records) {
    validate(r);
    for (long i = 0; i < static_cast<long>(r.tokens.size()); ++i) {
      if (r.tokens[static_cast<std::size_t>(i)] == ".") continue;
      const bool inside = r.rc_span && r.rc_span->contains(i);
      if (!inside && options.exclude_initial_head && i <= 1) continue;
      all.push_back({r.id, i, static_cast<std::uint8_t>(inside ? 1 : 0)});
    }
  }
  return all;
}

/// Equalizes the classes by seeded downsampling of the larger one; the
/// survivors keep their input order.
inline ProbeLabels balance(const std::vector<ProbeExample>& all, std::uint64_t seed) {
  std::vector<std::size_t> by_class[2];
  for (std::size_t i = 0; i < all.size(); ++i) by_class[all[i].label].push_back(i);
  require(!by_class[0].empty() && !by_class[1].empty(), ErrorCode::degenerate_input,
          "probe labels: records yield a single class");
  const std::size_t keep = std::min(by_class[0].size(), by_class[1].size());
  std::mt19937_64 rng(seed);
  std::vector<bool> kept(all.size(), false);
  for (auto& rows : by_class) {
    std::shuffle(rows.begin(), rows.end(), rng);
    for (std::size_t j = 0; j < keep; ++j) kept[rows[j]] = true;
  }

  ProbeLabels out;
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (!kept[i]) continue;
    auto& counts = out.per_sentence[all[i].sentence_id];
    (all[i].label == 1 ? counts.first : counts.second) += 1;
    (all[i].label == 1 ? out.positives : out.negatives) += 1;
    out.examples.push_back(all[i]);
  }
  return out;
}

inline ProbeLabels label_probe_examples(const std::vector<SentenceRecord>& records,
                                        const ProbeLabelOptions& options = {}) {
  require(!records.empty(), ErrorCode::invalid_argument, "label_probe_examples: no records");
  return balance(label_tokens(records, options), options.seed);
}

/// Records of one RC type together with its matched coordination set.
inline std::vector<SentenceRecord> probe_training_records(const TrainingSets& sets, Construction rc_type) {
  require(is_rc(rc_type), ErrorCode::invalid_argument, "probe_training_records needs an RC construction");
  std::vector<SentenceRecord> out = sets[rc_type];
  const auto& coord = sets[matched_coordination(rc_type)];
  out.insert(out.end(), coord.begin(), coord.end());
  return out;
}

// ---------------------------------------------------------------------------
// Agreement items

enum class Condition { rc_attractor, rc_no_attractor, simple, sentential_complement };

inline std::string_view to_string(Condition c) {
  switch (c) {
    case Condition::rc_attractor: return "rc_attractor";
    case Condition::rc_no_attractor: return "rc_no_attractor";
    case Condition::simple: return "simple";
    case Condition::sentential_complement: return "sentential_complement";
  }
  return "?";
}

inline Condition parse_condition(std::string_view s) {
  for (auto c : {Condition::rc_attractor, Condition::rc_no_attractor, Condition::simple,
                 Condition::sentential_complement}) {
    if (to_string(c) == s) return c;
  }
  fail(ErrorCode::format, "unknown condition '" + std::string(s) + "'");
}

inline constexpr std::string_view kMask = "[MASK]";

struct AgreementItem {
  std::string id;
  std::vector<std::string> tokens;  // exactly one kMask
  long mask_index = 0;
  std::string correct_verb;
  std::string incorrect_verb;
  Condition condition = Condition::simple;
  std::optional<Construction> rc_type;
  std::optional<Span> rc_span;
  Number subject_number = Number::singular;
  /// RC-internal noun for RC items, matrix subject for sentential complements.
  std::optional<Number> attractor_number;

  std::string text() const {
    std::string out;
    for (const auto& t : tokens) {
      if (!out.empty()) out += ' ';
      out += t;
    }
    return out;
  }
};

inline void validate(const AgreementItem& item) {
  require(item.correct_verb != item.incorrect_verb, ErrorCode::invalid_argument, item.id + ": identical candidates");
  require(std::count(item.tokens.begin(), item.tokens.end(), std::string(kMask)) == 1, ErrorCode::invalid_argument,
          item.id + ": expected exactly one mask token");
  require(item.mask_index >= 0 && item.mask_index < static_cast<long>(item.tokens.size()) &&
              item.tokens[static_cast<std::size_t>(item.mask_index)] == kMask,
          ErrorCode::invalid_argument, item.id + ": mask index does not point at the mask");
  const bool has_rc = item.rc_type.has_value();
  const bool mismatch = item.attractor_number && *item.attractor_number != item.subject_number;
  require((item.condition == Condition::rc_attractor) == (has_rc && mismatch), ErrorCode::invalid_argument,
          item.id + ": rc_attractor requires an RC with a number-mismatched attractor");
  if (item.condition == Condition::rc_no_attractor) {
    require(has_rc && !mismatch, ErrorCode::invalid_argument, item.id + ": rc_no_attractor requires matched numbers");
  }
}

/// Which agreement constructions the suite contains; n items each.
struct AgreementCell {
  std::optional<Construction> rc_type;
  Condition condition;
};

inline std::vector<AgreementCell> agreement_cells() {
  std::vector<AgreementCell> cells;
  for (auto rc : kRcTypes) {
    cells.push_back({rc, Condition::rc_attractor});
    cells.push_back({rc, Condition::rc_no_attractor});
  }
  cells.push_back({std::nullopt, Condition::simple});
  cells.push_back({std::nullopt, Condition::sentential_complement});
  return cells;
}

inline std::string cell_tag(const AgreementCell& cell) {
  if (cell.rc_type) return std::string(to_string(*cell.rc_type));
  return cell.condition == Condition::simple ? "SIMPLE" : "SENT_COMP";
}

/// Words of one agreement item; `verb` is an evaluation verb.
struct AgreementTuple {
  const Noun* subject = nullptr;
  Number subject_number = Number::singular;
  const Noun* attractor = nullptr;  // RC noun or sentential-complement matrix subject
  Number attractor_number = Number::singular;
  const Verb* verb = nullptr;
  std::string complement_verb;
  std::optional<std::string> degree;
  std::string adjective;
};

inline AgreementItem render_agreement(const AgreementCell& cell, const AgreementTuple& t) {
  AgreementItem item;
  item.condition = cell.condition;
  item.rc_type = cell.rc_type;
  item.subject_number = t.subject_number;
  item.correct_verb = t.subject_number == Number::singular ? "is" : "are";
  item.incorrect_verb = t.subject_number == Number::singular ? "are" : "is";
  auto& tok = item.tokens;
  const std::string subject = t.subject->form(t.subject_number);

  if (cell.condition == Condition::sentential_complement) {
    tok = {"The", t.attractor->form(t.attractor_number), t.complement_verb, "the", subject};
    item.attractor_number = t.attractor_number;
  } else {
    tok = {"The", subject};
  }
  if (cell.rc_type) {
    const std::string attractor = t.attractor->form(t.attractor_number);
    item.attractor_number = t.attractor_number;
    switch (*cell.rc_type) {
      case Construction::ORC:
        tok.insert(tok.end(), {"that", "the", attractor, t.verb->present(t.attractor_number)});
        item.rc_span = Span{2, 5};
        break;
      case Construction::ORRC:
        tok.insert(tok.end(), {"the", attractor, t.verb->present(t.attractor_number)});
        item.rc_span = Span{2, 4};
        break;
      case Construction::PRC:
        tok.insert(tok.end(), {"that", t.subject_number == Number::singular ? "is" : "are", t.verb->participle, "by",
                               "the", attractor});
        item.rc_span = Span{2, 7};
        break;
      case Construction::PRRC:
        tok.insert(tok.end(), {t.verb->participle, "by", "the", attractor});
        item.rc_span = Span{2, 5};
        break;
      case Construction::SRC:
        tok.insert(tok.end(), {"that", t.verb->present(t.subject_number), "the", attractor});
        item.rc_span = Span{2, 5};
        break;
      default:
        fail(ErrorCode::invalid_argument, "agreement items need an RC construction");
    }
  }
  item.mask_index = static_cast<long>(tok.size());
  tok.emplace_back(kMask);
  if (t.degree) tok.push_back(*t.degree);
  tok.push_back(t.adjective);
  tok.emplace_back(".");
  return item;
}

/// `n_per_construction` items for each agreement cell, alternating singular
/// and plural subjects.
inline std::vector<AgreementItem> generate_agreement_suite(const Lexicon& lex, long n_per_construction = 1750,
                                                           std::uint64_t seed = 0) {
  require(n_per_construction >= 1, ErrorCode::invalid_argument, "n_per_construction must be >= 1");
  const auto humans = lex.nouns_where(Partition::eval, NounClass::human);
  const auto verbs = lex.verbs_where(Partition::eval, NounClass::human);
  require(humans.size() >= 2 && !verbs.empty() && !lex.predicate_adjectives.empty() &&
              !lex.complement_verbs.empty(),
          ErrorCode::invalid_argument,
          "lexicon needs >= 2 evaluation nouns, an evaluation verb, a predicate adjective and a complement verb");

  std::mt19937_64 rng(seed);
  auto index = [&rng](std::size_t size) { return std::uniform_int_distribution<std::size_t>(0, size - 1)(rng); };

  std::vector<AgreementItem> items;
  for (const auto& cell : agreement_cells()) {
    std::unordered_set<std::string> seen;
    const long max_attempts = 200 * n_per_construction + 1000;
    long attempts = 0;
    long made = 0;
    while (made < n_per_construction) {
      require(++attempts <= max_attempts, ErrorCode::invalid_argument,
              "lexicon exhausted: cannot build " + std::to_string(n_per_construction) + " distinct " + cell_tag(cell) +
                  "/" + std::string(to_string(cell.condition)) + " items");
      AgreementTuple t;
      t.subject_number = made % 2 == 0 ? Number::singular : Number::plural;
      t.subject = humans[index(humans.size())];
      t.attractor = humans[index(humans.size())];
      if (t.attractor == t.subject) continue;
      if (cell.condition == Condition::rc_attractor) {
        t.attractor_number = other(t.subject_number);
      } else if (cell.condition == Condition::rc_no_attractor) {
        t.attractor_number = t.subject_number;
      } else {
        t.attractor_number = std::bernoulli_distribution(0.5)(rng) ? Number::plural : Number::singular;
      }
      t.verb = verbs[index(verbs.size())];
      t.complement_verb = lex.complement_verbs[index(lex.complement_verbs.size())];
      const std::size_t degree = index(lex.degree_modifiers.size() + 1);
      if (degree < lex.degree_modifiers.size()) t.degree = lex.degree_modifiers[degree];
      t.adjective = lex.predicate_adjectives[index(lex.predicate_adjectives.size())];

      AgreementItem item = render_agreement(cell, t);
      if (!seen.insert(item.text()).second) continue;
      std::ostringstream id;
      id << "eval-" << cell_tag(cell) << '-' << to_string(cell.condition) << '-' << made;
      item.id = id.str();
      items.push_back(std::move(item));
      ++made;
    }
  }
  return items;
}

// ---------------------------------------------------------------------------
// Structured text I/O (tab separated, '#' header line)

namespace detail {

inline std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

inline std::vector<std::string> split_tokens(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

inline std::string span_text(const std::optional<Span>& s) {
  return s ? std::to_string(s->first) + "-" + std::to_string(s->last) : "-";
}

inline long parse_long(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const long v = std::stol(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    fail(ErrorCode::format, "bad " + what + " '" + s + "'");
  }
}

inline std::optional<Span> parse_span(const std::string& s) {
  if (s == "-") return std::nullopt;
  const auto dash = s.find('-');
  require(dash != std::string::npos, ErrorCode::format, "bad span '" + s + "'");
  return Span{parse_long(s.substr(0, dash), "span start"), parse_long(s.substr(dash + 1), "span end")};
}

}  // namespace detail

inline constexpr std::string_view kSentenceHeader = "#id\tconstruction\ttokens\trc_span\tlexical_seed";
inline constexpr std::string_view kAgreementHeader =
    "#id\tconstruction\ttokens\trc_span\tmask_index\tcorrect\tincorrect\tcondition\tsubject_number\tattractor_number";
inline constexpr std::string_view kProbeLabelHeader = "#sentence_id\ttoken_index\tlabel";

inline void write_sentences(std::ostream& out, const std::vector<SentenceRecord>& records) {
  out << kSentenceHeader << '\n';
  for (const auto& r : records) {
    out << r.id << '\t' << to_string(r.construction) << '\t' << r.text() << '\t' << detail::span_text(r.rc_span)
        << '\t' << r.lexical_seed << '\n';
  }
}

inline std::vector<SentenceRecord> read_sentences(std::istream& in) {
  std::vector<SentenceRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto f = detail::split(line, '\t');
    require(f.size() == 5, ErrorCode::format, "sentence record needs 5 fields: " + line);
    SentenceRecord r;
    r.id = f[0];
    r.construction = parse_construction(f[1]);
    r.tokens = detail::split_tokens(f[2]);
    r.rc_span = detail::parse_span(f[3]);
    r.lexical_seed = static_cast<std::uint64_t>(detail::parse_long(f[4], "lexical seed"));
    validate(r);
    out.push_back(std::move(r));
  }
  return out;
}

inline void write_agreement(std::ostream& out, const std::vector<AgreementItem>& items) {
  out << kAgreementHeader << '\n';
  for (const auto& it : items) {
    AgreementCell cell{it.rc_type, it.condition};
    out << it.id << '\t' << cell_tag(cell) << '\t' << it.text() << '\t' << detail::span_text(it.rc_span) << '\t'
        << it.mask_index << '\t' << it.correct_verb << '\t' << it.incorrect_verb << '\t' << to_string(it.condition)
        << '\t' << to_string(it.subject_number) << '\t'
        << (it.attractor_number ? std::string(to_string(*it.attractor_number)) : "-") << '\n';
  }
}

inline std::vector<AgreementItem> read_agreement(std::istream& in) {
  std::vector<AgreementItem> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto f = detail::split(line, '\t');
    require(f.size() == 10, ErrorCode::format, "agreement record needs 10 fields: " + line);
    AgreementItem it;
    it.id = f[0];
    if (f[1] != "SIMPLE" && f[1] != "SENT_COMP") it.rc_type = parse_construction(f[1]);
    it.tokens = detail::split_tokens(f[2]);
    it.rc_span = detail::parse_span(f[3]);
    it.mask_index = detail::parse_long(f[4], "mask index");
    it.correct_verb = f[5];
    it.incorrect_verb = f[6];
    it.condition = parse_condition(f[7]);
    it.subject_number = parse_number(f[8]);
    if (f[9] != "-") it.attractor_number = parse_number(f[9]);
    validate(it);
    out.push_back(std::move(it));
  }
  return out;
}

inline void write_probe_labels(std::ostream& out, const ProbeLabels& labels) {
  out << kProbeLabelHeader << '\n';
  for (const auto& e : labels.examples) {
    out << e.sentence_id << '\t' << e.token_index << '\t' << static_cast<int>(e.label) << '\n';
  }
}

inline std::vector<ProbeExample> read_probe_labels(std::istream& in) {
  std::vector<ProbeExample> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto f = detail::split(line, '\t');
    require(f.size() == 3, ErrorCode::format, "probe label record needs 3 fields: " + line);
    const long label = detail::parse_long(f[2], "label");
    require(label == 0 || label == 1, ErrorCode::format, "probe label must be 0 or 1");
    out.push_back({f[0], detail::parse_long(f[1], "token index"), static_cast<std::uint8_t>(label)});
  }
  return out;
}

}  // namespace alterrep::grammar
