#include <catch_amalgamated.hpp>

#include <set>
#include <sstream>

#include "alterrep/grammar.hpp"
#include "golden.hpp"

using namespace alterrep;
using namespace alterrep::grammar;

namespace {

std::vector<std::string> words(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

const Noun* noun(const Lexicon& lex, const std::string& singular) {
  for (const auto& n : lex.nouns) {
    if (n.singular == singular) return &n;
  }
  FAIL("missing noun " << singular);
  return nullptr;
}

const Verb* verb(const Lexicon& lex, const std::string& lemma) {
  for (const auto& v : lex.verbs) {
    if (v.lemma == lemma) return &v;
  }
  FAIL("missing verb " << lemma);
  return nullptr;
}

const TrainingSets& small_sets() {
  static const TrainingSets sets = generate_training_sets(builtin_lexicon(), 200, 3);
  return sets;
}

}  // namespace

TEST_CASE("fixed-tuple exemplars render with the expected RC spans") {
  const auto all = golden::load(ALTERREP_TEST_DATA "/golden_sentences.tsv");
  const auto tuple = golden::exemplar_tuple();
  long checked = 0;
  for (const auto& g : all) {
    if (g.seed != "exemplar") continue;
    const auto [tokens, span] = render(g.construction, tuple);
    CHECK(tokens == g.tokens);
    CHECK(span == g.span);
    ++checked;
  }
  CHECK(checked == 7);
}

TEST_CASE("generated sentences match the hand-checked golden set") {
  const auto all = golden::load(ALTERREP_TEST_DATA "/golden_sentences.tsv");
  const auto sets = generate_training_sets(builtin_lexicon(), 19, 7);
  std::map<Construction, long> per_construction;
  for (const auto& g : all) {
    ++per_construction[g.construction];
    if (g.seed == "exemplar") continue;
    const auto& set = sets[g.construction];
    const auto seed = static_cast<std::size_t>(std::stoul(g.seed));
    REQUIRE(seed < set.size());
    CHECK(set[seed].tokens == g.tokens);
    CHECK(set[seed].rc_span == g.span);
    CHECK(set[seed].lexical_seed == seed);
  }
  for (auto c : kConstructions) CHECK(per_construction[c] == 20);
}

TEST_CASE("RC spans cover exactly the relative clause words") {
  for (auto c : kConstructions) {
    for (const auto& r : small_sets()[c]) {
      REQUIRE(r.rc_span.has_value() == is_rc(c));
      if (!r.rc_span) {
        CHECK(std::count(r.tokens.begin(), r.tokens.end(), "and") == 1);
        continue;
      }
      const auto& t = r.tokens;
      const auto first = static_cast<std::size_t>(r.rc_span->first);
      const auto last = static_cast<std::size_t>(r.rc_span->last);
      // The span starts right after the initial "The N" and its last word
      // is the RC verb (active) or the agent noun (passive and SRC).
      CHECK(first == 2);
      if (c == Construction::ORC || c == Construction::PRC || c == Construction::SRC) CHECK(t[first] == "that");
      if (c == Construction::PRC || c == Construction::PRRC) CHECK(t[last - 2] == "by");
      CHECK(t[last + 1] != "the");
    }
  }
}

TEST_CASE("ORC and ORRC differ only by the complementizer") {
  const auto& orc = small_sets()[Construction::ORC];
  const auto& orrc = small_sets()[Construction::ORRC];
  REQUIRE(orc.size() == orrc.size());
  for (std::size_t i = 0; i < orc.size(); ++i) {
    REQUIRE(orc[i].lexical_seed == orrc[i].lexical_seed);
    auto without = orc[i].tokens;
    without.erase(without.begin() + 2);
    CHECK(orc[i].tokens[2] == "that");
    CHECK(without == orrc[i].tokens);
  }
}

TEST_CASE("RC sets and their coordination controls share content lemmas") {
  const auto& lex = builtin_lexicon();
  for (auto rc : kRcTypes) {
    const auto& rcs = small_sets()[rc];
    const auto& coord = small_sets()[matched_coordination(rc)];
    REQUIRE(rcs.size() == coord.size());
    for (std::size_t i = 0; i < rcs.size(); ++i) {
      CHECK(rcs[i].lexical_seed == coord[i].lexical_seed);
      CHECK(content_lemmas(rcs[i].tokens, lex) == content_lemmas(coord[i].tokens, lex));
    }
  }
  CHECK(matched_coordination(Construction::SRC) == Construction::COORD_S);
  CHECK(matched_coordination(Construction::PRRC) == Construction::COORD_PO);
}

TEST_CASE("training sentences use past-tense verbs only") {
  const auto& lex = builtin_lexicon();
  std::set<std::string> present;
  for (const auto& v : lex.verbs) present.insert(v.lemma), present.insert(v.present_singular);
  for (auto c : kConstructions) {
    for (const auto& r : small_sets()[c]) {
      for (const auto& t : r.tokens) CHECK_FALSE(present.contains(t));
    }
  }
  Lexicon bad = lex;
  bad.verbs.push_back({"put", "puts", "put", "put", ObjectClass::thing, Partition::train});
  CHECK_THROWS_AS(generate_training_sets(bad, 10, 1), Error);
}

TEST_CASE("training sets are deterministic and duplicate free") {
  const auto again = generate_training_sets(builtin_lexicon(), 200, 3);
  for (auto c : kConstructions) {
    const auto& a = small_sets()[c];
    const auto& b = again[c];
    REQUIRE(a.size() == 200);
    std::set<std::string> texts;
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].tokens == b[i].tokens);
      texts.insert(a[i].text());
    }
    CHECK(texts.size() == 200);
  }
  CHECK(small_sets()[Construction::PRC][5].id == "train-PRC-5");
}

TEST_CASE("default training set size") {
  const auto sets = generate_training_sets(builtin_lexicon());
  for (auto c : kConstructions) CHECK(sets[c].size() == 4800);
}

TEST_CASE("a tiny lexicon is reported as too small") {
  std::istringstream text(R"(
noun cook cooks human train
noun baker bakers human train
noun pie pies thing train
verb help helps helped helped human train
verb bake bakes baked baked thing train
)");
  const auto lex = parse_lexicon(text);
  CHECK(generate_training_sets(lex, 5, 1)[Construction::ORC].size() == 5);
  try {
    generate_training_sets(lex, 500, 1);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::invalid_argument);
  }
}

TEST_CASE("lexicon parser errors") {
  std::istringstream arity("noun cook cooks human\n");
  CHECK_THROWS_AS(parse_lexicon(arity), Error);
  std::istringstream kind("pronoun she they\n");
  CHECK_THROWS_AS(parse_lexicon(kind), Error);
  std::istringstream role("adj tall sideways\n");
  CHECK_THROWS_AS(parse_lexicon(role), Error);
  CHECK_THROWS_AS(load_lexicon("/nonexistent/lexicon.txt"), Error);
}

TEST_CASE("train and eval vocabularies are disjoint") {
  const auto& lex = builtin_lexicon();
  std::set<std::string> train_words;
  for (auto c : kConstructions) {
    for (const auto& r : small_sets()[c]) train_words.insert(r.tokens.begin(), r.tokens.end());
  }
  for (const auto& item : generate_agreement_suite(lex, 50, 2)) {
    for (const auto& t : item.tokens) {
      if (function_words().contains(t)) continue;
      CHECK_FALSE(train_words.contains(t));
    }
  }
}

TEST_CASE("probe label examples from the cousin sentences") {
  SentenceRecord src{"src", Construction::SRC, words("My cousin that liked the book hated movies"), Span{2, 5}, 0};
  SentenceRecord coord{"coord", Construction::COORD_S, words("My cousin liked the book and hated movies"),
                       std::nullopt, 0};
  const auto all = label_tokens({src, coord});
  auto label_of = [&](const std::string& id, long index) {
    for (const auto& e : all) {
      if (e.sentence_id == id && e.token_index == index) return static_cast<int>(e.label);
    }
    return -1;
  };
  CHECK(label_of("src", 5) == 1);    // book
  CHECK(label_of("coord", 4) == 0);  // book
  CHECK(label_of("src", 1) == 0);    // cousin
  CHECK(label_of("src", 2) == 1);    // that
  CHECK(label_of("src", 7) == 0);    // movies

  ProbeLabelOptions options;
  options.exclude_initial_head = true;
  const auto trimmed = label_tokens({src, coord}, options);
  CHECK(trimmed.size() == all.size() - 4);
}

TEST_CASE("punctuation is never labeled") {
  const auto all = label_tokens(small_sets()[Construction::ORC]);
  for (const auto& e : all) {
    const auto& r = small_sets()[Construction::ORC][static_cast<std::size_t>(std::stoul(e.sentence_id.substr(10)))];
    CHECK(r.tokens[static_cast<std::size_t>(e.token_index)] != ".");
  }
}

TEST_CASE("balanced probe labels have equal class counts") {
  for (auto rc : kRcTypes) {
    const auto records = probe_training_records(small_sets(), rc);
    const auto labels = label_probe_examples(records, {false, 4});
    CHECK(labels.positives == labels.negatives);
    CHECK(static_cast<long>(labels.examples.size()) == 2 * labels.positives);
    long pos = 0, neg = 0;
    for (const auto& [id, counts] : labels.per_sentence) pos += counts.first, neg += counts.second;
    CHECK(pos == labels.positives);
    CHECK(neg == labels.negatives);
    // Every in-span token survives: the RC side is the smaller class.
    long in_span = 0;
    for (const auto& r : small_sets()[rc]) in_span += r.rc_span->last - r.rc_span->first + 1;
    CHECK(labels.positives == in_span);
  }
  CHECK_THROWS_AS(label_probe_examples({}), Error);
  SentenceRecord coord{"c", Construction::COORD_S, words("A b and c ."), std::nullopt, 0};
  CHECK_THROWS_AS(label_probe_examples({coord}), Error);
}

TEST_CASE("agreement items for the skater examples") {
  const auto& lex = builtin_lexicon();
  AgreementTuple t;
  t.subject = noun(lex, "skater");
  t.subject_number = Number::singular;
  t.attractor = noun(lex, "officer");
  t.attractor_number = Number::plural;
  t.verb = verb(lex, "love");
  t.adjective = "happy";

  const auto mismatch = render_agreement({Construction::ORC, Condition::rc_attractor}, t);
  CHECK(mismatch.text() == "The skater that the officers love [MASK] happy .");
  CHECK(mismatch.correct_verb == "is");
  CHECK(mismatch.incorrect_verb == "are");
  CHECK(mismatch.mask_index == 6);
  CHECK(mismatch.rc_span == Span{2, 5});
  CHECK_NOTHROW(validate(mismatch));

  t.attractor_number = Number::singular;
  const auto match = render_agreement({Construction::ORC, Condition::rc_no_attractor}, t);
  CHECK(match.text() == "The skater that the officer loves [MASK] happy .");
  CHECK(match.condition == Condition::rc_no_attractor);
  CHECK_NOTHROW(validate(match));

  t.subject = noun(lex, "officer");
  t.adjective = "nice";
  const auto simple = render_agreement({std::nullopt, Condition::simple}, t);
  CHECK(simple.text() == "The officer [MASK] nice .");
  CHECK(simple.correct_verb == "is");
  CHECK_FALSE(simple.attractor_number.has_value());

  t.attractor = noun(lex, "banker");
  t.attractor_number = Number::plural;
  t.complement_verb = "knew";
  const auto complement = render_agreement({std::nullopt, Condition::sentential_complement}, t);
  CHECK(complement.text() == "The bankers knew the officer [MASK] nice .");
  CHECK(complement.correct_verb == "is");
}

TEST_CASE("agreement item validation") {
  AgreementItem item;
  item.id = "x";
  item.tokens = words("The officer [MASK] nice .");
  item.mask_index = 2;
  item.correct_verb = "is";
  item.incorrect_verb = "are";
  CHECK_NOTHROW(validate(item));
  item.mask_index = 1;
  CHECK_THROWS_AS(validate(item), Error);
  item.mask_index = 2;
  item.incorrect_verb = "is";
  CHECK_THROWS_AS(validate(item), Error);
  item.incorrect_verb = "are";
  item.condition = Condition::rc_attractor;
  CHECK_THROWS_AS(validate(item), Error);
}

TEST_CASE("agreement suite covers every cell with balanced subjects") {
  const auto items = generate_agreement_suite(builtin_lexicon(), 100, 5);
  REQUIRE(items.size() == 12 * 100);
  std::map<std::string, std::pair<long, long>> per_cell;
  for (const auto& item : items) {
    validate(item);
    auto& counts = per_cell[cell_tag({item.rc_type, item.condition}) + "/" + std::string(to_string(item.condition))];
    (item.subject_number == Number::singular ? counts.first : counts.second) += 1;
    if (item.condition == Condition::rc_attractor) CHECK(*item.attractor_number != item.subject_number);
    if (item.condition == Condition::rc_no_attractor) CHECK(*item.attractor_number == item.subject_number);
    CHECK(item.correct_verb == (item.subject_number == Number::singular ? "is" : "are"));
  }
  CHECK(per_cell.size() == 12);
  for (const auto& [cell, counts] : per_cell) {
    CHECK(counts.first == 50);
    CHECK(counts.second == 50);
  }
}

TEST_CASE("default agreement suite size") {
  const auto items = generate_agreement_suite(builtin_lexicon());
  CHECK(items.size() == 12 * 1750);
  std::set<std::string> texts;
  for (const auto& item : items) texts.insert(item.text());
  CHECK(texts.size() == items.size());
}

TEST_CASE("agreement generation reports lexicon exhaustion") {
  std::istringstream text(R"(
noun skater skaters human eval
noun officer officers human eval
verb love loves loved loved human eval
adj happy predicative
cverb knew
)");
  const auto lex = parse_lexicon(text);
  try {
    generate_agreement_suite(lex, 50, 1);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("exhausted") != std::string::npos);
  }
}

TEST_CASE("sentence, agreement and label files round trip") {
  std::vector<SentenceRecord> records;
  for (auto c : kConstructions) records.push_back(small_sets()[c][0]);
  std::stringstream s;
  write_sentences(s, records);
  CHECK(s.str().rfind(std::string(kSentenceHeader), 0) == 0);
  const auto back = read_sentences(s);
  REQUIRE(back.size() == records.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].id == records[i].id);
    CHECK(back[i].construction == records[i].construction);
    CHECK(back[i].tokens == records[i].tokens);
    CHECK(back[i].rc_span == records[i].rc_span);
    CHECK(back[i].lexical_seed == records[i].lexical_seed);
  }

  const auto items = generate_agreement_suite(builtin_lexicon(), 3, 1);
  std::stringstream a;
  write_agreement(a, items);
  const auto items_back = read_agreement(a);
  REQUIRE(items_back.size() == items.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    CHECK(items_back[i].tokens == items[i].tokens);
    CHECK(items_back[i].rc_type == items[i].rc_type);
    CHECK(items_back[i].rc_span == items[i].rc_span);
    CHECK(items_back[i].mask_index == items[i].mask_index);
    CHECK(items_back[i].condition == items[i].condition);
    CHECK(items_back[i].attractor_number == items[i].attractor_number);
  }

  const auto labels = label_probe_examples(probe_training_records(small_sets(), Construction::ORC));
  std::stringstream l;
  write_probe_labels(l, labels);
  CHECK(read_probe_labels(l) == labels.examples);

  std::istringstream broken("#id\n1\tORC\tThe a .\n");
  CHECK_THROWS_AS(read_sentences(broken), Error);
  std::istringstream bad_label("x\t1\t2\n");
  CHECK_THROWS_AS(read_probe_labels(bad_label), Error);
}
