#pragma once

// Reader for tests/data/golden_sentences.tsv: construction, lexical seed and
// a sentence whose RC is marked with [ ].

#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "alterrep/grammar.hpp"

namespace golden {

struct Sentence {
  alterrep::grammar::Construction construction;
  std::string seed;
  std::vector<std::string> tokens;
  std::optional<alterrep::grammar::Span> span;
};

inline std::vector<Sentence> load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<Sentence> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto tab1 = line.find('\t');
    const auto tab2 = line.find('\t', tab1 + 1);
    Sentence s{alterrep::grammar::parse_construction(line.substr(0, tab1)), line.substr(tab1 + 1, tab2 - tab1 - 1),
               {}, std::nullopt};
    std::istringstream words(line.substr(tab2 + 1));
    long open = -1;
    for (std::string w; words >> w;) {
      const long i = static_cast<long>(s.tokens.size());
      if (w.front() == '[') open = i, w.erase(0, 1);
      if (w.back() == ']') s.span = alterrep::grammar::Span{open, i}, w.pop_back();
      s.tokens.push_back(w);
    }
    out.push_back(std::move(s));
  }
  return out;
}

inline alterrep::grammar::LexicalTuple exemplar_tuple() {
  alterrep::grammar::LexicalTuple t;
  t.head = "conspiracy";
  t.embedded = "employee";
  t.rc_verb = "welcomed";
  t.rc_participle = "welcomed";
  t.main_verb = "divided";
  t.adjective = "beautiful";
  t.object = "country";
  t.src_main_verb = "searched";
  t.adverb = "quickly";
  t.src_object = "buildings";
  return t;
}

}  // namespace golden
