// Generates the synthetic two-domain corpus pair and its knowledge-graph
// inputs.  Domain A reviews food, domain B reviews gadgets; the two share
// context vocabulary (verbs, adjectives, filler nouns) while their aspect
// vocabularies are disjoint, so a tagger can only transfer through the
// injected knowledge.  Each domain also carries singleton rare aspects and
// singleton off-topic nouns in the same evaluative frames: under a
// vocabulary frequency cutoff both collapse to the unknown token, which
// makes "novel noun" ambiguous on its own and leaves the injected pivot as
// the only reliable evidence.  Everything is seeded and byte-stable.

#include <filesystem>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "akg/io_util.hpp"
#include "akg/rng.hpp"

namespace {

using akg::Rng;

struct Row {
  std::string token;
  std::string pos;
  int head = 0;
  std::string dep = "dep";
  std::string label = "N";
};

using Sentence = std::vector<Row>;
using Phrase = std::vector<std::string>;  // aspect tokens, 1 or 2 of them

struct Pools {
  std::string domain;
  std::vector<Phrase> aspects;           // frequent, lexically learnable
  std::vector<std::string> rares;        // one occurrence each, still aspects
  std::vector<std::string> offtopic;     // one occurrence each, never aspects
  std::vector<std::string> amods;
};

const std::vector<std::string> kFillers = {"friend",   "owner",  "cousin",
                                           "neighbor", "colleague", "uncle",
                                           "sister",   "barber"};
const std::vector<std::string> kTimes = {"weekend", "evening", "morning",
                                         "afternoon", "summer"};
const std::vector<std::string> kPreds = {"great",   "terrible",     "fine",
                                         "awful",   "amazing",      "decent"};
const std::vector<std::string> kVerbs = {"loved", "liked", "hated", "enjoyed"};

Pools food_pools() {
  Pools p;
  p.domain = "domainA";
  for (const char* a : {"wine", "soup", "pizza", "cheese", "salad", "curry",
                        "rice", "dessert", "coffee", "bread", "noodles",
                        "sauce"}) {
    p.aspects.push_back({a});
  }
  p.aspects.push_back({"pad", "thai"});
  p.aspects.push_back({"spring", "rolls"});
  p.rares = {"quinoa",  "falafel", "gnocchi",   "tiramisu", "ramen",
             "paella",  "hummus",  "risotto",   "lasagna",  "ceviche",
             "dumplings", "tapas", "gumbo",     "strudel"};
  p.offtopic = {"raffle",  "parade",  "sequel",  "lecture", "weather",
                "traffic", "election", "puzzle", "chorus",  "mural",
                "statue",  "runway",  "harvest", "comet",   "glacier",
                "canyon",  "lagoon",  "meadow",  "orchard", "pebble",
                "thicket", "trellis", "gazebo",  "lantern", "hammock",
                "compass"};
  p.amods = {"crispy", "spicy", "fresh"};
  return p;
}

Pools gadget_pools() {
  Pools p;
  p.domain = "domainB";
  for (const char* a : {"laptop", "screen", "keyboard", "charger", "speaker",
                        "router", "mouse", "webcam", "monitor", "headset"}) {
    p.aspects.push_back({a});
  }
  p.aspects.push_back({"battery", "life"});
  p.aspects.push_back({"power", "cord"});
  p.rares = {"stylus", "trackpad", "firmware", "adapter",  "dongle",
             "subwoofer", "tripod", "ethernet", "joystick", "touchpad"};
  p.offtopic = {"picnic", "sunset", "ballad",   "marathon", "voyage",
                "circus", "fountain", "anthem", "quarry",   "bonfire",
                "meteor", "harbor"};
  p.amods = {"sleek", "sturdy", "portable"};
  return p;
}

// Appends an aspect phrase: compound chain into the final noun, BA (IA)*.
void push_aspect(Sentence& s, const Phrase& phrase) {
  for (std::size_t i = 0; i < phrase.size(); ++i) {
    const bool last = i + 1 == phrase.size();
    Row row;
    row.token = phrase[i];
    row.pos = "NOUN";
    row.head = static_cast<int>(s.size()) + (last ? 0 : 1);
    row.dep = last ? "dep" : "compound";
    row.label = i == 0 ? "BA" : "IA";
    s.push_back(row);
  }
}

void push_word(Sentence& s, const std::string& token, const std::string& pos,
               const std::string& dep = "dep", const std::string& label = "N") {
  Row row;
  row.token = token;
  row.pos = pos;
  row.head = static_cast<int>(s.size());
  row.dep = dep;
  row.label = label;
  s.push_back(row);
}

void push_det(Sentence& s) {
  Row row;
  row.token = "the";
  row.pos = "DET";
  row.head = static_cast<int>(s.size()) + 1;
  row.dep = "det";
  s.push_back(row);
}

template <typename T>
const T& pick(Rng& rng, const std::vector<T>& pool) {
  return pool[rng.below(pool.size())];
}

Sentence common_sentence(Rng& rng, const Pools& p, int shape) {
  Sentence s;
  switch (shape) {
    case 0: {  // the ASP was PRED
      push_det(s);
      push_aspect(s, pick(rng, p.aspects));
      push_word(s, "was", "AUX");
      push_word(s, pick(rng, kPreds), "ADJ", "dep", "BO");
      break;
    }
    case 1: {  // i VERB the ASP
      push_word(s, "i", "PRON");
      push_word(s, pick(rng, kVerbs), "VERB");
      push_det(s);
      push_aspect(s, pick(rng, p.aspects));
      break;
    }
    case 2: {  // the FILLER VERB the ASP
      push_det(s);
      push_word(s, pick(rng, kFillers), "NOUN");
      push_word(s, pick(rng, kVerbs), "VERB");
      push_det(s);
      push_aspect(s, pick(rng, p.aspects));
      break;
    }
    case 3: {  // ASP and ASP2 were PRED
      const Phrase& first = pick(rng, p.aspects);
      const Phrase* second = &pick(rng, p.aspects);
      while (*second == first) second = &pick(rng, p.aspects);
      push_aspect(s, first);
      push_word(s, "and", "CCONJ");
      push_aspect(s, *second);
      push_word(s, "were", "AUX");
      push_word(s, pick(rng, kPreds), "ADJ", "dep", "BO");
      break;
    }
    case 4: {  // the AMOD ASP was PRED (modifier chain the matcher trims)
      push_det(s);
      Row amod;
      amod.token = pick(rng, p.amods);
      amod.pos = "ADJ";
      amod.head = static_cast<int>(s.size()) + 1;
      amod.dep = "amod";
      s.push_back(amod);
      push_aspect(s, pick(rng, p.aspects));
      push_word(s, "was", "AUX");
      push_word(s, pick(rng, kPreds), "ADJ", "dep", "BO");
      break;
    }
    case 5: {  // my FILLER VERB the ASP
      push_word(s, "my", "PRON");
      push_word(s, pick(rng, kFillers), "NOUN");
      push_word(s, pick(rng, kVerbs), "VERB");
      push_det(s);
      push_aspect(s, pick(rng, p.aspects));
      break;
    }
    default: {  // the ASP was really PRED (two-token opinion span)
      push_det(s);
      push_aspect(s, pick(rng, p.aspects));
      push_word(s, "was", "AUX");
      push_word(s, "really", "ADV", "dep", "BO");
      push_word(s, pick(rng, kPreds), "ADJ", "dep", "IO");
      break;
    }
  }
  return s;
}

// A singleton noun in the same frames the frequent aspects use; only the
// gold label separates a rare aspect from an off-topic mention.
Sentence singleton_sentence(Rng& rng, const std::string& noun, bool is_aspect,
                            bool verb_frame) {
  Sentence s;
  const std::string label = is_aspect ? "BA" : "N";
  if (verb_frame) {
    push_word(s, "i", "PRON");
    push_word(s, pick(rng, kVerbs), "VERB");
    push_det(s);
    push_word(s, noun, "NOUN", "dep", label);
  } else {
    push_det(s);
    push_word(s, noun, "NOUN", "dep", label);
    push_word(s, "was", "AUX");
    push_word(s, pick(rng, kPreds), "ADJ", "dep", "BO");
  }
  return s;
}

Sentence filler_eval_sentence(Rng& rng) {  // the FILLER was PRED
  Sentence s;
  push_det(s);
  push_word(s, pick(rng, kFillers), "NOUN");
  push_word(s, "was", "AUX");
  push_word(s, pick(rng, kPreds), "ADJ", "dep", "BO");
  return s;
}

Sentence neutral_sentence(Rng& rng) {  // we came back last TIME
  Sentence s;
  push_word(s, "we", "PRON");
  push_word(s, "came", "VERB");
  push_word(s, "back", "ADV");
  push_word(s, "last", "ADJ");
  push_word(s, pick(rng, kTimes), "NOUN");
  return s;
}

enum class Slot { common, rare, offtopic, filler_eval, neutral };

std::string corpus_text(Rng& rng, const Pools& p, int n_common,
                        int n_filler_eval, int n_neutral) {
  std::vector<Slot> schedule;
  for (int i = 0; i < n_common; ++i) schedule.push_back(Slot::common);
  for (std::size_t i = 0; i < p.rares.size(); ++i) {
    schedule.push_back(Slot::rare);
  }
  for (std::size_t i = 0; i < p.offtopic.size(); ++i) {
    schedule.push_back(Slot::offtopic);
  }
  for (int i = 0; i < n_filler_eval; ++i) schedule.push_back(Slot::filler_eval);
  for (int i = 0; i < n_neutral; ++i) schedule.push_back(Slot::neutral);
  rng.shuffle(schedule);

  std::ostringstream out;
  int common_shape = 0;
  std::size_t rare_next = 0, offtopic_next = 0;
  for (const Slot slot : schedule) {
    Sentence s;
    switch (slot) {
      case Slot::common:
        s = common_sentence(rng, p, common_shape++ % 7);
        break;
      case Slot::rare:
        s = singleton_sentence(rng, p.rares[rare_next], true, rare_next % 2 == 1);
        ++rare_next;
        break;
      case Slot::offtopic:
        s = singleton_sentence(rng, p.offtopic[offtopic_next], false,
                               offtopic_next % 2 == 1);
        ++offtopic_next;
        break;
      case Slot::filler_eval:
        s = filler_eval_sentence(rng);
        break;
      case Slot::neutral:
        s = neutral_sentence(rng);
        break;
    }
    for (const Row& row : s) {
      out << row.token << '\t' << row.pos << '\t' << row.head << '\t'
          << row.dep << '\t' << row.label << '\n';
    }
    out << '\n';
  }
  return out.str();
}

std::string joined(const Phrase& phrase) {
  std::string s;
  for (const auto& t : phrase) {
    if (!s.empty()) s.push_back('_');
    s += t;
  }
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string out_dir = argc > 1 ? argv[1] : "fixtures";
  std::filesystem::create_directories(out_dir);
  const auto path = [&out_dir](const std::string& name) {
    return out_dir + "/" + name;
  };

  const Pools food = food_pools();
  const Pools gadgets = gadget_pools();

  Rng rng(20240817);
  akg::write_file(path("domainA.tsv"), corpus_text(rng, food, 160, 30, 30));
  akg::write_file(path("domainB.tsv"), corpus_text(rng, gadgets, 150, 25, 25));

  // Concept universe for the gadget-domain KG.  Every gadget aspect is
  // reachable, most food aspects are too (they anchor the source-side
  // precision/recall measurement), "friend" and "owner" are deliberate
  // false-positive matches, and the gizmo concepts exist only to be pruned.
  // Rare aspects and off-topic nouns stay out of the graph entirely.
  std::vector<std::string> gadget_nodes;
  for (const Phrase& a : gadgets.aspects) gadget_nodes.push_back(joined(a));
  std::vector<std::string> food_covered;
  for (std::size_t i = 0; i < food.aspects.size(); ++i) {
    // coffee, bread, noodles, sauce stay out so source-side recall dips.
    const std::string j = joined(food.aspects[i]);
    if (j == "coffee" || j == "bread" || j == "noodles" || j == "sauce") {
      continue;
    }
    food_covered.push_back(j);
  }
  const std::vector<std::string> false_friends = {"friend", "owner"};
  const std::vector<std::string> pruned = {"gizmo", "doohickey", "contraption"};

  std::ostringstream triples;
  for (const std::string& hub : gadget_nodes) {
    for (const std::string& node : gadget_nodes) {
      if (hub < node) triples << hub << "\tRelatedTo\t" << node << '\n';
    }
    for (const std::string& node : food_covered) {
      triples << hub << "\tRelatedTo\t" << node << '\n';
    }
    for (const std::string& node : false_friends) {
      triples << hub << "\tUsedFor\t" << node << '\n';
    }
    for (const std::string& node : pruned) {
      triples << hub << "\tRelatedTo\t" << node << '\n';
    }
  }
  akg::write_file(path("triples.tsv"), triples.str());

  // Four dimensions are enough to separate three cosine bands: gadgets near
  // (1,0), covered food and the false friends at a relatedness around 0.5,
  // pruned concepts orthogonal.  Small deterministic jitter keeps rows
  // distinct without moving any band across the 0.2 threshold.
  std::ostringstream emb;
  std::vector<std::pair<std::string, std::vector<double>>> rows;
  Rng emb_rng(7);
  const auto jitter = [&emb_rng]() { return emb_rng.uniform(-0.05, 0.05); };
  for (const std::string& node : gadget_nodes) {
    rows.push_back({node, {1.0 + jitter(), jitter(), jitter(), jitter()}});
  }
  for (const std::string& node : food_covered) {
    rows.push_back({node, {0.5 + jitter(), 0.85 + jitter(), jitter(), jitter()}});
  }
  for (const std::string& node : false_friends) {
    rows.push_back({node, {0.5 + jitter(), jitter(), 0.85 + jitter(), jitter()}});
  }
  for (const std::string& node : pruned) {
    rows.push_back({node, {jitter(), jitter(), jitter(), 1.0 + jitter()}});
  }
  // Uncovered food aspects still get vectors; they are simply absent from
  // the triple dump.
  for (const char* node : {"coffee", "bread", "noodles", "sauce"}) {
    rows.push_back({node, {0.5 + jitter(), 0.85 + jitter(), jitter(), jitter()}});
  }
  emb << rows.size() << " 4\n";
  emb << std::setprecision(17);
  for (const auto& [node, vec] : rows) {
    emb << node;
    for (const double v : vec) emb << ' ' << v;
    emb << '\n';
  }
  akg::write_file(path("embeddings.txt"), emb.str());

  // Generator completions: novel accessory concepts per likely seed, never
  // tokens from either corpus.
  std::ostringstream gen;
  for (const std::string& seed :
       {std::string("laptop"), std::string("screen"), std::string("keyboard"),
        std::string("router"), std::string("battery_life")}) {
    gen << seed << "\tcarry_sleeve\n";
    gen << seed << "\tdock_station\n";
    gen << seed << "\tsurge_strip\n";
  }
  akg::write_file(path("generator.tsv"), gen.str());

  // A small crowd panel over the first domain-A sentences: five workers,
  // some unanimous spans, one 3-of-5 agreement, one 2-of-5 miss.
  std::ostringstream crowd;
  const auto sel = [&crowd](const char* worker, int sentence, int start,
                            int end, const char* kind, const char* pol) {
    crowd << worker << '\t' << sentence << '\t' << start << '\t' << end << '\t'
          << kind << '\t' << pol << '\n';
  };
  for (const char* w : {"w1", "w2", "w3", "w4", "w5"}) {
    sel(w, 0, 1, 2, "aspect", "-");  // unanimous
  }
  for (const char* w : {"w1", "w2", "w3"}) {
    sel(w, 1, 2, 4, "aspect", "-");  // exactly at quorum
  }
  for (const char* w : {"w4", "w5"}) {
    sel(w, 1, 0, 1, "aspect", "-");  // below quorum, must not survive
  }
  for (const char* w : {"w1", "w3", "w5"}) {
    sel(w, 2, 3, 4, "opinion", "positive");
  }
  akg::write_file(path("crowd.tsv"), crowd.str());

  std::cout << "fixtures written to " << out_dir << "\n";
  return 0;
}
