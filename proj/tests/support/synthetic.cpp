#include "synthetic.hpp"

#include <random>

namespace stp::testing {

namespace {

constexpr std::size_t kStates = 4;
constexpr std::size_t kCitiesPerState = 3;
constexpr std::size_t kDistrictsPerCity = 2;
constexpr std::size_t kCities = kStates * kCitiesPerState;

const char* const kHeads[] = {"Ber", "Hol", "Lin", "Mar", "Tes", "Wal", "Fen", "Rau", "Kor", "Sel"};
const char* const kTails[] = {"ner", "bach", "mann", "ke", "ling"};
const char* const kGiven[] = {"Anna", "Bernd", "Clara", "Dieter", "Emma", "Frieda", "Gustav", "Hanna",
                              "Ida",  "Jakob", "Karl",  "Lena",   "Max",  "Nora",   "Otto",   "Paula"};
const char* const kFillerFamilies[] = {"Zimmer", "Vogel", "Krause", "Brandt", "Seidel", "Kuhn", "Pohl", "Engel"};
const char* const kStreetTypes[] = {"straße", "weg", "platz", "allee", "gasse", "ring"};

std::string term_of(std::size_t t) {
  return std::string(kHeads[t % std::size(kHeads)]) + kTails[(t / std::size(kHeads)) % std::size(kTails)] +
         (t >= std::size(kHeads) * std::size(kTails) ? std::to_string(t) : "");
}

EntityId country() { return "Q100"; }
EntityId state(std::size_t s) { return "Q" + std::to_string(200 + s); }
EntityId city(std::size_t c) { return "Q" + std::to_string(300 + c); }
EntityId district(std::size_t c, std::size_t d) { return "Q" + std::to_string(400 + c * kDistrictsPerCity + d); }

}  // namespace

World synthetic_world(const SyntheticOptions& o) {
  std::mt19937_64 rng(o.seed);
  auto below = [&](std::uint64_t n) { return static_cast<std::size_t>(rng() % n); };
  const std::vector<EntityId> occupations = {"Q36180", "Q36834", "Q1028181", "Q82955", "Q937857",
                                             "Q33999", "Q169470", "Q4964182", "Q483501", "Q1930187"};

  World w;
  auto add_place = [&](EntityId id, std::string label, EntityId parent) {
    LocationNode n;
    n.id = std::move(id);
    n.label = std::move(label);
    n.admin = true;
    if (!parent.empty()) n.parents = {std::move(parent)};
    w.locations.push_back(std::move(n));
  };
  add_place(country(), "Land", "");
  for (std::size_t s = 0; s < kStates; ++s) add_place(state(s), "Staat " + std::to_string(s), country());
  for (std::size_t c = 0; c < kCities; ++c) {
    add_place(city(c), "Stadt " + std::to_string(c), state(c / kCitiesPerState));
    for (std::size_t d = 0; d < kDistrictsPerCity; ++d)
      add_place(district(c, d), "Bezirk " + std::to_string(c) + "-" + std::to_string(d), city(c));
  }

  std::size_t next_person = 10000;
  auto fresh = [&] { return "Q" + std::to_string(next_person++); };
  std::size_t next_way = 1;

  for (std::size_t t = 0; t < o.terms; ++t) {
    const std::string term = term_of(t);
    for (std::size_t j = 0; j < o.streets_per_term; ++j) {
      const std::size_t c = (t + 2 * j) % kCities;
      const std::size_t d = below(kDistrictsPerCity);
      const EntityId truth = fresh();
      const EntityId location = below(2) ? city(c) : district(c, d);
      const auto kind = kRelationKinds[below(kRelationKinds.size())];
      w.persons.push_back(make_person(truth, std::string(kGiven[j % std::size(kGiven)]) + " " + term,
                                      {occupations[below(occupations.size())]}, {{kind, location}},
                                      10 + below(91)));
      StreetRecord s;
      s.osm_id = "way/" + std::to_string(next_way++);
      s.name = term + kStreetTypes[below(std::size(kStreetTypes))];
      s.chain = {s.osm_id, district(c, d), city(c), state(c / kCitiesPerState), country()};
      s.etymology_person = truth;
      w.training.push_back(std::move(s));
    }
    for (std::size_t k = 0; k < o.distractors_per_term; ++k)
      w.persons.push_back(make_person(fresh(),
                                      std::string(kGiven[(o.streets_per_term + k) % std::size(kGiven)]) + " " + term,
                                      {occupations[below(occupations.size())]}, {}, 500 + below(4501)));
  }
  for (std::size_t f = 0; f < o.fillers; ++f) {
    const std::string name = std::string(kGiven[below(std::size(kGiven))]) + " " +
                             kFillerFamilies[below(std::size(kFillerFamilies))] + std::to_string(f);
    w.persons.push_back(make_person(fresh(), name, {occupations[below(occupations.size())]},
                                    {{kRelationKinds[below(kRelationKinds.size())], city(below(kCities))}},
                                    1 + below(3000)));
  }
  return w;
}

}  // namespace stp::testing
