#include "hullrec/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>
#include <unordered_map>

#include <json.hpp>

#include "hullrec/error.hpp"
#include "hullrec/recommender.hpp"
#include "hullrec/rng.hpp"
#include "hullrec/text_io.hpp"

namespace hullrec {

using json = nlohmann::json;

std::string_view to_string(EntityOrigin o) {
  switch (o) {
    case EntityOrigin::Category: return "category";
    case EntityOrigin::Cuisine: return "cuisine";
    case EntityOrigin::Friendship: return "friendship";
    case EntityOrigin::ReviewTerm: return "review_term";
  }
  return "?";
}

EntityOrigin parse_entity_origin(std::string_view s) {
  if (s == "category") return EntityOrigin::Category;
  if (s == "cuisine") return EntityOrigin::Cuisine;
  if (s == "friendship") return EntityOrigin::Friendship;
  if (s == "review_term") return EntityOrigin::ReviewTerm;
  throw DataError("unknown entity origin '" + std::string(s) + "'");
}

std::vector<std::string> tokenize_words(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c)) {
      cur += static_cast<char>(std::tolower(c));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

EntityVocabulary::EntityVocabulary(const std::vector<std::string>& terms) {
  std::set<std::string> seen;
  for (const auto& t : terms) {
    auto toks = tokenize_words(t);
    if (toks.empty()) continue;
    std::string name;
    for (const auto& tok : toks) name += (name.empty() ? "" : " ") + tok;
    if (!seen.insert(name).second) continue;
    terms_.push_back(std::move(toks));
    names_.push_back(std::move(name));
  }
}

EntityVocabulary EntityVocabulary::load(const std::filesystem::path& path) {
  auto in = text::open_input(path);
  std::vector<std::string> terms;
  std::string line;
  while (std::getline(in, line)) {
    auto t = text::trim(line);
    if (t.empty() || t.front() == '#') continue;
    terms.emplace_back(t);
  }
  return EntityVocabulary(terms);
}

std::vector<std::string> EntityVocabulary::extract(std::string_view text) const {
  const auto words = tokenize_words(text);
  std::vector<std::string> out;
  std::set<std::size_t> found;
  for (std::size_t pos = 0; pos < words.size(); ++pos) {
    for (std::size_t t = 0; t < terms_.size(); ++t) {
      const auto& term = terms_[t];
      if (found.count(t) || pos + term.size() > words.size()) continue;
      if (std::equal(term.begin(), term.end(), words.begin() + static_cast<std::ptrdiff_t>(pos))) {
        found.insert(t);
        out.push_back(names_[t]);
      }
    }
  }
  return out;
}

std::vector<std::string> extract_entities(std::string_view review_text, const EntityVocabulary& vocab) {
  return vocab.extract(review_text);
}

namespace {

std::int64_t days_to_seconds(int y, unsigned m, unsigned d) {
  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{m}, day{d}};
  if (!ymd.ok()) return -1;
  return sys_seconds{sys_days{ymd}}.time_since_epoch().count();
}

// "YYYY-MM-DD" with an optional " HH:MM:SS" suffix.
std::optional<std::int64_t> parse_iso_date(std::string_view s) {
  int y = 0;
  unsigned mo = 0, d = 0, hh = 0, mm = 0, ss = 0;
  std::string str(s);
  const int got = std::sscanf(str.c_str(), "%d-%u-%u %u:%u:%u", &y, &mo, &d, &hh, &mm, &ss);
  if (got != 3 && got != 6) return std::nullopt;
  const auto base = days_to_seconds(y, mo, d);
  if (base < 0 || hh > 23 || mm > 59 || ss > 60) return std::nullopt;
  return base + hh * 3600 + mm * 60 + ss;
}

// "December 17, 2012"
std::optional<std::int64_t> parse_long_date(std::string_view s) {
  static const char* months[] = {"january", "february", "march",     "april",   "may",      "june",
                                 "july",    "august",   "september", "october", "november", "december"};
  auto words = tokenize_words(s);
  if (words.size() != 3) return std::nullopt;
  unsigned m = 0;
  for (unsigned i = 0; i < 12; ++i)
    if (words[0] == months[i]) m = i + 1;
  std::uint64_t d = 0, y = 0;
  if (!m || !text::parse_u64(words[1], d) || !text::parse_u64(words[2], y)) return std::nullopt;
  const auto t = days_to_seconds(static_cast<int>(y), m, static_cast<unsigned>(d));
  if (t < 0) return std::nullopt;
  return t;
}

std::optional<std::string> json_key(const json& obj, const char* field) {
  auto it = obj.find(field);
  if (it == obj.end()) return std::nullopt;
  if (it->is_string() && !it->get_ref<const std::string&>().empty()) return it->get<std::string>();
  if (it->is_number_integer()) return std::to_string(it->get<std::int64_t>());
  return std::nullopt;
}

// Comma separated string, array of strings, or null/"None".
std::vector<std::string> json_list(const json& obj, const char* field) {
  std::vector<std::string> out;
  auto it = obj.find(field);
  if (it == obj.end() || it->is_null()) return out;
  auto push = [&out](std::string_view v) {
    auto t = text::trim(v);
    if (!t.empty() && t != "None") out.emplace_back(t);
  };
  if (it->is_string()) {
    for (auto part : text::split(it->get_ref<const std::string&>(), ',')) push(part);
  } else if (it->is_array()) {
    for (const auto& e : *it)
      if (e.is_string()) push(e.get_ref<const std::string&>());
  }
  return out;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

template <typename ParseLine>
void read_review_lines(const std::filesystem::path& path, Dataset& ds, ParseLine parse) {
  auto in = text::open_input(path);
  std::string line;
  while (std::getline(in, line)) {
    if (text::trim(line).empty()) continue;
    ++ds.stats.lines;
    json obj = json::parse(line, nullptr, false);
    std::optional<InteractionRecord> rec;
    if (!obj.is_discarded() && obj.is_object()) rec = parse(obj);
    if (!rec) {
      ++ds.stats.malformed;
      continue;
    }
    ds.records.push_back(std::move(*rec));
  }
  if (ds.stats.lines > 0 && 2 * ds.stats.malformed > ds.stats.lines)
    throw DataError(path.string() + ": " + std::to_string(ds.stats.malformed) + " of " +
                    std::to_string(ds.stats.lines) + " lines are malformed");
  ds.stats.kept = ds.records.size();
}

void add_term_links(Dataset& ds, const EntityVocabulary* vocab) {
  if (!vocab || vocab->empty()) return;
  std::set<std::tuple<int, std::string, std::string>> seen;
  for (const auto& r : ds.records) {
    for (const auto& term : vocab->extract(r.review_text)) {
      if (seen.emplace(0, r.user_key, term).second)
        ds.links.push_back({NodeType::User, r.user_key, term, EntityOrigin::ReviewTerm});
      if (seen.emplace(1, r.item_key, term).second)
        ds.links.push_back({NodeType::Item, r.item_key, term, EntityOrigin::ReviewTerm});
    }
  }
}

bool rating_in_scale(double r, const RatingScale& scale) { return std::isfinite(r) && r >= scale.min && r <= scale.max; }

}  // namespace

Dataset load_yelp(const std::filesystem::path& review_path, const std::filesystem::path& business_path,
                  const std::filesystem::path& user_path, RatingScale scale, const EntityVocabulary* vocab) {
  Dataset ds;
  read_review_lines(review_path, ds, [&](const json& obj) -> std::optional<InteractionRecord> {
    auto user = json_key(obj, "user_id");
    auto item = json_key(obj, "business_id");
    auto stars = obj.find("stars");
    if (!user || !item || stars == obj.end() || !stars->is_number()) return std::nullopt;
    InteractionRecord r{*user, *item, stars->get<double>(), std::nullopt, {}};
    if (!rating_in_scale(r.rating, scale)) return std::nullopt;
    if (auto d = obj.find("date"); d != obj.end() && d->is_string()) r.timestamp = parse_iso_date(d->get<std::string>());
    if (auto t = obj.find("text"); t != obj.end() && t->is_string()) r.review_text = t->get<std::string>();
    return r;
  });

  if (!business_path.empty()) {
    auto in = text::open_input(business_path);
    std::string line;
    while (std::getline(in, line)) {
      if (text::trim(line).empty()) continue;
      json obj = json::parse(line, nullptr, false);
      if (obj.is_discarded() || !obj.is_object()) continue;
      auto id = json_key(obj, "business_id");
      if (!id) continue;
      std::set<std::string> seen;
      for (const auto& cat : json_list(obj, "categories")) {
        auto name = lower(cat);
        if (!seen.insert(name).second) continue;
        const bool cuisine = vocab && !vocab->extract(name).empty();
        ds.links.push_back({NodeType::Item, *id, name, cuisine ? EntityOrigin::Cuisine : EntityOrigin::Category});
      }
    }
  }

  if (!user_path.empty()) {
    auto in = text::open_input(user_path);
    std::string line;
    while (std::getline(in, line)) {
      if (text::trim(line).empty()) continue;
      json obj = json::parse(line, nullptr, false);
      if (obj.is_discarded() || !obj.is_object()) continue;
      auto id = json_key(obj, "user_id");
      if (!id) continue;
      for (const auto& friend_id : json_list(obj, "friends"))
        if (friend_id != *id) ds.links.push_back({NodeType::User, *id, friend_id, EntityOrigin::Friendship});
    }
  }

  add_term_links(ds, vocab);
  return ds;
}

Dataset load_tripadvisor(const std::filesystem::path& path, RatingScale scale, const EntityVocabulary* vocab) {
  Dataset ds;
  read_review_lines(path, ds, [&](const json& obj) -> std::optional<InteractionRecord> {
    std::optional<std::string> user;
    if (auto a = obj.find("author"); a != obj.end() && a->is_object()) {
      user = json_key(*a, "id");
      if (!user) user = json_key(*a, "username");
    }
    auto item = json_key(obj, "offering_id");
    auto ratings = obj.find("ratings");
    if (!user || !item || ratings == obj.end() || !ratings->is_object()) return std::nullopt;
    auto overall = ratings->find("overall");
    if (overall == ratings->end() || !overall->is_number()) return std::nullopt;
    InteractionRecord r{*user, *item, overall->get<double>(), std::nullopt, {}};
    if (!rating_in_scale(r.rating, scale)) return std::nullopt;
    if (auto d = obj.find("date"); d != obj.end() && d->is_string()) r.timestamp = parse_long_date(d->get<std::string>());
    if (auto t = obj.find("text"); t != obj.end() && t->is_string()) r.review_text = t->get<std::string>();
    return r;
  });
  add_term_links(ds, vocab);
  return ds;
}

FilterResult filter_sparse(std::vector<InteractionRecord> records, std::uint32_t min_count, bool fixed_point) {
  if (min_count < 1) throw ConfigError("data.min_count must be >= 1");
  FilterResult res;
  const std::size_t original = records.size();
  while (true) {
    std::unordered_map<std::string, std::size_t> users, items;
    for (const auto& r : records) {
      ++users[r.user_key];
      ++items[r.item_key];
    }
    const auto before = records.size();
    std::erase_if(records, [&](const InteractionRecord& r) {
      return users[r.user_key] < min_count || items[r.item_key] < min_count;
    });
    ++res.rounds;
    if (records.size() == before || !fixed_point) break;
  }
  res.removed = original - records.size();
  res.records = std::move(records);
  return res;
}

std::vector<EntityLink> prune_links(const std::vector<EntityLink>& links, const std::vector<InteractionRecord>& records) {
  std::set<std::string> users, items;
  for (const auto& r : records) {
    users.insert(r.user_key);
    items.insert(r.item_key);
  }
  std::vector<EntityLink> out;
  for (const auto& l : links) {
    const bool source_ok = l.source_type == NodeType::User ? users.count(l.source_key) : items.count(l.source_key);
    if (!source_ok) continue;
    if (l.origin == EntityOrigin::Friendship && !users.count(l.entity_key)) continue;
    out.push_back(l);
  }
  return out;
}

void SynthConfig::validate() const {
  if (clusters < 2) throw ConfigError("synth.clusters must be >= 2");
  if (users_per_cluster < 1 || items_per_cluster < 1) throw ConfigError("synth cluster sizes must be >= 1");
  if (ratings_per_user < 1 || ratings_per_user > clusters * items_per_cluster)
    throw ConfigError("synth.ratings_per_user must be in [1, clusters * items_per_cluster]");
  if (!(cross_rate >= 0.0 && cross_rate <= 1.0)) throw ConfigError("synth.cross_rate must be in [0, 1]");
  if (!(noise >= 0.0)) throw ConfigError("synth.noise must be >= 0");
  if (!(item_spread >= 0.0 && item_spread <= 4.0)) throw ConfigError("synth.item_spread must be in [0, 4]");
}

SynthDataset synth_dataset(const SynthConfig& cfg) {
  cfg.validate();
  SynthDataset out;
  auto item_key = [](std::uint32_t c, std::uint32_t k) { return "i" + std::to_string(c) + "_" + std::to_string(k); };
  std::vector<double> appeal(static_cast<std::size_t>(cfg.clusters) * cfg.items_per_cluster);
  for (std::uint32_t c = 0; c < cfg.clusters; ++c) {
    const std::string entity = "cluster" + std::to_string(c);
    for (std::uint32_t k = 0; k < cfg.items_per_cluster; ++k) {
      auto rng = derive_stream(cfg.seed, {0x6170706cULL, c, k});
      appeal[c * cfg.items_per_cluster + k] = cfg.item_spread * uniform01(rng);
      out.item_cluster[item_key(c, k)] = c;
      out.links.push_back({NodeType::Item, item_key(c, k), entity, EntityOrigin::Category});
    }
  }

  std::normal_distribution<double> gauss(0.0, 1.0);
  std::int64_t clock = 1'500'000'000;
  for (std::uint32_t c = 0; c < cfg.clusters; ++c) {
    for (std::uint32_t k = 0; k < cfg.users_per_cluster; ++k) {
      const std::string user = "u" + std::to_string(c) + "_" + std::to_string(k);
      out.user_cluster[user] = c;
      auto rng = derive_stream(cfg.seed, {0x73796e74ULL, c, k});
      std::set<std::pair<std::uint32_t, std::uint32_t>> rated;
      std::uint32_t in_left = cfg.items_per_cluster;
      std::uint32_t out_left = (cfg.clusters - 1) * cfg.items_per_cluster;
      for (std::uint32_t r = 0; r < cfg.ratings_per_user; ++r) {
        bool cross = uniform01(rng) < cfg.cross_rate;
        if (cross && out_left == 0) cross = false;
        if (!cross && in_left == 0) cross = true;
        std::pair<std::uint32_t, std::uint32_t> pick;
        do {
          std::uint32_t ic = c;
          if (cross) {
            ic = static_cast<std::uint32_t>(uniform_index(rng, cfg.clusters - 1));
            if (ic >= c) ++ic;
          }
          pick = {ic, static_cast<std::uint32_t>(uniform_index(rng, cfg.items_per_cluster))};
        } while (rated.count(pick));
        rated.insert(pick);
        (cross ? out_left : in_left) -= 1;
        const double z = std::abs(gauss(rng));
        const double drop = appeal[pick.first * cfg.items_per_cluster + pick.second];
        const double rating = cross ? std::min(5.0, 1.0 + cfg.noise * z) : std::max(1.0, 5.0 - drop - cfg.noise * z);
        out.records.push_back({user, item_key(pick.first, pick.second), rating, clock++, {}});
      }
    }
  }
  return out;
}

void save_records(const std::vector<InteractionRecord>& records, const std::filesystem::path& path) {
  auto out = text::open_output(path);
  for (const auto& r : records) {
    out << r.user_key << '\t' << r.item_key << '\t' << text::format_double(r.rating) << '\t';
    if (r.timestamp) out << *r.timestamp;
    out << '\n';
  }
  if (!out) throw DataError("failed writing " + path.string());
}

std::vector<InteractionRecord> load_records(const std::filesystem::path& path, RatingScale scale) {
  auto in = text::open_input(path);
  std::vector<InteractionRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto cols = text::split(line, '\t');
    auto fail = [&](const std::string& msg) {
      return DataError(path.string() + ":" + std::to_string(lineno) + ": " + msg);
    };
    if (cols.size() != 4 || cols[0].empty() || cols[1].empty()) throw fail("expected 'user<TAB>item<TAB>rating<TAB>timestamp'");
    InteractionRecord r{std::string(cols[0]), std::string(cols[1]), 0.0, std::nullopt, {}};
    if (!text::parse_double(cols[2], r.rating) || !rating_in_scale(r.rating, scale)) throw fail("rating outside the scale");
    if (!cols[3].empty()) {
      std::int64_t ts = 0;
      if (!text::parse_i64(cols[3], ts)) throw fail("bad timestamp");
      r.timestamp = ts;
    }
    out.push_back(std::move(r));
  }
  return out;
}

void save_links(const std::vector<EntityLink>& links, const std::filesystem::path& path) {
  auto out = text::open_output(path);
  for (const auto& l : links)
    out << to_string(l.source_type) << '\t' << l.source_key << '\t' << l.entity_key << '\t' << to_string(l.origin) << '\n';
  if (!out) throw DataError("failed writing " + path.string());
}

std::vector<EntityLink> load_links(const std::filesystem::path& path) {
  auto in = text::open_input(path);
  std::vector<EntityLink> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto cols = text::split(line, '\t');
    if (cols.size() != 4 || cols[1].empty() || cols[2].empty())
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": expected 'type<TAB>source<TAB>entity<TAB>origin'");
    out.push_back({parse_node_type(cols[0]), std::string(cols[1]), std::string(cols[2]), parse_entity_origin(cols[3])});
  }
  return out;
}

void save_labels(const SynthDataset& data, const std::filesystem::path& path) {
  auto out = text::open_output(path);
  for (const auto& [key, c] : data.user_cluster) out << "user\t" << key << '\t' << c << '\n';
  for (const auto& [key, c] : data.item_cluster) out << "item\t" << key << '\t' << c << '\n';
  if (!out) throw DataError("failed writing " + path.string());
}

std::map<std::string, std::uint32_t> load_labels(const std::filesystem::path& path) {
  auto in = text::open_input(path);
  std::map<std::string, std::uint32_t> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto cols = text::split(line, '\t');
    std::uint64_t c = 0;
    if (cols.size() != 3 || !text::parse_u64(cols[2], c))
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": expected 'type<TAB>key<TAB>cluster'");
    out[graph_key(parse_node_type(cols[0]), cols[1])] = static_cast<std::uint32_t>(c);
  }
  return out;
}

}  // namespace hullrec
