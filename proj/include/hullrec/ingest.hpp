#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hullrec/hin_graph.hpp"
#include "hullrec/rating_model.hpp"

namespace hullrec {

struct InteractionRecord {
  std::string user_key;
  std::string item_key;
  double rating = 0.0;
  std::optional<std::int64_t> timestamp;
  std::string review_text;
};

enum class EntityOrigin { Category, Cuisine, Friendship, ReviewTerm };
std::string_view to_string(EntityOrigin o);
EntityOrigin parse_entity_origin(std::string_view s);

/// Friendship links carry the friend's user key in entity_key.
struct EntityLink {
  NodeType source_type = NodeType::Item;
  std::string source_key;
  std::string entity_key;
  EntityOrigin origin = EntityOrigin::Category;

  friend bool operator==(const EntityLink&, const EntityLink&) = default;
};

struct IngestStats {
  std::size_t lines = 0;  // nonblank input lines of the interaction file
  std::size_t malformed = 0;
  std::size_t filtered = 0;
  std::size_t kept = 0;
};

struct Dataset {
  std::vector<InteractionRecord> records;
  std::vector<EntityLink> links;
  IngestStats stats;
};

/// Domain terms matched case-insensitively on whole words; terms may span several words.
class EntityVocabulary {
 public:
  EntityVocabulary() = default;
  explicit EntityVocabulary(const std::vector<std::string>& terms);
  static EntityVocabulary load(const std::filesystem::path& path);

  bool empty() const noexcept { return terms_.empty(); }
  std::vector<std::string> extract(std::string_view text) const;

 private:
  std::vector<std::vector<std::string>> terms_;  // tokenized
  std::vector<std::string> names_;
};

/// Lower-cased alphanumeric runs.
std::vector<std::string> tokenize_words(std::string_view text);
std::vector<std::string> extract_entities(std::string_view review_text, const EntityVocabulary& vocab);

/// Newline-delimited JSON in the Yelp schema. business_path / user_path may be empty.
Dataset load_yelp(const std::filesystem::path& review_path, const std::filesystem::path& business_path,
                  const std::filesystem::path& user_path, RatingScale scale, const EntityVocabulary* vocab = nullptr);

/// Newline-delimited JSON in the TripAdvisor hotel-review schema.
Dataset load_tripadvisor(const std::filesystem::path& path, RatingScale scale, const EntityVocabulary* vocab = nullptr);

struct FilterResult {
  std::vector<InteractionRecord> records;
  std::size_t removed = 0;
  std::size_t rounds = 0;
};

/// Drops users and items with fewer than min_count interactions, repeated
/// until nothing changes (or once, when fixed_point is false).
FilterResult filter_sparse(std::vector<InteractionRecord> records, std::uint32_t min_count, bool fixed_point = true);

/// Removes links whose source no longer appears in records.
std::vector<EntityLink> prune_links(const std::vector<EntityLink>& links, const std::vector<InteractionRecord>& records);

struct SynthConfig {
  std::uint32_t clusters = 4;
  std::uint32_t users_per_cluster = 50;
  std::uint32_t items_per_cluster = 30;
  std::uint32_t ratings_per_user = 20;
  double cross_rate = 0.3;
  double noise = 0.5;
  /// In-cluster ratings drop by a per-item appeal offset drawn from [0, item_spread].
  double item_spread = 1.5;
  std::uint64_t seed = 1;

  void validate() const;
};

struct SynthDataset {
  std::vector<InteractionRecord> records;
  std::vector<EntityLink> links;
  std::map<std::string, std::uint32_t> user_cluster;
  std::map<std::string, std::uint32_t> item_cluster;
};

/*
 * Planted-cluster ratings: a user mostly rates items of its own cluster
 * high and, with probability cross_rate, an item of another cluster low.
 * Each cluster has one entity linked to all of its items.
 */
SynthDataset synth_dataset(const SynthConfig& cfg);

void save_records(const std::vector<InteractionRecord>& records, const std::filesystem::path& path);
std::vector<InteractionRecord> load_records(const std::filesystem::path& path, RatingScale scale);
void save_links(const std::vector<EntityLink>& links, const std::filesystem::path& path);
std::vector<EntityLink> load_links(const std::filesystem::path& path);
void save_labels(const SynthDataset& data, const std::filesystem::path& path);
/// Cluster label per graph key ("user:..." / "item:...").
std::map<std::string, std::uint32_t> load_labels(const std::filesystem::path& path);

}  // namespace hullrec
