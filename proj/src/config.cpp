#include "hullrec/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "hullrec/error.hpp"
#include "hullrec/text_io.hpp"

namespace hullrec {

void PipelineConfig::set_seed(std::uint64_t s) {
  seed = s;
  synth.seed = s;
  walk.seed = s;
  train.seed = s;
  rating.mf.seed = s;
  recommender.seed = s;
}

TransitionMatrix PipelineConfig::transitions() const {
  const auto& c = coefficients;
  return TransitionMatrix::from_coefficients(c[0], c[1], c[2], c[3], c[4], c[5]);
}

void PipelineConfig::validate() const {
  synth.validate();
  walk.validate();
  train.validate();
  rating.mf.validate();
  recommender.validate();
  try {
    (void)transitions();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("walk.c_*: ") + e.what());
  }
  if (split.fold >= split.folds) throw ConfigError("split.fold must be < split.folds");
  if (!(data.scale.max > data.scale.min)) throw ConfigError("data.rating_max must exceed data.rating_min");
  if (data.format != DataFormat::Synth && data.reviews.empty())
    throw ConfigError("data.reviews is required unless data.format = synth");
}

namespace {

struct Field {
  std::function<void(std::string_view)> set;
  std::function<std::string()> get;
};

std::string bad(std::string_view key, std::string_view what) {
  return std::string(key) + " " + std::string(what);
}

class FieldTable {
 public:
  FieldTable(PipelineConfig& cfg, std::filesystem::path base) : base_(std::move(base)) { build(cfg); }

  const std::map<std::string, Field>& fields() const { return fields_; }
  const std::vector<std::string>& order() const { return order_; }

 private:
  void add(std::string key, Field f) {
    order_.push_back(key);
    fields_.emplace(std::move(key), std::move(f));
  }

  template <typename T>
  void uint(const std::string& key, T& ref, std::uint64_t lo, std::uint64_t hi = UINT32_MAX) {
    add(key, {[&ref, key, lo, hi](std::string_view v) {
                std::uint64_t x = 0;
                if (!text::parse_u64(v, x)) throw ConfigError(bad(key, "expects an unsigned integer"));
                if (x < lo || x > hi)
                  throw ConfigError(bad(key, "must be in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]"));
                ref = static_cast<T>(x);
              },
              [&ref] { return std::to_string(ref); }});
  }

  void real(const std::string& key, double& ref, double lo, double hi, bool open_lo = false) {
    add(key, {[&ref, key, lo, hi, open_lo](std::string_view v) {
                double x = 0;
                if (!text::parse_double(v, x)) throw ConfigError(bad(key, "expects a number"));
                if (!(x <= hi) || (open_lo ? !(x > lo) : !(x >= lo)))
                  throw ConfigError(bad(key, std::string("must be in ") + (open_lo ? "(" : "[") +
                                                 text::format_double(lo) + ", " + text::format_double(hi) + "]"));
                ref = x;
              },
              [&ref] { return text::format_double(ref); }});
  }

  void boolean(const std::string& key, bool& ref) {
    add(key, {[&ref, key](std::string_view v) {
                if (v == "true") ref = true;
                else if (v == "false") ref = false;
                else throw ConfigError(bad(key, "expects true or false"));
              },
              [&ref] { return std::string(ref ? "true" : "false"); }});
  }

  void path(const std::string& key, std::filesystem::path& ref, bool relative_to_base) {
    add(key, {[this, &ref, relative_to_base](std::string_view v) {
                std::filesystem::path p{std::string(v)};
                ref = (relative_to_base && !p.empty() && p.is_relative() && !base_.empty()) ? base_ / p : p;
              },
              [&ref] { return ref.string(); }});
  }

  template <typename E>
  void choice(const std::string& key, E& ref, std::vector<std::pair<std::string, E>> options) {
    add(key, {[&ref, key, options](std::string_view v) {
                std::string names;
                for (const auto& [name, value] : options) {
                  if (v == name) {
                    ref = value;
                    return;
                  }
                  names += (names.empty() ? "" : ", ") + name;
                }
                throw ConfigError(bad(key, "expects one of: " + names));
              },
              [&ref, options] {
                for (const auto& [name, value] : options)
                  if (value == ref) return name;
                return std::string();
              }});
  }

  void build(PipelineConfig& c) {
    add("seed", {[&c](std::string_view v) {
                   std::uint64_t x = 0;
                   if (!text::parse_u64(v, x)) throw ConfigError("seed expects an unsigned integer");
                   c.set_seed(x);
                 },
                 [&c] { return std::to_string(c.seed); }});
    path("output_dir", c.output_dir, false);

    choice("data.format", c.data.format,
           {{"synth", DataFormat::Synth}, {"yelp", DataFormat::Yelp}, {"tripadvisor", DataFormat::TripAdvisor}});
    path("data.reviews", c.data.reviews, true);
    path("data.business", c.data.business, true);
    path("data.users", c.data.users, true);
    path("data.vocabulary", c.data.vocabulary, true);
    uint("data.min_count", c.data.min_count, 1);
    boolean("data.fixed_point", c.data.fixed_point);
    real("data.rating_min", c.data.scale.min, -1e9, 1e9);
    real("data.rating_max", c.data.scale.max, -1e9, 1e9);

    uint("synth.clusters", c.synth.clusters, 2);
    uint("synth.users_per_cluster", c.synth.users_per_cluster, 1);
    uint("synth.items_per_cluster", c.synth.items_per_cluster, 1);
    uint("synth.ratings_per_user", c.synth.ratings_per_user, 1);
    real("synth.cross_rate", c.synth.cross_rate, 0.0, 1.0);
    real("synth.noise", c.synth.noise, 0.0, 1e9);
    real("synth.item_spread", c.synth.item_spread, 0.0, 4.0);

    uint("split.folds", c.split.folds, 2, 100);
    uint("split.fold", c.split.fold, 0, 99);

    uint("walk.walks_per_node", c.walk.walks_per_node, 1);
    uint("walk.walk_length", c.walk.walk_length, 2);
    uint("walk.threads", c.walk_threads, 1, 256);
    const char* pairs[] = {"uu", "ue", "ui", "ei", "ee", "ii"};
    for (std::size_t i = 0; i < 6; ++i) real(std::string("walk.c_") + pairs[i], c.coefficients[i], 0.0, 1.0);

    uint("train.dim", c.train.dim, 1, 4096);
    uint("train.window", c.train.window, 1, 100);
    uint("train.min_count", c.train.min_count, 1);
    uint("train.epochs", c.train.epochs, 1, 100000);
    uint("train.negatives", c.train.negatives, 1, 100);
    real("train.learning_rate", c.train.learning_rate, 0.0, 10.0, true);
    real("train.min_learning_rate", c.train.min_learning_rate, 0.0, 10.0);

    choice("rating.model", c.rating.kind, {{"biased_mf", RatingModelKind::BiasedMF}, {"bias_only", RatingModelKind::BiasOnly}});
    uint("rating.k", c.rating.mf.k, 1, 4096);
    uint("rating.epochs", c.rating.mf.epochs, 1, 100000);
    real("rating.learning_rate", c.rating.mf.learning_rate, 0.0, 10.0, true);
    real("rating.reg", c.rating.mf.reg, 0.0, 1e9);
    real("rating.damping", c.rating.damping, 0.0, 1e9);

    real("recommender.alpha", c.recommender.alpha, 0.0, 1.0);
    uint("recommender.top_n", c.recommender.top_n, 1, 100000);
    boolean("recommender.normalize", c.recommender.normalize_components);
    real("recommender.useful_threshold", c.recommender.useful_threshold, -1e9, 1e9);
    uint("recommender.max_candidates", c.recommender.max_candidates, 0, UINT64_MAX);
    choice("recommender.expected_set", c.expected.kind,
           {{"base", ExpectedSetKind::Base}, {"base_with_entities", ExpectedSetKind::BaseWithEntities}});
    boolean("recommender.include_user_vertex", c.expected.include_user_vertex);
    uint("recommender.max_vertices", c.expected.max_vertices, 1, UINT64_MAX);
    real("recommender.boundary_eps", c.recommender.unexpectedness.eps, 0.0, 1.0);
    uint("recommender.depth_directions", c.recommender.unexpectedness.directions, 1, 1'000'000);
    real("recommender.hull_tol", c.recommender.unexpectedness.projection.tol, 0.0, 1.0, true);
    uint("recommender.hull_max_iter", c.recommender.unexpectedness.projection.max_iter, 0, UINT64_MAX);

    choice("eval.serendipity_denominator", c.eval.denominator,
           {{"recommended", SerendipityDenominator::Recommended}, {"primitive", SerendipityDenominator::Primitive}});
    real("eval.relevance_threshold", c.eval.relevance_threshold, -1e9, 1e9);
    uint("eval.max_users", c.eval.max_users, 0, UINT64_MAX);
    add("eval.iterations", {[&c](std::string_view v) {
                              std::vector<std::uint32_t> its;
                              for (auto part : text::split(v, ',')) {
                                std::uint64_t x = 0;
                                if (!text::parse_u64(text::trim(part), x) || x == 0 || x > 100000)
                                  throw ConfigError("eval.iterations expects a comma list of positive integers");
                                if (!its.empty() && x <= its.back())
                                  throw ConfigError("eval.iterations must be strictly increasing");
                                its.push_back(static_cast<std::uint32_t>(x));
                              }
                              c.eval.iterative.iterations = std::move(its);
                            },
                            [&c] {
                              std::string s;
                              for (auto x : c.eval.iterative.iterations) s += (s.empty() ? "" : ",") + std::to_string(x);
                              return s;
                            }});
    real("eval.utility_threshold", c.eval.iterative.utility_threshold, 0.0, 1.0);
    real("eval.max_hull_alpha", c.eval.iterative.max_hull_alpha, 0.0, 1.0);
  }

  std::filesystem::path base_;
  std::map<std::string, Field> fields_;
  std::vector<std::string> order_;
};

}  // namespace

PipelineConfig parse_config(std::string_view text, const std::string& source, const std::filesystem::path& base_dir) {
  PipelineConfig cfg;
  FieldTable table(cfg, base_dir);
  std::string section;
  std::map<std::string, std::size_t> seen;
  std::size_t lineno = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++lineno;
    auto where = [&] { return source + ":" + std::to_string(lineno) + ": "; };
    std::string_view line = raw;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = text::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where() + "malformed section header");
      section = std::string(text::trim(line.substr(1, line.size() - 2)));
      bool known = false;
      for (const auto& name : table.order())
        if (name.rfind(section + ".", 0) == 0) known = true;
      if (!known) throw ConfigError(where() + "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(where() + "expected 'key = value'");
    const auto key = std::string(text::trim(line.substr(0, eq)));
    const auto value = text::trim(line.substr(eq + 1));
    const auto full = section.empty() ? key : section + "." + key;
    auto it = table.fields().find(full);
    if (it == table.fields().end()) throw ConfigError(where() + "unknown key '" + full + "'");
    if (auto [prev, fresh] = seen.emplace(full, lineno); !fresh)
      throw ConfigError(where() + "duplicate key '" + full + "' (first set on line " + std::to_string(prev->second) + ")");
    try {
      it->second.set(value);
    } catch (const ConfigError& e) {
      throw ConfigError(where() + e.what());
    }
  }
  cfg.validate();
  return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.string(), path.parent_path());
}

std::string render_config(const PipelineConfig& cfg) {
  PipelineConfig copy = cfg;
  FieldTable table(copy, {});
  std::ostringstream out;
  std::string section;
  for (const auto& name : table.order()) {
    const auto dot = name.find('.');
    const auto sec = dot == std::string::npos ? std::string() : name.substr(0, dot);
    if (sec != section) {
      out << "\n[" << sec << "]\n";
      section = sec;
    }
    out << (dot == std::string::npos ? name : name.substr(dot + 1)) << " = " << table.fields().at(name).get() << '\n';
  }
  return out.str();
}

}  // namespace hullrec
