#include "hullrec/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "hullrec/error.hpp"
#include "hullrec/rng.hpp"
#include "hullrec/text_io.hpp"

namespace hullrec {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// -log(sigmoid(x)), stable for large |x|.
double neg_log_sigmoid(double x) { return x > 0 ? std::log1p(std::exp(-x)) : -x + std::log1p(std::exp(x)); }

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

// Row-level SGNS step. scratch must hold dim doubles.
double pair_step_rows(EmbeddingTable& table, std::size_t center, std::size_t context,
                      std::span<const std::size_t> negatives, double lr, std::vector<double>& scratch) {
  const std::size_t d = table.dim();
  double* v = table.input_row(center).data();
  std::fill(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(d), 0.0);
  double loss = 0.0;

  auto target = [&](std::size_t row, double label) {
    double* u = table.output_row(row).data();
    const double score = dot(u, v, d);
    loss += label > 0 ? neg_log_sigmoid(score) : neg_log_sigmoid(-score);
    // d(loss)/d(score) = sigmoid(score) - label
    const double g = lr * (label - sigmoid(score));
    for (std::size_t k = 0; k < d; ++k) {
      scratch[k] += g * u[k];
      u[k] += g * v[k];
    }
  };

  target(context, 1.0);
  for (std::size_t neg : negatives) target(neg, 0.0);
  for (std::size_t k = 0; k < d; ++k) v[k] += scratch[k];
  return loss;
}

}  // namespace

void TrainConfig::validate() const {
  if (dim < 1) throw ConfigError("train.dim must be >= 1");
  if (window < 1) throw ConfigError("train.window must be >= 1");
  if (min_count < 1) throw ConfigError("train.min_count must be >= 1");
  if (epochs < 1) throw ConfigError("train.epochs must be >= 1");
  if (negatives < 1) throw ConfigError("train.negatives must be >= 1");
  if (!(learning_rate > 0.0)) throw ConfigError("train.learning_rate must be > 0");
  if (!(min_learning_rate > 0.0) || min_learning_rate > learning_rate)
    throw ConfigError("train.min_learning_rate must be in (0, learning_rate]");
}

std::int64_t Vocabulary::index_of(NodeId id) const {
  auto it = std::lower_bound(ids.begin(), ids.end(), id);
  if (it == ids.end() || *it != id) return -1;
  return it - ids.begin();
}

Vocabulary build_vocabulary(const WalkCorpus& corpus, std::uint32_t min_count) {
  if (corpus.walks.empty()) throw DataError("cannot build a vocabulary from an empty corpus");
  std::map<NodeId, std::uint64_t> freq;
  for (const auto& walk : corpus.walks)
    for (NodeId v : walk) ++freq[v];
  Vocabulary vocab;
  for (auto [id, count] : freq) {
    if (count < min_count) continue;
    vocab.ids.push_back(id);
    vocab.counts.push_back(count);
  }
  return vocab;
}

NegativeSampler::NegativeSampler(const Vocabulary& vocab, double power) {
  std::vector<double> weights;
  weights.reserve(vocab.size());
  for (auto c : vocab.counts) weights.push_back(std::pow(static_cast<double>(c), power));
  dist_ = std::discrete_distribution<std::size_t>(weights.begin(), weights.end());
  probs_ = dist_.probabilities();
}

EmbeddingTable::EmbeddingTable(std::vector<NodeId> ids, std::uint32_t dim) : ids_(std::move(ids)), dim_(dim) {
  NodeId max_id = 0;
  for (NodeId id : ids_) max_id = std::max(max_id, id);
  row_.assign(ids_.empty() ? 0 : static_cast<std::size_t>(max_id) + 1, -1);
  for (std::size_t r = 0; r < ids_.size(); ++r) {
    if (row_[ids_[r]] >= 0) throw DataError("duplicate node id " + std::to_string(ids_[r]) + " in embedding table");
    row_[ids_[r]] = static_cast<std::int64_t>(r);
  }
  input_.assign(ids_.size() * dim_, 0.0);
  output_.assign(ids_.size() * dim_, 0.0);
}

std::int64_t EmbeddingTable::row_of(NodeId id) const {
  if (id >= row_.size()) return -1;
  return row_[id];
}

std::size_t EmbeddingTable::checked_row(NodeId id) const {
  auto r = row_of(id);
  if (r < 0) throw DataError("node " + std::to_string(id) + " is not in the embedding vocabulary");
  return static_cast<std::size_t>(r);
}

std::span<const double> EmbeddingTable::input(NodeId id) const { return input_row(checked_row(id)); }
std::span<double> EmbeddingTable::input(NodeId id) { return input_row(checked_row(id)); }
std::span<const double> EmbeddingTable::output(NodeId id) const { return output_row(checked_row(id)); }
std::span<double> EmbeddingTable::output(NodeId id) { return output_row(checked_row(id)); }

bool EmbeddingTable::all_finite() const {
  auto finite = [](double x) { return std::isfinite(x); };
  return std::all_of(input_.begin(), input_.end(), finite) && std::all_of(output_.begin(), output_.end(), finite);
}

double sgns_pair_step(NodeId center, NodeId context, std::span<const NodeId> negatives, double lr,
                      EmbeddingTable& table) {
  auto row = [&table](NodeId id) {
    auto r = table.row_of(id);
    if (r < 0) throw DataError("node " + std::to_string(id) + " is out of vocabulary");
    return static_cast<std::size_t>(r);
  };
  const std::size_t c = row(center);
  const std::size_t x = row(context);
  std::vector<std::size_t> neg;
  neg.reserve(negatives.size());
  for (NodeId n : negatives) {
    if (n == context) throw DataError("negative samples must exclude the context node");
    neg.push_back(row(n));
  }
  std::vector<double> scratch(table.dim());
  return pair_step_rows(table, c, x, neg, lr, scratch);
}

std::vector<std::size_t> context_positions(std::size_t length, std::size_t center, std::uint32_t window) {
  std::vector<std::size_t> out;
  const std::size_t lo = center > window ? center - window : 0;
  const std::size_t hi = std::min(length, center + window + 1);
  for (std::size_t j = lo; j < hi; ++j)
    if (j != center) out.push_back(j);
  return out;
}

EmbeddingTable train_embeddings(const WalkCorpus& corpus, const TrainConfig& cfg, TrainStats* stats) {
  cfg.validate();
  Vocabulary vocab = build_vocabulary(corpus, cfg.min_count);
  if (vocab.size() == 0) throw DataError("vocabulary is empty after applying min_count");

  EmbeddingTable table(vocab.ids, cfg.dim);
  auto rng = derive_stream(cfg.seed, {0x736b6970ULL});
  const double half = 0.5 / cfg.dim;
  for (std::size_t r = 0; r < table.size(); ++r)
    for (double& x : table.input_row(r)) x = (uniform01(rng) * 2.0 - 1.0) * half;

  NegativeSampler sampler(vocab);

  // Walks re-expressed as vocabulary rows; -1 marks pruned nodes.
  std::vector<std::vector<std::int64_t>> rows;
  rows.reserve(corpus.walks.size());
  std::uint64_t positions = 0;
  for (const auto& walk : corpus.walks) {
    auto& out = rows.emplace_back();
    out.reserve(walk.size());
    for (NodeId v : walk) out.push_back(vocab.index_of(v));
    positions += walk.size();
  }

  const double total = static_cast<double>(positions) * cfg.epochs;
  std::uint64_t done = 0;
  std::vector<double> scratch(cfg.dim);
  std::vector<std::size_t> negs;
  negs.reserve(cfg.negatives);

  if (stats) *stats = TrainStats{};
  for (std::uint32_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    double loss_sum = 0.0;
    std::uint64_t pairs = 0;
    for (const auto& walk : rows) {
      for (std::size_t i = 0; i < walk.size(); ++i, ++done) {
        if (walk[i] < 0) continue;
        const double lr = std::max(cfg.min_learning_rate,
                                   cfg.learning_rate - (cfg.learning_rate - cfg.min_learning_rate) * (done / total));
        for (std::size_t j : context_positions(walk.size(), i, cfg.window)) {
          if (walk[j] < 0) continue;
          const auto ctx = static_cast<std::size_t>(walk[j]);
          negs.clear();
          if (sampler.size() > 1) {
            for (std::uint32_t k = 0; k < cfg.negatives; ++k) {
              std::size_t s = sampler.sample(rng);
              while (s == ctx) s = sampler.sample(rng);
              negs.push_back(s);
            }
          }
          loss_sum += pair_step_rows(table, static_cast<std::size_t>(walk[i]), ctx, negs, lr, scratch);
          ++pairs;
        }
      }
    }
    if (stats) {
      stats->epoch_mean_loss.push_back(pairs ? loss_sum / static_cast<double>(pairs) : 0.0);
      stats->pairs_per_epoch = pairs;
    }
  }
  if (!table.all_finite()) throw NumericError("embedding training diverged (non-finite parameters)");
  return table;
}

void save_embeddings(const EmbeddingTable& table, const std::filesystem::path& path) {
  auto out = text::open_output(path);
  out << table.size() << ' ' << table.dim() << '\n';
  std::string line;
  for (std::size_t r = 0; r < table.size(); ++r) {
    line = std::to_string(table.ids()[r]);
    for (double x : table.input_row(r)) {
      line += ' ';
      line += text::format_double(x);
    }
    line += '\n';
    out << line;
  }
  if (!out) throw DataError("failed writing embeddings " + path.string());
}

EmbeddingTable load_embeddings(const std::filesystem::path& path) {
  auto in = text::open_input(path);
  auto fail = [&path](std::size_t lineno, const std::string& msg) {
    return DataError(path.string() + ":" + std::to_string(lineno) + ": " + msg);
  };
  std::string line;
  if (!std::getline(in, line)) throw fail(1, "missing header");
  auto head = text::split_ws(line);
  std::uint64_t count = 0, dim = 0;
  if (head.size() != 2 || !text::parse_u64(head[0], count) || !text::parse_u64(head[1], dim) || dim == 0)
    throw fail(1, "expected header '<node_count> <dim>'");

  std::vector<NodeId> ids;
  std::vector<double> values;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    auto cols = text::split_ws(line);
    if (cols.size() != dim + 1)
      throw fail(lineno, "expected " + std::to_string(dim + 1) + " columns, found " + std::to_string(cols.size()));
    std::uint64_t id = 0;
    if (!text::parse_u64(cols[0], id) || id > 0xffffffffULL) throw fail(lineno, "bad node id");
    ids.push_back(static_cast<NodeId>(id));
    for (std::size_t k = 1; k < cols.size(); ++k) {
      double x = 0.0;
      if (!text::parse_double(cols[k], x) || !std::isfinite(x))
        throw fail(lineno, "bad value '" + std::string(cols[k]) + "'");
      values.push_back(x);
    }
  }
  if (ids.size() != count) throw fail(lineno, "row count does not match header");
  EmbeddingTable table(std::move(ids), static_cast<std::uint32_t>(dim));
  for (std::size_t r = 0; r < table.size(); ++r)
    std::copy_n(values.begin() + static_cast<std::ptrdiff_t>(r * dim), dim, table.input_row(r).begin());
  return table;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  const double na = std::sqrt(dot(a.data(), a.data(), a.size()));
  const double nb = std::sqrt(dot(b.data(), b.data(), b.size()));
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot(a.data(), b.data(), a.size()) / (na * nb);
}

}  // namespace hullrec
