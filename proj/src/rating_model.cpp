#include "hullrec/rating_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <unordered_map>

#include "hullrec/error.hpp"
#include "hullrec/rng.hpp"
#include "hullrec/text_io.hpp"

namespace hullrec {

void MfConfig::validate() const {
  if (k < 1) throw ConfigError("rating.k must be >= 1");
  if (epochs < 1) throw ConfigError("rating.epochs must be >= 1");
  if (!(learning_rate > 0.0)) throw ConfigError("rating.learning_rate must be > 0");
  if (!(reg >= 0.0)) throw ConfigError("rating.reg must be >= 0");
}

double RatingModel::factor_term(NodeId user, NodeId item) const {
  auto pu = user_factors.find(user);
  auto qi = item_factors.find(item);
  if (pu == user_factors.end() || qi == item_factors.end()) return 0.0;
  double s = 0.0;
  for (std::size_t f = 0; f < pu->second.size(); ++f) s += pu->second[f] * qi->second[f];
  return s;
}

double RatingModel::predict_unclamped(NodeId user, NodeId item) const {
  double r = global_mean;
  if (auto it = user_bias.find(user); it != user_bias.end()) r += it->second;
  if (auto it = item_bias.find(item); it != item_bias.end()) r += it->second;
  if (kind == RatingModelKind::BiasedMF) r += factor_term(user, item);
  return r;
}

double RatingModel::predict(NodeId user, NodeId item) const { return scale.clamp(predict_unclamped(user, item)); }

namespace {

double mean_rating(std::span<const Interaction> train) {
  double s = 0.0;
  for (const auto& r : train) s += r.rating;
  return s / static_cast<double>(train.size());
}

void check_scale(const RatingScale& scale) {
  if (!(scale.max > scale.min)) throw ConfigError("rating scale must satisfy min < max");
}

}  // namespace

RatingModel fit_bias_only(std::span<const Interaction> train, RatingScale scale, double damping) {
  if (train.empty()) throw DataError("cannot fit a rating model on an empty training set");
  check_scale(scale);
  RatingModel m;
  m.kind = RatingModelKind::BiasOnly;
  m.scale = scale;
  m.global_mean = mean_rating(train);

  std::map<NodeId, std::pair<double, double>> acc;  // sum, count
  for (const auto& r : train) {
    auto& a = acc[r.item];
    a.first += r.rating - m.global_mean;
    a.second += 1.0;
  }
  for (auto& [id, a] : acc) m.item_bias[id] = a.first / (a.second + damping);

  acc.clear();
  for (const auto& r : train) {
    auto& a = acc[r.user];
    a.first += r.rating - m.global_mean - m.item_bias[r.item];
    a.second += 1.0;
  }
  for (auto& [id, a] : acc) m.user_bias[id] = a.first / (a.second + damping);
  return m;
}

RatingModel fit_biased_mf(std::span<const Interaction> train, const MfConfig& cfg, RatingScale scale,
                          std::vector<double>* epoch_rmse) {
  if (train.empty()) throw DataError("cannot fit a rating model on an empty training set");
  cfg.validate();
  check_scale(scale);

  RatingModel m;
  m.kind = RatingModelKind::BiasedMF;
  m.scale = scale;
  m.k = cfg.k;
  m.global_mean = mean_rating(train);

  auto rng = derive_stream(cfg.seed, {0x6d66ULL});
  // Scaled so the initial p.q spread does not grow with k.
  std::normal_distribution<double> init(0.0, 0.1 / std::sqrt(static_cast<double>(cfg.k)));
  for (const auto& r : train) {
    m.user_bias.emplace(r.user, 0.0);
    m.item_bias.emplace(r.item, 0.0);
  }
  // Map iteration order keeps initialization independent of record order.
  for (auto& [id, b] : m.user_bias) {
    auto& p = m.user_factors[id];
    p.resize(cfg.k);
    for (double& x : p) x = init(rng);
  }
  for (auto& [id, b] : m.item_bias) {
    auto& q = m.item_factors[id];
    q.resize(cfg.k);
    for (double& x : q) x = init(rng);
  }

  auto train_rmse = [&] {
    double s = 0.0;
    for (const auto& r : train) {
      const double e = r.rating - m.predict_unclamped(r.user, r.item);
      s += e * e;
    }
    return std::sqrt(s / static_cast<double>(train.size()));
  };
  if (epoch_rmse) {
    epoch_rmse->clear();
    epoch_rmse->push_back(train_rmse());
  }

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  const double lr = cfg.learning_rate;
  // L2 term applied as an implicit (proximal) shrink, stable for any reg.
  const double shrink = 1.0 / (1.0 + lr * cfg.reg);
  std::vector<double> p_old(cfg.k);
  for (std::uint32_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t idx : order) {
      const auto& r = train[idx];
      double& bu = m.user_bias[r.user];
      double& bi = m.item_bias[r.item];
      auto& p = m.user_factors[r.user];
      auto& q = m.item_factors[r.item];
      double dotpq = 0.0;
      for (std::uint32_t f = 0; f < cfg.k; ++f) dotpq += p[f] * q[f];
      const double e = r.rating - (m.global_mean + bu + bi + dotpq);
      bu = (bu + lr * e) * shrink;
      bi = (bi + lr * e) * shrink;
      std::copy(p.begin(), p.end(), p_old.begin());
      for (std::uint32_t f = 0; f < cfg.k; ++f) {
        p[f] = (p[f] + lr * e * q[f]) * shrink;
        q[f] = (q[f] + lr * e * p_old[f]) * shrink;
      }
    }
    if (epoch_rmse) epoch_rmse->push_back(train_rmse());
  }

  for (const auto& [id, b] : m.user_bias)
    if (!std::isfinite(b)) throw NumericError("rating model diverged (non-finite user bias)");
  for (const auto& [id, b] : m.item_bias)
    if (!std::isfinite(b)) throw NumericError("rating model diverged (non-finite item bias)");
  return m;
}

void save_rating_model(const RatingModel& model, const std::filesystem::path& path) {
  auto out = text::open_output(path);
  out << "rating_model " << (model.kind == RatingModelKind::BiasedMF ? "biased_mf" : "bias_only") << " k " << model.k
      << " mean " << text::format_double(model.global_mean) << " scale " << text::format_double(model.scale.min) << ' '
      << text::format_double(model.scale.max) << '\n';
  auto block = [&](const char* name, const std::map<NodeId, double>& bias,
                   const std::map<NodeId, std::vector<double>>& factors) {
    out << name << ' ' << bias.size() << '\n';
    for (const auto& [id, b] : bias) {
      out << id << ' ' << text::format_double(b);
      if (model.kind == RatingModelKind::BiasedMF) {
        auto it = factors.find(id);
        for (std::uint32_t f = 0; f < model.k; ++f)
          out << ' ' << text::format_double(it == factors.end() ? 0.0 : it->second[f]);
      }
      out << '\n';
    }
  };
  block("users", model.user_bias, model.user_factors);
  block("items", model.item_bias, model.item_factors);
  if (!out) throw DataError("failed writing rating model " + path.string());
}

RatingModel load_rating_model(const std::filesystem::path& path) {
  auto in = text::open_input(path);
  std::size_t lineno = 0;
  auto fail = [&](const std::string& msg) {
    return DataError(path.string() + ":" + std::to_string(lineno) + ": " + msg);
  };
  std::string line;
  RatingModel m;
  ++lineno;
  if (!std::getline(in, line)) throw fail("missing header");
  auto head = text::split_ws(line);
  std::uint64_t k = 0;
  if (head.size() != 9 || head[0] != "rating_model" || head[2] != "k" || head[4] != "mean" || head[6] != "scale" ||
      !text::parse_u64(head[3], k) || !text::parse_double(head[5], m.global_mean) ||
      !text::parse_double(head[7], m.scale.min) || !text::parse_double(head[8], m.scale.max))
    throw fail("malformed header");
  if (head[1] == "biased_mf")
    m.kind = RatingModelKind::BiasedMF;
  else if (head[1] == "bias_only")
    m.kind = RatingModelKind::BiasOnly;
  else
    throw fail("unknown model kind");
  m.k = static_cast<std::uint32_t>(k);
  const std::size_t cols = 2 + (m.kind == RatingModelKind::BiasedMF ? m.k : 0);

  auto read_block = [&](std::string_view name, std::map<NodeId, double>& bias,
                        std::map<NodeId, std::vector<double>>& factors) {
    ++lineno;
    if (!std::getline(in, line)) throw fail("missing block header");
    auto bh = text::split_ws(line);
    std::uint64_t n = 0;
    if (bh.size() != 2 || bh[0] != name || !text::parse_u64(bh[1], n)) throw fail("expected block '" + std::string(name) + " <n>'");
    for (std::uint64_t r = 0; r < n; ++r) {
      ++lineno;
      if (!std::getline(in, line)) throw fail("truncated block");
      auto c = text::split_ws(line);
      std::uint64_t id = 0;
      double b = 0.0;
      if (c.size() != cols || !text::parse_u64(c[0], id) || !text::parse_double(c[1], b))
        throw fail("expected " + std::to_string(cols) + " columns");
      bias[static_cast<NodeId>(id)] = b;
      if (m.kind == RatingModelKind::BiasedMF) {
        auto& f = factors[static_cast<NodeId>(id)];
        f.resize(m.k);
        for (std::uint32_t j = 0; j < m.k; ++j)
          if (!text::parse_double(c[2 + j], f[j])) throw fail("bad factor value");
      }
    }
  };
  read_block("users", m.user_bias, m.user_factors);
  read_block("items", m.item_bias, m.item_factors);
  return m;
}

std::vector<TrainTestSplit> k_fold_split(std::span<const Interaction> records, std::uint32_t folds,
                                         std::uint64_t seed) {
  if (folds < 2) throw ConfigError("split.folds must be >= 2");
  std::vector<std::uint32_t> fold_of(records.size());

  std::map<NodeId, std::vector<std::size_t>> by_user;
  for (std::size_t i = 0; i < records.size(); ++i) by_user[records[i].user].push_back(i);
  for (auto& [user, idx] : by_user) {
    auto rng = derive_stream(seed, {0x73706c6974ULL, user});
    std::shuffle(idx.begin(), idx.end(), rng);
    const auto offset = static_cast<std::uint32_t>(uniform_index(rng, folds));
    for (std::size_t j = 0; j < idx.size(); ++j) fold_of[idx[j]] = static_cast<std::uint32_t>((j + offset) % folds);
  }

  std::map<NodeId, std::vector<std::size_t>> by_item;
  for (std::size_t i = 0; i < records.size(); ++i) by_item[records[i].item].push_back(i);
  for (auto& [item, idx] : by_item) {
    if (idx.size() < 2) continue;
    const bool single = std::all_of(idx.begin(), idx.end(), [&](std::size_t i) { return fold_of[i] == fold_of[idx[0]]; });
    if (single) fold_of[idx[0]] = (fold_of[idx[0]] + 1) % folds;
  }

  std::vector<TrainTestSplit> out(folds);
  for (std::uint32_t f = 0; f < folds; ++f) out[f].fold_id = f;
  for (std::size_t i = 0; i < records.size(); ++i)
    for (std::uint32_t f = 0; f < folds; ++f) (fold_of[i] == f ? out[f].test : out[f].train).push_back(records[i]);
  return out;
}

}  // namespace hullrec
