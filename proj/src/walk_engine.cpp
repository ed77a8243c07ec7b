#include "hullrec/walk_engine.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <string>
#include <thread>

#include "hullrec/error.hpp"
#include "hullrec/rng.hpp"
#include "hullrec/text_io.hpp"

namespace hullrec {

TransitionMatrix TransitionMatrix::uniform() {
  const double s = 1.0 / 6.0;
  return from_coefficients(s, s, s, s, s, 1.0 - 5 * s);
}

TransitionMatrix TransitionMatrix::from_coefficients(double uu, double ue, double ui, double ei, double ee,
                                                     double ii) {
  const double vals[] = {uu, ue, ui, ei, ee, ii};
  double sum = 0.0;
  for (double v : vals) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("transition coefficients must be finite and >= 0");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw ConfigError("transition coefficients must sum to 1 (got " + text::format_double(sum) + ")");

  TransitionMatrix tm;
  auto set = [&tm](NodeType a, NodeType b, double v) {
    tm.c_[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = v;
    tm.c_[static_cast<std::size_t>(b)][static_cast<std::size_t>(a)] = v;
  };
  set(NodeType::User, NodeType::User, uu);
  set(NodeType::User, NodeType::Entity, ue);
  set(NodeType::User, NodeType::Item, ui);
  set(NodeType::Entity, NodeType::Item, ei);
  set(NodeType::Entity, NodeType::Entity, ee);
  set(NodeType::Item, NodeType::Item, ii);
  return tm;
}

void WalkConfig::validate() const {
  if (walks_per_node < 1) throw ConfigError("walk.walks_per_node must be >= 1");
  if (walk_length < 2) throw ConfigError("walk.walk_length must be >= 2");
}

std::size_t WalkCorpus::token_count() const {
  std::size_t n = 0;
  for (const auto& w : walks) n += w.size();
  return n;
}

std::vector<std::pair<NodeId, double>> transition_distribution(const HinGraph& g, NodeId v,
                                                               const TransitionMatrix& tm) {
  const NodeType from = g.type(v);
  // Mass of each neighbor of type t is C(from, t) / |N_t(v)|, so a whole
  // partition carries C(from, t) before renormalization.
  double z = 0.0;
  for (NodeType t : kAllNodeTypes)
    if (!g.neighbors_by_type(v, t).empty()) z += tm(from, t);

  std::vector<std::pair<NodeId, double>> out;
  if (z <= 0.0) return out;
  for (NodeType t : kAllNodeTypes) {
    auto part = g.neighbors_by_type(v, t);
    if (part.empty() || tm(from, t) <= 0.0) continue;
    const double p = tm(from, t) / static_cast<double>(part.size()) / z;
    for (NodeId w : part) out.emplace_back(w, p);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::mt19937_64 walk_stream(std::uint64_t seed, NodeId start, std::uint32_t walk_index) {
  return derive_stream(seed, {static_cast<std::uint64_t>(start), static_cast<std::uint64_t>(walk_index)});
}

std::vector<NodeId> generate_walk(const HinGraph& g, NodeId start, const WalkConfig& cfg,
                                  const TransitionMatrix& tm, std::mt19937_64& rng) {
  g.type(start);
  std::vector<NodeId> walk;
  walk.reserve(cfg.walk_length);
  walk.push_back(start);
  NodeId cur = start;
  while (walk.size() < cfg.walk_length) {
    // Two-stage draw: partition by coefficient, then uniform inside it.
    const NodeType from = g.type(cur);
    std::array<double, kNodeTypeCount> mass{};
    double z = 0.0;
    for (NodeType t : kAllNodeTypes) {
      if (g.neighbors_by_type(cur, t).empty()) continue;
      mass[static_cast<std::size_t>(t)] = tm(from, t);
      z += tm(from, t);
    }
    if (z <= 0.0) break;
    double r = uniform01(rng) * z;
    std::size_t pick = kNodeTypeCount;
    for (std::size_t t = 0; t < kNodeTypeCount; ++t) {
      if (mass[t] <= 0.0) continue;
      pick = t;
      if (r < mass[t]) break;
      r -= mass[t];
    }
    auto part = g.neighbors_by_type(cur, static_cast<NodeType>(pick));
    cur = part[uniform_index(rng, part.size())];
    walk.push_back(cur);
  }
  return walk;
}

WalkCorpus generate_corpus(const HinGraph& g, const WalkConfig& cfg, const TransitionMatrix& tm,
                           unsigned threads) {
  cfg.validate();
  WalkCorpus corpus;
  corpus.config = cfg;
  corpus.graph_fingerprint = g.fingerprint();
  const std::size_t n = g.node_count();
  corpus.walks.resize(n * cfg.walks_per_node);

  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t slot = begin; slot < end; ++slot) {
      const auto round = static_cast<std::uint32_t>(slot / n);
      const auto node = static_cast<NodeId>(slot % n);
      auto rng = walk_stream(cfg.seed, node, round);
      corpus.walks[slot] = generate_walk(g, node, cfg, tm, rng);
    }
  };

  const std::size_t total = corpus.walks.size();
  threads = std::max(1u, threads);
  if (threads == 1 || total < 2) {
    work(0, total);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (total + threads - 1) / threads;
    for (std::size_t b = 0; b < total; b += chunk) pool.emplace_back(work, b, std::min(total, b + chunk));
  }
  return corpus;
}

void save_corpus(const WalkCorpus& corpus, const std::filesystem::path& path) {
  auto out = text::open_output(path);
  out << "#walks " << corpus.walks.size() << " length " << corpus.config.walk_length << " seed "
      << corpus.config.seed << " graph " << text::hex64(corpus.graph_fingerprint) << '\n';
  std::string line;
  for (const auto& walk : corpus.walks) {
    line.clear();
    for (std::size_t i = 0; i < walk.size(); ++i) {
      if (i) line += ' ';
      line += std::to_string(walk[i]);
    }
    line += '\n';
    out << line;
  }
  if (!out) throw DataError("failed writing corpus " + path.string());
}

WalkCorpus load_corpus(const std::filesystem::path& path) {
  auto in = text::open_input(path);
  std::string line;
  auto fail = [&path](std::size_t lineno, const std::string& msg) {
    return DataError(path.string() + ":" + std::to_string(lineno) + ": " + msg);
  };
  if (!std::getline(in, line)) throw fail(1, "missing header");
  auto head = text::split_ws(line);
  WalkCorpus corpus;
  std::uint64_t count = 0, length = 0, seed = 0, fp = 0;
  if (head.size() != 8 || head[0] != "#walks" || head[2] != "length" || head[4] != "seed" ||
      head[6] != "graph" || !text::parse_u64(head[1], count) || !text::parse_u64(head[3], length) ||
      !text::parse_u64(head[5], seed))
    throw fail(1, "expected '#walks <n> length <L> seed <s> graph <fingerprint>'");
  auto fp_text = head[7];
  auto res = std::from_chars(fp_text.data(), fp_text.data() + fp_text.size(), fp, 16);
  if (res.ec != std::errc() || res.ptr != fp_text.data() + fp_text.size()) throw fail(1, "bad graph fingerprint");
  corpus.graph_fingerprint = fp;
  corpus.config.walk_length = static_cast<std::uint32_t>(length);
  corpus.config.seed = seed;

  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    std::vector<NodeId> walk;
    for (auto tok : text::split_ws(line)) {
      std::uint64_t id = 0;
      if (!text::parse_u64(tok, id) || id > 0xffffffffULL) throw fail(lineno, "bad node id '" + std::string(tok) + "'");
      walk.push_back(static_cast<NodeId>(id));
    }
    if (walk.empty()) throw fail(lineno, "empty walk");
    if (walk.size() > length) throw fail(lineno, "walk longer than header length");
    corpus.walks.push_back(std::move(walk));
  }
  if (corpus.walks.size() != count) throw fail(lineno, "walk count does not match header");
  return corpus;
}

}  // namespace hullrec
