#include "mathsticks/generator.hpp"

#include <algorithm>
#include <atomic>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace mathsticks {

std::string_view to_string(MoveComplexity m) {
  switch (m) {
    case MoveComplexity::kOne: return "1";
    case MoveComplexity::kTwo: return "2";
    case MoveComplexity::kOneOrTwo: return "1or2";
  }
  return "?";
}

std::string_view to_string(Multiplicity m) {
  return m == Multiplicity::kUnique ? "unique" : "multiple";
}

// ---------------------------------------------------------------------------
// Mining

Labels assign_labels(const EquationState& z, const std::vector<Solution>& s1,
                     const std::vector<Solution>& s2star, const RuleConfig& rc) {
  Labels l;
  l.level = level_of(z);
  if (s2star.empty()) {
    l.move = MoveComplexity::kOne;
  } else if (s1.empty()) {
    l.move = MoveComplexity::kTwo;
  } else {
    l.move = MoveComplexity::kOneOrTwo;
  }
  l.multiplicity = s1.size() + s2star.size() == 1 ? Multiplicity::kUnique : Multiplicity::kMultiple;

  auto flips = [&z](const Solution& s) { return s.final_state.g != z.g; };
  if (rc.flip == FlipSemantics::kAnySolutionFlips) {
    l.flip = std::any_of(s1.begin(), s1.end(), flips) || std::any_of(s2star.begin(), s2star.end(), flips);
  } else {
    l.flip = (!s1.empty() || !s2star.empty()) && std::all_of(s1.begin(), s1.end(), flips) &&
             std::all_of(s2star.begin(), s2star.end(), flips);
  }
  return l;
}

namespace {

std::vector<Solution> valid_successors(const EquationState& z, int k, const TransitionTables& tables) {
  std::vector<Solution> out;
  for_each_successor(z, k, tables, [&](const EquationState& s, Occupancy removed, Occupancy added) {
    if (is_valid_arithmetic(s)) out.push_back({s, witness_edit(removed, added)});
  });
  std::sort(out.begin(), out.end(),
            [](const Solution& x, const Solution& y) { return x.final_state < y.final_state; });
  return out;
}

}  // namespace

std::optional<InstanceRecord> mine_instance(const EquationState& z, const RuleConfig& rc) {
  if (is_valid_arithmetic(z)) return std::nullopt;

  const TransitionTables& tables = slot_transition_tables(rc);
  InstanceRecord rec;
  rec.state = z;
  rec.s1 = valid_successors(z, 1, tables);
  std::vector<Solution> s2 = valid_successors(z, 2, tables);

  // Final-state set difference; both lists are sorted by final state.
  rec.s2star.reserve(s2.size());
  std::set_difference(
      s2.begin(), s2.end(), rec.s1.begin(), rec.s1.end(), std::back_inserter(rec.s2star),
      [](const Solution& x, const Solution& y) { return x.final_state < y.final_state; });

  if (rec.solution_count() == 0) return std::nullopt;
  rec.labels = assign_labels(z, rec.s1, rec.s2star, rc);
  return rec;
}

// ---------------------------------------------------------------------------
// Sweep

std::vector<ShardRange> split_shards(int count) {
  if (count < 1) throw GeneratorError(GeneratorError::Code::kBadInput, "shard count must be >= 1");
  std::vector<ShardRange> out;
  for (int i = 0; i < count; ++i) {
    out.push_back({kStateSpaceSize * i / count, kStateSpaceSize * (i + 1) / count});
  }
  return out;
}

void validate_shards(std::vector<ShardRange> shards) {
  std::sort(shards.begin(), shards.end(),
            [](const ShardRange& x, const ShardRange& y) { return x.begin < y.begin; });
  std::int64_t expected = 0;
  for (const ShardRange& s : shards) {
    if (s.begin != expected || s.end < s.begin) {
      std::ostringstream msg;
      msg << "shards do not partition the state space: range [" << s.begin << ", " << s.end
          << ") where " << expected << " was expected";
      throw GeneratorError(GeneratorError::Code::kShardOverlap, msg.str());
    }
    expected = s.end;
  }
  if (expected != kStateSpaceSize) {
    throw GeneratorError(GeneratorError::Code::kShardOverlap,
                         "shards end at " + std::to_string(expected) + ", not at the end of the state space");
  }
}

void sweep(const SweepOptions& opts, const RuleConfig& rc,
           const std::function<void(const InstanceRecord&)>& sink) {
  std::vector<ShardRange> shards = opts.shards.empty() ? split_shards(1) : opts.shards;
  validate_shards(shards);
  std::sort(shards.begin(), shards.end(),
            [](const ShardRange& x, const ShardRange& y) { return x.begin < y.begin; });

  std::array<bool, 5> keep{};
  for (int l : opts.levels) {
    if (l < 1 || l > 4) throw GeneratorError(GeneratorError::Code::kBadInput, "level out of range: " + std::to_string(l));
    keep[static_cast<std::size_t>(l)] = true;
  }
  const bool keep_all = opts.levels.empty();

  // Blocks never straddle a shard boundary; output order is block order.
  constexpr std::int64_t kBlock = 8192;
  std::vector<ShardRange> blocks;
  for (const ShardRange& s : shards) {
    for (std::int64_t b = s.begin; b < s.end; b += kBlock) blocks.push_back({b, std::min(s.end, b + kBlock)});
  }

  auto mine_block = [&](const ShardRange& block) {
    std::vector<InstanceRecord> out;
    for (std::int64_t i = block.begin; i < block.end; ++i) {
      const EquationState z = state_at(i);
      if (!keep_all && !keep[static_cast<std::size_t>(level_of(z).value)]) continue;
      if (auto rec = mine_instance(z, rc)) out.push_back(std::move(*rec));
    }
    return out;
  };

  unsigned threads = opts.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : opts.threads;
  if (threads <= 1) {
    for (const ShardRange& block : blocks) {
      for (const InstanceRecord& rec : mine_block(block)) sink(rec);
    }
    return;
  }

  // Waves of blocks mined concurrently, then flushed in order.
  const std::size_t wave = static_cast<std::size_t>(threads) * 4;
  for (std::size_t first = 0; first < blocks.size(); first += wave) {
    const std::size_t last = std::min(blocks.size(), first + wave);
    std::vector<std::vector<InstanceRecord>> results(last - first);
    std::atomic<std::size_t> next{first};
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < last; i = next++) results[i - first] = mine_block(blocks[i]);
      });
    }
    for (std::thread& t : pool) t.join();
    for (const auto& chunk : results) {
      for (const InstanceRecord& rec : chunk) sink(rec);
    }
  }
}

// ---------------------------------------------------------------------------
// Statistics

void StatsRow::add(const Labels& l) {
  ++count;
  switch (l.move) {
    case MoveComplexity::kOne: ++one_move; break;
    case MoveComplexity::kTwo: ++two_move; break;
    case MoveComplexity::kOneOrTwo: ++one_or_two_move; break;
  }
  (l.multiplicity == Multiplicity::kUnique ? unique : multiple) += 1;
  (l.flip ? flip : no_flip) += 1;
}

std::array<std::int64_t, 7> StatsRow::cells() const {
  return {one_move, two_move, one_or_two_move, unique, multiple, flip, no_flip};
}

StatsRow StatsTable::total() const {
  StatsRow t;
  for (const StatsRow& r : levels) {
    t.count += r.count;
    t.one_move += r.one_move;
    t.two_move += r.two_move;
    t.one_or_two_move += r.one_or_two_move;
    t.unique += r.unique;
    t.multiple += r.multiple;
    t.flip += r.flip;
    t.no_flip += r.no_flip;
  }
  return t;
}

StatsTable compute_stats(const std::vector<Labels>& labels) {
  StatsTable t;
  for (const Labels& l : labels) t.add(l);
  return t;
}

std::string percent(std::int64_t part, std::int64_t whole) {
  if (whole == 0) return "0.00";
  // Hundredths of a percent, rounded half-up.
  const std::int64_t hundredths = (part * 20000 + whole) / (2 * whole);
  std::string frac = std::to_string(hundredths % 100);
  if (frac.size() < 2) frac.insert(0, "0");
  return std::to_string(hundredths / 100) + "." + frac;
}

namespace {

nlohmann::ordered_json row_json(const std::string& name, const StatsRow& r) {
  auto cell = [&r](std::int64_t v) {
    return nlohmann::ordered_json{{"count", v}, {"percent", percent(v, r.count)}};
  };
  nlohmann::ordered_json j;
  j["row"] = name;
  j["count"] = r.count;
  j["move_complexity"] = {{"1-move", cell(r.one_move)},
                          {"2-move", cell(r.two_move)},
                          {"1/2-move", cell(r.one_or_two_move)}};
  j["solution_multiplicity"] = {{"unique", cell(r.unique)}, {"multiple", cell(r.multiple)}};
  j["operator"] = {{"flip", cell(r.flip)}, {"no_flip", cell(r.no_flip)}};
  return j;
}

}  // namespace

void write_stats_json(std::ostream& out, const StatsTable& table, const RuleConfig& rc) {
  nlohmann::ordered_json j;
  j["header"] = {{"tool", kToolVersion}, {"kind", "stats"}, {"rules", rc.fingerprint()}, {"seed", nullptr}};
  const StatsRow total = table.total();
  j["rows"] = nlohmann::ordered_json::array();
  for (int l = 0; l < 4; ++l) {
    auto row = row_json("L" + std::to_string(l + 1), table.levels[static_cast<std::size_t>(l)]);
    row["level_percent"] = percent(table.levels[static_cast<std::size_t>(l)].count, total.count);
    j["rows"].push_back(row);
  }
  j["total"] = row_json("Total", total);
  out << j.dump(2) << '\n';
}

void write_stats_csv(std::ostream& out, const StatsTable& table) {
  out << "row,count,1-move,2-move,1/2-move,unique,multiple,flip,no_flip\n";
  auto line = [&out](const std::string& name, const StatsRow& r) {
    out << name << ',' << r.count;
    for (std::int64_t v : r.cells()) out << ',' << v;
    out << '\n';
  };
  for (int l = 0; l < 4; ++l) line("L" + std::to_string(l + 1), table.levels[static_cast<std::size_t>(l)]);
  line("Total", table.total());
}

// ---------------------------------------------------------------------------
// Reference rows

StatsRow reference_row(int level) {
  switch (level) {
    case 1: return {1'505, 202, 880, 423, 548, 957, 819, 686};
    case 2: return {18'466, 1'875, 14'340, 2'251, 11'692, 6'774, 6'743, 11'723};
    case 3: return {275'406, 15'348, 219'715, 40'343, 127'208, 148'198, 105'185, 170'221};
    case 4: return {1'116'011, 41'505, 922'571, 151'935, 469'204, 646'807, 405'810, 710'201};
    default: throw GeneratorError(GeneratorError::Code::kBadInput, "no level " + std::to_string(level));
  }
}

StatsRow reference_total() {
  return {1'411'388, 58'930, 1'157'506, 194'952, 608'652, 802'736, 518'557, 892'831};
}

// ---------------------------------------------------------------------------
// Rule ablation

std::vector<RuleConfig> default_rule_space() {
  std::vector<RuleConfig> out;
  for (bool blank : {false, true}) {
    for (bool lz : {false, true}) {
      for (auto flip : {FlipSemantics::kAnySolutionFlips, FlipSemantics::kAllSolutionsFlip}) {
        out.push_back(RuleConfig{blank, lz, flip});
      }
    }
  }
  return out;
}

namespace {

std::int64_t distance(const StatsRow& got, const StatsRow& want) {
  const auto g = got.cells();
  const auto w = want.cells();
  std::int64_t d = got.count > want.count ? got.count - want.count : want.count - got.count;
  for (std::size_t i = 0; i < g.size(); ++i) d += g[i] > w[i] ? g[i] - w[i] : w[i] - g[i];
  return d;
}

int agreement(const StatsRow& got, const StatsRow& want) {
  const auto g = got.cells();
  const auto w = want.cells();
  int n = 0;
  for (std::size_t i = 0; i < g.size(); ++i) n += g[i] == w[i];
  return n;
}

StatsRow level_row(int level, const RuleConfig& rc, unsigned threads) {
  StatsRow row;
  SweepOptions opts;
  opts.levels = {level};
  opts.threads = threads;
  sweep(opts, rc, [&row](const InstanceRecord& r) { row.add(r.labels); });
  return row;
}

}  // namespace

void AblationReport::require_exact(const StatsRow& target) const {
  if (exact_match) return;
  std::ostringstream msg;
  msg << "no rule configuration reproduces the L1 row";
  if (!ranked.empty()) {
    const AblationEntry& best = ranked.front();
    msg << "; best " << best.rules.fingerprint() << " diffs:";
    const auto g = best.l1.cells();
    const auto w = target.cells();
    for (std::size_t i = 0; i < g.size(); ++i) msg << ' ' << (g[i] - w[i]);
  }
  throw GeneratorError(GeneratorError::Code::kNoMatch, msg.str());
}

AblationReport rule_ablation(const StatsRow& l1_target, const std::optional<StatsRow>& l2_target,
                             const std::vector<RuleConfig>& rule_space, unsigned threads) {
  AblationReport report;
  for (const RuleConfig& rc : rule_space) {
    AblationEntry e;
    e.rules = rc;
    e.l1 = level_row(1, rc, threads);
    e.l1_agreement = agreement(e.l1, l1_target);
    e.l1_distance = distance(e.l1, l1_target);
    if (l2_target) {
      e.l2 = level_row(2, rc, threads);
      e.l2_agreement = agreement(*e.l2, *l2_target);
      e.l2_distance = distance(*e.l2, *l2_target);
    }
    report.ranked.push_back(e);
  }
  std::stable_sort(report.ranked.begin(), report.ranked.end(),
                   [](const AblationEntry& x, const AblationEntry& y) {
                     if (x.l1_agreement != y.l1_agreement) return x.l1_agreement > y.l1_agreement;
                     if (x.l1_distance != y.l1_distance) return x.l1_distance < y.l1_distance;
                     if (x.l2_agreement != y.l2_agreement) return x.l2_agreement > y.l2_agreement;
                     if (x.l2_distance != y.l2_distance) return x.l2_distance < y.l2_distance;
                     return x.rules.permissiveness() < y.rules.permissiveness();
                   });
  report.exact_match = !report.ranked.empty() && report.ranked.front().l1 == l1_target;
  return report;
}

// ---------------------------------------------------------------------------
// Test set

std::array<std::vector<std::int64_t>, 4> sample_positions(
    const std::array<std::int64_t, 4>& level_sizes, std::uint64_t seed, int per_level) {
  std::array<std::vector<std::int64_t>, 4> out;
  std::mt19937_64 rng(seed);
  // std::uniform_int_distribution is implementation-defined; draw by
  // rejection so manifests match across standard libraries.
  auto below = [&rng](std::uint64_t n) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t v;
    do {
      v = rng();
    } while (v >= limit);
    return v % n;
  };

  for (std::size_t l = 0; l < 4; ++l) {
    const std::int64_t n = level_sizes[l];
    if (n < per_level) {
      throw GeneratorError(GeneratorError::Code::kInsufficientLevel,
                           "level " + std::to_string(l + 1) + " has " + std::to_string(n) +
                               " records, " + std::to_string(per_level) + " required");
    }
    // Floyd's algorithm: per_level distinct values from [0, n).
    std::vector<std::int64_t> picked;
    for (std::int64_t j = n - per_level; j < n; ++j) {
      const auto t = static_cast<std::int64_t>(below(static_cast<std::uint64_t>(j + 1)));
      picked.push_back(std::find(picked.begin(), picked.end(), t) == picked.end() ? t : j);
    }
    std::sort(picked.begin(), picked.end());
    out[l] = std::move(picked);
  }
  return out;
}

TestSetManifest sample_test_set(const std::vector<InstanceRecord>& dataset, std::uint64_t seed,
                                const RuleConfig& rc, int per_level) {
  std::array<std::vector<const InstanceRecord*>, 4> by_level;
  for (const InstanceRecord& r : dataset) {
    by_level[static_cast<std::size_t>(r.labels.level.value - 1)].push_back(&r);
  }
  std::array<std::int64_t, 4> sizes{};
  for (std::size_t l = 0; l < 4; ++l) sizes[l] = static_cast<std::int64_t>(by_level[l].size());

  TestSetManifest m;
  m.seed = seed;
  m.rule_fingerprint = rc.fingerprint();
  const auto picks = sample_positions(sizes, seed, per_level);
  for (std::size_t l = 0; l < 4; ++l) {
    for (std::int64_t p : picks[l]) {
      const InstanceRecord& r = *by_level[l][static_cast<std::size_t>(p)];
      ManifestItem item{r.id(), r.state, r.labels, {}};
      item.solutions = r.s1;
      item.solutions.insert(item.solutions.end(), r.s2star.begin(), r.s2star.end());
      m.items.push_back(std::move(item));
    }
  }
  return m;
}

TestSetManifest sample_from_sweep(const SweepOptions& opts, const RuleConfig& rc, std::uint64_t seed,
                                  int per_level) {
  std::array<std::vector<std::int64_t>, 4> indices;
  sweep(opts, rc, [&indices](const InstanceRecord& r) {
    indices[static_cast<std::size_t>(r.labels.level.value - 1)].push_back(state_index(r.state));
  });
  std::array<std::int64_t, 4> sizes{};
  for (std::size_t l = 0; l < 4; ++l) sizes[l] = static_cast<std::int64_t>(indices[l].size());

  TestSetManifest m;
  m.seed = seed;
  m.rule_fingerprint = rc.fingerprint();
  const auto picks = sample_positions(sizes, seed, per_level);
  for (std::size_t l = 0; l < 4; ++l) {
    for (std::int64_t p : picks[l]) {
      const auto r = mine_instance(state_at(indices[l][static_cast<std::size_t>(p)]), rc);
      ManifestItem item{r->id(), r->state, r->labels, r->s1};
      item.solutions.insert(item.solutions.end(), r->s2star.begin(), r->s2star.end());
      m.items.push_back(std::move(item));
    }
  }
  return m;
}

}  // namespace mathsticks
