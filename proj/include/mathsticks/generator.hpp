#ifndef MATHSTICKS_GENERATOR_HPP
#define MATHSTICKS_GENERATOR_HPP

// Dataset generation: sweep the full state space, mine the one- and
// two-stick corrections of every invalid equation, label the solvable ones,
// aggregate statistics and draw the stratified test set.

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mathsticks/equation.hpp"
#include "mathsticks/moves.hpp"

namespace mathsticks {

inline constexpr const char* kToolVersion = "mathsticks 1.0.0";

/// Raised by the generator for contract violations (overlapping shards,
/// under-populated levels, unmatched ablation targets, malformed input).
class GeneratorError : public std::runtime_error {
 public:
  enum class Code { kShardOverlap, kInsufficientLevel, kNoMatch, kBadInput };
  GeneratorError(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Code code() const { return code_; }

 private:
  Code code_;
};

enum class MoveComplexity : std::uint8_t { kOne, kTwo, kOneOrTwo };
enum class Multiplicity : std::uint8_t { kUnique, kMultiple };

std::string_view to_string(MoveComplexity m);  // "1", "2", "1or2"
std::string_view to_string(Multiplicity m);    // "unique", "multiple"

struct Labels {
  Level level;
  MoveComplexity move = MoveComplexity::kOne;
  Multiplicity multiplicity = Multiplicity::kUnique;
  bool flip = false;

  friend bool operator==(const Labels&, const Labels&) = default;
};

struct Solution {
  EquationState final_state;
  Edit witness;
};

struct InstanceRecord {
  EquationState state;
  std::vector<Solution> s1;      // one-stick corrections
  std::vector<Solution> s2star;  // two-stick corrections not reachable with one
  Labels labels;

  /// Dataset key; canonical_string already keeps "07+2=9" apart from "7+2=9".
  std::string id() const { return canonical_string(state); }
  std::size_t solution_count() const { return s1.size() + s2star.size(); }
};

Labels assign_labels(const EquationState& z, const std::vector<Solution>& s1,
                     const std::vector<Solution>& s2star, const RuleConfig& rc);

/// nullopt when z is already valid or admits no correction.
std::optional<InstanceRecord> mine_instance(const EquationState& z, const RuleConfig& rc);

/// Half-open range of canonical state indices.
struct ShardRange {
  std::int64_t begin = 0;
  std::int64_t end = 0;
};

/// `count` contiguous shards partitioning [0, kStateSpaceSize).
std::vector<ShardRange> split_shards(int count);

/// Throws kShardOverlap unless the shards tile [0, kStateSpaceSize) exactly
/// (in any order).
void validate_shards(std::vector<ShardRange> shards);

struct SweepOptions {
  /// Levels to keep (1..4); empty keeps all.
  std::vector<int> levels;
  /// Work partition; empty means one shard covering everything.
  std::vector<ShardRange> shards;
  /// Worker threads; 0 picks hardware concurrency.
  unsigned threads = 1;
};

/// Mines every state selected by `opts` and calls `sink` in canonical state
/// order, independent of sharding and threading.
void sweep(const SweepOptions& opts, const RuleConfig& rc,
           const std::function<void(const InstanceRecord&)>& sink);

// ---------------------------------------------------------------------------
// Statistics

struct StatsRow {
  std::int64_t count = 0;
  std::int64_t one_move = 0;
  std::int64_t two_move = 0;
  std::int64_t one_or_two_move = 0;
  std::int64_t unique = 0;
  std::int64_t multiple = 0;
  std::int64_t flip = 0;
  std::int64_t no_flip = 0;

  void add(const Labels& l);
  /// The seven breakdown cells in table order.
  std::array<std::int64_t, 7> cells() const;

  friend bool operator==(const StatsRow&, const StatsRow&) = default;
};

struct StatsTable {
  std::array<StatsRow, 4> levels{};  // index = level - 1

  void add(const Labels& l) { levels[static_cast<std::size_t>(l.level.value - 1)].add(l); }
  StatsRow total() const;
};

StatsTable compute_stats(const std::vector<Labels>& labels);

/// Percentage with two decimals, rounded half-up, as text ("13.42").
std::string percent(std::int64_t part, std::int64_t whole);

void write_stats_json(std::ostream& out, const StatsTable& table, const RuleConfig& rc);
void write_stats_csv(std::ostream& out, const StatsTable& table);

// ---------------------------------------------------------------------------
// Rule ablation

struct AblationEntry {
  RuleConfig rules;
  StatsRow l1;
  int l1_agreement = 0;  // matching breakdown cells out of 7
  std::int64_t l1_distance = 0;  // sum of |cell difference| incl. count
  std::optional<StatsRow> l2;
  int l2_agreement = 0;
  std::int64_t l2_distance = 0;
};

struct AblationReport {
  std::vector<AblationEntry> ranked;
  /// True when the best entry reproduces the L1 target exactly.
  bool exact_match = false;

  /// Throws kNoMatch with per-cell differences unless exact_match.
  void require_exact(const StatsRow& target) const;
};

/// Every combination of the three toggles (8 configs).
std::vector<RuleConfig> default_rule_space();

/// Runs the L1 sub-sweep per config and ranks by exact-cell agreement with
/// `l1_target`, then by L1 distance, L2 agreement, L2 distance and finally
/// fewer permissive toggles. When `l2_target` is given the L2 sub-sweep
/// validates every config.
AblationReport rule_ablation(const StatsRow& l1_target, const std::optional<StatsRow>& l2_target,
                             const std::vector<RuleConfig>& rule_space, unsigned threads = 1);

/// Reference rows of the reference statistics.
StatsRow reference_row(int level);
StatsRow reference_total();

// ---------------------------------------------------------------------------
// Test set

struct ManifestItem {
  std::string id;
  EquationState state;
  Labels labels;
  std::vector<Solution> solutions;  // withheld from the exported manifest
};

struct TestSetManifest {
  std::uint64_t seed = 0;
  std::string rule_fingerprint;
  std::vector<ManifestItem> items;  // level-major, canonical order within level
};

inline constexpr int kItemsPerLevel = 100;

/// Picks `per_level` distinct positions uniformly from each level's records
/// (level_sizes[i] = records of level i + 1). Result is sorted per level and
/// deterministic in `seed`. Throws kInsufficientLevel when a level is short.
std::array<std::vector<std::int64_t>, 4> sample_positions(
    const std::array<std::int64_t, 4>& level_sizes, std::uint64_t seed,
    int per_level = kItemsPerLevel);

/// sample_positions applied to an in-memory dataset in canonical order.
TestSetManifest sample_test_set(const std::vector<InstanceRecord>& dataset, std::uint64_t seed,
                                const RuleConfig& rc, int per_level = kItemsPerLevel);

/// Same selection as sample_test_set over the records `opts` would sweep,
/// without holding the dataset in memory: one sweep keeps per-level state
/// indices, then only the picked states are mined again.
TestSetManifest sample_from_sweep(const SweepOptions& opts, const RuleConfig& rc, std::uint64_t seed,
                                  int per_level = kItemsPerLevel);

}  // namespace mathsticks

#endif  // MATHSTICKS_GENERATOR_HPP
