// Acceptance suite. Prints one "criterion N: PASS|FAIL ..." line per
// criterion; `--only N` runs a single one. Exit status is non-zero when any
// selected criterion fails.

#include <chrono>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "mathsticks/generator.hpp"
#include "mathsticks/harness.hpp"
#include "mathsticks/render.hpp"

using namespace mathsticks;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

class Clock {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string row_text(const StatsRow& r) {
  std::ostringstream s;
  s << r.count << "; " << r.one_move << '/' << r.two_move << '/' << r.one_or_two_move << "; " << r.unique << '/'
    << r.multiple << "; " << r.flip << '/' << r.no_flip;
  return s.str();
}

std::string time_text(double s) {
  std::ostringstream o;
  o.precision(1);
  o << std::fixed << s << "s";
  return o.str();
}

RuleConfig selected_rules() {
  return rule_ablation(reference_row(1), reference_row(2), default_rule_space(), 1).ranked.front().rules;
}

StatsTable sweep_table(const RuleConfig& rc, std::vector<int> levels, int shards) {
  SweepOptions o;
  o.levels = std::move(levels);
  o.shards = split_shards(shards);
  StatsTable t;
  sweep(o, rc, [&t](const InstanceRecord& r) { t.add(r.labels); });
  return t;
}

Outcome level_row(int level, double budget) {
  const RuleConfig rc = selected_rules();
  const Clock clock;
  const StatsRow got = sweep_table(rc, {level}, 1).levels[static_cast<std::size_t>(level - 1)];
  const double t = clock.seconds();
  const StatsRow want = reference_row(level);
  return {got == want && t < budget, "rules " + rc.fingerprint() + ", observed " + row_text(got) + ", expected " +
                                         row_text(want) + ", sweep " + time_text(t)};
}

Outcome full_sweep() {
  const RuleConfig rc = selected_rules();
  const Clock clock;
  const StatsTable t = sweep_table(rc, {}, 1);
  const double secs = clock.seconds();
  const StatsRow total = t.total();
  const StatsRow want = reference_total();
  const bool levels_ok = t.levels[2].count == reference_row(3).count && t.levels[3].count == reference_row(4).count;
  return {total == want && levels_ok && secs <= 3600,
          "observed total " + row_text(total) + " (L3 " + std::to_string(t.levels[2].count) + ", L4 " +
              std::to_string(t.levels[3].count) + "), expected " + row_text(want) + " (L3 " +
              std::to_string(reference_row(3).count) + ", L4 " + std::to_string(reference_row(4).count) +
              "), single-threaded " + time_text(secs)};
}

std::string state_set(std::vector<EquationState> v) {
  std::sort(v.begin(), v.end());
  std::string s;
  for (const EquationState& z : v) s += canonical_string(z) + ' ';
  return s;
}

Outcome oracle_equivalence() {
  const Clock clock;
  std::mt19937_64 rng(0xacce55);
  const std::vector<RuleConfig> rules = default_rule_space();
  int checked = 0, mismatches = 0;
  for (int i = 0; i < 600; ++i) {
    const EquationState z = state_at(static_cast<std::int64_t>(rng() % kStateSpaceSize));
    const RuleConfig& rc = i % 2 == 0 ? RuleConfig{} : rules[rng() % rules.size()];
    for (int k = 1; k <= 2; ++k) {
      std::vector<EquationState> fast;
      for (const Successor& s : enumerate_edits(z, k, rc)) fast.push_back(s.state);
      if (state_set(fast) != state_set(oracle_enumerate(z, k, rc))) ++mismatches;
    }
    ++checked;
  }
  const double t = clock.seconds();
  return {mismatches == 0 && t < 300, std::to_string(checked) + " states at k=1,2, " + std::to_string(mismatches) +
                                          " mismatches, " + time_text(t)};
}

Outcome solution_soundness() {
  const RuleConfig rc;
  std::mt19937_64 rng(0x50fa);
  int records = 0, bad = 0, solutions = 0;
  while (records < 10000) {
    const auto r = mine_instance(state_at(static_cast<std::int64_t>(rng() % kStateSpaceSize)), rc);
    if (!r) continue;
    ++records;
    for (const auto* set : {&r->s1, &r->s2star}) {
      for (const Solution& s : *set) {
        ++solutions;
        const EditOutcome o = apply_edit(r->state, s.witness, rc);
        if (!o.ok() || o.state != s.final_state || !is_valid_arithmetic(o.state) ||
            total_sticks(o.state) != total_sticks(r->state)) {
          ++bad;
        }
      }
    }
  }
  // Reading the 3 as a 2 is not a relocation, so 9-2=5 must never be offered.
  bool trap = false;
  if (const auto r = mine_instance(*parse_state("9-3=5"), rc)) {
    for (const auto* set : {&r->s1, &r->s2star}) {
      for (const Solution& s : *set) trap |= canonical_string(s.final_state) == "9-2=5";
    }
  }
  return {bad == 0 && !trap, std::to_string(records) + " records, " + std::to_string(solutions) + " solutions, " +
                                 std::to_string(bad) + " unsound, trap " + (trap ? "present" : "absent")};
}

Outcome render_round_trip() {
  const GeometryManifest m = GeometryManifest::standard();
  std::mt19937_64 rng(0x5e6);
  int failures = 0, unstable = 0;
  for (int i = 0; i < 10000; ++i) {
    const EquationState z = state_at(static_cast<std::int64_t>(rng() % kStateSpaceSize));
    const std::string svg = render_svg(z, RenderStyle{}, m);
    if (render_svg(z, RenderStyle{}, m) != svg) ++unstable;
    try {
      if (extract_state(svg, m) != z) ++failures;
    } catch (const RenderError&) {
      ++failures;
    }
  }
  return {failures == 0 && unstable == 0, "10000 states, " + std::to_string(failures) + " round-trip failures, " +
                                              std::to_string(unstable) + " unstable re-renders"};
}

Outcome grader_properties() {
  const RuleConfig rc;
  std::mt19937_64 rng(0x96ade);
  std::vector<InstanceRecord> pool;
  int stored = 0, stored_bad = 0;
  while (pool.size() < 2000) {
    const auto r = mine_instance(state_at(static_cast<std::int64_t>(rng() % kStateSpaceSize)), rc);
    if (!r) continue;
    for (const auto* set : {&r->s1, &r->s2star}) {
      for (const Solution& s : *set) {
        ++stored;
        if (grade(r->state, parse_answer(s.witness.str()), rc).verdict != Verdict::kCorrect) ++stored_bad;
      }
    }
    pool.push_back(*r);
  }

  int disagreements = 0;
  for (int i = 0; i < 1000; ++i) {
    const InstanceRecord& r = pool[rng() % pool.size()];
    const Solution& s = (r.s1.empty() || (!r.s2star.empty() && rng() % 2)) ? r.s2star[rng() % r.s2star.size()]
                                                                              : r.s1[rng() % r.s1.size()];
    std::vector<Relocation> moves(s.witness.moves().begin(), s.witness.moves().end());
    Relocation& mv = moves[rng() % moves.size()];
    const StickPosition p = StickPosition::from_code(static_cast<int>(rng() % kPositionCount));
    (rng() % 2 ? mv.from : mv.to) = p;
    const Edit e{std::span<const Relocation>(moves)};
    const EditOutcome o = apply_edit(r.state, e, rc);
    const bool direct = o.ok() && is_valid_arithmetic(o.state);
    if ((grade(r.state, parse_answer(e.str()), rc).verdict == Verdict::kCorrect) != direct) ++disagreements;
  }

  const std::string alphabet = "Move(), ABCDEFGH0123456789\\boxed{}\n";
  int aborts = 0;
  for (int i = 0; i < 100000; ++i) {
    std::string text;
    const std::size_t len = rng() % 64;
    for (std::size_t k = 0; k < len; ++k) {
      text += rng() % 5 == 0 ? "Move(" : std::string(1, rng() % 4 == 0 ? static_cast<char>(rng() % 256)
                                                                        : alphabet[rng() % alphabet.size()]);
    }
    try {
      const AnswerParse p = parse_answer(text);
      if (!p.ok() && p.error.empty()) ++aborts;
    } catch (...) {
      ++aborts;
    }
  }
  return {stored_bad == 0 && disagreements == 0 && aborts == 0,
          std::to_string(stored) + " stored solutions (" + std::to_string(stored_bad) + " not correct), 1000 mutations (" +
              std::to_string(disagreements) + " disagreements), 100000 fuzz strings (" + std::to_string(aborts) +
              " aborts)"};
}

std::string manifest_text(const TestSetManifest& m) {
  std::string s = std::to_string(m.seed) + m.rule_fingerprint;
  for (const ManifestItem& item : m.items) s += '|' + item.id;
  return s;
}

Outcome test_set() {
  const RuleConfig rc;
  const Clock clock;
  SweepOptions one;
  SweepOptions eight;
  eight.shards = split_shards(8);
  const TestSetManifest a = sample_from_sweep(one, rc, 0);
  const TestSetManifest b = sample_from_sweep(eight, rc, 0);
  std::array<int, 4> per{};
  std::set<std::string> ids;
  for (const ManifestItem& item : a.items) {
    ++per[static_cast<std::size_t>(item.labels.level.value - 1)];
    ids.insert(item.id);
  }
  const bool balanced = per == std::array<int, 4>{100, 100, 100, 100} && ids.size() == 400;
  const bool same = manifest_text(a) == manifest_text(b);
  return {a.items.size() == 400 && balanced && same,
          std::to_string(a.items.size()) + " items (" + std::to_string(per[0]) + "/" + std::to_string(per[1]) + "/" +
              std::to_string(per[2]) + "/" + std::to_string(per[3]) + "), 1 vs 8 shards " +
              (same ? "identical" : "differ") + ", " + time_text(clock.seconds())};
}

Outcome score_shape() {
  const RuleConfig rc;
  TestSetManifest m;
  m.rule_fingerprint = rc.fingerprint();
  std::mt19937_64 rng(0x5c0e);
  std::array<int, 4> per{};
  while (m.items.size() < 200) {
    const auto r = mine_instance(state_at(static_cast<std::int64_t>(rng() % kStateSpaceSize)), rc);
    if (!r || per[static_cast<std::size_t>(r->labels.level.value - 1)]++ >= 50) continue;
    ManifestItem item{r->id(), r->state, r->labels, r->s1};
    item.solutions.insert(item.solutions.end(), r->s2star.begin(), r->s2star.end());
    m.items.push_back(item);
  }

  bool pass = true;
  for (Regime g : {Regime::kText, Regime::kVisual}) {
    std::vector<Response> perfect, empty;
    for (const ManifestItem& item : m.items) {
      perfect.push_back({item.id, g, "scripted", item.solutions.front().witness.str()});
      empty.push_back({item.id, g, "empty", ""});
    }
    const ScoreReport hi = score_run(perfect, m, g, rc);
    const ScoreReport lo = score_run(empty, m, g, rc);
    auto all = [](const ScoreReport& r, const char* want) {
      bool ok = r.overall.accuracy() == want && r.level_average() == want;
      for (const AccuracyCell& c : r.levels) ok &= c.accuracy() == want;
      for (const AccuracyCell& c : r.multiplicity) ok &= c.attempted == 0 || c.accuracy() == want;
      for (const AccuracyCell& c : r.flip) ok &= c.attempted == 0 || c.accuracy() == want;
      for (const AccuracyCell& c : r.move) ok &= c.attempted == 0 || c.accuracy() == want;
      return ok;
    };
    pass &= all(hi, "100.00") && all(lo, "0.00");
    pass &= lo.failures[static_cast<std::size_t>(FailureClass::kFormat)] == static_cast<std::int64_t>(m.items.size());
  }
  return {pass, "200 items, both regimes: scripted responder 100.00 and empty responder 0.00 (all format errors) "
                "in every cell"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<int, std::function<Outcome()>>> criteria = {
      {1, [] { return level_row(1, 10); }},
      {2, [] { return level_row(2, 120); }},
      {3, full_sweep},
      {4, oracle_equivalence},
      {5, solution_soundness},
      {6, render_round_trip},
      {7, grader_properties},
      {8, test_set},
      {9, score_shape},
  };
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--only" && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else {
      std::cerr << "usage: acceptance [--only N]\n";
      return 2;
    }
  }
  int failed = 0;
  for (const auto& [n, run] : criteria) {
    if (only != 0 && n != only) continue;
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << "criterion " << n << ": " << (o.pass ? "PASS" : "FAIL") << "  " << o.detail << std::endl;
    failed += o.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
