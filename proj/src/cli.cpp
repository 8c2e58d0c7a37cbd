#include "mathsticks/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>

#include "CLI11.hpp"
#include "mathsticks/generator.hpp"
#include "mathsticks/harness.hpp"
#include "mathsticks/io.hpp"
#include "mathsticks/render.hpp"

namespace mathsticks {

namespace fs = std::filesystem;

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string rules;
  std::uint64_t seed = 0;
  int shards = 1;
  std::string out = "out";
  std::string format = "svg";
  std::string regime;
  std::vector<int> levels;
  unsigned threads = 0;
  int scale = 1;
  bool labeled = false;
  bool allow_mismatch = false;
  std::string in;
  std::string manifest;
  std::string answer_key;
  std::string responses;
  std::string state;
  std::string answer;
  std::vector<std::string> states;
};

RuleConfig rules_of(const Options& o, const std::optional<std::string>& recorded = std::nullopt) {
  RuleConfig base;
  if (recorded) {
    const auto r = RuleConfig::parse(*recorded);
    if (!r) throw FormatError("input records unknown rules '" + *recorded + "'");
    base = *r;
  }
  if (o.rules.empty()) return base;
  const auto rc = RuleConfig::parse(o.rules, base);
  if (!rc) throw UsageError("--rules: cannot parse '" + o.rules + "'");
  return *rc;
}

SweepOptions sweep_options(const Options& o) {
  for (int l : o.levels) {
    if (l < 1 || l > 4) throw UsageError("--levels: level " + std::to_string(l) + " is not in 1..4");
  }
  if (o.shards < 1) throw UsageError("--shards must be at least 1");
  SweepOptions s;
  s.levels = o.levels;
  s.shards = split_shards(o.shards);
  s.threads = o.threads;
  return s;
}

Regime regime_of(const std::string& text) {
  const auto r = parse_regime(text);
  if (!r) throw UsageError("--regime must be text or visual");
  return *r;
}

EquationState state_of(const std::string& text) {
  const auto z = parse_state(text);
  if (!z) throw UsageError("cannot parse equation '" + text + "'");
  return *z;
}

fs::path out_dir(const Options& o) {
  fs::path dir(o.out);
  fs::create_directories(dir);
  return dir;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  return f;
}

Json row_json(const StatsRow& r) {
  const auto c = r.cells();
  return Json{{"count", r.count}, {"1-move", c[0]},   {"2-move", c[1]}, {"1/2-move", c[2]},
              {"unique", c[3]},   {"multiple", c[4]}, {"flip", c[5]},   {"no_flip", c[6]}};
}

StatsRow row_diff(const StatsRow& x, const StatsRow& y) {
  return {x.count - y.count,   x.one_move - y.one_move, x.two_move - y.two_move,
          x.one_or_two_move - y.one_or_two_move, x.unique - y.unique, x.multiple - y.multiple,
          x.flip - y.flip,     x.no_flip - y.no_flip};
}

Json comparison(const StatsRow& observed, const StatsRow& expected) {
  return Json{{"observed", row_json(observed)},
              {"expected", row_json(expected)},
              {"diff", row_json(row_diff(observed, expected))},
              {"exact", observed == expected}};
}

Json ablation_json(const AblationReport& rep, bool with_l2) {
  Json j;
  j["exact_match"] = rep.exact_match;
  j["ranked"] = Json::array();
  for (const AblationEntry& e : rep.ranked) {
    Json row;
    row["rules"] = e.rules.fingerprint();
    row["l1"] = comparison(e.l1, reference_row(1));
    row["l1_agreement"] = e.l1_agreement;
    row["l1_distance"] = e.l1_distance;
    if (with_l2 && e.l2) {
      row["l2"] = comparison(*e.l2, reference_row(2));
      row["l2_agreement"] = e.l2_agreement;
      row["l2_distance"] = e.l2_distance;
    }
    j["ranked"].push_back(row);
  }
  return j;
}

Json solution_json(const Solution& s) {
  return Json{{"moves", edit_json(s.witness)}, {"edit", s.witness.str()}, {"final", canonical_string(s.final_state)}};
}

// ---------------------------------------------------------------------------
// Subcommands

int cmd_generate(const Options& o, std::ostream& out) {
  const RuleConfig rc = rules_of(o);
  const SweepOptions so = sweep_options(o);
  const fs::path path = out_dir(o) / "dataset.jsonl";

  Json header = provenance("dataset", rc, std::nullopt);
  header["levels"] = so.levels.empty() ? std::vector<int>{1, 2, 3, 4} : so.levels;
  header["shards"] = o.shards;
  DatasetWriter writer(path, header);
  StatsTable table;
  sweep(so, rc, [&](const InstanceRecord& r) {
    writer.write(r);
    table.add(r.labels);
  });

  // Compare against the reference statistics and say so in the header.
  Json reference;
  for (int l : writer.header()["levels"]) {
    reference["rows"]["L" + std::to_string(l)] =
        comparison(table.levels[static_cast<std::size_t>(l - 1)], reference_row(l));
  }
  if (so.levels.empty()) reference["rows"]["Total"] = comparison(table.total(), reference_total());
  const AblationReport abl = rule_ablation(reference_row(1), reference_row(2), default_rule_space(), o.threads);
  const AblationEntry& best = abl.ranked.front();
  reference["ablation"] = {{"best_rules", best.rules.fingerprint()},
                           {"exact_match", abl.exact_match},
                           {"l1_agreement", best.l1_agreement},
                           {"l1_diff", row_json(row_diff(best.l1, reference_row(1)))},
                           {"l2_agreement", best.l2_agreement},
                           {"l2_diff", row_json(row_diff(*best.l2, reference_row(2)))}};
  writer.header()["reference"] = reference;
  writer.finish();

  out << Json{{"dataset", path.string()}, {"rows", writer.header()["rows"]}, {"rules", rc.fingerprint()}}.dump()
      << '\n';
  return kExitOk;
}

int cmd_stats(const Options& o, std::ostream& out) {
  StatsTable table;
  RuleConfig rc;
  if (!o.in.empty()) {
    const Json h = read_dataset(o.in, [&table](const InstanceRecord& r) { table.add(r.labels); });
    rc = rules_of(o, h.value("rules", RuleConfig{}.fingerprint()));
  } else {
    rc = rules_of(o);
    sweep(sweep_options(o), rc, [&table](const InstanceRecord& r) { table.add(r.labels); });
  }
  const fs::path dir = out_dir(o);
  std::ofstream js = open_out(dir / "stats.json");
  write_stats_json(js, table, rc);
  std::ofstream csv = open_out(dir / "stats.csv");
  write_stats_csv(csv, table);
  write_stats_csv(out, table);
  return kExitOk;
}

int cmd_ablate(const Options& o, std::ostream& out, std::ostream& err) {
  const bool with_l2 = o.levels.empty() || std::find(o.levels.begin(), o.levels.end(), 2) != o.levels.end();
  const std::optional<StatsRow> l2 = with_l2 ? std::optional(reference_row(2)) : std::nullopt;
  const AblationReport rep = rule_ablation(reference_row(1), l2, default_rule_space(), o.threads);

  Json j;
  j["header"] = provenance("ablation", rep.ranked.front().rules, std::nullopt);
  j["target"] = {{"l1", row_json(reference_row(1))}};
  if (l2) j["target"]["l2"] = row_json(*l2);
  j.update(ablation_json(rep, with_l2));
  std::ofstream f = open_out(out_dir(o) / "ablation.json");
  f << j.dump(2) << '\n';
  out << "best " << rep.ranked.front().rules.fingerprint() << " L1 agreement "
      << rep.ranked.front().l1_agreement << "/7\n";
  if (!rep.exact_match && !o.allow_mismatch) {
    rep.require_exact(reference_row(1));
  } else if (!rep.exact_match) {
    err << Json{{"warning", {{"code", "NoMatch"}, {"message", "no rule set reproduces the L1 row exactly"}}}}.dump()
        << '\n';
  }
  return kExitOk;
}

int cmd_sample(const Options& o, std::ostream& out) {
  TestSetManifest m;
  if (!o.in.empty()) {
    std::vector<InstanceRecord> records;
    const Json h = read_dataset(o.in, [&records](const InstanceRecord& r) { records.push_back(r); });
    m = sample_test_set(records, o.seed, rules_of(o, h.value("rules", RuleConfig{}.fingerprint())));
  } else {
    m = sample_from_sweep(sweep_options(o), rules_of(o), o.seed);
  }
  const fs::path dir = out_dir(o);
  write_manifest(dir / "manifest.jsonl", dir / "answer_key.jsonl", m);
  out << Json{{"manifest", (dir / "manifest.jsonl").string()}, {"items", m.items.size()}, {"seed", o.seed}}.dump()
      << '\n';
  return kExitOk;
}

std::string svg_with_provenance(const std::string& svg, const RuleConfig& rc) {
  return "<!-- " + std::string(kToolVersion) + "; rules " + rc.fingerprint() + "; seed none -->\n" + svg;
}

/// Writes `z` as `<stem>.svg` or `<stem>.png` in `dir`; returns the file name.
std::string write_image(const fs::path& dir, const std::string& stem, const EquationState& z, const Options& o,
                        const GeometryManifest& m, const RuleConfig& rc) {
  if (o.format == "png") {
    RenderStyle style;
    style.scale = o.scale;
    const auto bytes = encode_png(rasterize(z, style, m));
    const std::string name = stem + ".png";
    std::ofstream f = open_out(dir / name);
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    return name;
  }
  const std::string name = stem + ".svg";
  std::ofstream f = open_out(dir / name);
  f << svg_with_provenance(o.labeled ? render_labeled(z, m) : render_svg(z, RenderStyle{}, m), rc);
  return name;
}

void write_geometry(const fs::path& dir, const GeometryManifest& m, const RuleConfig& rc) {
  Json j;
  j["header"] = provenance("geometry", rc, std::nullopt);
  j["hash"] = m.hash();
  j["manifest"] = Json::parse(m.to_json());
  std::ofstream f = open_out(dir / "geometry.json");
  f << j.dump(2) << '\n';
}

void check_format(const Options& o) {
  if (o.format != "svg" && o.format != "png") throw UsageError("--format must be svg or png");
  if (o.scale < 1) throw UsageError("--scale must be at least 1");
  if (o.labeled && o.format == "png") throw UsageError("--labeled is only available for svg");
}

int cmd_render(const Options& o, std::ostream& out) {
  check_format(o);
  const RuleConfig rc = rules_of(o);
  std::vector<EquationState> states;
  for (const std::string& s : o.states) states.push_back(state_of(s));
  if (!o.manifest.empty()) {
    for (const ManifestItem& item : read_manifest(o.manifest).items) states.push_back(item.state);
  }
  if (states.empty()) throw UsageError("render needs equations or --manifest");
  const std::string suffix = o.regime.empty() ? (o.labeled ? "_labeled" : "") : "_" + o.regime;
  if (!o.regime.empty()) regime_of(o.regime);

  const GeometryManifest m = GeometryManifest::standard();
  const fs::path dir = out_dir(o);
  write_geometry(dir, m, rc);
  for (const EquationState& z : states) {
    out << (dir / write_image(dir, canonical_string(z) + suffix, z, o, m, rc)).string() << '\n';
  }
  return kExitOk;
}

int cmd_solve(const Options& o, std::ostream& out) {
  const RuleConfig rc = rules_of(o);
  const EquationState z = state_of(o.state);
  Json j;
  j["header"] = provenance("solve", rc, std::nullopt);
  j["id"] = canonical_string(z);
  j["state"] = state_json(z);
  j["level"] = level_of(z).value;
  j["valid"] = is_valid_arithmetic(z);
  const auto rec = mine_instance(z, rc);
  j["solvable"] = rec.has_value();
  j["solutions"] = Json::array();
  if (rec) {
    j["move"] = to_string(rec->labels.move);
    j["multiplicity"] = to_string(rec->labels.multiplicity);
    j["flip"] = rec->labels.flip;
    for (const auto* set : {&rec->s1, &rec->s2star}) {
      for (const Solution& s : *set) j["solutions"].push_back(solution_json(s));
    }
  }
  out << j.dump(2) << '\n';
  return kExitOk;
}

int cmd_grade(const Options& o, std::ostream& out) {
  if (!o.state.empty()) {
    const RuleConfig rc = rules_of(o);
    const EquationState z = state_of(o.state);
    Json j = grade(z, parse_answer(o.answer), rc).to_json();
    j["id"] = canonical_string(z);
    out << Json{{"header", provenance("verdict", rc, std::nullopt)}}.dump() << '\n' << j.dump() << '\n';
    return kExitOk;
  }
  if (o.manifest.empty() || o.responses.empty()) {
    throw UsageError("grade needs --state/--answer or --manifest/--responses");
  }
  const TestSetManifest m = read_manifest(o.manifest);
  const RuleConfig rc = rules_of(o, m.rule_fingerprint);
  std::unordered_map<std::string, const ManifestItem*> index;
  for (const ManifestItem& item : m.items) index[item.id] = &item;

  std::ofstream f = open_out(out_dir(o) / "verdicts.jsonl");
  f << Json{{"header", provenance("verdicts", rc, m.seed)}}.dump() << '\n';
  for (const Response& r : read_responses(o.responses)) {
    const auto it = index.find(r.id);
    if (it == index.end()) throw HarnessError(HarnessError::Code::kUnknownId, "unknown id '" + r.id + "'");
    Json j;
    j["id"] = r.id;
    j["regime"] = to_string(r.regime);
    j["model"] = r.model;
    j.update(grade(it->second->state, parse_answer(r.raw), rc).to_json());
    f << j.dump() << '\n';
  }
  out << (out_dir(o) / "verdicts.jsonl").string() << '\n';
  return kExitOk;
}

int cmd_score(const Options& o, std::ostream& out) {
  if (o.manifest.empty() || o.responses.empty()) throw UsageError("score needs --manifest and --responses");
  const TestSetManifest m = read_manifest(o.manifest);
  const RuleConfig rc = rules_of(o, m.rule_fingerprint);
  const std::vector<Response> responses = read_responses(o.responses);

  std::set<Regime> regimes;
  if (!o.regime.empty()) {
    regimes.insert(regime_of(o.regime));
  } else {
    for (const Response& r : responses) regimes.insert(r.regime);
    if (regimes.empty()) regimes.insert(Regime::kText);
  }
  const fs::path dir = out_dir(o);
  for (Regime g : regimes) {
    const ScoreReport rep = score_run(responses, m, g, rc);
    Json j = rep.to_json(rc);
    j["header"]["seed"] = m.seed;
    const std::string stem = "report_" + std::string(to_string(g));
    std::ofstream js = open_out(dir / (stem + ".json"));
    js << j.dump(2) << '\n';
    std::ofstream csv = open_out(dir / (stem + ".csv"));
    rep.write_csv(csv);
    out << to_string(g) << ": overall " << rep.overall.accuracy() << " (L1 " << rep.levels[0].accuracy() << ", L2 "
        << rep.levels[1].accuracy() << ", L3 " << rep.levels[2].accuracy() << ", L4 " << rep.levels[3].accuracy()
        << "), missing " << rep.missing << '\n';
  }
  return kExitOk;
}

int cmd_prompts(const Options& o, std::ostream& out) {
  check_format(o);
  if (o.manifest.empty()) throw UsageError("prompts needs --manifest");
  if (o.regime.empty()) throw UsageError("prompts needs --regime");
  const Regime regime = regime_of(o.regime);
  const TestSetManifest m = read_manifest(o.manifest);
  const RuleConfig rc = rules_of(o, m.rule_fingerprint);

  const fs::path dir = out_dir(o);
  const fs::path images = dir / "images";
  fs::create_directories(images);
  const GeometryManifest geo = GeometryManifest::standard();
  write_geometry(images, geo, rc);

  const fs::path path = dir / ("prompts_" + std::string(to_string(regime)) + ".jsonl");
  std::ofstream f = open_out(path);
  Json h = provenance("prompts", rc, m.seed);
  h["regime"] = to_string(regime);
  h["template"] = kPromptTemplateVersion;
  h["items"] = m.items.size();
  f << Json{{"header", h}}.dump() << '\n';
  for (const ManifestItem& item : m.items) {
    const std::string name =
        write_image(images, item.id + "_" + std::string(to_string(regime)), item.state, o, geo, rc);
    f << build_prompt(item, regime, "images/" + name).to_json().dump() << '\n';
  }
  out << path.string() << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------

std::string error_code(const std::exception& e) {
  if (const auto* g = dynamic_cast<const GeneratorError*>(&e)) {
    switch (g->code()) {
      case GeneratorError::Code::kShardOverlap: return "ShardOverlap";
      case GeneratorError::Code::kInsufficientLevel: return "InsufficientLevel";
      case GeneratorError::Code::kNoMatch: return "NoMatch";
      case GeneratorError::Code::kBadInput: return "BadInput";
    }
  }
  if (const auto* r = dynamic_cast<const RenderError*>(&e)) {
    switch (r->code()) {
      case RenderError::Code::kManifestMismatch: return "ManifestMismatch";
      case RenderError::Code::kAmbiguousSlot: return "AmbiguousSlot";
      case RenderError::Code::kMalformedImage: return "MalformedImage";
      case RenderError::Code::kIo: return "Io";
    }
  }
  if (const auto* h = dynamic_cast<const HarnessError*>(&e)) {
    switch (h->code()) {
      case HarnessError::Code::kMissingImage: return "MissingImage";
      case HarnessError::Code::kUnknownId: return "UnknownId";
      case HarnessError::Code::kDuplicateResponse: return "DuplicateResponse";
      case HarnessError::Code::kBadResponse: return "BadResponse";
    }
  }
  if (dynamic_cast<const FormatError*>(&e)) return "BadInput";
  if (dynamic_cast<const fs::filesystem_error*>(&e)) return "Io";
  return "Error";
}

void error_record(std::ostream& err, const std::string& code, const std::string& message, int status) {
  err << Json{{"error", {{"code", code}, {"message", message}, {"status", status}}}}.dump() << '\n';
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Matchstick equation puzzles: generate, render, solve and grade.", "mathsticks"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);
  Options o;

  auto rules = [&o](CLI::App* c) {
    c->add_option("--rules", o.rules, "Rule toggles, e.g. blank=off,leading-zero=on,flip=any");
  };
  auto outdir = [&o](CLI::App* c) { c->add_option("--out", o.out, "Output directory")->capture_default_str(); };
  auto sweeping = [&o](CLI::App* c) {
    c->add_option("--levels", o.levels, "Levels to keep, e.g. 1,2")->delimiter(',');
    c->add_option("--shards", o.shards, "Number of sweep shards")->capture_default_str();
    c->add_option("--threads", o.threads, "Worker threads (0 = all cores)");
  };
  auto imaging = [&o](CLI::App* c) {
    c->add_option("--format", o.format, "svg or png")->capture_default_str();
    c->add_option("--scale", o.scale, "PNG scale factor")->capture_default_str();
  };

  CLI::App* generate = app.add_subcommand("generate", "Sweep the state space and write dataset.jsonl");
  rules(generate);
  outdir(generate);
  sweeping(generate);

  CLI::App* stats = app.add_subcommand("stats", "Dataset statistics as stats.json and stats.csv");
  rules(stats);
  outdir(stats);
  sweeping(stats);
  stats->add_option("--in", o.in, "Dataset JSONL (default: sweep now)");

  CLI::App* ablate = app.add_subcommand("ablate", "Rank rule sets against the reference statistics");
  outdir(ablate);
  ablate->add_option("--levels", o.levels, "Reference rows to check: 1, or 1,2 (default)")->delimiter(',');
  ablate->add_option("--threads", o.threads, "Worker threads (0 = all cores)");
  ablate->add_flag("--allow-mismatch", o.allow_mismatch, "Exit 0 even when no rule set matches exactly");

  CLI::App* sample = app.add_subcommand("sample", "Draw the stratified test set");
  rules(sample);
  outdir(sample);
  sweeping(sample);
  sample->add_option("--seed", o.seed, "Sampling seed")->capture_default_str();
  sample->add_option("--in", o.in, "Dataset JSONL (default: sweep now)");

  CLI::App* render = app.add_subcommand("render", "Render equations to images");
  rules(render);
  outdir(render);
  imaging(render);
  render->add_option("equations", o.states, "Equations such as 6+4=4");
  render->add_option("--manifest", o.manifest, "Render every manifest item");
  render->add_option("--regime", o.regime, "Regime suffix for file names (text or visual)");
  render->add_flag("--labeled", o.labeled, "Label all 43 stick positions");

  CLI::App* solve = app.add_subcommand("solve", "List the one- and two-stick corrections of an equation");
  rules(solve);
  solve->add_option("equation", o.state, "Equation such as 6+4=4")->required();

  CLI::App* grade_cmd = app.add_subcommand("grade", "Grade answers");
  rules(grade_cmd);
  outdir(grade_cmd);
  grade_cmd->add_option("--state", o.state, "Equation to grade against");
  grade_cmd->add_option("--answer", o.answer, "Raw answer text");
  grade_cmd->add_option("--manifest", o.manifest, "Manifest JSONL");
  grade_cmd->add_option("--responses", o.responses, "Response JSONL");

  CLI::App* score = app.add_subcommand("score", "Accuracy report for a response file");
  rules(score);
  outdir(score);
  score->add_option("--manifest", o.manifest, "Manifest JSONL")->required();
  score->add_option("--responses", o.responses, "Response JSONL")->required();
  score->add_option("--regime", o.regime, "text or visual (default: every regime present)");

  CLI::App* prompts = app.add_subcommand("prompts", "Prompt JSONL and images for one regime");
  rules(prompts);
  outdir(prompts);
  imaging(prompts);
  prompts->add_option("--manifest", o.manifest, "Manifest JSONL")->required();
  prompts->add_option("--regime", o.regime, "text or visual")->required();
  prompts->add_option("--seed", o.seed, "Accepted for symmetry; prompts are deterministic");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    error_record(err, "Usage", e.what(), kExitUsage);
    return kExitUsage;
  }

  try {
    if (generate->parsed()) return cmd_generate(o, out);
    if (stats->parsed()) return cmd_stats(o, out);
    if (ablate->parsed()) return cmd_ablate(o, out, err);
    if (sample->parsed()) return cmd_sample(o, out);
    if (render->parsed()) return cmd_render(o, out);
    if (solve->parsed()) return cmd_solve(o, out);
    if (grade_cmd->parsed()) return cmd_grade(o, out);
    if (score->parsed()) return cmd_score(o, out);
    if (prompts->parsed()) return cmd_prompts(o, out);
  } catch (const UsageError& e) {
    error_record(err, "Usage", e.what(), kExitUsage);
    return kExitUsage;
  } catch (const std::exception& e) {
    error_record(err, error_code(e), e.what(), kExitFailure);
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace mathsticks
