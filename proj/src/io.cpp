#include "mathsticks/io.hpp"

#include <fstream>
#include <unordered_map>

namespace mathsticks {

namespace fs = std::filesystem;

Json provenance(std::string_view kind, const RuleConfig& rc, std::optional<std::uint64_t> seed) {
  Json h;
  h["tool"] = kToolVersion;
  h["kind"] = kind;
  h["rules"] = rc.fingerprint();
  h["seed"] = seed ? Json(*seed) : Json(nullptr);
  return h;
}

Json state_json(const EquationState& z) {
  return Json::array({z.a, z.b, std::string(1, op_char(z.g)), z.c, z.d, z.e, z.f});
}

EquationState state_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 7 || !j[2].is_string()) throw FormatError("state must be [a,b,op,c,d,e,f]");
  EquationState z;
  auto digit = [&j](std::size_t i) {
    if (!j[i].is_number_integer()) throw FormatError("state digit must be an integer");
    return static_cast<Glyph>(j[i].get<int>());
  };
  z.a = digit(0);
  z.b = digit(1);
  const std::string op = j[2];
  if (op != "+" && op != "-") throw FormatError("operator must be \"+\" or \"-\"");
  z.g = op == "+" ? Op::kPlus : Op::kMinus;
  z.c = digit(3);
  z.d = digit(4);
  z.e = digit(5);
  z.f = digit(6);
  if (!z.well_formed()) throw FormatError("state out of range");
  return z;
}

Json edit_json(const Edit& e) {
  Json moves = Json::array();
  for (const Relocation& r : e.moves()) moves.push_back({{"from", r.from.str()}, {"to", r.to.str()}});
  return moves;
}

Edit edit_from_json(const Json& j) {
  if (!j.is_array() || j.empty() || j.size() > 2) throw FormatError("moves must hold one or two relocations");
  std::vector<Relocation> moves;
  for (const Json& m : j) {
    const auto from = StickPosition::parse(m.at("from").get<std::string>());
    const auto to = StickPosition::parse(m.at("to").get<std::string>());
    if (!from || !to) throw FormatError("bad stick position in moves");
    moves.push_back({*from, *to});
  }
  return Edit(std::span<const Relocation>(moves));
}

Json record_json(const InstanceRecord& r) {
  Json j;
  j["id"] = r.id();
  j["state"] = state_json(r.state);
  j["level"] = r.labels.level.value;
  j["move"] = to_string(r.labels.move);
  j["multiplicity"] = to_string(r.labels.multiplicity);
  j["flip"] = r.labels.flip;
  Json sols = Json::array();
  for (const auto* set : {&r.s1, &r.s2star}) {
    for (const Solution& s : *set) {
      sols.push_back({{"moves", edit_json(s.witness)}, {"final", canonical_string(s.final_state)}});
    }
  }
  j["solutions"] = std::move(sols);
  return j;
}

namespace {

MoveComplexity move_from(const std::string& s) {
  if (s == "1") return MoveComplexity::kOne;
  if (s == "2") return MoveComplexity::kTwo;
  if (s == "1or2") return MoveComplexity::kOneOrTwo;
  throw FormatError("unknown move label '" + s + "'");
}

Multiplicity multiplicity_from(const std::string& s) {
  if (s == "unique") return Multiplicity::kUnique;
  if (s == "multiple") return Multiplicity::kMultiple;
  throw FormatError("unknown multiplicity '" + s + "'");
}

Labels labels_from(const Json& j) {
  Labels l;
  l.level = Level{j.at("level").get<int>()};
  l.move = move_from(j.at("move").get<std::string>());
  l.multiplicity = multiplicity_from(j.at("multiplicity").get<std::string>());
  l.flip = j.at("flip").get<bool>();
  return l;
}

std::vector<Solution> solutions_from(const Json& j) {
  std::vector<Solution> out;
  for (const Json& s : j) {
    const auto final_state = parse_state(s.at("final").get<std::string>());
    if (!final_state) throw FormatError("bad final state in solutions");
    out.push_back({*final_state, edit_from_json(s.at("moves"))});
  }
  return out;
}

template <typename F>
auto guarded(F&& f) {
  try {
    return f();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(e.what());
  }
}

}  // namespace

InstanceRecord record_from_json(const Json& j) {
  return guarded([&j] {
    InstanceRecord r;
    r.state = state_from_json(j.at("state"));
    r.labels = labels_from(j);
    for (Solution& s : solutions_from(j.at("solutions"))) {
      (s.witness.size() == 1 ? r.s1 : r.s2star).push_back(std::move(s));
    }
    return r;
  });
}

DatasetWriter::DatasetWriter(fs::path path, Json header)
    : path_(std::move(path)), staging_(path_.string() + ".tmp"), header_(std::move(header)) {
  body_ = std::make_unique<std::ofstream>(staging_, std::ios::binary | std::ios::trunc);
  if (!*body_) throw std::runtime_error("cannot write " + staging_.string());
}

DatasetWriter::~DatasetWriter() {
  if (!finished_) {
    body_.reset();
    std::error_code ec;
    fs::remove(staging_, ec);
  }
}

void DatasetWriter::write(const InstanceRecord& r) {
  *body_ << record_json(r).dump() << '\n';
  ++rows_;
  ++level_counts_[static_cast<std::size_t>(r.labels.level.value - 1)];
}

void DatasetWriter::finish() {
  body_->close();
  if (!*body_) throw std::runtime_error("write failed: " + staging_.string());
  header_["rows"] = rows_;
  header_["level_counts"] = level_counts_;
  {
    std::ofstream out(path_, std::ios::binary | std::ios::trunc);
    std::ifstream in(staging_, std::ios::binary);
    out << Json{{"header", header_}}.dump() << '\n';
    if (rows_ > 0) out << in.rdbuf();
    if (!out) throw std::runtime_error("write failed: " + path_.string());
  }
  fs::remove(staging_);
  finished_ = true;
}

Json read_jsonl(std::istream& in, const std::function<void(const Json&, std::size_t)>& row) {
  std::string line;
  std::size_t n = 0;
  std::optional<Json> header;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("line " + std::to_string(n) + ": " + e.what());
    }
    if (!header) {
      if (!j.is_object() || !j.contains("header")) throw FormatError("line 1: missing header record");
      header = j["header"];
      continue;
    }
    try {
      row(j, n);
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("line " + std::to_string(n) + ": " + e.what());
    } catch (const FormatError& e) {
      throw FormatError("line " + std::to_string(n) + ": " + e.what());
    }
  }
  if (!header) throw FormatError("empty file: missing header record");
  return *header;
}

namespace {

std::ifstream open_input(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  return in;
}

std::ofstream open_output(const fs::path& p) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  return out;
}

}  // namespace

Json read_dataset(const fs::path& path, const std::function<void(const InstanceRecord&)>& sink) {
  std::ifstream in = open_input(path);
  return read_jsonl(in, [&sink](const Json& j, std::size_t) { sink(record_from_json(j)); });
}

void write_manifest(const fs::path& manifest, const fs::path& answer_key, const TestSetManifest& m) {
  const auto rc = RuleConfig::parse(m.rule_fingerprint);
  if (!rc) throw FormatError("bad rule fingerprint '" + m.rule_fingerprint + "'");

  std::ofstream out = open_output(manifest);
  Json h = provenance("manifest", *rc, m.seed);
  h["items"] = m.items.size();
  h["solutions_withheld"] = true;
  out << Json{{"header", h}}.dump() << '\n';
  for (const ManifestItem& item : m.items) {
    Json j;
    j["id"] = item.id;
    j["state"] = state_json(item.state);
    j["level"] = item.labels.level.value;
    j["move"] = to_string(item.labels.move);
    j["multiplicity"] = to_string(item.labels.multiplicity);
    j["flip"] = item.labels.flip;
    out << j.dump() << '\n';
  }

  std::ofstream key = open_output(answer_key);
  Json kh = provenance("answer-key", *rc, m.seed);
  kh["items"] = m.items.size();
  key << Json{{"header", kh}}.dump() << '\n';
  for (const ManifestItem& item : m.items) {
    Json sols = Json::array();
    for (const Solution& s : item.solutions) {
      sols.push_back({{"moves", edit_json(s.witness)}, {"final", canonical_string(s.final_state)}});
    }
    key << Json{{"id", item.id}, {"solutions", sols}}.dump() << '\n';
  }
  if (!out || !key) throw std::runtime_error("manifest write failed");
}

TestSetManifest read_manifest(const fs::path& manifest, const std::optional<fs::path>& answer_key) {
  TestSetManifest m;
  std::ifstream in = open_input(manifest);
  const Json h = read_jsonl(in, [&m](const Json& j, std::size_t) {
    ManifestItem item;
    item.id = j.at("id").get<std::string>();
    item.state = state_from_json(j.at("state"));
    item.labels = labels_from(j);
    if (item.id != canonical_string(item.state)) throw FormatError("id does not match state");
    m.items.push_back(std::move(item));
  });
  guarded([&] {
    m.seed = h.at("seed").is_null() ? 0 : h.at("seed").get<std::uint64_t>();
    m.rule_fingerprint = h.at("rules").get<std::string>();
    return 0;
  });

  if (answer_key) {
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < m.items.size(); ++i) index[m.items[i].id] = i;
    std::ifstream key = open_input(*answer_key);
    read_jsonl(key, [&](const Json& j, std::size_t) {
      const auto it = index.find(j.at("id").get<std::string>());
      if (it == index.end()) throw FormatError("answer key id not in manifest");
      m.items[it->second].solutions = solutions_from(j.at("solutions"));
    });
  }
  return m;
}

}  // namespace mathsticks
