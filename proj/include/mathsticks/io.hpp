#ifndef MATHSTICKS_IO_HPP
#define MATHSTICKS_IO_HPP

// JSONL wire formats. Every file starts with one {"header": {...}} line that
// carries provenance (tool version, rule fingerprint, seed); records follow,
// one JSON object per line. Blank tens digits are written as -1.

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "mathsticks/generator.hpp"

namespace mathsticks {

using Json = nlohmann::ordered_json;

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// {"tool": ..., "kind": ..., "rules": ..., "seed": ...}; seed is null when
/// the output involves no randomness.
Json provenance(std::string_view kind, const RuleConfig& rc, std::optional<std::uint64_t> seed);

Json state_json(const EquationState& z);
EquationState state_from_json(const Json& j);

Json edit_json(const Edit& e);
Edit edit_from_json(const Json& j);

Json record_json(const InstanceRecord& r);
InstanceRecord record_from_json(const Json& j);

/// Writes a dataset file: header first, then records in the order given.
/// Records are staged in `<path>.tmp` so the header can carry the row count.
class DatasetWriter {
 public:
  DatasetWriter(std::filesystem::path path, Json header);
  ~DatasetWriter();
  DatasetWriter(const DatasetWriter&) = delete;
  DatasetWriter& operator=(const DatasetWriter&) = delete;

  void write(const InstanceRecord& r);
  /// Header fields may be added until finish().
  Json& header() { return header_; }
  /// Fills header["rows"] and ["level_counts"] and publishes the file.
  void finish();

 private:
  std::filesystem::path path_;
  std::filesystem::path staging_;
  Json header_;
  std::unique_ptr<std::ofstream> body_;
  std::int64_t rows_ = 0;
  std::array<std::int64_t, 4> level_counts_{};
  bool finished_ = false;
};

/// Streams a dataset file. Returns the header.
Json read_dataset(const std::filesystem::path& path, const std::function<void(const InstanceRecord&)>& sink);

/// Manifest (solutions stripped) and answer key sidecar.
void write_manifest(const std::filesystem::path& manifest, const std::filesystem::path& answer_key,
                    const TestSetManifest& m);
/// Reads a manifest, attaching solutions from `answer_key` when given.
TestSetManifest read_manifest(const std::filesystem::path& manifest,
                              const std::optional<std::filesystem::path>& answer_key = std::nullopt);

/// Splits a JSONL stream into its header and body lines. Blank lines are
/// skipped; a missing header raises FormatError.
Json read_jsonl(std::istream& in, const std::function<void(const Json&, std::size_t line)>& row);

}  // namespace mathsticks

#endif  // MATHSTICKS_IO_HPP
