// Copyright 2026 The irasep Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef IRASEP_MANIFEST_H_
#define IRASEP_MANIFEST_H_

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace irasep {

// One corpus item. Paths are stored as written; relative paths are resolved
// against the directory holding the manifest (see ResolveManifestPath).
struct ExampleRecord {
  std::string mixture_path;
  std::string target_path;
  std::string reference_path;
  std::string target_speaker_id;
  std::vector<std::string> interference_speaker_ids;
  double mix_snr_db = 0.0;
  std::optional<double> noise_snr_db;

  bool operator==(const ExampleRecord&) const = default;
};

// Throws irasep::Error("invalid_record") if reference_path == target_path or
// the target speaker is listed among the interferers.
void ValidateRecord(const ExampleRecord& record);

// JSON-lines: one object per line, keys exactly the ExampleRecord field
// names; noise_snr_db is null when absent.
void WriteManifest(const std::vector<ExampleRecord>& records,
                   const std::filesystem::path& path);
std::vector<ExampleRecord> ReadManifest(const std::filesystem::path& path);

std::string RecordToJsonLine(const ExampleRecord& record);
ExampleRecord RecordFromJsonLine(const std::string& line);

std::filesystem::path ResolveManifestPath(
    const std::filesystem::path& manifest_path, const std::string& entry);

}  // namespace irasep

#endif  // IRASEP_MANIFEST_H_
