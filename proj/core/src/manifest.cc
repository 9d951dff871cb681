// Copyright 2026 The irasep Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "irasep/manifest.h"

#include <algorithm>
#include <fstream>

#include <nlohmann/json.hpp>

#include "irasep/error.h"

namespace irasep {
namespace {

const char* const kKeys[] = {"mixture_path",      "target_path",
                             "reference_path",    "target_speaker_id",
                             "interference_speaker_ids", "mix_snr_db",
                             "noise_snr_db"};

}  // namespace

void ValidateRecord(const ExampleRecord& record) {
  if (record.reference_path == record.target_path) {
    throw Error("invalid_record",
                "reference_path equals target_path: " + record.target_path);
  }
  const auto& ids = record.interference_speaker_ids;
  if (std::find(ids.begin(), ids.end(), record.target_speaker_id) != ids.end()) {
    throw Error("invalid_record", "target speaker " + record.target_speaker_id +
                                      " is listed as an interferer");
  }
}

std::string RecordToJsonLine(const ExampleRecord& record) {
  nlohmann::ordered_json j;
  j["mixture_path"] = record.mixture_path;
  j["target_path"] = record.target_path;
  j["reference_path"] = record.reference_path;
  j["target_speaker_id"] = record.target_speaker_id;
  j["interference_speaker_ids"] = record.interference_speaker_ids;
  j["mix_snr_db"] = record.mix_snr_db;
  if (record.noise_snr_db) {
    j["noise_snr_db"] = *record.noise_snr_db;
  } else {
    j["noise_snr_db"] = nullptr;
  }
  return j.dump();
}

ExampleRecord RecordFromJsonLine(const std::string& line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw Error("format", std::string("malformed manifest line: ") + e.what());
  }
  if (!j.is_object()) throw Error("format", "manifest line is not an object");
  for (const auto& item : j.items()) {
    if (std::find(std::begin(kKeys), std::end(kKeys), item.key()) == std::end(kKeys)) {
      throw Error("format", "unknown manifest key: " + item.key());
    }
  }
  ExampleRecord r;
  try {
    r.mixture_path = j.at("mixture_path").get<std::string>();
    r.target_path = j.at("target_path").get<std::string>();
    r.reference_path = j.at("reference_path").get<std::string>();
    r.target_speaker_id = j.at("target_speaker_id").get<std::string>();
    r.interference_speaker_ids =
        j.at("interference_speaker_ids").get<std::vector<std::string>>();
    r.mix_snr_db = j.at("mix_snr_db").get<double>();
    if (j.contains("noise_snr_db") && !j["noise_snr_db"].is_null()) {
      r.noise_snr_db = j["noise_snr_db"].get<double>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error("format", std::string("malformed manifest record: ") + e.what());
  }
  ValidateRecord(r);
  return r;
}

void WriteManifest(const std::vector<ExampleRecord>& records,
                   const std::filesystem::path& path) {
  for (const auto& r : records) ValidateRecord(r);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("io", "cannot write manifest " + path.string());
  for (const auto& r : records) out << RecordToJsonLine(r) << '\n';
  if (!out) throw Error("io", "short write to " + path.string());
}

std::vector<ExampleRecord> ReadManifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("io", "cannot open manifest " + path.string());
  std::vector<ExampleRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      records.push_back(RecordFromJsonLine(line));
    } catch (const Error& e) {
      throw Error(e.code(), path.string() + ":" + std::to_string(line_no) +
                                ": " + e.what());
    }
  }
  return records;
}

std::filesystem::path ResolveManifestPath(
    const std::filesystem::path& manifest_path, const std::string& entry) {
  std::filesystem::path p(entry);
  if (p.is_absolute()) return p;
  return manifest_path.parent_path() / p;
}

}  // namespace irasep
