#pragma once

// Dataset manifests: a JSON file naming the data files of each split.
// Paths are relative to the manifest's directory.
//
//   {"format": "idx", "class_names": [...],
//    "train": {"images": "...", "labels": "...", "limit": 10000},
//    "test":  {"images": "...", "labels": "...", "limit": 2000}}
//
//   {"format": "csv", "train": {"path": "..."}, "test": {"path": "..."}}
//
//   {"format": "ppm", "class_names": [...], "hue_band": [340, 20],
//    "frames": [{"path": "...", "label": 0, "split": "train", "stream": 3}, ...]}

#include <filesystem>
#include <fstream>
#include <string>

#include "json.hpp"

#include "hmlelm/data_io.hpp"

namespace hml {

inline nlohmann::json read_json_file(const std::filesystem::path& path, const std::string& what) {
  require(std::filesystem::exists(path), ErrorKind::kIo, what + " not found: " + path.string());
  std::ifstream in(path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kDataFormat, what + ": " + e.what());
  }
}

inline LabeledDataset load_manifest(const std::filesystem::path& manifest_path, const std::string& split) {
  const auto j = read_json_file(manifest_path, "manifest");
  const auto dir = manifest_path.parent_path();
  LabeledDataset ds;
  try {
    const auto format = j.at("format").get<std::string>();
    if (format == "idx" || format == "csv") {
      require(j.contains(split), ErrorKind::kDataFormat, "manifest: no split named " + split);
      const auto& s = j.at(split);
      const auto limit = s.value("limit", std::size_t{0});
      ds = format == "idx" ? load_idx(dir / s.at("images").get<std::string>(), dir / s.at("labels").get<std::string>(), limit)
                           : load_csv(dir / s.at("path").get<std::string>(), limit);
    } else if (format == "ppm") {
      HueBand band = kRedBand;
      if (j.contains("hue_band")) band = {j.at("hue_band").at(0).get<double>(), j.at("hue_band").at(1).get<double>()};
      std::vector<RowVector> rows;
      for (const auto& f : j.at("frames")) {
        if (f.value("split", std::string("train")) != split) continue;
        rows.push_back(frame_features(read_pnm(dir / f.at("path").get<std::string>()), band));
        ds.labels.push_back(f.at("label").get<int>());
        ds.streams.push_back(f.value("stream", -1));
      }
      require(!rows.empty(), ErrorKind::kDataFormat, "manifest: no frames in split " + split);
      ds.X.resize(static_cast<Eigen::Index>(rows.size()), rows.front().size());
      for (std::size_t p = 0; p < rows.size(); ++p) ds.X.row(static_cast<Eigen::Index>(p)) = rows[p];
    } else {
      throw Error(ErrorKind::kDataFormat, "manifest: unknown format " + format);
    }
    if (j.contains("class_names")) ds.class_names = j.at("class_names").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kDataFormat, std::string("manifest: ") + e.what());
  }
  const int n = ds.n_classes();
  for (int l : ds.labels) require(l >= 0, ErrorKind::kDataFormat, "manifest: negative label");
  while (static_cast<int>(ds.class_names.size()) < n) ds.class_names.push_back(std::to_string(ds.class_names.size()));
  return ds;
}

}  // namespace hml
