#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "evidx/types.hpp"

namespace evidx::io {

// Raw little-endian array with a one-line JSON header {"shape":[d,h,w],"dtype":...}.
void write_volume(const std::filesystem::path& path, const VolumeGrid& v);
VolumeGrid read_volume(const std::filesystem::path& path);
void write_parcellation(const std::filesystem::path& path, const ParcellationMap& p);
ParcellationMap read_parcellation(const std::filesystem::path& path);

void write_atlas(const std::filesystem::path& path, const AtlasConfig& atlas);
AtlasConfig read_atlas(const std::filesystem::path& path);

// Case manifest: one JSON record per line. Array payloads live in side files
// referenced by relative path.
void write_dataset(const std::filesystem::path& dir, const std::vector<Case>& cases,
                   const AtlasConfig& atlas);
std::vector<Case> read_dataset(const std::filesystem::path& dir);
AtlasConfig read_dataset_atlas(const std::filesystem::path& dir);

void write_labels(const std::filesystem::path& path, const LabelMap& labels);
LabelMap read_labels(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace evidx::io
