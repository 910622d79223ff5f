/**
 * Copyright 2026 The dfscil Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef DFSCIL_DATA_HPP
#define DFSCIL_DATA_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dfscil/classifier.hpp"
#include "dfscil/numerics.hpp"

namespace dfscil {

enum class Role { train, test };

std::string to_string(Role role);

/// Labelled rows of one split of one session.
struct SessionDataset {
  Matrix features;
  std::vector<Label> labels;
  Role role = Role::train;

  std::size_t size() const { return labels.size(); }
  /// Distinct labels in ascending order.
  std::vector<Label> classes() const;
  /// Rows equal labels, labels non-negative. Throws ValidationError.
  void validate() const;

  friend bool operator==(const SessionDataset& a, const SessionDataset& b) {
    return a.role == b.role && a.labels == b.labels && a.features.rows() == b.features.rows() &&
           a.features.cols() == b.features.cols() && a.features == b.features;
  }
};

struct SessionSplit {
  SessionDataset train;
  SessionDataset test;

  friend bool operator==(const SessionSplit&, const SessionSplit&) = default;
};

/// Session 0 (base) followed by the novel sessions, in training order.
struct SessionStream {
  std::vector<SessionSplit> sessions;
  std::size_t way = 0;   // C
  std::size_t shot = 0;  // K

  const SessionSplit& base() const;
  std::size_t novel_count() const { return sessions.empty() ? 0 : sessions.size() - 1; }
  std::size_t input_dim() const;
  /// Every train label of every session, ascending.
  std::vector<Label> all_labels() const;

  /// Disjoint session label sets, C-way K-shot novel train splits, test
  /// labels inside their session's classes, consistent input dimension.
  /// Throws ValidationError naming the offending session.
  void validate() const;

  friend bool operator==(const SessionStream&, const SessionStream&) = default;
};

struct SyntheticBenchmarkSpec {
  std::size_t input_dim = 32;
  std::size_t base_classes = 20;
  std::size_t novel_classes = 0;  // 0 means sessions * way
  std::size_t sessions = 4;
  std::size_t way = 5;
  std::size_t shot = 5;
  double sigma = 1.0;
  double separation = 6.0;  // required min center distance, in units of sigma
  std::size_t base_train_per_class = 50;
  std::size_t test_per_class = 30;
  std::uint64_t seed = 7;

  void validate() const;
};

struct SyntheticBenchmark {
  SessionStream stream;
  Matrix centers;           // one row per class label
  double separation_ratio;  // achieved min center distance / sigma (inf when sigma == 0)
  std::vector<std::string> warnings;
};

/// Isotropic Gaussian clusters. Base classes are labels 0..B-1; novel classes
/// follow and are dealt into `sessions` sessions of `way` classes each.
SyntheticBenchmark generate_synthetic(const SyntheticBenchmarkSpec& spec);

enum class FeatureFormat { csv, binary };

FeatureFormat parse_feature_format(const std::string& name);
std::string to_string(FeatureFormat format);

/// CSV with header `label,f0,f1,...`; values printed with 17 significant digits.
void write_feature_csv(const SessionDataset& data, const std::filesystem::path& path);
SessionDataset read_feature_csv(const std::filesystem::path& path, Role role);

/// 16-byte header (8-byte magic "DFSCILF1", uint32 rows, uint32 cols), then
/// per row an int64 label and `cols` float64 values, all little-endian.
void write_feature_binary(const SessionDataset& data, const std::filesystem::path& path);
SessionDataset read_feature_binary(const std::filesystem::path& path, Role role);

inline constexpr const char* kManifestName = "manifest.json";

/// Writes per-session feature files and a manifest into `dir`. Refuses to
/// replace an existing manifest unless `force` is set. Returns the manifest path.
std::filesystem::path save_stream(const SessionStream& stream, const std::filesystem::path& dir,
                                  FeatureFormat format = FeatureFormat::csv, bool force = false);

/// Reads and validates a stream. Paths in the manifest are relative to it.
SessionStream load_stream(const std::filesystem::path& manifest);

/// Row concatenation of several splits.
SessionDataset concat(const std::vector<const SessionDataset*>& parts);

}  // namespace dfscil

#endif  // DFSCIL_DATA_HPP
