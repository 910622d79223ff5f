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

#include "dfscil/data.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dfscil/errors.hpp"

namespace dfscil {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'D', 'F', 'S', 'C', 'I', 'L', 'F', '1'};
constexpr const char* kManifestFormat = "dfscil-stream";
constexpr int kManifestVersion = 1;

std::string session_name(std::size_t t) { return "session " + std::to_string(t); }

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_u64(const unsigned char* p, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string to_string(Role role) { return role == Role::train ? "train" : "test"; }

std::vector<Label> SessionDataset::classes() const {
  std::set<Label> s(labels.begin(), labels.end());
  return {s.begin(), s.end()};
}

void SessionDataset::validate() const {
  if (static_cast<Eigen::Index>(labels.size()) != features.rows()) {
    throw ValidationError(to_string(role) + " split: " + std::to_string(features.rows()) +
                          " feature rows but " + std::to_string(labels.size()) + " labels");
  }
  for (Label l : labels) {
    if (l < 0) throw ValidationError(to_string(role) + " split: negative label " + std::to_string(l));
  }
  if (!features.allFinite()) throw ValidationError(to_string(role) + " split: non-finite feature");
}

const SessionSplit& SessionStream::base() const {
  if (sessions.empty()) throw StateError("session stream is empty");
  return sessions.front();
}

std::size_t SessionStream::input_dim() const {
  return static_cast<std::size_t>(base().train.features.cols());
}

std::vector<Label> SessionStream::all_labels() const {
  std::set<Label> s;
  for (const SessionSplit& split : sessions) s.insert(split.train.labels.begin(), split.train.labels.end());
  return {s.begin(), s.end()};
}

void SessionStream::validate() const {
  if (sessions.empty()) throw ValidationError("session stream has no base session");
  const auto dim = base().train.features.cols();
  if (dim == 0) throw ValidationError("session 0: zero-dimensional features");
  std::map<Label, std::size_t> owner;
  for (std::size_t t = 0; t < sessions.size(); ++t) {
    const SessionSplit& split = sessions[t];
    try {
      split.train.validate();
      split.test.validate();
    } catch (const ValidationError& e) {
      throw ValidationError(session_name(t) + ": " + e.what());
    }
    if (split.train.role != Role::train || split.test.role != Role::test) {
      throw ValidationError(session_name(t) + ": split roles are swapped");
    }
    if (split.train.features.cols() != dim || split.test.features.cols() != dim) {
      throw ValidationError(session_name(t) + ": feature dimension differs from session 0 (" +
                            std::to_string(dim) + ")");
    }
    if (split.train.size() == 0) throw ValidationError(session_name(t) + ": empty train split");
    const auto classes = split.train.classes();
    if (t == 0 && classes.size() < 2) {
      throw ValidationError("session 0: base session needs at least 2 classes");
    }
    for (Label c : classes) {
      auto [it, inserted] = owner.emplace(c, t);
      if (!inserted) {
        throw ValidationError(session_name(t) + ": label " + std::to_string(c) +
                              " already used by " + session_name(it->second));
      }
    }
    const std::set<Label> own(classes.begin(), classes.end());
    for (Label l : split.test.labels) {
      if (!own.count(l)) {
        throw ValidationError(session_name(t) + ": test label " + std::to_string(l) +
                              " is not a class of this session");
      }
    }
    if (t > 0) {
      if (classes.size() != way) {
        throw ValidationError(session_name(t) + ": expected " + std::to_string(way) +
                              "-way, found " + std::to_string(classes.size()) + " classes");
      }
      std::map<Label, std::size_t> counts;
      for (Label l : split.train.labels) ++counts[l];
      for (const auto& [label, n] : counts) {
        if (n != shot) {
          throw ValidationError(session_name(t) + ": class " + std::to_string(label) + " has " +
                                std::to_string(n) + " shots, expected " + std::to_string(shot));
        }
      }
    }
  }
}

void SyntheticBenchmarkSpec::validate() const {
  if (input_dim == 0) throw ConfigError("synthetic benchmark: input dimension must be >= 1");
  if (base_classes < 2) throw ConfigError("synthetic benchmark: need at least 2 base classes");
  if (sessions > 0 && (way == 0 || shot == 0)) {
    throw ConfigError("synthetic benchmark: way and shot must be >= 1");
  }
  const std::size_t novel = novel_classes == 0 ? sessions * way : novel_classes;
  if (sessions * way > novel) {
    throw ConfigError("synthetic benchmark: " + std::to_string(sessions) + " sessions of " +
                      std::to_string(way) + "-way need " + std::to_string(sessions * way) +
                      " novel classes, only " + std::to_string(novel) + " available");
  }
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw ConfigError("synthetic benchmark: sigma must be finite and >= 0");
  }
  if (!(separation >= 1.0)) {
    throw ConfigError("synthetic benchmark: separation ratio must be >= 1");
  }
  if (base_train_per_class == 0 || test_per_class == 0) {
    throw ConfigError("synthetic benchmark: per-class counts must be >= 1");
  }
}

SyntheticBenchmark generate_synthetic(const SyntheticBenchmarkSpec& spec) {
  spec.validate();
  const std::size_t novel = spec.novel_classes == 0 ? spec.sessions * spec.way : spec.novel_classes;
  const std::size_t total = spec.base_classes + novel;
  const auto dim = static_cast<Eigen::Index>(spec.input_dim);

  SyntheticBenchmark out;
  if (spec.separation < 4.0) {
    out.warnings.push_back("separation ratio " + format_double(spec.separation) +
                           " is below 4; clusters will overlap noticeably");
  }

  // Centers are scattered so that typical pairwise distances sit around
  // 1.5x the required minimum; rejection enforces the minimum itself.
  const double unit = spec.sigma > 0.0 ? spec.sigma : 1.0;
  const double min_dist = spec.separation * unit;
  const double scale = 1.5 * min_dist / std::sqrt(2.0 * static_cast<double>(dim));
  Rng center_rng = make_rng(spec.seed, 1);
  std::normal_distribution<double> normal(0.0, 1.0);
  out.centers = Matrix::Zero(static_cast<Eigen::Index>(total), dim);
  double closest = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < total; ++c) {
    const auto row = static_cast<Eigen::Index>(c);
    bool placed = false;
    for (int attempt = 0; attempt < 10000 && !placed; ++attempt) {
      for (Eigen::Index j = 0; j < dim; ++j) out.centers(row, j) = scale * normal(center_rng);
      double nearest = std::numeric_limits<double>::infinity();
      for (Eigen::Index k = 0; k < row; ++k) {
        nearest = std::min(nearest, (out.centers.row(row) - out.centers.row(k)).norm());
      }
      if (nearest >= min_dist) {
        placed = true;
        closest = std::min(closest, nearest);
      }
    }
    if (!placed) {
      throw ConfigError("synthetic benchmark: cannot place " + std::to_string(total) +
                        " centers at separation " + format_double(spec.separation) +
                        " in dimension " + std::to_string(spec.input_dim));
    }
  }
  out.separation_ratio =
      spec.sigma > 0.0 ? closest / spec.sigma : std::numeric_limits<double>::infinity();

  Rng sample_rng = make_rng(spec.seed, 2);
  auto sample = [&](const std::vector<Label>& classes, std::size_t per_class, Role role) {
    SessionDataset ds;
    ds.role = role;
    ds.features.resize(static_cast<Eigen::Index>(classes.size() * per_class), dim);
    Eigen::Index r = 0;
    for (Label c : classes) {
      for (std::size_t k = 0; k < per_class; ++k, ++r) {
        for (Eigen::Index j = 0; j < dim; ++j) {
          ds.features(r, j) = out.centers(c, j) + spec.sigma * normal(sample_rng);
        }
        ds.labels.push_back(c);
      }
    }
    return ds;
  };

  std::vector<Label> base_labels;
  for (std::size_t c = 0; c < spec.base_classes; ++c) base_labels.push_back(static_cast<Label>(c));
  out.stream.way = spec.way;
  out.stream.shot = spec.shot;
  out.stream.sessions.push_back({sample(base_labels, spec.base_train_per_class, Role::train),
                                 sample(base_labels, spec.test_per_class, Role::test)});
  for (std::size_t t = 0; t < spec.sessions; ++t) {
    std::vector<Label> labels;
    for (std::size_t c = 0; c < spec.way; ++c) {
      labels.push_back(static_cast<Label>(spec.base_classes + t * spec.way + c));
    }
    out.stream.sessions.push_back(
        {sample(labels, spec.shot, Role::train), sample(labels, spec.test_per_class, Role::test)});
  }
  out.stream.validate();
  return out;
}

FeatureFormat parse_feature_format(const std::string& name) {
  if (name == "csv") return FeatureFormat::csv;
  if (name == "binary" || name == "bin") return FeatureFormat::binary;
  throw ConfigError("unknown feature format '" + name + "'");
}

std::string to_string(FeatureFormat format) {
  return format == FeatureFormat::csv ? "csv" : "binary";
}

void write_feature_csv(const SessionDataset& data, const fs::path& path) {
  data.validate();
  std::string out = "label";
  for (Eigen::Index j = 0; j < data.features.cols(); ++j) out += ",f" + std::to_string(j);
  out += '\n';
  for (Eigen::Index i = 0; i < data.features.rows(); ++i) {
    out += std::to_string(data.labels[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < data.features.cols(); ++j) {
      out += ',';
      out += format_double(data.features(i, j));
    }
    out += '\n';
  }
  write_file(path, out);
}

SessionDataset read_feature_csv(const fs::path& path, Role role) {
  const std::string text = read_file(path);
  auto fail = [&](std::size_t line, std::size_t col, const std::string& what) -> ParseError {
    return ParseError(path.string() + ":" + std::to_string(line) + ":" + std::to_string(col) +
                      ": " + what);
  };

  std::vector<std::string_view> lines;
  {
    std::size_t start = 0;
    while (start < text.size()) {
      std::size_t end = text.find('\n', start);
      if (end == std::string::npos) end = text.size();
      std::string_view line(text.data() + start, end - start);
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      lines.push_back(line);
      start = end + 1;
    }
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) throw fail(1, 1, "missing header");

  std::vector<std::string_view> header;
  {
    std::string_view h = lines[0];
    std::size_t pos = 0;
    while (true) {
      std::size_t comma = h.find(',', pos);
      header.push_back(h.substr(pos, comma == std::string_view::npos ? h.npos : comma - pos));
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
  }
  if (header.empty() || header[0] != "label") throw fail(1, 1, "header must start with 'label'");
  for (std::size_t j = 1; j < header.size(); ++j) {
    if (header[j] != "f" + std::to_string(j - 1)) {
      throw fail(1, 1, "header column " + std::to_string(j) + " must be f" + std::to_string(j - 1));
    }
  }
  const std::size_t cols = header.size() - 1;
  if (cols == 0) throw fail(1, 1, "no feature columns");

  SessionDataset ds;
  ds.role = role;
  ds.features.resize(static_cast<Eigen::Index>(lines.size() - 1), static_cast<Eigen::Index>(cols));
  for (std::size_t li = 1; li < lines.size(); ++li) {
    std::string_view line = lines[li];
    const char* begin = line.data();
    const char* end = line.data() + line.size();
    const char* p = begin;
    auto column = [&] { return static_cast<std::size_t>(p - begin) + 1; };

    long long label = 0;
    auto [lp, lec] = std::from_chars(p, end, label);
    if (lec != std::errc() || lp == p) throw fail(li + 1, column(), "expected integer label");
    if (label < 0 || label > std::numeric_limits<Label>::max()) {
      throw fail(li + 1, column(), "label out of range");
    }
    p = lp;
    ds.labels.push_back(static_cast<Label>(label));
    for (std::size_t j = 0; j < cols; ++j) {
      if (p >= end || *p != ',') {
        throw fail(li + 1, column(), "expected " + std::to_string(cols) + " feature values");
      }
      ++p;
      double v = 0.0;
      auto [vp, vec] = std::from_chars(p, end, v);
      if (vec != std::errc() || vp == p) throw fail(li + 1, column(), "expected number");
      p = vp;
      ds.features(static_cast<Eigen::Index>(li - 1), static_cast<Eigen::Index>(j)) = v;
    }
    if (p != end) throw fail(li + 1, column(), "trailing characters");
  }
  return ds;
}

void write_feature_binary(const SessionDataset& data, const fs::path& path) {
  data.validate();
  std::string out(kMagic, sizeof(kMagic));
  put_u32(out, static_cast<std::uint32_t>(data.features.rows()));
  put_u32(out, static_cast<std::uint32_t>(data.features.cols()));
  for (Eigen::Index i = 0; i < data.features.rows(); ++i) {
    put_u64(out, static_cast<std::uint64_t>(static_cast<std::int64_t>(data.labels[static_cast<std::size_t>(i)])));
    for (Eigen::Index j = 0; j < data.features.cols(); ++j) {
      put_u64(out, std::bit_cast<std::uint64_t>(data.features(i, j)));
    }
  }
  write_file(path, out);
}

SessionDataset read_feature_binary(const fs::path& path, Role role) {
  const std::string bytes = read_file(path);
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw ParseError(path.string() + ": offset 0: bad magic");
  }
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const auto rows = static_cast<std::size_t>(get_u64(p + 8, 4));
  const auto cols = static_cast<std::size_t>(get_u64(p + 12, 4));
  const std::size_t expected = 16 + rows * (cols + 1) * 8;
  if (bytes.size() != expected) {
    throw ParseError(path.string() + ": offset " + std::to_string(std::min(bytes.size(), expected)) +
                     ": expected " + std::to_string(expected) + " bytes, found " +
                     std::to_string(bytes.size()));
  }
  SessionDataset ds;
  ds.role = role;
  ds.features.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  std::size_t off = 16;
  for (std::size_t i = 0; i < rows; ++i) {
    const auto label = static_cast<std::int64_t>(get_u64(p + off, 8));
    if (label < 0 || label > std::numeric_limits<Label>::max()) {
      throw ParseError(path.string() + ": offset " + std::to_string(off) + ": label out of range");
    }
    ds.labels.push_back(static_cast<Label>(label));
    off += 8;
    for (std::size_t j = 0; j < cols; ++j, off += 8) {
      ds.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          std::bit_cast<double>(get_u64(p + off, 8));
    }
  }
  return ds;
}

fs::path save_stream(const SessionStream& stream, const fs::path& dir, FeatureFormat format,
                     bool force) {
  stream.validate();
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  const fs::path manifest = dir / kManifestName;
  if (fs::exists(manifest) && !force) {
    throw IoError(manifest.string() + " already exists (use force to overwrite)");
  }
  const std::string ext = format == FeatureFormat::csv ? ".csv" : ".bin";

  json sessions = json::array();
  for (std::size_t t = 0; t < stream.sessions.size(); ++t) {
    const SessionSplit& split = stream.sessions[t];
    json entry;
    entry["session"] = t;
    entry["classes"] = split.train.classes();
    for (const SessionDataset* ds : {&split.train, &split.test}) {
      const std::string name = "session" + std::to_string(t) + "_" + to_string(ds->role) + ext;
      if (format == FeatureFormat::csv) {
        write_feature_csv(*ds, dir / name);
      } else {
        write_feature_binary(*ds, dir / name);
      }
      entry[to_string(ds->role)] = {{"path", name}, {"format", to_string(format)},
                                    {"rows", ds->size()}};
    }
    sessions.push_back(std::move(entry));
  }
  json doc;
  doc["format"] = kManifestFormat;
  doc["version"] = kManifestVersion;
  doc["input_dim"] = stream.input_dim();
  doc["way"] = stream.way;
  doc["shot"] = stream.shot;
  doc["sessions"] = std::move(sessions);
  write_file(manifest, doc.dump(2) + "\n");
  return manifest;
}

SessionStream load_stream(const fs::path& manifest) {
  const std::string text = read_file(manifest);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(manifest.string() + ": offset " + std::to_string(e.byte) + ": " + e.what());
  }
  const fs::path root = manifest.parent_path();
  SessionStream stream;
  try {
    if (doc.at("format").get<std::string>() != kManifestFormat) {
      throw ParseError(manifest.string() + ": not a stream manifest");
    }
    if (doc.at("version").get<int>() != kManifestVersion) {
      throw ParseError(manifest.string() + ": unsupported manifest version");
    }
    stream.way = doc.at("way").get<std::size_t>();
    stream.shot = doc.at("shot").get<std::size_t>();
    const auto input_dim = doc.at("input_dim").get<std::size_t>();
    const json& sessions = doc.at("sessions");
    for (std::size_t t = 0; t < sessions.size(); ++t) {
      const json& entry = sessions.at(t);
      if (entry.at("session").get<std::size_t>() != t) {
        throw ValidationError(session_name(t) + ": sessions listed out of order");
      }
      SessionSplit split;
      for (Role role : {Role::train, Role::test}) {
        const json& file = entry.at(to_string(role));
        const fs::path path = root / file.at("path").get<std::string>();
        const FeatureFormat format = parse_feature_format(file.at("format").get<std::string>());
        SessionDataset ds = format == FeatureFormat::csv ? read_feature_csv(path, role)
                                                         : read_feature_binary(path, role);
        if (static_cast<std::size_t>(ds.features.cols()) != input_dim) {
          throw ValidationError(session_name(t) + ": " + path.string() + " has " +
                                std::to_string(ds.features.cols()) + " feature columns, manifest says " +
                                std::to_string(input_dim));
        }
        (role == Role::train ? split.train : split.test) = std::move(ds);
      }
      const auto declared = entry.at("classes").get<std::vector<Label>>();
      if (declared != split.train.classes()) {
        throw ValidationError(session_name(t) + ": manifest class list does not match train labels");
      }
      stream.sessions.push_back(std::move(split));
    }
  } catch (const json::exception& e) {
    throw ParseError(manifest.string() + ": " + e.what());
  } catch (const ConfigError& e) {
    throw ParseError(manifest.string() + ": " + e.what());
  }
  stream.validate();
  return stream;
}

SessionDataset concat(const std::vector<const SessionDataset*>& parts) {
  SessionDataset out;
  if (parts.empty()) return out;
  out.role = parts.front()->role;
  Eigen::Index rows = 0;
  const Eigen::Index cols = parts.front()->features.cols();
  for (const SessionDataset* p : parts) {
    if (p->features.cols() != cols) throw ShapeError("concat: feature dimensions differ");
    rows += p->features.rows();
  }
  out.features.resize(rows, cols);
  Eigen::Index r = 0;
  for (const SessionDataset* p : parts) {
    out.features.middleRows(r, p->features.rows()) = p->features;
    r += p->features.rows();
    out.labels.insert(out.labels.end(), p->labels.begin(), p->labels.end());
  }
  return out;
}

}  // namespace dfscil
