#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "json.hpp"
#include "offset/errors.hpp"
#include "offset/schema.hpp"
#include "offset/stream.hpp"

namespace offset {

// Observation logs are line-oriented text: a self-describing header line
//   #offset-log\tv1\t{json schema}
// followed by one observation per line with tab-separated fields
//   timestamp, one value per feature, variant id, reward (0/1).

struct LogHeader {
  FeatureSchema schema;
  std::uint32_t variant_count = 0;
};

namespace detail {

constexpr std::string_view kLogMagic = "#offset-log\tv1\t";

inline std::string encode_log_header(const LogHeader& header) {
  nlohmann::json j;
  j["variants"] = header.variant_count;
  auto& features = j["features"] = nlohmann::json::array();
  for (const auto& f : header.schema.features) {
    features.push_back({{"name", f.name}, {"values", f.values}});
  }
  return std::string(kLogMagic) + j.dump();
}

inline LogHeader decode_log_header(const std::string& line) {
  if (!line.starts_with(kLogMagic)) {
    throw DataError("log header: expected '#offset-log\tv1' prefix");
  }
  LogHeader header;
  try {
    const auto j = nlohmann::json::parse(line.substr(kLogMagic.size()));
    header.variant_count = j.at("variants").get<std::uint32_t>();
    for (const auto& f : j.at("features")) {
      FeatureDescriptor descriptor;
      descriptor.name = f.at("name").get<std::string>();
      descriptor.values = f.at("values").get<std::vector<std::string>>();
      header.schema.features.push_back(std::move(descriptor));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("log header: ") + e.what());
  }
  header.schema.validate();
  if (header.variant_count == 0) {
    throw DataError("log header: variant count must be positive");
  }
  return header;
}

struct StringViewHash {
  using is_transparent = void;
  std::size_t operator()(std::string_view s) const noexcept {
    return std::hash<std::string_view>{}(s);
  }
};

}  // namespace detail

class LogWriter {
public:
  LogWriter(const std::filesystem::path& path, LogHeader header)
      : header_(std::move(header)) {
    header_.schema.validate();
    for (const auto& f : header_.schema.features) {
      for (const auto& v : f.values) {
        if (v.find('\t') != std::string::npos || v.find('\n') != std::string::npos) {
          throw InvalidArgument("log writer: value '" + v + "' contains a tab or newline");
        }
      }
    }
    buffer_.resize(1 << 20);
    out_.rdbuf()->pubsetbuf(buffer_.data(), static_cast<std::streamsize>(buffer_.size()));
    out_.open(path, std::ios::binary);
    if (!out_) {
      throw IoError("cannot open log for writing: " + path.string());
    }
    out_ << detail::encode_log_header(header_) << '\n';
  }

  const LogHeader& header() const { return header_; }

  void write(const Observation& obs) {
    if (obs.profile.values.size() != header_.schema.feature_count()) {
      throw InvalidArgument("log writer: profile does not match the schema");
    }
    if (obs.variant >= header_.variant_count) {
      throw DataError("log writer: unknown variant id " + std::to_string(obs.variant));
    }
    char num[24];
    auto [p, ec] = std::to_chars(num, num + sizeof num, obs.timestamp);
    out_.write(num, p - num);
    for (std::size_t k = 0; k < obs.profile.values.size(); ++k) {
      const auto& domain = header_.schema.features[k].values;
      const std::uint32_t value = obs.profile.values[k];
      if (value >= domain.size()) {
        throw DataError("log writer: unknown value id for feature '" +
                        header_.schema.features[k].name + "'");
      }
      out_.put('\t');
      out_.write(domain[value].data(), static_cast<std::streamsize>(domain[value].size()));
    }
    out_.put('\t');
    auto [q, ec2] = std::to_chars(num, num + sizeof num, obs.variant);
    out_.write(num, q - num);
    out_.put('\t');
    out_.put(obs.clicked ? '1' : '0');
    out_.put('\n');
  }

  void close() {
    if (out_.is_open()) {
      out_.close();
      if (out_.fail()) {
        throw IoError("log writer: flush failed");
      }
    }
  }

private:
  LogHeader header_;
  std::vector<char> buffer_;
  std::ofstream out_;
};

class LogFileSource : public ObservationSource {
public:
  explicit LogFileSource(const std::filesystem::path& path) : path_(path.string()) {
    buffer_.resize(1 << 20);
    in_.rdbuf()->pubsetbuf(buffer_.data(), static_cast<std::streamsize>(buffer_.size()));
    in_.open(path, std::ios::binary);
    if (!in_) {
      throw IoError("cannot open log: " + path_);
    }
    std::string line;
    if (!std::getline(in_, line)) {
      throw DataError("log '" + path_ + "': missing header line");
    }
    header_ = detail::decode_log_header(line);
    value_ids_.resize(header_.schema.feature_count());
    for (std::size_t k = 0; k < header_.schema.feature_count(); ++k) {
      const auto& domain = header_.schema.features[k].values;
      for (std::uint32_t v = 0; v < domain.size(); ++v) {
        value_ids_[k].emplace(domain[v], v);
      }
    }
  }

  const FeatureSchema& schema() const override { return header_.schema; }
  std::uint32_t variant_count() const override { return header_.variant_count; }
  const LogHeader& header() const { return header_; }

  bool next(Observation& out) override {
    if (!std::getline(in_, line_)) {
      if (in_.bad()) {
        throw IoError("log '" + path_ + "': read failed");
      }
      return false;
    }
    ++line_number_;
    parse_line(line_, out);
    return true;
  }

private:
  [[noreturn]] void fail(const std::string& why) const {
    throw DataError("log '" + path_ + "' line " + std::to_string(line_number_ + 1) + ": " + why);
  }

  void parse_line(const std::string& line, Observation& out) {
    const std::size_t k_features = header_.schema.feature_count();
    out.profile.values.resize(k_features);

    std::string_view rest(line);
    const auto take_field = [&]() -> std::string_view {
      const std::size_t tab = rest.find('\t');
      if (tab == std::string_view::npos) {
        fail("too few fields");
      }
      const std::string_view field = rest.substr(0, tab);
      rest.remove_prefix(tab + 1);
      return field;
    };
    const auto parse_number = [&](std::string_view field, auto& value) {
      const auto [p, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
      if (ec != std::errc{} || p != field.data() + field.size()) {
        fail("malformed number '" + std::string(field) + "'");
      }
    };

    parse_number(take_field(), out.timestamp);
    for (std::size_t k = 0; k < k_features; ++k) {
      const std::string_view field = take_field();
      const auto it = value_ids_[k].find(field);
      if (it == value_ids_[k].end()) {
        fail("value '" + std::string(field) + "' not in feature '" +
             header_.schema.features[k].name + "'");
      }
      out.profile.values[k] = it->second;
    }
    parse_number(take_field(), out.variant);
    if (out.variant >= header_.variant_count) {
      fail("variant id " + std::to_string(out.variant) + " out of range");
    }
    if (rest.find('\t') != std::string_view::npos) {
      fail("too many fields");
    }
    if (rest == "1") {
      out.clicked = true;
    } else if (rest == "0") {
      out.clicked = false;
    } else {
      fail("reward must be 0 or 1");
    }
  }

  std::string path_;
  std::vector<char> buffer_;
  std::ifstream in_;
  LogHeader header_;
  std::vector<std::unordered_map<std::string, std::uint32_t, detail::StringViewHash,
                                 std::equal_to<>>>
      value_ids_;
  std::string line_;
  std::uint64_t line_number_ = 0;
};

}  // namespace offset
