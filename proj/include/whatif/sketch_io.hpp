#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "whatif/answer.hpp"
#include "whatif/complex_query.hpp"

namespace whatif {

inline constexpr int kFormatVersion = 1;

using AnySketch = std::variant<CntSketch, SumSketch, QtlSketch, RegSketch, DisjointRegSketch, GroupedSketch>;

// A sketch together with everything needed to answer from it without the instance.
struct SketchContainer {
  QueryKind kind = QueryKind::Count;
  // epsilon, delta, seed, k, n, W, derived constants, labels; free-form beyond that.
  nlohmann::json parameters = nlohmann::json::object();
  AnySketch sketch;

  std::size_t k() const;
  std::vector<std::string> labels() const;
};

// Append-only bit stream; the last byte is zero-padded.
class BitWriter {
 public:
  void put(std::uint64_t value, unsigned width);
  // Elias gamma code of value + 1.
  void put_count(std::uint64_t value);
  void put_signed(std::int64_t value);
  void put_double(double value);
  void put_bytes(const std::string& text);

  std::size_t bits() const { return bits_; }
  const std::vector<std::uint8_t>& bytes() const { return bytes_; }

 private:
  std::vector<std::uint8_t> bytes_;
  std::size_t bits_ = 0;
};

// Reads what BitWriter wrote; throws MalformedSection on overrun.
class BitReader {
 public:
  BitReader() = default;
  BitReader(std::string name, std::vector<std::uint8_t> bytes, std::size_t bits);

  std::uint64_t get(unsigned width);
  std::uint64_t get_count();
  std::int64_t get_signed();
  double get_double();
  std::string get_bytes();
  bool exhausted() const { return pos_ == bits_; }
  const std::string& name() const { return name_; }

 private:
  std::string name_;
  std::vector<std::uint8_t> bytes_;
  std::size_t bits_ = 0;
  std::size_t pos_ = 0;
};

// Deterministic JSON document: sorted keys, payload sections as {"bits", "data" (base64)},
// and a SHA-256 checksum over the document without the checksum field.
std::string save(const SketchContainer& c);
// Throws VersionMismatch, ChecksumMismatch, MalformedSection.
SketchContainer load(const std::string& bytes);

std::string checksum_of(const std::string& bytes);

struct SizeReport {
  std::size_t header_bits = 0;  // everything outside the payload, as serialized
  std::size_t payload_bits = 0;
  std::map<std::string, std::size_t> sections;

  nlohmann::json to_json() const;
};

SizeReport measure(const SketchContainer& c);

struct ScenarioAnswer {
  QueryKind kind = QueryKind::Count;
  Scenario scenario;
  std::variant<NumericValue, std::vector<GroupRow>> value;
  bool degraded = false;
  double epsilon = 0.0;
  double delta = 0.0;

  nlohmann::json to_json() const;
};

// Throws EmptyScenario / UnknownHypothetical before touching the sketch.
ScenarioAnswer answer(const SketchContainer& c, const Scenario& s, const AnswerParams& params);

nlohmann::json to_json(const std::vector<GroupRow>& rows);

}  // namespace whatif
