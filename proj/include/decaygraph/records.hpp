#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace decaygraph {

using VertexId = std::string;
using Timestamp = std::int64_t;  // seconds since epoch

enum class CallType { voice, text, voicemail };

std::string_view to_string(CallType t);
std::optional<CallType> parse_call_type(std::string_view s);

struct CallRecord {
  VertexId caller;
  VertexId callee;
  Timestamp timestamp = 0;
  std::int64_t duration = 0;
  CallType call_type = CallType::voice;

  friend bool operator==(const CallRecord&, const CallRecord&) = default;
};

struct IngestConfig {
  Timestamp horizon_start = 0;
  Timestamp horizon_end = 0;
  std::set<CallType> keep_call_types{CallType::voice};
  bool strict = false;
  bool has_header = false;
  std::int64_t min_duration = 0;
  // When set, both endpoints must be listed.
  std::optional<std::unordered_set<VertexId>> in_network_ids;

  void validate() const;
};

// Every input row lands in exactly one counter, so
// accepted + skipped() + malformed == total_rows.
struct IngestReport {
  std::size_t total_rows = 0;
  std::size_t accepted = 0;
  std::size_t malformed = 0;
  std::size_t self_calls = 0;
  std::size_t filtered_type = 0;
  std::size_t out_of_horizon = 0;
  std::size_t below_min_duration = 0;
  std::size_t out_of_network = 0;

  std::size_t skipped() const {
    return self_calls + filtered_type + out_of_horizon + below_min_duration + out_of_network;
  }
  friend bool operator==(const IngestReport&, const IngestReport&) = default;
};

struct IngestResult {
  std::vector<CallRecord> records;
  IngestReport report;
};

// Streams `caller,callee,timestamp,duration,call_type` rows. Malformed rows
// are counted and skipped, or raise DataError naming the 1-based line number
// when cfg.strict is set. Self-calls are rejected here.
IngestResult parse_records(std::istream& source, const IngestConfig& cfg);
IngestResult parse_records_file(const std::string& path, const IngestConfig& cfg);

// Writes records in the ingest column order with a header line.
void write_records(std::ostream& out, const std::vector<CallRecord>& records);
void write_records_file(const std::string& path, const std::vector<CallRecord>& records);

// Reads a file produced by write_records (header required), without any
// horizon or type filtering. Malformed rows raise DataError.
std::vector<CallRecord> read_records_file(const std::string& path);

std::unordered_set<VertexId> read_id_list(const std::string& path);

}  // namespace decaygraph
