#include "decaygraph/records.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>

#include "decaygraph/errors.hpp"

namespace decaygraph {

std::string_view to_string(CallType t) {
  switch (t) {
    case CallType::voice: return "voice";
    case CallType::text: return "text";
    case CallType::voicemail: return "voicemail";
  }
  return "voice";
}

std::optional<CallType> parse_call_type(std::string_view s) {
  if (s == "voice") return CallType::voice;
  if (s == "text") return CallType::text;
  if (s == "voicemail") return CallType::voicemail;
  return std::nullopt;
}

void IngestConfig::validate() const {
  if (horizon_start >= horizon_end) {
    throw UsageError("ingest: horizon start must be before horizon end");
  }
  if (min_duration < 0) throw UsageError("ingest: min duration must be non-negative");
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool parse_int(std::string_view s, std::int64_t& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

// Splits into exactly N fields; false on any other count.
template <std::size_t N>
bool split_fields(std::string_view line, std::array<std::string_view, N>& fields) {
  std::size_t count = 0;
  while (true) {
    const auto comma = line.find(',');
    if (count == N) return false;
    fields[count++] = trim(line.substr(0, comma));
    if (comma == std::string_view::npos) break;
    line.remove_prefix(comma + 1);
  }
  return count == N;
}

std::optional<CallRecord> parse_row(std::string_view line) {
  std::array<std::string_view, 5> f;
  if (!split_fields(line, f)) return std::nullopt;
  CallRecord r;
  if (f[0].empty() || f[1].empty()) return std::nullopt;
  if (!parse_int(f[2], r.timestamp) || !parse_int(f[3], r.duration) || r.duration < 0) {
    return std::nullopt;
  }
  auto type = parse_call_type(f[4]);
  if (!type) return std::nullopt;
  r.caller = std::string(f[0]);
  r.callee = std::string(f[1]);
  r.call_type = *type;
  return r;
}

bool blank(std::string_view s) { return trim(s).empty(); }

}  // namespace

IngestResult parse_records(std::istream& source, const IngestConfig& cfg) {
  cfg.validate();
  IngestResult result;
  auto& rep = result.report;
  std::string line;
  std::size_t line_no = 0;
  bool header_pending = cfg.has_header;
  while (std::getline(source, line)) {
    ++line_no;
    if (blank(line)) continue;
    if (header_pending) {
      header_pending = false;
      continue;
    }
    ++rep.total_rows;
    auto rec = parse_row(line);
    if (!rec) {
      if (cfg.strict) {
        throw DataError("ingest: malformed record at line " + std::to_string(line_no));
      }
      ++rep.malformed;
      continue;
    }
    if (rec->caller == rec->callee) {
      ++rep.self_calls;
      continue;
    }
    if (!cfg.keep_call_types.contains(rec->call_type)) {
      ++rep.filtered_type;
      continue;
    }
    if (rec->timestamp < cfg.horizon_start || rec->timestamp >= cfg.horizon_end) {
      ++rep.out_of_horizon;
      continue;
    }
    if (rec->duration < cfg.min_duration) {
      ++rep.below_min_duration;
      continue;
    }
    if (cfg.in_network_ids &&
        (!cfg.in_network_ids->contains(rec->caller) || !cfg.in_network_ids->contains(rec->callee))) {
      ++rep.out_of_network;
      continue;
    }
    ++rep.accepted;
    result.records.push_back(std::move(*rec));
  }
  if (source.bad()) throw DataError("ingest: read error on input stream");
  return result;
}

IngestResult parse_records_file(const std::string& path, const IngestConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open record file: " + path);
  return parse_records(in, cfg);
}

void write_records(std::ostream& out, const std::vector<CallRecord>& records) {
  out << "caller,callee,timestamp,duration,call_type\n";
  for (const auto& r : records) {
    out << r.caller << ',' << r.callee << ',' << r.timestamp << ',' << r.duration << ','
        << to_string(r.call_type) << '\n';
  }
}

void write_records_file(const std::string& path, const std::vector<CallRecord>& records) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write record file: " + path);
  write_records(out, records);
  if (!out) throw DataError("write failed: " + path);
}

std::vector<CallRecord> read_records_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open record file: " + path);
  std::vector<CallRecord> records;
  std::string line;
  std::size_t line_no = 0;
  bool header_pending = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    if (header_pending) {
      header_pending = false;
      if (trim(line).starts_with("caller")) continue;
    }
    auto rec = parse_row(line);
    if (!rec || rec->caller == rec->callee) {
      throw DataError(path + ": invalid record at line " + std::to_string(line_no));
    }
    records.push_back(std::move(*rec));
  }
  return records;
}

std::unordered_set<VertexId> read_id_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open id list: " + path);
  std::unordered_set<VertexId> ids;
  std::string line;
  while (std::getline(in, line)) {
    auto id = trim(line);
    if (!id.empty()) ids.emplace(id);
  }
  return ids;
}

}  // namespace decaygraph
