#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "dnsward/dates.hpp"
#include "dnsward/intel.hpp"
#include "dnsward/types.hpp"

namespace dnsward::qlog {

// One logged DNS query; the atomic unit of every analysis.
struct QueryRecord {
  int64_t ts = 0;  // epoch seconds, UTC
  std::string org_id;
  std::string qname;  // presentation form; "<unparseable>" for bad datagrams
  uint16_t qtype = 1;
  TrafficClass cls = TrafficClass::Benign;
  Action action = Action::Forwarded;
  uint8_t rcode = 0;
  std::optional<std::string> matched_domain;  // present when cls != Benign
  std::vector<std::string> tags;

  Date date() const { return date_of_epoch(ts); }
  bool operator==(const QueryRecord&) const = default;
};

// Native JSONL codec. Keys: ts,org,qname,qtype,class,action,rcode,matched,tags.
std::string to_jsonl(const QueryRecord& r);
std::optional<QueryRecord> from_jsonl(std::string_view line);

// Append-only writer routing each record to <log_dir>/<org>/<YYYY-MM-DD>.jsonl.
// Appends are serialized internally; records are flushed at least every
// `flush_every` appends or `flush_interval`, whichever comes first.
class LogWriter {
 public:
  struct Options {
    size_t flush_every = 100;
    std::chrono::milliseconds flush_interval{1000};
    bool background_flusher = true;
  };

  explicit LogWriter(std::filesystem::path log_dir)
      : LogWriter(std::move(log_dir), Options{}) {}
  LogWriter(std::filesystem::path log_dir, Options opts);
  ~LogWriter();

  LogWriter(const LogWriter&) = delete;
  LogWriter& operator=(const LogWriter&) = delete;

  void append(const QueryRecord& r);  // throws IO_ERROR after one reopen retry
  void flush();
  void close();

  const std::filesystem::path& dir() const { return dir_; }

 private:
  struct OrgFile {
    Date date;
    std::ofstream stream;
    std::filesystem::path path;
  };

  void write_line(const QueryRecord& r);
  std::ofstream& stream_for(const std::string& org, Date date);
  void flush_locked();

  std::filesystem::path dir_;
  Options opts_;
  std::mutex mu_;
  std::map<std::string, OrgFile> files_;
  size_t unflushed_ = 0;
  std::jthread flusher_;
};

// Pull-based record stream; constant memory over arbitrarily large logs.
class RecordReader {
 public:
  virtual ~RecordReader() = default;
  virtual bool next(QueryRecord& out) = 0;
};

struct ScanStats {
  size_t returned = 0;
  size_t skipped = 0;  // malformed lines (and filtered rows for imports)
};

struct RangeFilter {
  std::optional<std::string> org;
  std::optional<TrafficClass> cls;
};

// Streams records from the rotated tree for dates in [from, to], in per-file
// order (org directories sorted, then dates ascending). Malformed lines are
// counted in stats and skipped. Throws MISSING_DIR.
std::unique_ptr<RecordReader> open_range(const std::filesystem::path& log_dir,
                                         Date from, Date to, RangeFilter filter = {},
                                         ScanStats* stats = nullptr);

// In-memory reader for tests and pipelines.
class VectorReader : public RecordReader {
 public:
  explicit VectorReader(std::vector<QueryRecord> records)
      : records_(std::move(records)) {}
  bool next(QueryRecord& out) override {
    if (pos_ >= records_.size()) return false;
    out = records_[pos_++];
    return true;
  }

 private:
  std::vector<QueryRecord> records_;
  size_t pos_ = 0;
};

// Streams native JSONL from stdin or any istream (ingest --stdin path).
std::unique_ptr<RecordReader> open_jsonl_stream(std::istream& in, ScanStats* stats = nullptr);

// Column mapping for external CSV imports. Names refer to header columns;
// timestamp, org and qname are required.
struct CsvMapping {
  std::string timestamp = "timestamp";
  std::string org = "org";
  std::string qname = "qname";
  std::optional<std::string> qtype;
  std::optional<std::string> cls;    // classified via the store when absent
  std::optional<std::string> action;
  std::optional<std::string> rcode;
};

// Imported rows are classified on the fly against `store` when no class
// column is mapped (store may be null: everything Benign). Timestamps parse
// from ISO-8601 or epoch seconds. Throws UNMAPPED_COLUMN / FILE_UNREADABLE.
std::unique_ptr<RecordReader> open_import(const std::string& csv_path,
                                          const CsvMapping& mapping,
                                          const intel::IntelStore* store,
                                          ScanStats* stats = nullptr);

// Drains a reader into a vector (small inputs only).
std::vector<QueryRecord> read_all(RecordReader& reader);

}  // namespace dnsward::qlog
