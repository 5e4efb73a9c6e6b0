#include "dnsward/query_log.hpp"

#include <algorithm>
#include <istream>

#include <json.hpp>

#include "dnsward/csv.hpp"
#include "dnsward/domain_name.hpp"

namespace dnsward::qlog {

namespace {

using ordered_json = nlohmann::ordered_json;

}  // namespace

std::string to_jsonl(const QueryRecord& r) {
  ordered_json j;
  j["ts"] = format_timestamp(r.ts);
  j["org"] = r.org_id;
  j["qname"] = r.qname;
  j["qtype"] = r.qtype;
  j["class"] = to_string(r.cls);
  j["action"] = to_string(r.action);
  j["rcode"] = r.rcode;
  if (r.matched_domain) {
    j["matched"] = *r.matched_domain;
  } else {
    j["matched"] = nullptr;
  }
  j["tags"] = r.tags;
  return j.dump();
}

std::optional<QueryRecord> from_jsonl(std::string_view line) {
  const auto j = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) return std::nullopt;

  QueryRecord r;
  const auto ts = j.find("ts");
  if (ts == j.end()) return std::nullopt;
  if (ts->is_number_integer()) {
    r.ts = ts->get<int64_t>();
  } else if (ts->is_string()) {
    const auto parsed = parse_timestamp(ts->get<std::string>());
    if (!parsed) return std::nullopt;
    r.ts = *parsed;
  } else {
    return std::nullopt;
  }

  const auto str_field = [&](const char* key) -> std::optional<std::string> {
    const auto it = j.find(key);
    if (it == j.end() || !it->is_string()) return std::nullopt;
    return it->get<std::string>();
  };

  const auto org = str_field("org");
  const auto qname = str_field("qname");
  if (!org || !qname || org->empty() || qname->empty()) return std::nullopt;
  r.org_id = *org;
  r.qname = *qname;

  if (const auto it = j.find("qtype"); it != j.end() && it->is_number_unsigned()) {
    const auto v = it->get<uint64_t>();
    if (v > 0xffff) return std::nullopt;
    r.qtype = static_cast<uint16_t>(v);
  }
  if (const auto cls = str_field("class")) {
    const auto parsed = parse_traffic_class(*cls);
    if (!parsed) return std::nullopt;
    r.cls = *parsed;
  }
  if (const auto action = str_field("action")) {
    const auto parsed = parse_action(*action);
    if (!parsed) return std::nullopt;
    r.action = *parsed;
  }
  if (const auto it = j.find("rcode"); it != j.end() && it->is_number_unsigned()) {
    const auto v = it->get<uint64_t>();
    if (v > 15) return std::nullopt;
    r.rcode = static_cast<uint8_t>(v);
  }
  if (const auto it = j.find("matched"); it != j.end() && it->is_string()) {
    r.matched_domain = it->get<std::string>();
  }
  if (const auto it = j.find("tags"); it != j.end() && it->is_array()) {
    for (const auto& t : *it) {
      if (t.is_string()) r.tags.push_back(t.get<std::string>());
    }
  }
  if (r.cls != TrafficClass::Benign && !r.matched_domain) return std::nullopt;
  return r;
}

// LogWriter ----------------------------------------------------------------

LogWriter::LogWriter(std::filesystem::path log_dir, Options opts)
    : dir_(std::move(log_dir)), opts_(opts) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) fail("IO_ERROR", "cannot create log dir " + dir_.string() + ": " + ec.message());
  if (opts_.background_flusher) {
    flusher_ = std::jthread([this](std::stop_token st) {
      while (!st.stop_requested()) {
        std::this_thread::sleep_for(opts_.flush_interval);
        flush();
      }
    });
  }
}

LogWriter::~LogWriter() { close(); }

std::ofstream& LogWriter::stream_for(const std::string& org, Date date) {
  auto it = files_.find(org);
  if (it != files_.end() && it->second.date == date && it->second.stream.is_open()) {
    return it->second.stream;
  }
  const std::filesystem::path org_dir = dir_ / org;
  std::error_code ec;
  std::filesystem::create_directories(org_dir, ec);
  if (ec) fail("IO_ERROR", "cannot create " + org_dir.string() + ": " + ec.message());
  OrgFile file;
  file.date = date;
  file.path = org_dir / (date.to_string() + ".jsonl");
  file.stream.open(file.path, std::ios::app);
  if (!file.stream.is_open()) fail("IO_ERROR", "cannot open " + file.path.string());
  auto [pos, _] = files_.insert_or_assign(org, std::move(file));
  return pos->second.stream;
}

void LogWriter::write_line(const QueryRecord& r) {
  const std::string line = to_jsonl(r);
  const Date date = r.date();
  std::ofstream& out = stream_for(r.org_id, date);
  out << line << '\n';
  if (!out.good()) {
    // one reopen retry, then give up
    files_.erase(r.org_id);
    std::ofstream& retry = stream_for(r.org_id, date);
    retry << line << '\n';
    if (!retry.good()) {
      fail("IO_ERROR", "append failed for org " + r.org_id + " on " + date.to_string());
    }
  }
}

void LogWriter::append(const QueryRecord& r) {
  std::lock_guard lock(mu_);
  write_line(r);
  if (++unflushed_ >= opts_.flush_every) flush_locked();
}

void LogWriter::flush_locked() {
  for (auto& [_, file] : files_) {
    if (file.stream.is_open()) file.stream.flush();
  }
  unflushed_ = 0;
}

void LogWriter::flush() {
  std::lock_guard lock(mu_);
  flush_locked();
}

void LogWriter::close() {
  if (flusher_.joinable()) {
    flusher_.request_stop();
    flusher_.join();
  }
  std::lock_guard lock(mu_);
  flush_locked();
  files_.clear();
}

// Readers -------------------------------------------------------------------

namespace {

bool passes(const RangeFilter& filter, const QueryRecord& r) {
  if (filter.org && r.org_id != *filter.org) return false;
  if (filter.cls && r.cls != *filter.cls) return false;
  return true;
}

class RangeReader : public RecordReader {
 public:
  RangeReader(std::filesystem::path log_dir, Date from, Date to, RangeFilter filter,
              ScanStats* stats)
      : from_(from), to_(to), filter_(std::move(filter)), stats_(stats) {
    if (!std::filesystem::is_directory(log_dir)) {
      fail("MISSING_DIR", "log directory not found: " + log_dir.string());
    }
    if (filter_.org) {
      orgs_.push_back(log_dir / *filter_.org);
    } else {
      for (const auto& e : std::filesystem::directory_iterator(log_dir)) {
        if (e.is_directory()) orgs_.push_back(e.path());
      }
      std::sort(orgs_.begin(), orgs_.end());
    }
    cur_date_ = from_;
  }

  bool next(QueryRecord& out) override {
    for (;;) {
      if (in_.is_open()) {
        std::string line;
        while (getline_text(in_, line)) {
          if (trim(line).empty()) continue;
          auto rec = from_jsonl(line);
          if (!rec) {
            if (stats_) ++stats_->skipped;
            continue;
          }
          if (!passes(filter_, *rec)) continue;
          if (stats_) ++stats_->returned;
          out = std::move(*rec);
          return true;
        }
        in_.close();
        ++cur_date_;
      }
      if (!advance_to_open_file()) return false;
    }
  }

 private:
  bool advance_to_open_file() {
    while (org_idx_ < orgs_.size()) {
      while (cur_date_ <= to_) {
        const auto path = orgs_[org_idx_] / (cur_date_.to_string() + ".jsonl");
        if (std::filesystem::exists(path)) {
          in_.open(path);
          if (in_.is_open()) return true;
        }
        ++cur_date_;
      }
      ++org_idx_;
      cur_date_ = from_;
    }
    return false;
  }

  Date from_, to_;
  RangeFilter filter_;
  ScanStats* stats_;
  std::vector<std::filesystem::path> orgs_;
  size_t org_idx_ = 0;
  Date cur_date_;
  std::ifstream in_;
};

class JsonlStreamReader : public RecordReader {
 public:
  JsonlStreamReader(std::istream& in, ScanStats* stats) : in_(in), stats_(stats) {}

  bool next(QueryRecord& out) override {
    std::string line;
    while (getline_text(in_, line)) {
      if (trim(line).empty()) continue;
      auto rec = from_jsonl(line);
      if (!rec) {
        if (stats_) ++stats_->skipped;
        continue;
      }
      if (stats_) ++stats_->returned;
      out = std::move(*rec);
      return true;
    }
    return false;
  }

 private:
  std::istream& in_;
  ScanStats* stats_;
};

class ImportReader : public RecordReader {
 public:
  ImportReader(const std::string& path, CsvMapping mapping, const intel::IntelStore* store,
               ScanStats* stats)
      : mapping_(std::move(mapping)), store_(store), stats_(stats), in_(path) {
    if (!in_) fail("FILE_UNREADABLE", "cannot open import file: " + path);
    std::string header;
    if (!getline_text(in_, header)) fail("UNMAPPED_COLUMN", "empty import file: " + path);
    const auto cols = split_csv_line(header);
    const auto index_of = [&](const std::string& name) -> std::optional<size_t> {
      // numeric mappings address columns directly (headerless files)
      if (!name.empty() && name.find_first_not_of("0123456789") == std::string::npos) {
        return static_cast<size_t>(std::stoul(name));
      }
      for (size_t i = 0; i < cols.size(); ++i) {
        if (trim(cols[i]) == name) return i;
      }
      return std::nullopt;
    };
    const auto require = [&](const std::string& name) {
      const auto idx = index_of(name);
      if (!idx) fail("UNMAPPED_COLUMN", "column not found: " + name);
      return *idx;
    };
    ts_col_ = require(mapping_.timestamp);
    org_col_ = require(mapping_.org);
    qname_col_ = require(mapping_.qname);
    if (mapping_.qtype) qtype_col_ = require(*mapping_.qtype);
    if (mapping_.cls) cls_col_ = require(*mapping_.cls);
    if (mapping_.action) action_col_ = require(*mapping_.action);
    if (mapping_.rcode) rcode_col_ = require(*mapping_.rcode);
    // a purely numeric mapping means there is no header row: re-read it as data
    const bool all_numeric = [&] {
      for (const std::string* m : {&mapping_.timestamp, &mapping_.org, &mapping_.qname}) {
        if (m->find_first_not_of("0123456789") != std::string::npos) return false;
      }
      return true;
    }();
    if (all_numeric) pending_ = std::move(header);
  }

  bool next(QueryRecord& out) override {
    std::string line;
    for (;;) {
      if (pending_) {
        line = std::move(*pending_);
        pending_.reset();
      } else if (!getline_text(in_, line)) {
        return false;
      }
      if (trim(line).empty()) continue;
      auto rec = parse_row(line);
      if (!rec) {
        if (stats_) ++stats_->skipped;
        continue;
      }
      if (stats_) ++stats_->returned;
      out = std::move(*rec);
      return true;
    }
  }

 private:
  std::optional<QueryRecord> parse_row(const std::string& line) {
    const auto fields = split_csv_line(line);
    const auto field = [&](size_t idx) -> std::optional<std::string> {
      if (idx >= fields.size()) return std::nullopt;
      return trim(fields[idx]);
    };
    const auto ts_raw = field(ts_col_);
    const auto org = field(org_col_);
    const auto qname_raw = field(qname_col_);
    if (!ts_raw || !org || !qname_raw || org->empty()) return std::nullopt;
    const auto ts = parse_timestamp(*ts_raw);
    if (!ts) return std::nullopt;
    const auto name = DomainName::parse(*qname_raw);
    if (!name) return std::nullopt;

    QueryRecord r;
    r.ts = *ts;
    r.org_id = *org;
    r.qname = name->to_string();
    if (qtype_col_) {
      const auto v = field(*qtype_col_);
      if (v && !v->empty()) {
        if (*v == "A") r.qtype = 1;
        else if (*v == "AAAA") r.qtype = 28;
        else {
          try {
            r.qtype = static_cast<uint16_t>(std::stoul(*v));
          } catch (const std::exception&) {
            return std::nullopt;
          }
        }
      }
    }
    if (action_col_) {
      const auto v = field(*action_col_);
      if (v) {
        const auto a = parse_action(*v);
        if (!a) return std::nullopt;
        r.action = *a;
      }
    }
    if (rcode_col_) {
      const auto v = field(*rcode_col_);
      if (v && !v->empty()) {
        try {
          const unsigned long rc = std::stoul(*v);
          if (rc > 15) return std::nullopt;
          r.rcode = static_cast<uint8_t>(rc);
        } catch (const std::exception&) {
          return std::nullopt;
        }
      }
    }

    std::optional<TrafficClass> explicit_cls;
    if (cls_col_) {
      const auto v = field(*cls_col_);
      if (v && !v->empty()) {
        explicit_cls = parse_traffic_class(*v);
        if (!explicit_cls) return std::nullopt;
      }
    }
    if (store_) {
      const auto verdict = store_->classify(*name);
      r.cls = explicit_cls.value_or(verdict.cls);
      if (verdict.matched) {
        r.matched_domain = verdict.matched->domain.to_string();
        r.tags.assign(verdict.matched->tags.begin(), verdict.matched->tags.end());
      }
    } else if (explicit_cls) {
      r.cls = *explicit_cls;
    }
    if (r.cls != TrafficClass::Benign && !r.matched_domain) {
      // imported logs may assert a class without naming the listing
      r.matched_domain = r.qname;
    }
    return r;
  }

  CsvMapping mapping_;
  const intel::IntelStore* store_;
  ScanStats* stats_;
  std::ifstream in_;
  std::optional<std::string> pending_;
  size_t ts_col_ = 0, org_col_ = 0, qname_col_ = 0;
  std::optional<size_t> qtype_col_, cls_col_, action_col_, rcode_col_;
};

}  // namespace

std::unique_ptr<RecordReader> open_range(const std::filesystem::path& log_dir, Date from,
                                         Date to, RangeFilter filter, ScanStats* stats) {
  if (from > to) fail("CONFIG_INVALID", "range start after end");
  return std::make_unique<RangeReader>(log_dir, from, to, std::move(filter), stats);
}

std::unique_ptr<RecordReader> open_jsonl_stream(std::istream& in, ScanStats* stats) {
  return std::make_unique<JsonlStreamReader>(in, stats);
}

std::unique_ptr<RecordReader> open_import(const std::string& csv_path,
                                          const CsvMapping& mapping,
                                          const intel::IntelStore* store,
                                          ScanStats* stats) {
  return std::make_unique<ImportReader>(csv_path, mapping, store, stats);
}

std::vector<QueryRecord> read_all(RecordReader& reader) {
  std::vector<QueryRecord> out;
  QueryRecord r;
  while (reader.next(r)) out.push_back(r);
  return out;
}

}  // namespace dnsward::qlog
