#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "dnsward/dates.hpp"
#include "dnsward/intel.hpp"
#include "dnsward/kvconfig.hpp"
#include "dnsward/net.hpp"
#include "dnsward/query_log.hpp"
#include "dnsward/types.hpp"
#include "dnsward/wire.hpp"

namespace dnsward::firewall {

// One organisation's exclusive ingress. The endpoint alone identifies the
// org; client source addresses are used for reply routing only and never
// persisted.
struct OrgBinding {
  std::string org_id;
  net::Endpoint listen;
  Group group = Group::Treatment;
  std::optional<Date> intervention_date;  // Treatment orgs only
};

struct FirewallPolicy {
  enum class GreyAction { Forward, Block };

  std::set<IntelStatus> block_statuses{IntelStatus::Convicted, IntelStatus::Blacklisted};
  std::set<TrafficClass> block_classes{TrafficClass::Malicious};
  GreyAction grey_action = GreyAction::Forward;
  wire::BlockMode block_mode = wire::BlockMode::Nxdomain;
  std::optional<wire::Ipv4> sinkhole_addr;
  uint32_t sinkhole_ttl = 60;
  net::Endpoint upstream;
  std::chrono::milliseconds upstream_timeout{2000};
};

struct ActionOutcome {
  Action action = Action::Forwarded;
  uint8_t rcode = 0;
  std::chrono::milliseconds latency{0};
};

// Upstream transport seam. Implementations must always produce a response
// (synthesized SERVFAIL on timeout); UdpForwarder is the production one.
class Forwarder {
 public:
  virtual ~Forwarder() = default;
  virtual std::vector<uint8_t> forward(std::span<const uint8_t> raw) = 0;
};

// Relays one query over UDP and returns the first upstream response whose
// transaction id matches; replies with other ids are ignored. Times out to
// a synthesized SERVFAIL.
std::vector<uint8_t> forward_upstream(std::span<const uint8_t> raw,
                                      const net::Endpoint& upstream,
                                      std::chrono::milliseconds timeout);

class UdpForwarder : public Forwarder {
 public:
  UdpForwarder(net::Endpoint upstream, std::chrono::milliseconds timeout)
      : upstream_(upstream), timeout_(timeout) {}
  std::vector<uint8_t> forward(std::span<const uint8_t> raw) override {
    return forward_upstream(raw, upstream_, timeout_);
  }

 private:
  net::Endpoint upstream_;
  std::chrono::milliseconds timeout_;
};

// Short-circuits forwarding for a cooldown after an upstream timeout so a
// dead upstream cannot stall a listener's queue for more than one timeout.
class GatedForwarder : public Forwarder {
 public:
  GatedForwarder(Forwarder& inner, std::chrono::milliseconds cooldown)
      : inner_(inner), cooldown_(cooldown) {}
  std::vector<uint8_t> forward(std::span<const uint8_t> raw) override;

 private:
  Forwarder& inner_;
  std::chrono::milliseconds cooldown_;
  std::mutex mu_;
  std::optional<std::chrono::steady_clock::time_point> gate_until_;
};

struct HandleResult {
  std::vector<uint8_t> response;  // empty: drop silently (id unrecoverable)
  qlog::QueryRecord record;
  ActionOutcome outcome;
};

// Classifies and polices one datagram. Unparseable datagrams get a FORMERR
// reply when the header id is recoverable and are always logged with
// qname "<unparseable>" and class Benign.
HandleResult handle_query(const OrgBinding& binding, const FirewallPolicy& policy,
                          const intel::IntelStore& store, std::span<const uint8_t> raw,
                          int64_t now, Forwarder& forwarder);

struct ServiceConfig {
  std::vector<OrgBinding> bindings;
  FirewallPolicy policy;
  std::vector<std::string> feed_paths;
  std::filesystem::path log_dir;
  std::chrono::seconds heartbeat{60};
};

// Parses the service config dialect (org.<id>.listen, policy.*, upstream.*,
// feeds, log_dir). Throws CONFIG_INVALID on bad keys or duplicate endpoints.
ServiceConfig service_config_from(const KvConfig& cfg);

// The live service: one UDP listener thread per org binding, a shared
// serialized log writer, an atomically swappable intel snapshot, and a
// heartbeat line with per-org counters on stderr.
class FirewallService {
 public:
  explicit FirewallService(ServiceConfig cfg);
  ~FirewallService();

  void start();  // binds listeners and loads feeds; throws on any failure
  void stop();   // answers in-flight queries, flushes the log, joins threads

  // Re-loads all feeds and swaps the store snapshot; readers never block.
  void reload_feeds();

  // Actual bound endpoints (resolves port 0 to the kernel-assigned port).
  std::vector<std::pair<std::string, net::Endpoint>> listeners() const;

  struct Counters {
    uint64_t received = 0;
    uint64_t forwarded = 0;
    uint64_t blocked = 0;
  };
  std::map<std::string, Counters> counters() const;

  std::shared_ptr<const intel::IntelStore> snapshot() const;

 private:
  void listener_loop(std::stop_token st, size_t binding_idx);
  void heartbeat_loop(std::stop_token st);
  std::shared_ptr<const intel::IntelStore> load_store() const;

  ServiceConfig cfg_;
  std::vector<net::UdpSocket> sockets_;
  std::unique_ptr<qlog::LogWriter> log_;
  std::unique_ptr<UdpForwarder> upstream_;
  std::unique_ptr<GatedForwarder> gate_;

  mutable std::mutex snapshot_mu_;
  std::shared_ptr<const intel::IntelStore> store_;

  mutable std::mutex counters_mu_;
  std::map<std::string, Counters> counters_;

  std::vector<std::jthread> threads_;
  bool running_ = false;
};

// Runs until SIGTERM/SIGINT (clean exit 0); SIGHUP reloads feeds.
int serve(const ServiceConfig& cfg);

}  // namespace dnsward::firewall
