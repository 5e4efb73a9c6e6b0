#include "dnsward/firewall.hpp"

#include <csignal>
#include <cstdio>
#include <iostream>

namespace dnsward::firewall {

std::vector<uint8_t> forward_upstream(std::span<const uint8_t> raw,
                                      const net::Endpoint& upstream,
                                      std::chrono::milliseconds timeout) {
  const auto servfail = [&]() -> std::vector<uint8_t> {
    auto q = wire::parse_query(raw);
    if (q) return wire::synthesize_rcode_response(q.value(), wire::kRcodeServFail);
    if (raw.size() >= 2) {
      const uint16_t id = static_cast<uint16_t>((raw[0] << 8) | raw[1]);
      return wire::synthesize_header_only(id, wire::kRcodeServFail);
    }
    return {};
  };

  if (raw.size() < 2) return servfail();
  const uint16_t query_id = static_cast<uint16_t>((raw[0] << 8) | raw[1]);

  net::UdpSocket sock;
  sock.send_to(raw, upstream);

  const auto deadline = std::chrono::steady_clock::now() + timeout;
  for (;;) {
    const auto now = std::chrono::steady_clock::now();
    if (now >= deadline) break;
    const auto remaining =
        std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now);
    auto reply = sock.recv(nullptr, std::max(remaining, std::chrono::milliseconds(1)));
    if (!reply) break;
    if (reply->size() < wire::kHeaderSize) continue;
    const uint16_t reply_id = static_cast<uint16_t>(((*reply)[0] << 8) | (*reply)[1]);
    if (reply_id != query_id) continue;  // mismatched transaction id: ignore
    return std::move(*reply);
  }
  return servfail();
}

std::vector<uint8_t> GatedForwarder::forward(std::span<const uint8_t> raw) {
  {
    std::lock_guard lock(mu_);
    if (gate_until_ && std::chrono::steady_clock::now() < *gate_until_) {
      auto q = wire::parse_query(raw);
      if (q) return wire::synthesize_rcode_response(q.value(), wire::kRcodeServFail);
      return {};
    }
  }
  const auto started = std::chrono::steady_clock::now();
  auto response = inner_.forward(raw);
  const auto elapsed = std::chrono::steady_clock::now() - started;
  // the inner forwarder only blocks near the full window when it timed out;
  // the margin absorbs clock granularity around the deadline
  const bool timed_out = elapsed + std::chrono::milliseconds(50) >= cooldown_;
  std::lock_guard lock(mu_);
  if (timed_out) {
    gate_until_ = std::chrono::steady_clock::now() + cooldown_;
  } else {
    gate_until_.reset();
  }
  return response;
}

HandleResult handle_query(const OrgBinding& binding, const FirewallPolicy& policy,
                          const intel::IntelStore& store, std::span<const uint8_t> raw,
                          int64_t now, Forwarder& forwarder) {
  const auto started = std::chrono::steady_clock::now();
  HandleResult result;
  qlog::QueryRecord& rec = result.record;
  rec.ts = now;
  rec.org_id = binding.org_id;

  const auto parsed = wire::parse_query(raw);
  if (!parsed) {
    rec.qname = "<unparseable>";
    rec.qtype = 0;
    rec.cls = TrafficClass::Benign;
    rec.action = Action::Blocked;  // answered (or dropped) locally
    rec.rcode = wire::kRcodeFormErr;
    if (raw.size() >= 2) {
      const uint16_t id = static_cast<uint16_t>((raw[0] << 8) | raw[1]);
      result.response = wire::synthesize_header_only(id, wire::kRcodeFormErr);
    }
    result.outcome = {Action::Blocked, wire::kRcodeFormErr,
                      std::chrono::duration_cast<std::chrono::milliseconds>(
                          std::chrono::steady_clock::now() - started)};
    return result;
  }

  const wire::QueryView& q = parsed.value();
  rec.qname = q.qname.to_string();
  rec.qtype = q.qtype;

  // non-IN classes are forwarded unclassified
  intel::Verdict verdict;
  if (q.qclass == wire::kClassIn) verdict = store.classify(q.qname);
  rec.cls = verdict.cls;
  if (verdict.matched) {
    rec.matched_domain = verdict.matched->domain.to_string();
    rec.tags.assign(verdict.matched->tags.begin(), verdict.matched->tags.end());
  }

  bool block = false;
  if (verdict.cls == TrafficClass::Grey) {
    block = policy.grey_action == FirewallPolicy::GreyAction::Block;
  } else if (verdict.matched && policy.block_classes.count(verdict.cls) &&
             policy.block_statuses.count(verdict.matched->status)) {
    block = true;
  }

  if (block) {
    result.response =
        wire::synthesize_block_response(q, policy.block_mode, policy.sinkhole_addr,
                                        policy.sinkhole_ttl);
    rec.action = Action::Blocked;
    const auto meta = wire::parse_response_meta(result.response);
    rec.rcode = meta.ok() ? meta.value().rcode : wire::kRcodeNxDomain;
  } else {
    result.response = forwarder.forward(raw);
    rec.action = Action::Forwarded;
    const auto meta = wire::parse_response_meta(result.response);
    rec.rcode = meta.ok() ? meta.value().rcode : wire::kRcodeServFail;
  }

  result.outcome = {rec.action, rec.rcode,
                    std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::steady_clock::now() - started)};
  return result;
}

// ServiceConfig --------------------------------------------------------------

ServiceConfig service_config_from(const KvConfig& cfg) {
  ServiceConfig out;

  for (const auto& id : cfg.ids_under("org")) {
    OrgBinding b;
    b.org_id = id;
    const auto listen = cfg.get("org." + id + ".listen");
    if (!listen) fail("CONFIG_INVALID", "org." + id + ".listen is required");
    const auto ep = net::Endpoint::parse(*listen);
    if (!ep) fail("CONFIG_INVALID", "bad endpoint for org " + id + ": " + *listen);
    b.listen = *ep;
    const auto group = cfg.get("org." + id + ".group");
    if (!group) fail("CONFIG_INVALID", "org." + id + ".group is required");
    const auto g = parse_group(*group);
    if (!g) fail("CONFIG_INVALID", "bad group for org " + id + ": " + *group);
    b.group = *g;
    if (const auto date = cfg.get("org." + id + ".intervention_date")) {
      const auto d = Date::parse(*date);
      if (!d) fail("CONFIG_INVALID", "bad intervention_date for org " + id);
      if (b.group == Group::Control) {
        fail("CONFIG_INVALID", "control org " + id + " cannot carry intervention_date");
      }
      b.intervention_date = *d;
    }
    out.bindings.push_back(std::move(b));
  }
  if (out.bindings.empty()) fail("CONFIG_INVALID", "no org bindings configured");

  std::set<net::Endpoint> seen;
  for (const auto& b : out.bindings) {
    if (!seen.insert(b.listen).second) {
      fail("CONFIG_INVALID", "duplicate listen endpoint: " + b.listen.to_string());
    }
  }

  if (const auto mode = cfg.get("policy.block_mode")) {
    const auto m = wire::parse_block_mode(*mode);
    if (!m) fail("CONFIG_INVALID", "bad policy.block_mode: " + *mode);
    out.policy.block_mode = *m;
  }
  if (const auto grey = cfg.get("policy.grey_action")) {
    if (*grey == "forward") out.policy.grey_action = FirewallPolicy::GreyAction::Forward;
    else if (*grey == "block") out.policy.grey_action = FirewallPolicy::GreyAction::Block;
    else fail("CONFIG_INVALID", "bad policy.grey_action: " + *grey);
  }
  if (const auto addr = cfg.get("policy.sinkhole_addr")) {
    const auto ip = wire::Ipv4::parse(*addr);
    if (!ip) fail("CONFIG_INVALID", "bad policy.sinkhole_addr: " + *addr);
    out.policy.sinkhole_addr = *ip;
  }
  if (const auto ttl = cfg.get_int("policy.sinkhole_ttl")) {
    out.policy.sinkhole_ttl = static_cast<uint32_t>(*ttl);
  }
  if (out.policy.block_mode == wire::BlockMode::Sinkhole && !out.policy.sinkhole_addr) {
    fail("CONFIG_INVALID", "sinkhole block mode requires policy.sinkhole_addr");
  }

  if (const auto up = cfg.get("upstream.addr")) {
    const auto ep = net::Endpoint::parse(*up);
    if (!ep) fail("CONFIG_INVALID", "bad upstream.addr: " + *up);
    out.policy.upstream = *ep;
  } else {
    fail("CONFIG_INVALID", "upstream.addr is required");
  }
  if (const auto t = cfg.get_int("upstream.timeout_ms")) {
    if (*t <= 0) fail("CONFIG_INVALID", "upstream.timeout_ms must be > 0");
    out.policy.upstream_timeout = std::chrono::milliseconds(*t);
  }

  out.feed_paths = cfg.get_list("feeds");
  if (out.feed_paths.empty()) fail("CONFIG_INVALID", "feeds is required");
  const auto dir = cfg.get("log_dir");
  if (!dir) fail("CONFIG_INVALID", "log_dir is required");
  out.log_dir = *dir;
  if (const auto hb = cfg.get_int("heartbeat_s")) {
    out.heartbeat = std::chrono::seconds(*hb);
  }
  return out;
}

// FirewallService ------------------------------------------------------------

FirewallService::FirewallService(ServiceConfig cfg) : cfg_(std::move(cfg)) {}

FirewallService::~FirewallService() { stop(); }

std::shared_ptr<const intel::IntelStore> FirewallService::load_store() const {
  std::vector<std::vector<intel::ThreatEntry>> feeds;
  for (const auto& path : cfg_.feed_paths) {
    auto loaded = intel::load_feed(path, std::filesystem::path(path).stem().string());
    for (const auto& w : loaded.warnings) std::cerr << "feed warning: " << w << "\n";
    feeds.push_back(std::move(loaded.entries));
  }
  return std::make_shared<const intel::IntelStore>(intel::IntelStore::merge(feeds));
}

void FirewallService::start() {
  if (running_) return;

  // feeds first: startup must abort before binding anything on a bad feed
  auto store = load_store();
  {
    std::lock_guard lock(snapshot_mu_);
    store_ = std::move(store);
  }

  sockets_.clear();
  for (const auto& b : cfg_.bindings) {
    sockets_.push_back(net::UdpSocket::bind(b.listen));
  }

  log_ = std::make_unique<qlog::LogWriter>(cfg_.log_dir);
  upstream_ = std::make_unique<UdpForwarder>(cfg_.policy.upstream, cfg_.policy.upstream_timeout);
  gate_ = std::make_unique<GatedForwarder>(*upstream_, cfg_.policy.upstream_timeout);

  for (size_t i = 0; i < cfg_.bindings.size(); ++i) {
    threads_.emplace_back([this, i](std::stop_token st) { listener_loop(st, i); });
  }
  threads_.emplace_back([this](std::stop_token st) { heartbeat_loop(st); });
  running_ = true;
}

void FirewallService::stop() {
  if (!running_) return;
  for (auto& t : threads_) t.request_stop();
  for (auto& t : threads_) {
    if (t.joinable()) t.join();
  }
  threads_.clear();
  sockets_.clear();
  if (log_) {
    log_->close();
    log_.reset();
  }
  running_ = false;
}

void FirewallService::reload_feeds() {
  auto store = load_store();
  std::lock_guard lock(snapshot_mu_);
  store_ = std::move(store);
}

std::shared_ptr<const intel::IntelStore> FirewallService::snapshot() const {
  std::lock_guard lock(snapshot_mu_);
  return store_;
}

std::vector<std::pair<std::string, net::Endpoint>> FirewallService::listeners() const {
  std::vector<std::pair<std::string, net::Endpoint>> out;
  for (size_t i = 0; i < cfg_.bindings.size() && i < sockets_.size(); ++i) {
    out.emplace_back(cfg_.bindings[i].org_id, sockets_[i].local_endpoint());
  }
  return out;
}

std::map<std::string, FirewallService::Counters> FirewallService::counters() const {
  std::lock_guard lock(counters_mu_);
  return counters_;
}

void FirewallService::listener_loop(std::stop_token st, size_t binding_idx) {
  const OrgBinding& binding = cfg_.bindings[binding_idx];
  net::UdpSocket& sock = sockets_[binding_idx];

  while (!st.stop_requested()) {
    net::Endpoint client;
    auto datagram = sock.recv(&client, std::chrono::milliseconds(100));
    if (!datagram) continue;

    const auto store = snapshot();
    const int64_t now = std::chrono::duration_cast<std::chrono::seconds>(
                            std::chrono::system_clock::now().time_since_epoch())
                            .count();
    auto result = handle_query(binding, cfg_.policy, *store, *datagram, now, *gate_);
    if (!result.response.empty()) sock.send_to(result.response, client);
    log_->append(result.record);
    {
      std::lock_guard lock(counters_mu_);
      Counters& c = counters_[binding.org_id];
      ++c.received;
      if (result.record.action == Action::Blocked) ++c.blocked;
      else ++c.forwarded;
    }
  }
}

void FirewallService::heartbeat_loop(std::stop_token st) {
  auto next = std::chrono::steady_clock::now() + cfg_.heartbeat;
  while (!st.stop_requested()) {
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
    if (std::chrono::steady_clock::now() < next) continue;
    next += cfg_.heartbeat;
    std::string line = "heartbeat";
    for (const auto& [org, c] : counters()) {
      line += " " + org + "=" + std::to_string(c.received) + "/" +
              std::to_string(c.blocked) + "blk";
    }
    std::cerr << line << "\n";
  }
}

// serve ----------------------------------------------------------------------

namespace {

volatile std::sig_atomic_t g_stop_requested = 0;
volatile std::sig_atomic_t g_reload_requested = 0;

void on_stop_signal(int) { g_stop_requested = 1; }
void on_reload_signal(int) { g_reload_requested = 1; }

}  // namespace

int serve(const ServiceConfig& cfg) {
  FirewallService service(cfg);
  service.start();

  for (const auto& [org, ep] : service.listeners()) {
    std::cerr << "listening org=" << org << " endpoint=" << ep.to_string() << "\n";
  }

  g_stop_requested = 0;
  g_reload_requested = 0;
  std::signal(SIGTERM, on_stop_signal);
  std::signal(SIGINT, on_stop_signal);
  std::signal(SIGHUP, on_reload_signal);

  while (!g_stop_requested) {
    std::this_thread::sleep_for(std::chrono::milliseconds(200));
    if (g_reload_requested) {
      g_reload_requested = 0;
      try {
        service.reload_feeds();
        std::cerr << "feeds reloaded\n";
      } catch (const std::exception& e) {
        std::cerr << "reload failed, keeping previous snapshot: " << e.what() << "\n";
      }
    }
  }
  service.stop();
  std::cerr << "shutdown complete\n";
  return 0;
}

}  // namespace dnsward::firewall
