#include "beacon/service.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace beacon {

using nlohmann::json;

namespace {

std::pair<std::string, std::uint16_t> parse_listen(const std::string& addr) {
  const auto colon = addr.rfind(':');
  if (colon == std::string::npos)
    throw ConfigError("listen address must be host:port, got '" + addr + "'");
  const std::string host = addr.substr(0, colon);
  int port = 0;
  try {
    port = std::stoi(addr.substr(colon + 1));
  } catch (const std::exception&) {
    throw ConfigError("unparseable port in listen address '" + addr + "'");
  }
  if (port < 0 || port > 65535)
    throw ConfigError("port out of range in listen address '" + addr + "'");
  return {host, static_cast<std::uint16_t>(port)};
}

std::string error_line(const char* code) {
  return std::string("{\"error\":\"") + code + "\"}";
}

}  // namespace

BeaconService::BeaconService(ServiceConfig config) : config_(std::move(config)) {
  if (const char* env = std::getenv("BEACON_LISTEN"); env && *env)
    config_.listen_addr = env;
  load_datasets();
  validate_config();
  precompute_flips();
  restore_persisted();
}

BeaconService::~BeaconService() {
  stop();
  if (wal_fd_ >= 0) ::close(wal_fd_);
}

void BeaconService::validate_config() const {
  if (config_.threat_kind == ThreatSpec::Kind::adaptive) {
    if (reference_.empty())
      throw ConfigError("adaptive threat requires a reference dataset");
    if (config_.k < 1 || config_.k > reference_.size())
      throw ConfigError("adaptive K must satisfy 1 <= K <= |reference|");
  }
  if (config_.mode == ServiceConfig::Mode::auth_online &&
      config_.threat_kind == ThreatSpec::Kind::fixed && config_.theta > 0.0)
    throw ConfigError("auth_online with a fixed threshold requires theta <= 0");
}

void BeaconService::load_datasets() {
  auto [gb, fb] = load_matrix(config_.beacon_path);
  const std::size_t nb = gb.n_individuals();

  if (!config_.reference_path.empty()) {
    auto [gr, fr] = load_matrix(config_.reference_path);
    if (gr.n_snvs() != gb.n_snvs())
      throw ConfigError("beacon and reference files disagree on m");
    const std::size_t nr = gr.n_individuals();
    GenotypeMatrix combined(nb + nr, gb.n_snvs());
    for (std::size_t i = 0; i < nb; ++i) {
      combined.set_id(i, gb.id(i));
      for (std::size_t j = 0; j < gb.n_snvs(); ++j)
        combined.set(i, j, gb.get(i, j));
    }
    for (std::size_t i = 0; i < nr; ++i) {
      combined.set_id(nb + i, gr.id(i));
      for (std::size_t j = 0; j < gr.n_snvs(); ++j)
        combined.set(nb + i, j, gr.get(i, j));
    }
    genotypes_ = std::move(combined);
    for (std::size_t i = 0; i < nr; ++i) reference_.push_back(nb + i);
  } else {
    genotypes_ = std::move(gb);
  }
  for (std::size_t i = 0; i < nb; ++i) beacon_.push_back(i);

  aaf_ = std::move(fb);
  params_ = compute_params(aaf_, beacon_.size(), config_.delta);
  x_ = true_responses(genotypes_, beacon_);

  if (config_.threat_kind == ThreatSpec::Kind::fixed) {
    threat_ = ThreatSpec::fixed_threshold(config_.theta);
  } else {
    if (reference_.empty())
      throw ConfigError("adaptive threat requires a reference dataset");
    threat_ = ThreatSpec::adaptive(config_.k, reference_);
  }
}

void BeaconService::precompute_flips() {
  served_ = x_;
  if (config_.mode == ServiceConfig::Mode::auth_online) return;

  DefenseRequest request;
  request.threat = threat_;
  request.beta_a = config_.beta_a;
  request.beta_b = config_.beta_b;
  request.rf_p = config_.rf_p;
  request.dp_epsilon = config_.dp_epsilon;
  request.seed = config_.seed;

  if (config_.mode == ServiceConfig::Mode::unauth_online) {
    request.method = config_.threat_kind == ThreatSpec::Kind::fixed
                         ? (config_.method.rfind("unauth-", 0) == 0
                                ? config_.method
                                : "unauth-greedy")
                         : "unauth-adaptive";
  } else {
    request.method = config_.method;
  }

  const QuerySet all = QuerySet::all(params_.n_snvs());
  precomputed_ = std::make_unique<DefenseResult>(
      run_named_defense(request, params_, genotypes_, beacon_, all, x_));
  served_ = apply_flips(x_, precomputed_->flips);
}

const DefenseResult* BeaconService::precomputed_defense() const {
  return precomputed_.get();
}

// ---------------------------------------------------------------------------
// Persistence

void BeaconService::restore_persisted() {
  if (config_.persistence_path.empty()) return;
  const std::string snap_path = config_.persistence_path + ".snap";
  const std::string log_path = config_.persistence_path + ".log";

  std::uint64_t snap_seq = 0;
  if (std::ifstream snap(snap_path, std::ios::binary); snap) {
    std::stringstream buffer;
    buffer << snap.rdbuf();
    json doc;
    try {
      doc = json::parse(buffer.str());
    } catch (const json::parse_error& e) {
      throw ConfigError("corrupt snapshot " + snap_path + " at byte offset " +
                        std::to_string(e.byte));
    }
    try {
      snap_seq = doc.at("t").get<std::uint64_t>();
      for (const auto& c : doc.at("commitments")) {
        const std::size_t snv = c.at(0).get<std::size_t>();
        store_.commitments[snv] = Committed{c.at(1).get<std::uint8_t>(),
                                      c.at(2).get<bool>()};
      }
      for (const auto& s : doc.at("sessions")) {
        const std::string token = s.at(0).get<std::string>();
        OnlineState state = make_online_state(beacon_.size(), reference_.size());
        for (const auto& jv : s.at(1)) {
          const std::size_t snv = jv.get<std::size_t>();
          const auto it = store_.commitments.find(snv);
          if (it == store_.commitments.end())
            throw ConfigError("snapshot session history references uncommitted SNV " +
                              std::to_string(snv));
          apply_committed(state, snv, it->second.response, it->second.flipped,
                          params_, genotypes_, beacon_, reference_, x_);
        }
        store_.sessions.emplace(token, std::move(state));
      }
    } catch (const json::exception& e) {
      throw ConfigError("corrupt snapshot " + snap_path + ": " + e.what());
    }
    seq_ = snap_seq;
  }

  if (std::ifstream log(log_path, std::ios::binary); log) {
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(log, line)) {
      ++lineno;
      if (line.empty()) continue;
      json rec;
      try {
        rec = json::parse(line);
      } catch (const json::parse_error&) {
        // A torn final line was never acknowledged; anything earlier is real
        // corruption.
        if (log.peek() == EOF) break;
        throw ConfigError("corrupt WAL " + log_path + " at line " +
                          std::to_string(lineno));
      }
      const std::uint64_t t = rec.at("t").get<std::uint64_t>();
      if (t <= snap_seq) continue;  // already folded into the snapshot
      if (rec.contains("hist")) {
        const std::string token = rec.at("hist").get<std::string>();
        const std::size_t snv = rec.at("snv").get<std::size_t>();
        auto [it, inserted] = store_.sessions.try_emplace(
            token, make_online_state(beacon_.size(), reference_.size()));
        const auto cit = store_.commitments.find(snv);
        if (cit == store_.commitments.end())
          throw ConfigError("WAL history record references uncommitted SNV " +
                            std::to_string(snv));
        apply_committed(it->second, snv, cit->second.response,
                        cit->second.flipped, params_, genotypes_, beacon_,
                        reference_, x_);
      } else {
        const std::size_t snv = rec.at("snv").get<std::size_t>();
        store_.commitments[snv] = Committed{rec.at("resp").get<std::uint8_t>(),
                                      rec.at("flipped").get<bool>()};
      }
      seq_ = std::max(seq_, t);
    }
  }

  wal_fd_ = ::open(log_path.c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644);
  if (wal_fd_ < 0)
    throw ConfigError("cannot open WAL " + log_path + ": " + std::strerror(errno));
}

void BeaconService::wal_append(const std::string& line) {
  if (wal_fd_ < 0) return;
  const std::string full = line + "\n";
  ssize_t off = 0;
  while (off < static_cast<ssize_t>(full.size())) {
    const ssize_t w = ::write(wal_fd_, full.data() + off, full.size() - off);
    if (w < 0) throw ConfigError(std::string("WAL write failed: ") + std::strerror(errno));
    off += w;
  }
  ::fsync(wal_fd_);
  ++records_since_snapshot_;
}

void BeaconService::write_snapshot_locked() {
  if (config_.persistence_path.empty()) return;
  const std::string snap_path = config_.persistence_path + ".snap";
  const std::string log_path = config_.persistence_path + ".log";

  json doc;
  doc["v"] = 1;
  doc["t"] = seq_;
  json commits = json::array();
  std::vector<std::size_t> snvs;
  snvs.reserve(store_.commitments.size());
  for (const auto& [snv, c] : store_.commitments) snvs.push_back(snv);
  std::sort(snvs.begin(), snvs.end());
  for (std::size_t snv : snvs) {
    const auto& c = store_.commitments.at(snv);
    commits.push_back({snv, c.response, c.flipped});
  }
  doc["commitments"] = std::move(commits);
  json sess = json::array();
  std::vector<std::string> tokens;
  for (const auto& [token, state] : store_.sessions) tokens.push_back(token);
  std::sort(tokens.begin(), tokens.end());
  for (const auto& token : tokens)
    sess.push_back({token, store_.sessions.at(token).history});
  doc["sessions"] = std::move(sess);

  const std::string tmp = snap_path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << doc.dump();
    out.flush();
    if (!out) throw ConfigError("snapshot write failed for " + tmp);
  }
  if (std::rename(tmp.c_str(), snap_path.c_str()) != 0)
    throw ConfigError("snapshot rename failed for " + snap_path);

  // The log is folded into the snapshot; start it afresh.
  if (wal_fd_ >= 0) ::close(wal_fd_);
  wal_fd_ = ::open(log_path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
  if (wal_fd_ < 0)
    throw ConfigError("cannot reopen WAL " + log_path + ": " + std::strerror(errno));
  records_since_snapshot_ = 0;
}

void BeaconService::snapshot_now() {
  std::unique_lock lock(mu_);
  write_snapshot_locked();
}

// ---------------------------------------------------------------------------
// Request handling

std::string BeaconService::handle_request_line(const std::string& line) {
  json req;
  try {
    req = json::parse(line);
  } catch (const json::parse_error&) {
    return error_line("bad_request");
  }
  if (!req.is_object() || !req.contains("op") || !req["op"].is_string())
    return error_line("bad_request");
  if (req["op"] != "query") return error_line("unknown_op");
  if (!req.contains("snv") || !req["snv"].is_number_unsigned())
    return error_line("unknown_snv");
  const std::size_t snv = req["snv"].get<std::size_t>();
  if (snv >= params_.n_snvs()) return error_line("unknown_snv");

  std::string token;
  if (req.contains("token") && req["token"].is_string())
    token = req["token"].get<std::string>();
  if (config_.mode == ServiceConfig::Mode::auth_online && token.empty())
    return error_line("auth_required");

  try {
    return handle_query(token, snv);
  } catch (const std::exception&) {
    return error_line("internal");
  }
}

std::string BeaconService::handle_query(const std::string& token,
                                        std::size_t snv) {
  const auto present = [](std::uint8_t bit) {
    return bit ? std::string("{\"present\":1}") : std::string("{\"present\":0}");
  };

  if (config_.mode != ServiceConfig::Mode::auth_online) {
    {
      std::shared_lock read(mu_);
      const auto it = store_.commitments.find(snv);
      if (it != store_.commitments.end()) return present(it->second.response);
    }
    std::unique_lock write(mu_);
    const auto it = store_.commitments.find(snv);
    if (it != store_.commitments.end()) return present(it->second.response);
    // Lazy materialization of the precomputed decision, WAL first.
    const std::uint8_t resp = served_.x[snv];
    const bool flipped = precomputed_ && precomputed_->flips.flips(snv);
    json rec{{"snv", snv}, {"resp", resp}, {"flipped", flipped}, {"t", ++seq_}};
    wal_append(rec.dump());
    store_.commitments[snv] = Committed{resp, flipped};
    if (records_since_snapshot_ >= config_.snapshot_every)
      write_snapshot_locked();
    return present(resp);
  }

  // Authenticated online: every decision and history append is serialized.
  std::unique_lock write(mu_);
  auto [sit, created] = store_.sessions.try_emplace(
      token, make_online_state(beacon_.size(), reference_.size()));
  OnlineState& session = sit->second;

  // Session replay: identical answer, no state change.
  if (const auto cit = session.commitments.find(snv);
      cit != session.commitments.end())
    return present(cit->second.response);

  const auto git = store_.commitments.find(snv);
  if (git != store_.commitments.end()) {
    // Another session committed this SNV: it binds everyone.
    json rec{{"hist", token}, {"snv", snv}, {"t", ++seq_}};
    wal_append(rec.dump());
    apply_committed(session, snv, git->second.response, git->second.flipped,
                    params_, genotypes_, beacon_, reference_, x_);
    if (records_since_snapshot_ >= config_.snapshot_every)
      write_snapshot_locked();
    return present(git->second.response);
  }

  bool flipped = false;
  const std::uint8_t resp = decide_uncommitted(token, snv, &flipped);
  json commit_rec{{"snv", snv}, {"resp", resp}, {"flipped", flipped}, {"t", ++seq_}};
  wal_append(commit_rec.dump());
  json hist_rec{{"hist", token}, {"snv", snv}, {"t", ++seq_}};
  wal_append(hist_rec.dump());
  store_.commitments[snv] = Committed{resp, flipped};
  if (records_since_snapshot_ >= config_.snapshot_every)
    write_snapshot_locked();
  return present(resp);
}

std::uint8_t BeaconService::decide_uncommitted(const std::string& token,
                                               std::size_t snv, bool* flipped) {
  OnlineState& session = store_.sessions.at(token);
  StepResult step;
  if (config_.threat_kind == ThreatSpec::Kind::fixed) {
    step = online_greedy_step(session, snv, params_, genotypes_, beacon_, x_,
                              config_.theta);
  } else {
    step = online_greedy_adaptive_step(session, snv, params_, genotypes_,
                                       beacon_, reference_, x_, config_.k);
  }
  *flipped = step.flipped;
  return step.response;
}

// ---------------------------------------------------------------------------
// TCP plumbing

void BeaconService::start() {
  const auto [host, port] = parse_listen(config_.listen_addr);

  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0)
    throw ConfigError(std::string("socket failed: ") + std::strerror(errno));
  const int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);

  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (host.empty() || host == "0.0.0.0") {
    addr.sin_addr.s_addr = INADDR_ANY;
  } else if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    throw ConfigError("cannot parse listen host '" + host + "'");
  }
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0)
    throw ConfigError(std::string("bind failed: ") + std::strerror(errno));
  if (::listen(listen_fd_, 64) < 0)
    throw ConfigError(std::string("listen failed: ") + std::strerror(errno));

  sockaddr_in bound{};
  socklen_t len = sizeof bound;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&bound), &len);
  port_ = ntohs(bound.sin_port);

  stopping_ = false;
  accept_thread_ = std::thread([this] { accept_loop(); });
}

void BeaconService::accept_loop() {
  for (;;) {
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) {
      if (stopping_) break;
      if (errno == EINTR) continue;
      break;
    }
    std::lock_guard lock(clients_mu_);
    client_fds_.push_back(fd);
    client_threads_.emplace_back([this, fd] { client_loop(fd); });
  }
}

void BeaconService::client_loop(int fd) {
  std::string buffer;
  char chunk[4096];
  for (;;) {
    const ssize_t r = ::recv(fd, chunk, sizeof chunk, 0);
    if (r <= 0) break;
    buffer.append(chunk, static_cast<std::size_t>(r));
    std::size_t pos;
    while ((pos = buffer.find('\n')) != std::string::npos) {
      const std::string line = buffer.substr(0, pos);
      buffer.erase(0, pos + 1);
      if (line.empty()) continue;
      const std::string response = handle_request_line(line) + "\n";
      ssize_t off = 0;
      while (off < static_cast<ssize_t>(response.size())) {
        const ssize_t w =
            ::send(fd, response.data() + off, response.size() - off, MSG_NOSIGNAL);
        if (w <= 0) return;
        off += w;
      }
    }
  }
}

void BeaconService::stop() {
  if (stopping_.exchange(true)) return;
  if (listen_fd_ >= 0) {
    ::shutdown(listen_fd_, SHUT_RDWR);
    ::close(listen_fd_);
    listen_fd_ = -1;
  }
  if (accept_thread_.joinable()) accept_thread_.join();
  std::lock_guard lock(clients_mu_);
  for (int fd : client_fds_) {
    ::shutdown(fd, SHUT_RDWR);
  }
  for (auto& t : client_threads_)
    if (t.joinable()) t.join();
  for (int fd : client_fds_) ::close(fd);
  client_fds_.clear();
  client_threads_.clear();
}

}  // namespace beacon
