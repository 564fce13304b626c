#ifndef BEACON_SERVICE_HPP
#define BEACON_SERVICE_HPP

#include <atomic>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <thread>

#include "beacon/defense_registry.hpp"

namespace beacon {

// A live Beacon answering NDJSON-over-TCP presence queries with a defense
// applied on the fly.
//
// Request:  {"op":"query","token":"<user>","snv":<int>}\n
// Response: {"present":0|1}\n or {"error":"..."}\n
struct ServiceConfig {
  enum class Mode { batch_precomputed, auth_online, unauth_online };

  Mode mode = Mode::batch_precomputed;
  ThreatSpec::Kind threat_kind = ThreatSpec::Kind::fixed;
  double theta = 0.0;
  std::size_t k = 1;

  std::string beacon_path;
  std::string reference_path;  // required for adaptive threats
  std::string listen_addr = "127.0.0.1:0";
  std::string persistence_path;  // empty disables persistence
  double delta = 1e-6;
  std::string method = "mig";  // solver for batch_precomputed
  double beta_a = 1.0, beta_b = 5.0;
  double rf_p = 0.5, dp_epsilon = 1.0;
  std::uint64_t seed = 0;
  std::size_t snapshot_every = 1024;  // WAL records between automatic compactions
};

class BeaconService {
 public:
  // Loads datasets, runs any up-front solver, restores persisted state.
  // Throws ConfigError on invalid mode/threat combinations and on corrupt
  // persistence (the message names the byte offset).
  explicit BeaconService(ServiceConfig config);
  ~BeaconService();

  BeaconService(const BeaconService&) = delete;
  BeaconService& operator=(const BeaconService&) = delete;

  void start();
  void stop();
  std::uint16_t port() const { return port_; }

  // Transport-independent core: one request line in, one response line out
  // (no trailing newline). Exercised directly by tests.
  std::string handle_request_line(const std::string& line);

  // Forces a compacted snapshot (also runs automatically every
  // snapshot_every WAL records).
  void snapshot_now();

  // Up-front solver outcome in batch_precomputed / unauth_online modes.
  const DefenseResult* precomputed_defense() const;

  std::size_t n_snvs() const { return params_.n_snvs(); }

 private:
  struct Committed {
    std::uint8_t response = 0;
    bool flipped = false;
  };

  // One committed response per SNV, shared by every user in every mode; a
  // flip committed for one user binds all others. Auth-mode per-user
  // session state lives alongside it.
  struct SessionStore {
    std::unordered_map<std::size_t, Committed> commitments;
    std::unordered_map<std::string, OnlineState> sessions;
  };

  void validate_config() const;
  void load_datasets();
  void precompute_flips();
  void accept_loop();
  void client_loop(int fd);
  std::string handle_query(const std::string& token, std::size_t snv);
  std::uint8_t decide_uncommitted(const std::string& token, std::size_t snv,
                                  bool* flipped);

  // Persistence. The WAL carries two record kinds:
  //   {"snv":J,"resp":0|1,"flipped":b,"t":n}   commitment
  //   {"hist":"<token>","snv":J,"t":n}         auth-mode history append
  void restore_persisted();
  void wal_append(const std::string& line);
  void write_snapshot_locked();

  ServiceConfig config_;
  GenotypeMatrix genotypes_;
  AafVector aaf_;
  std::vector<std::size_t> beacon_;
  std::vector<std::size_t> reference_;
  LrtParams params_;
  ResponseVector x_;
  ThreatSpec threat_;

  std::unique_ptr<DefenseResult> precomputed_;
  ResponseVector served_;  // batch/unauth: post-flip responses

  mutable std::shared_mutex mu_;
  SessionStore store_;
  std::uint64_t seq_ = 0;
  int wal_fd_ = -1;
  std::size_t records_since_snapshot_ = 0;

  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  std::atomic<bool> stopping_{false};
  std::thread accept_thread_;
  std::mutex clients_mu_;
  std::vector<int> client_fds_;
  std::vector<std::thread> client_threads_;
};

}  // namespace beacon

#endif  // BEACON_SERVICE_HPP
