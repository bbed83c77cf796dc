#pragma once

#include <array>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <shared_mutex>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "idoe/cycle_sim.hpp"
#include "idoe/cycle_spec.hpp"
#include "idoe/diagram.hpp"
#include "idoe/doe.hpp"
#include "idoe/hull.hpp"
#include "idoe/surrogate.hpp"

namespace idoe {

struct SessionOptions {
  std::string name = "scenario";
  std::string notes;
  PlantConfig plant;
  ParameterBox box = ParameterBox::defaults();
  std::size_t initial_runs = 5000;
  std::uint64_t seed = 1;
  TrainConfig train;
  std::optional<ControlParams> baseline;  // reference run, kept outside the ensemble
};

/// Reads {name, notes, initial_runs, seed, train, plant, box, baseline}; all
/// optional. Box and baseline use the service units, train and plant are SI.
/// baseline may be "default" for the calibrated repository baseline.
/// Throws SchemaMismatch, InvalidBox.
SessionOptions session_options_from_json(const nlohmann::json& j);

/// Condensed training report kept with the session.
struct TrainingSummary {
  double test_mse = 0.0;
  double final_train_loss = 0.0;
  double final_val_loss = 0.0;
  std::size_t n_train = 0;
  std::size_t n_val = 0;
  std::size_t n_test = 0;
  std::vector<std::size_t> test_indices;
};

struct SessionState {
  std::string id;
  std::string name;
  std::string notes;
  std::string created;
  std::uint64_t seed = 0;
  std::size_t initial_runs = 0;
  PlantConfig plant;
  TrainConfig train;
  Ensemble ensemble;
  std::shared_ptr<const InversionNet> net;
  TrainingSummary training;
  std::vector<IterationRecord> iterations;
  std::vector<Finding> findings;
  std::optional<Run> baseline;  // id 0
  std::array<std::optional<ConvexPolygon>, 4> hulls;  // per characteristic point
  std::uint64_t refinement_batches = 0;
};

/// Hull per characteristic point over valid initial runs, in (h, log10 P).
std::array<std::optional<ConvexPolygon>, 4> initial_hulls(const Ensemble& ensemble);
std::array<bool, 4> inside_hulls(const std::array<std::optional<ConvexPolygon>, 4>& hulls,
                                 const std::array<CharPoint, 4>& points);

/// Persistence: one directory per session with ensemble.csv, session.json,
/// model.json and iterations.json.
void save_session(const SessionState& state, const std::filesystem::path& dir);
SessionState load_session(const std::filesystem::path& dir);

/// Identity of the persisted content: ensemble CSV hash, net checksum and
/// iteration/finding records.
struct SessionFingerprint {
  std::uint64_t ensemble = 0;
  std::uint64_t net = 0;
  std::uint64_t records = 0;
  friend bool operator==(const SessionFingerprint&, const SessionFingerprint&) = default;
};
SessionFingerprint fingerprint(const SessionState& state);

class Session {
 public:
  explicit Session(SessionState state) : state_(std::move(state)) {}

  template <typename F>
  decltype(auto) read(F&& f) const {
    std::shared_lock lock(mu_);
    return f(static_cast<const SessionState&>(state_));
  }

  template <typename F>
  decltype(auto) write(F&& f) {
    std::unique_lock lock(mu_);
    return f(state_);
  }

 private:
  mutable std::shared_mutex mu_;
  SessionState state_;
};

enum class JobStatus { queued, running, done, failed };
std::string_view to_string(JobStatus s);

struct RefinementJob {
  std::uint64_t id = 0;
  std::string session_id;
  int iteration = 0;
  std::size_t requested = 0;
  double fraction = 0.0;
  JobStatus status = JobStatus::queued;
  std::vector<std::uint64_t> run_ids;
  std::size_t valid_runs = 0;
  std::optional<OnlineReport> online;
  std::string error;
};

struct ProposeResult {
  IterationRecord record;
  CycleGeometry geometry;
  std::array<bool, 4> inside_hull{};
  CycleResult center;
};

struct IterationPatch {
  std::optional<std::string> name;
  std::optional<bool> visible;
  std::optional<std::string> notes;
};

/// Sessions, the propose/refine loop and the refinement job worker. Every
/// public member is safe to call from concurrent request threads.
class Workbench {
 public:
  /// With a storage root, sessions persist to <root>/<id> after every
  /// mutation and existing session directories are loaded at start.
  explicit Workbench(std::optional<std::filesystem::path> storage = std::nullopt, unsigned sim_threads = 0);
  ~Workbench();
  Workbench(const Workbench&) = delete;
  Workbench& operator=(const Workbench&) = delete;

  const RefrigerantModel& model() const { return model_; }

  std::string create_session(const SessionOptions& options);
  /// Registers a persisted session; returns its id.
  std::string open_session(const std::filesystem::path& dir);
  void save(const std::string& session_id, const std::filesystem::path& dir) const;
  std::shared_ptr<Session> session(const std::string& id) const;  // throws NotFound
  std::vector<std::string> session_ids() const;

  ProposeResult propose(const std::string& session_id, const CycleSpecification& spec);
  /// Queues a refinement batch. Throws NotFound, JobAlreadyRunning.
  std::uint64_t refine(const std::string& session_id, int iteration, std::size_t runs = 20, double fraction = 0.05);
  RefinementJob job(std::uint64_t id) const;
  RefinementJob wait(std::uint64_t id) const;

  std::vector<std::pair<Output, Summary>> statistics(const std::string& session_id, std::optional<int> iteration) const;
  Finding add_finding(const std::string& session_id, Finding finding);
  IterationRecord patch_iteration(const std::string& session_id, int iteration, const IterationPatch& patch);
  std::string export_csv(const std::string& session_id, std::span<const std::uint64_t> ids) const;

  DiagramPayload diagram() const;

 private:
  void persist(const std::string& id) const;
  void worker_loop(std::stop_token stop);
  void run_job(std::uint64_t job_id);

  RefrigerantModel model_;
  std::optional<std::filesystem::path> storage_;
  unsigned sim_threads_;

  mutable std::mutex registry_mu_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t next_session_ = 1;

  mutable std::mutex jobs_mu_;
  mutable std::condition_variable_any jobs_cv_;
  std::map<std::uint64_t, RefinementJob> jobs_;
  std::map<std::string, std::uint64_t> active_jobs_;  // session -> job
  std::deque<std::uint64_t> queue_;
  std::uint64_t next_job_ = 1;

  mutable std::once_flag diagram_once_;
  mutable DiagramPayload diagram_;

  std::jthread worker_;  // last: joins before the members above go away
};

nlohmann::json session_summary_json(const SessionState& state);
nlohmann::json job_json(const RefinementJob& job);

}  // namespace idoe
