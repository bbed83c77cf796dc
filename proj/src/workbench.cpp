#include "idoe/workbench.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>
#include <tuple>
#include <utility>

#include "idoe/calibration.hpp"
#include "idoe/error.hpp"
#include "idoe/json_io.hpp"

namespace idoe {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kSessionFormat = "idoe-session";
constexpr int kSessionVersion = 1;

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, std::string_view content) {
  const fs::path tmp = p.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(ErrorKind::Io, "short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, p, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot replace " + p.string() + ": " + ec.message());
}

json parse_json(const fs::path& p) {
  try {
    return json::parse(read_file(p));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::SchemaMismatch, p.filename().string() + ": " + e.what());
  }
}

json training_json(const TrainingSummary& t) {
  return {{"test_mse", t.test_mse},
          {"final_train_loss", t.final_train_loss},
          {"final_val_loss", t.final_val_loss},
          {"n_train", t.n_train},
          {"n_val", t.n_val},
          {"n_test", t.n_test},
          {"test_indices", t.test_indices}};
}

TrainingSummary training_from(const json& j) {
  TrainingSummary t;
  t.test_mse = j.at("test_mse").get<double>();
  t.final_train_loss = j.at("final_train_loss").get<double>();
  t.final_val_loss = j.at("final_val_loss").get<double>();
  t.n_train = j.at("n_train").get<std::size_t>();
  t.n_val = j.at("n_val").get<std::size_t>();
  t.n_test = j.at("n_test").get<std::size_t>();
  t.test_indices = j.at("test_indices").get<std::vector<std::size_t>>();
  return t;
}

json records_json(const SessionState& s) {
  json its = json::array();
  for (const auto& r : s.iterations) its.push_back(to_json(r));
  return its;
}

json findings_json(const SessionState& s) {
  json out = json::array();
  for (const auto& f : s.findings) out.push_back(to_json(f));
  return out;
}

void recolor(std::vector<IterationRecord>& iterations) {
  std::vector<IterationRecord*> shown;
  for (auto& r : iterations) {
    if (r.visible) shown.push_back(&r);
  }
  const auto levels = assign_color_levels(shown.size());
  for (std::size_t i = 0; i < shown.size(); ++i) {
    shown[i]->predicted_color = levels[i];
    shown[i]->simulated_color = levels[i];
  }
}

const IterationRecord& iteration_at(const SessionState& s, int k) {
  if (k < 1 || static_cast<std::size_t>(k) > s.iterations.size()) {
    throw Error(ErrorKind::NotFound, "no iteration " + std::to_string(k) + " in session " + s.id);
  }
  return s.iterations[static_cast<std::size_t>(k - 1)];
}

IterationRecord& iteration_at(SessionState& s, int k) {
  return const_cast<IterationRecord&>(iteration_at(std::as_const(s), k));
}

SpecificAssessment assess(const CycleResult& r) {
  if (!r.valid) {
    const double nan = std::nan("");
    return {nan, nan, nan, nan};
  }
  return {r.dh_c, r.dh_e, r.w, r.cop};
}

}  // namespace

std::string_view to_string(JobStatus s) {
  switch (s) {
    case JobStatus::queued: return "queued";
    case JobStatus::running: return "running";
    case JobStatus::done: return "done";
    case JobStatus::failed: return "failed";
  }
  return "queued";
}

SessionOptions session_options_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorKind::SchemaMismatch, "session options must be a JSON object");
  SessionOptions o;
  auto count = [&](const char* key, auto& out) {
    if (!j.contains(key)) return;
    const auto& v = j.at(key);
    if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
      throw Error(ErrorKind::SchemaMismatch, std::string("'") + key + "' must be a non-negative integer");
    }
    out = j.at(key).get<std::remove_reference_t<decltype(out)>>();
  };
  try {
    o.name = j.value("name", o.name);
    o.notes = j.value("notes", o.notes);
    count("initial_runs", o.initial_runs);
    count("seed", o.seed);
    if (j.contains("train")) o.train = train_config_from_json(j.at("train"));
    if (j.contains("plant")) o.plant = plant_from_json(j.at("plant"));
    if (j.contains("box")) o.box = api::box_from(j.at("box"));
    if (j.contains("baseline") && !j.at("baseline").is_null()) {
      const auto& b = j.at("baseline");
      if (b.is_string() && b.get<std::string>() == "default") {
        o.baseline = default_baseline_params();
      } else {
        o.baseline = api::params_from(b);
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::SchemaMismatch, std::string("session options: ") + e.what());
  }
  return o;
}

std::array<std::optional<ConvexPolygon>, 4> initial_hulls(const Ensemble& ensemble) {
  std::array<std::vector<Point2>, 4> clouds;
  for (const auto& run : ensemble.runs()) {
    if (run.provenance != Provenance::initial || !run.result.valid) continue;
    for (std::size_t i = 0; i < 4; ++i) {
      const auto& p = run.result.points[i];
      clouds[i].push_back({p.enthalpy, std::log10(p.pressure)});
    }
  }
  std::array<std::optional<ConvexPolygon>, 4> hulls;
  for (std::size_t i = 0; i < 4; ++i) {
    try {
      hulls[i] = convex_hull(clouds[i]);
    } catch (const Error&) {
      hulls[i].reset();  // too few or collinear points
    }
  }
  return hulls;
}

std::array<bool, 4> inside_hulls(const std::array<std::optional<ConvexPolygon>, 4>& hulls,
                                 const std::array<CharPoint, 4>& points) {
  std::array<bool, 4> inside{};
  for (std::size_t i = 0; i < 4; ++i) {
    const auto& p = points[i];
    inside[i] = hulls[i] && std::isfinite(p.pressure) && p.pressure > 0.0 &&
                hulls[i]->contains({p.enthalpy, std::log10(p.pressure)});
  }
  return inside;
}

void save_session(const SessionState& s, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create " + dir.string() + ": " + ec.message());

  json meta = {{"format", kSessionFormat},
               {"version", kSessionVersion},
               {"id", s.id},
               {"name", s.name},
               {"notes", s.notes},
               {"created", s.created},
               {"seed", s.seed},
               {"initial_runs", s.initial_runs},
               {"box", to_json(s.ensemble.box())},
               {"plant", to_json(s.plant)},
               {"train", to_json(s.train)},
               {"training", training_json(s.training)},
               {"baseline", s.baseline ? to_json(s.baseline->params) : json(nullptr)},
               {"refinement_batches", s.refinement_batches},
               {"findings", findings_json(s)}};

  write_file(dir / "ensemble.csv", export_csv(s.ensemble.runs()));
  write_file(dir / "iterations.json", records_json(s).dump(2));
  write_file(dir / "model.json", s.net ? s.net->to_json().dump() : std::string("null"));
  write_file(dir / "session.json", meta.dump(2));
}

SessionState load_session(const fs::path& dir) {
  const json meta = parse_json(dir / "session.json");
  try {
    if (meta.at("format").get<std::string>() != kSessionFormat || meta.at("version").get<int>() != kSessionVersion) {
      throw Error(ErrorKind::SchemaMismatch, "unsupported session format in " + dir.string());
    }
    SessionState s;
    s.id = meta.at("id").get<std::string>();
    s.name = meta.at("name").get<std::string>();
    s.notes = meta.at("notes").get<std::string>();
    s.created = meta.at("created").get<std::string>();
    s.seed = meta.at("seed").get<std::uint64_t>();
    s.initial_runs = meta.at("initial_runs").get<std::size_t>();
    s.plant = plant_from_json(meta.at("plant"));
    s.train = train_config_from_json(meta.at("train"));
    s.training = training_from(meta.at("training"));
    s.refinement_batches = meta.at("refinement_batches").get<std::uint64_t>();
    for (const auto& f : meta.at("findings")) s.findings.push_back(finding_from_json(f));

    s.ensemble = Ensemble(box_from_json(meta.at("box")), s.seed, s.created);
    s.ensemble.restore(import_csv(read_file(dir / "ensemble.csv")));

    const json model = parse_json(dir / "model.json");
    if (!model.is_null()) s.net = std::make_shared<const InversionNet>(InversionNet::from_json(model));

    for (const auto& r : parse_json(dir / "iterations.json")) s.iterations.push_back(iteration_from_json(r));
    for (std::size_t i = 0; i < s.iterations.size(); ++i) {
      if (s.iterations[i].id != static_cast<int>(i + 1)) {
        throw Error(ErrorKind::SchemaMismatch, "iteration ids must be dense from 1");
      }
    }

    if (!meta.at("baseline").is_null()) {
      Run b;
      b.params = params_from_json(meta.at("baseline"));
      b.result = simulate(b.params, s.plant);
      s.baseline = b;
    }
    s.hulls = initial_hulls(s.ensemble);
    return s;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::SchemaMismatch, "session.json: " + std::string(e.what()));
  }
}

SessionFingerprint fingerprint(const SessionState& s) {
  SessionFingerprint f;
  f.ensemble = fnv1a(export_csv(s.ensemble.runs()));
  f.net = s.net ? s.net->checksum() : 0;
  f.records = fnv1a(findings_json(s).dump(), fnv1a(records_json(s).dump()));
  return f;
}

Workbench::Workbench(std::optional<fs::path> storage, unsigned sim_threads)
    : model_(RefrigerantModel::r134a()), storage_(std::move(storage)), sim_threads_(sim_threads) {
  if (storage_) {
    std::error_code ec;
    fs::create_directories(*storage_, ec);
    if (ec) throw Error(ErrorKind::Io, "cannot create " + storage_->string() + ": " + ec.message());
    std::vector<fs::path> dirs;
    for (const auto& entry : fs::directory_iterator(*storage_)) {
      if (entry.is_directory() && fs::exists(entry.path() / "session.json")) dirs.push_back(entry.path());
    }
    std::sort(dirs.begin(), dirs.end());
    for (const auto& d : dirs) open_session(d);
  }
  worker_ = std::jthread([this](std::stop_token st) { worker_loop(st); });
}

Workbench::~Workbench() {
  worker_.request_stop();
  jobs_cv_.notify_all();
}

std::string Workbench::create_session(const SessionOptions& o) {
  o.box.validate();
  validate(o.plant);
  o.train.validate();
  if (o.initial_runs == 0) throw Error(ErrorKind::InvalidArgument, "initial_runs must be positive");
  if (o.baseline) validate(*o.baseline);

  SessionState s;
  s.name = o.name;
  s.notes = o.notes;
  s.created = utc_now();
  s.seed = o.seed;
  s.initial_runs = o.initial_runs;
  s.plant = o.plant;
  s.train = o.train;
  s.ensemble = Ensemble(o.box, o.seed, s.created);

  const auto params = latin_hypercube(o.box, o.initial_runs, o.seed);
  const auto results = simulate_batch(params, o.plant, model_, sim_threads_);
  s.ensemble.append_runs(params, results, Provenance::initial, 0);

  const auto dataset = make_dataset(s.ensemble);
  auto trained = train_batch(dataset, o.train, o.box);
  s.training.test_mse = trained.report.test_mse;
  s.training.final_train_loss = trained.report.train_loss.empty() ? 0.0 : trained.report.train_loss.back();
  s.training.final_val_loss = trained.report.val_loss.empty() ? 0.0 : trained.report.val_loss.back();
  s.training.n_train = trained.report.n_train;
  s.training.n_val = trained.report.n_val;
  s.training.n_test = trained.report.n_test;
  s.training.test_indices = trained.report.test_indices;
  s.net = std::make_shared<const InversionNet>(std::move(trained.net));

  if (o.baseline) {
    Run b;
    b.params = *o.baseline;
    b.result = simulate(b.params, o.plant, model_);
    s.baseline = b;
  }
  s.hulls = initial_hulls(s.ensemble);

  std::string id;
  {
    std::lock_guard lock(registry_mu_);
    do {
      id = "s" + std::to_string(next_session_++);
    } while (sessions_.count(id) || (storage_ && fs::exists(*storage_ / id)));
    s.id = id;
    sessions_[id] = std::make_shared<Session>(std::move(s));
  }
  persist(id);
  return id;
}

std::string Workbench::open_session(const fs::path& dir) {
  SessionState s = load_session(dir);
  std::string id = s.id;
  std::lock_guard lock(registry_mu_);
  if (sessions_.count(id)) throw Error(ErrorKind::InvalidArgument, "session " + id + " is already open");
  if (id.size() > 1 && id[0] == 's') {
    std::uint64_t n = 0;
    const auto [ptr, ec] = std::from_chars(id.data() + 1, id.data() + id.size(), n);
    if (ec == std::errc() && ptr == id.data() + id.size()) next_session_ = std::max(next_session_, n + 1);
  }
  sessions_[id] = std::make_shared<Session>(std::move(s));
  return id;
}

void Workbench::save(const std::string& session_id, const fs::path& dir) const {
  session(session_id)->read([&](const SessionState& s) { save_session(s, dir); });
}

std::shared_ptr<Session> Workbench::session(const std::string& id) const {
  std::lock_guard lock(registry_mu_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) throw Error(ErrorKind::NotFound, "no session '" + id + "'");
  return it->second;
}

std::vector<std::string> Workbench::session_ids() const {
  std::lock_guard lock(registry_mu_);
  std::vector<std::string> ids;
  for (const auto& [id, _] : sessions_) ids.push_back(id);
  return ids;
}

void Workbench::persist(const std::string& id) const {
  if (!storage_) return;
  save(id, *storage_ / id);
}

ProposeResult Workbench::propose(const std::string& session_id, const CycleSpecification& spec) {
  auto s = session(session_id);
  ProposeResult out;
  out.geometry = build_cycle(model_, spec);
  const auto features = featurize(model_, out.geometry);

  const auto [net, plant, hulls] = s->read([](const SessionState& st) { return std::tuple(st.net, st.plant, st.hulls); });
  if (!net) throw Error(ErrorKind::NotTrained, "session " + session_id + " has no trained model");
  const ControlParams predicted = net->predict(features);
  out.center = simulate(predicted, plant, model_);
  out.inside_hull = inside_hulls(hulls, out.geometry.points);

  out.record = s->write([&](SessionState& st) {
    const int k = static_cast<int>(st.iterations.size()) + 1;
    const std::array<ControlParams, 1> p{predicted};
    const std::array<CycleResult, 1> r{out.center};
    const auto ids = st.ensemble.append_runs(p, r, Provenance::predicted, k);
    IterationRecord rec;
    rec.id = k;
    rec.name = "Iteration " + std::to_string(k);
    rec.spec = spec;
    rec.predicted_params = predicted;
    rec.predicted_assessment = assess(out.center);
    rec.center_run_id = ids.front();
    st.iterations.push_back(rec);
    recolor(st.iterations);
    return st.iterations.back();
  });
  persist(session_id);
  return out;
}

std::uint64_t Workbench::refine(const std::string& session_id, int iteration, std::size_t runs, double fraction) {
  auto s = session(session_id);
  if (runs == 0) throw Error(ErrorKind::InvalidArgument, "a refinement needs at least one run");
  if (!(fraction > 0.0 && fraction <= 0.5)) {
    throw Error(ErrorKind::InvalidArgument, "refinement fraction must lie in (0, 0.5]");
  }
  s->read([&](const SessionState& st) { (void)iteration_at(st, iteration); });

  std::lock_guard lock(jobs_mu_);
  if (const auto it = active_jobs_.find(session_id); it != active_jobs_.end()) {
    throw Error(ErrorKind::JobAlreadyRunning,
                "refinement job " + std::to_string(it->second) + " is still active for session " + session_id);
  }
  RefinementJob job;
  job.id = next_job_++;
  job.session_id = session_id;
  job.iteration = iteration;
  job.requested = runs;
  job.fraction = fraction;
  jobs_[job.id] = job;
  active_jobs_[session_id] = job.id;
  queue_.push_back(job.id);
  jobs_cv_.notify_all();
  return job.id;
}

RefinementJob Workbench::job(std::uint64_t id) const {
  std::lock_guard lock(jobs_mu_);
  const auto it = jobs_.find(id);
  if (it == jobs_.end()) throw Error(ErrorKind::NotFound, "no job " + std::to_string(id));
  return it->second;
}

RefinementJob Workbench::wait(std::uint64_t id) const {
  std::unique_lock lock(jobs_mu_);
  if (!jobs_.count(id)) throw Error(ErrorKind::NotFound, "no job " + std::to_string(id));
  jobs_cv_.wait(lock, [&] {
    const auto st = jobs_.at(id).status;
    return st == JobStatus::done || st == JobStatus::failed;
  });
  return jobs_.at(id);
}

void Workbench::worker_loop(std::stop_token stop) {
  while (true) {
    std::uint64_t id = 0;
    {
      std::unique_lock lock(jobs_mu_);
      if (!jobs_cv_.wait(lock, stop, [&] { return !queue_.empty(); })) return;
      id = queue_.front();
      queue_.pop_front();
      jobs_.at(id).status = JobStatus::running;
    }
    jobs_cv_.notify_all();
    run_job(id);
  }
}

void Workbench::run_job(std::uint64_t job_id) {
  RefinementJob job = this->job(job_id);
  std::vector<std::uint64_t> ids;
  std::size_t valid = 0;
  std::optional<OnlineReport> online;
  std::string error;
  try {
    auto s = session(job.session_id);
    struct Snapshot {
      ControlParams center;
      ParameterBox box;
      PlantConfig plant;
      TrainConfig train;
      std::shared_ptr<const InversionNet> net;
      std::uint64_t seed;
    };
    const Snapshot snap = s->read([&](const SessionState& st) {
      const auto& rec = iteration_at(st, job.iteration);
      const std::uint64_t seed =
          splitmix(splitmix(st.seed ^ static_cast<std::uint64_t>(job.iteration)) + st.refinement_batches);
      return Snapshot{rec.predicted_params, st.ensemble.box(), st.plant, st.train, st.net, seed};
    });

    const auto params = refine_around(snap.center, snap.box, {job.requested, job.fraction, false}, snap.seed);
    const auto results = simulate_batch(params, snap.plant, model_, sim_threads_);

    std::vector<Run> fresh(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
      fresh[i].params = params[i];
      fresh[i].result = results[i];
      fresh[i].provenance = Provenance::refinement;
      fresh[i].iteration = job.iteration;
      if (results[i].valid) ++valid;
    }

    std::shared_ptr<const InversionNet> tuned;
    if (snap.net) {
      const auto examples = make_dataset(fresh);
      if (!examples.empty()) {
        InversionNet copy = *snap.net;
        try {
          online = train_online(copy, examples, snap.train);
          if (online->accepted) tuned = std::make_shared<const InversionNet>(std::move(copy));
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::NonFiniteLoss) throw;
          error = e.what();  // runs are kept, the model is left as it was
        }
      }
    }

    s->write([&](SessionState& st) {
      auto& rec = iteration_at(st, job.iteration);
      ids = st.ensemble.append_runs(params, results, Provenance::refinement, job.iteration);
      rec.refinement_run_ids.insert(rec.refinement_run_ids.end(), ids.begin(), ids.end());
      if (tuned) st.net = tuned;
      ++st.refinement_batches;
    });
    persist(job.session_id);
  } catch (const std::exception& e) {
    std::lock_guard lock(jobs_mu_);
    auto& j = jobs_.at(job_id);
    j.status = JobStatus::failed;
    j.error = e.what();
    active_jobs_.erase(job.session_id);
    jobs_cv_.notify_all();
    return;
  }
  std::lock_guard lock(jobs_mu_);
  auto& j = jobs_.at(job_id);
  j.run_ids = std::move(ids);
  j.valid_runs = valid;
  j.online = online;
  j.error = error;
  j.status = JobStatus::done;
  active_jobs_.erase(job.session_id);
  jobs_cv_.notify_all();
}

std::vector<std::pair<Output, Summary>> Workbench::statistics(const std::string& session_id,
                                                              std::optional<int> iteration) const {
  return session(session_id)->read([&](const SessionState& st) {
    if (iteration) (void)iteration_at(st, *iteration);
    return iteration_statistics(st.ensemble, iteration);
  });
}

Finding Workbench::add_finding(const std::string& session_id, Finding finding) {
  auto s = session(session_id);
  if (finding.name.empty()) throw Error(ErrorKind::InvalidArgument, "a finding needs a name");
  if (finding.color < 0 || finding.color >= kColorLevels) {
    throw Error(ErrorKind::InvalidArgument, "finding color must be a level in 0..6");
  }
  s->write([&](SessionState& st) {
    for (const auto id : finding.case_ids) {
      if (!st.ensemble.find(id)) throw Error(ErrorKind::NotFound, "no run " + std::to_string(id));
    }
    st.findings.push_back(finding);
  });
  persist(session_id);
  return finding;
}

IterationRecord Workbench::patch_iteration(const std::string& session_id, int iteration, const IterationPatch& patch) {
  auto s = session(session_id);
  auto rec = s->write([&](SessionState& st) {
    auto& r = iteration_at(st, iteration);
    if (patch.name) r.name = *patch.name;
    if (patch.notes) r.notes = *patch.notes;
    if (patch.visible) r.visible = *patch.visible;
    recolor(st.iterations);
    return r;
  });
  persist(session_id);
  return rec;
}

std::string Workbench::export_csv(const std::string& session_id, std::span<const std::uint64_t> ids) const {
  return session(session_id)->read([&](const SessionState& st) {
    return ids.empty() ? idoe::export_csv(st.ensemble.runs()) : idoe::export_csv(st.ensemble, ids);
  });
}

DiagramPayload Workbench::diagram() const {
  std::call_once(diagram_once_, [this] { diagram_ = diagram_geometry(model_, DiagramOptions::defaults(model_)); });
  return diagram_;
}

json session_summary_json(const SessionState& s) {
  json its = json::array();
  for (const auto& r : s.iterations) its.push_back(api::iteration_json(r));
  json findings = json::array();
  for (const auto& f : s.findings) findings.push_back(api::finding_json(f));
  std::size_t initial = 0;
  std::size_t initial_valid = 0;
  for (const auto& r : s.ensemble.runs()) {
    if (r.provenance != Provenance::initial) continue;
    ++initial;
    if (r.result.valid) ++initial_valid;
  }
  json baseline = nullptr;
  if (s.baseline) {
    baseline = api::result_json(s.baseline->result);
    baseline["params"] = api::params_json(s.baseline->params);
  }
  return {{"id", s.id},
          {"name", s.name},
          {"notes", s.notes},
          {"created", s.created},
          {"seed", s.seed},
          {"runs", s.ensemble.size()},
          {"valid_runs", s.ensemble.valid_count()},
          {"initial_runs", initial},
          {"initial_valid_runs", initial_valid},
          {"box", api::box_json(s.ensemble.box())},
          {"model",
           {{"trained", s.net && s.net->trained()},
            {"hidden", s.net ? s.net->hidden() : 0},
            {"checksum", s.net ? hex64(s.net->checksum()) : std::string()},
            {"test_mse", s.training.test_mse},
            {"final_train_loss", s.training.final_train_loss},
            {"final_val_loss", s.training.final_val_loss},
            {"n_train", s.training.n_train},
            {"n_val", s.training.n_val},
            {"n_test", s.training.n_test}}},
          {"baseline", baseline},
          {"iterations", its},
          {"findings", findings}};
}

json job_json(const RefinementJob& j) {
  json online = nullptr;
  if (j.online) {
    online = {{"mse_before", j.online->mse_before},
              {"mse_after", j.online->mse_after},
              {"accepted", j.online->accepted},
              {"examples", j.online->examples}};
  }
  return {{"id", j.id},
          {"session", j.session_id},
          {"iteration", j.iteration},
          {"requested", j.requested},
          {"fraction", j.fraction},
          {"status", to_string(j.status)},
          {"run_ids", j.run_ids},
          {"valid_runs", j.valid_runs},
          {"online", online},
          {"error", j.error}};
}

}  // namespace idoe
