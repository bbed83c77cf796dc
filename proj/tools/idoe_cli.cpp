// Command-line front end. Session verbs work on a session directory and
// write it back after every mutation; output is JSON in the service units.

#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "idoe/calibration.hpp"
#include "idoe/error.hpp"
#include "idoe/http_api.hpp"
#include "idoe/json_io.hpp"
#include "idoe/replay.hpp"
#include "idoe/workbench.hpp"

namespace {

using nlohmann::json;
using namespace idoe;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json load_json(const std::string& path) {
  try {
    return json::parse(slurp(path));
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::SchemaMismatch, path + ": " + e.what());
  }
}

void emit(const std::string& out, const std::string& content) {
  if (out.empty() || out == "-") {
    std::cout << content;
    if (!content.empty() && content.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream f(out, std::ios::binary);
  if (!f) throw Error(ErrorKind::Io, "cannot write " + out);
  f << content;
}

void emit(const std::string& out, const json& j) { emit(out, j.dump(2)); }

PlantConfig plant_or_default(const std::string& path) {
  return path.empty() ? PlantConfig{} : plant_from_json(load_json(path));
}

std::vector<std::uint64_t> split_ids(const std::string& s) {
  std::vector<std::uint64_t> ids;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (!tok.empty()) ids.push_back(std::stoull(tok));
  }
  return ids;
}

/// Opens a persisted session, applies `f` and writes the session back.
template <typename F>
void with_session(const std::string& dir, bool mutate, F&& f) {
  Workbench wb;
  const auto id = wb.open_session(dir);
  f(wb, id);
  if (mutate) wb.save(id, dir);
}

struct SpecArgs {
  double p_low = 0.0;
  double p_high = 0.0;
  double subcooling = 0.0;
  double superheat = 0.0;
  double eta = kDefaultIsentropicEfficiency;

  void attach(CLI::App* app) {
    app->add_option("--p-low", p_low, "evaporation pressure, bar")->required();
    app->add_option("--p-high", p_high, "condensation pressure, bar")->required();
    app->add_option("--subcooling", subcooling, "K")->required();
    app->add_option("--superheat", superheat, "K")->required();
    app->add_option("--eta", eta, "isentropic compressor efficiency");
  }
  CycleSpecification spec() const {
    return api::spec_from({{"p_low", p_low}, {"p_high", p_high}, {"subcooling", subcooling},
                           {"superheat", superheat}, {"eta_isentropic", eta}});
  }
};

HttpServer* g_server = nullptr;
extern "C" void on_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Interactive design of experiments workbench for a vehicle AC cycle"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string out;
  app.add_option("-o,--out", out, "output file (default stdout)");

  // simulate
  auto* sim = app.add_subcommand("simulate", "simulate one operating point");
  double n_pump = 0, mf_cond = 0, t_cabin = 0, mf_evap = 0, a_eff = 0;
  std::string plant_path;
  sim->add_option("--n-pump", n_pump, "compressor speed, rev/min")->required();
  sim->add_option("--mf-air-cond", mf_cond, "condenser air flow, kg/s")->required();
  sim->add_option("--t-air-cabin", t_cabin, "cabin air temperature, C")->required();
  sim->add_option("--mf-air-evap", mf_evap, "evaporator air flow, kg/s")->required();
  sim->add_option("--a-eff-valve", a_eff, "effective valve area, m2")->required();
  sim->add_option("--plant", plant_path, "plant config JSON (SI)");

  // calibrate
  auto* cal = app.add_subcommand("calibrate", "find control parameters reproducing a target operating point");
  double c_plow = 2.5, c_phigh = 12.0, c_sc = 7.0, c_sh = 8.0;
  cal->add_option("--p-low", c_plow, "bar");
  cal->add_option("--p-high", c_phigh, "bar");
  cal->add_option("--subcooling", c_sc, "K");
  cal->add_option("--superheat", c_sh, "K");
  cal->add_option("--plant", plant_path, "plant config JSON (SI)");

  // diagram
  auto* diag = app.add_subcommand("diagram", "p-h diagram polylines");

  // ensemble new / stats / export on plain CSV files
  auto* ens = app.add_subcommand("ensemble", "initial ensembles as CSV");
  ens->require_subcommand(1);
  auto* ens_new = ens->add_subcommand("new", "Latin hypercube ensemble, simulated");
  std::size_t runs = 5000;
  std::uint64_t seed = 1;
  unsigned threads = 0;
  std::string box_path;
  ens_new->add_option("--runs", runs, "number of runs");
  ens_new->add_option("--seed", seed, "sampling seed");
  ens_new->add_option("--threads", threads, "simulation threads (0: all cores)");
  ens_new->add_option("--plant", plant_path, "plant config JSON (SI)");
  ens_new->add_option("--box", box_path, "parameter box JSON (service units)");

  auto* stats = app.add_subcommand("stats", "output statistics of an ensemble CSV or a session");
  std::string csv_path, dir;
  std::optional<int> iteration;
  auto* stats_src = stats->add_option_group("source");
  stats_src->add_option("--csv", csv_path, "ensemble CSV");
  stats_src->add_option("--session", dir, "session directory");
  stats_src->require_option(1);
  stats->add_option("--iteration", iteration, "iteration id (default: initial runs)");

  auto* exp = app.add_subcommand("export", "export session runs as CSV");
  std::string ids_arg, finding_name;
  exp->add_option("--session", dir, "session directory")->required();
  exp->add_option("--ids", ids_arg, "comma-separated run ids");
  exp->add_option("--finding", finding_name, "finding name");
  exp->add_option("--iteration", iteration, "iteration id");

  // session lifecycle
  auto* ses = app.add_subcommand("session", "create or show a session");
  ses->require_subcommand(1);
  auto* ses_create = ses->add_subcommand("create", "simulate the initial ensemble and train the model");
  std::string options_path, name;
  ses_create->add_option("--dir", dir, "session directory")->required();
  ses_create->add_option("--options", options_path, "session options JSON");
  ses_create->add_option("--runs", runs, "initial runs");
  ses_create->add_option("--seed", seed, "sampling seed");
  ses_create->add_option("--name", name, "scenario name");
  ses_create->add_option("--threads", threads, "simulation threads (0: all cores)");
  auto* ses_show = ses->add_subcommand("show", "session summary");
  ses_show->add_option("--dir", dir, "session directory")->required();

  auto* prop = app.add_subcommand("propose", "predict control parameters for a desired cycle");
  SpecArgs spec_args;
  prop->add_option("--session", dir, "session directory")->required();
  spec_args.attach(prop);

  auto* ref = app.add_subcommand("refine", "simulate runs around an iteration's prediction");
  std::size_t ref_runs = 20;
  double fraction = 0.05;
  int ref_iteration = 0;
  ref->add_option("--session", dir, "session directory")->required();
  ref->add_option("--iteration", ref_iteration, "iteration id")->required();
  ref->add_option("--runs", ref_runs, "runs in the batch, center included");
  ref->add_option("--fraction", fraction, "relative half-width of the sampling box");

  auto* runs_cmd = app.add_subcommand("runs", "list session runs as JSON");
  std::string provenance;
  std::optional<bool> valid_only;
  runs_cmd->add_option("--session", dir, "session directory")->required();
  runs_cmd->add_option("--provenance", provenance, "initial | predicted | refinement");
  runs_cmd->add_option("--iteration", iteration, "iteration id");
  runs_cmd->add_option("--valid", valid_only, "true or false");

  auto* fnd = app.add_subcommand("finding", "log of findings");
  fnd->require_subcommand(1);
  auto* fnd_add = fnd->add_subcommand("add", "store a finding");
  std::string note;
  int color = 0;
  fnd_add->add_option("--session", dir, "session directory")->required();
  fnd_add->add_option("--name", name, "finding name")->required();
  fnd_add->add_option("--ids", ids_arg, "comma-separated run ids")->required();
  fnd_add->add_option("--note", note, "free text");
  fnd_add->add_option("--color", color, "color level 0-6");

  auto* itc = app.add_subcommand("iteration", "iteration records");
  itc->require_subcommand(1);
  auto* it_patch = itc->add_subcommand("patch", "rename, hide or annotate an iteration");
  std::optional<std::string> new_name, notes;
  std::optional<bool> visible;
  it_patch->add_option("--session", dir, "session directory")->required();
  it_patch->add_option("--iteration", ref_iteration, "iteration id")->required();
  it_patch->add_option("--name", new_name, "new name");
  it_patch->add_option("--notes", notes, "notes");
  it_patch->add_option("--visible", visible, "true or false");

  auto* rep = app.add_subcommand("replay", "run a scripted scenario and print the transcript");
  std::string script_path, storage;
  rep->add_option("script", script_path, "script JSON")->required();
  rep->add_option("--storage", storage, "persist the replay session under this directory");
  rep->add_option("--threads", threads, "simulation threads (0: all cores)");

  auto* srv = app.add_subcommand("serve", "HTTP/JSON service");
  std::string host = "127.0.0.1";
  int port = 8080;
  srv->add_option("--host", host, "bind address");
  srv->add_option("--port", port, "port (0: any free port)");
  srv->add_option("--storage", storage, "session storage root");
  srv->add_option("--threads", threads, "simulation threads (0: all cores)");

  auto* sur = app.add_subcommand("surrogate", "surrogate model utilities");
  sur->require_subcommand(1);
  auto* sweep = sur->add_subcommand("sweep", "test MSE per hidden width on a fresh ensemble");
  std::vector<std::size_t> widths = {16, 32, 64, 128};
  std::size_t epochs = 300;
  runs = 5000;
  sweep->add_option("--runs", runs, "ensemble runs");
  sweep->add_option("--seed", seed, "sampling seed");
  sweep->add_option("--widths", widths, "hidden widths")->delimiter(',');
  sweep->add_option("--epochs", epochs, "epochs per width");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) {
      const auto p = api::params_from({{"n_pump", n_pump}, {"mf_air_cond", mf_cond}, {"t_air_cabin", t_cabin},
                                       {"mf_air_evap", mf_evap}, {"a_eff_valve", a_eff}});
      validate(p);
      emit(out, api::result_json(simulate(p, plant_or_default(plant_path))));
    } else if (cal->parsed()) {
      const CalibrationTarget target{c_plow * api::kPaPerBar, c_phigh * api::kPaPerBar, c_sc, c_sh};
      const auto r = calibrate(plant_or_default(plant_path), ParameterBox::defaults(), target);
      emit(out, json{{"params", api::params_json(r.params)},
                     {"result", api::result_json(r.result)},
                     {"relative_errors", r.relative_errors},
                     {"max_relative_error", r.max_relative_error},
                     {"evaluations", r.evaluations},
                     {"within_tolerance", r.within_tolerance}});
    } else if (diag->parsed()) {
      const auto& model = RefrigerantModel::r134a();
      emit(out, api::diagram_json(diagram_geometry(model, DiagramOptions::defaults(model))));
    } else if (ens_new->parsed()) {
      const auto box = box_path.empty() ? ParameterBox::defaults() : api::box_from(load_json(box_path));
      const auto params = latin_hypercube(box, runs, seed);
      const auto results = simulate_batch(params, plant_or_default(plant_path), RefrigerantModel::r134a(), threads);
      Ensemble e(box, seed, "");
      e.append_runs(params, results, Provenance::initial, 0);
      emit(out, export_csv(e.runs()));
    } else if (stats->parsed()) {
      if (!csv_path.empty()) {
        Ensemble e;
        e.restore(import_csv(slurp(csv_path)));
        emit(out, {{"iteration", iteration ? json(*iteration) : json(nullptr)},
                   {"outputs", api::statistics_json(iteration_statistics(e, iteration))}});
      } else {
        with_session(dir, false, [&](Workbench& wb, const std::string& id) {
          emit(out, {{"iteration", iteration ? json(*iteration) : json(nullptr)},
                     {"outputs", api::statistics_json(wb.statistics(id, iteration))}});
        });
      }
    } else if (exp->parsed()) {
      with_session(dir, false, [&](Workbench& wb, const std::string& id) {
        std::vector<std::uint64_t> ids = split_ids(ids_arg);
        wb.session(id)->read([&](const SessionState& s) {
          if (!finding_name.empty()) {
            const auto it = std::find_if(s.findings.begin(), s.findings.end(),
                                         [&](const Finding& f) { return f.name == finding_name; });
            if (it == s.findings.end()) throw Error(ErrorKind::NotFound, "no finding '" + finding_name + "'");
            ids = it->case_ids;
          } else if (iteration) {
            for (const auto& r : s.ensemble.runs()) {
              if (r.iteration == *iteration) ids.push_back(r.id);
            }
          }
        });
        emit(out, wb.export_csv(id, ids));
      });
    } else if (ses_create->parsed()) {
      SessionOptions opts = options_path.empty() ? SessionOptions{} : session_options_from_json(load_json(options_path));
      if (ses_create->count("--runs")) opts.initial_runs = runs;
      if (ses_create->count("--seed")) opts.seed = seed;
      if (!name.empty()) opts.name = name;
      Workbench wb(std::nullopt, threads);
      const auto id = wb.create_session(opts);
      wb.save(id, dir);
      emit(out, wb.session(id)->read([](const SessionState& s) { return session_summary_json(s); }));
    } else if (ses_show->parsed()) {
      with_session(dir, false, [&](Workbench& wb, const std::string& id) {
        emit(out, wb.session(id)->read([](const SessionState& s) { return session_summary_json(s); }));
      });
    } else if (prop->parsed()) {
      with_session(dir, true, [&](Workbench& wb, const std::string& id) {
        const auto r = wb.propose(id, spec_args.spec());
        emit(out, json{{"iteration", api::iteration_json(r.record)},
                       {"geometry", api::geometry_json(r.geometry)},
                       {"inside_hull", r.inside_hull},
                       {"center", api::result_json(r.center)}});
      });
    } else if (ref->parsed()) {
      with_session(dir, true, [&](Workbench& wb, const std::string& id) {
        const auto job = wb.wait(wb.refine(id, ref_iteration, ref_runs, fraction));
        emit(out, job_json(job));
        if (job.status == JobStatus::failed) throw Error(ErrorKind::NoConvergence, job.error);
      });
    } else if (runs_cmd->parsed()) {
      std::optional<Provenance> prov;
      if (!provenance.empty()) prov = provenance_from_string(provenance);
      with_session(dir, false, [&](Workbench& wb, const std::string& id) {
        json rows = json::array();
        wb.session(id)->read([&](const SessionState& s) {
          for (const auto& r : s.ensemble.runs()) {
            if (prov && r.provenance != *prov) continue;
            if (iteration && r.iteration != *iteration) continue;
            if (valid_only && r.result.valid != *valid_only) continue;
            rows.push_back(api::run_json(r));
          }
        });
        emit(out, {{"total", rows.size()}, {"runs", rows}});
      });
    } else if (fnd_add->parsed()) {
      with_session(dir, true, [&](Workbench& wb, const std::string& id) {
        Finding f;
        f.name = name;
        f.case_ids = split_ids(ids_arg);
        f.note = note;
        f.color = color;
        emit(out, api::finding_json(wb.add_finding(id, f)));
      });
    } else if (it_patch->parsed()) {
      with_session(dir, true, [&](Workbench& wb, const std::string& id) {
        emit(out, api::iteration_json(wb.patch_iteration(id, ref_iteration, {new_name, visible, notes})));
      });
    } else if (rep->parsed()) {
      const auto script = parse_script(load_json(script_path));
      std::optional<std::filesystem::path> root;
      if (!storage.empty()) root = storage;
      Workbench wb(root, threads);
      emit(out, replay_usecase(script, wb));
    } else if (srv->parsed()) {
      std::optional<std::filesystem::path> root;
      if (!storage.empty()) root = storage;
      Workbench wb(root, threads);
      HttpServer server(wb);
      const int bound = server.bind(host, port);
      if (bound < 0) throw Error(ErrorKind::Io, "cannot bind " + host + ":" + std::to_string(port));
      std::cerr << "listening on http://" << host << ":" << bound << std::endl;
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      server.listen();
      g_server = nullptr;
    } else if (sweep->parsed()) {
      const auto params = latin_hypercube(ParameterBox::defaults(), runs, seed);
      const auto results = simulate_batch(params, PlantConfig{});
      Ensemble e(ParameterBox::defaults(), seed, "");
      e.append_runs(params, results, Provenance::initial, 0);
      TrainConfig cfg;
      cfg.epochs = epochs;
      json rows = json::array();
      for (const auto& w : sweep_width(make_dataset(e), widths, cfg)) {
        rows.push_back({{"hidden", w.hidden}, {"test_mse", w.test_mse}, {"final_val_loss", w.final_val_loss}});
      }
      emit(out, rows);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << to_string(e.kind()) << ": " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
