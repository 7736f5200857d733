#include "jointlmr/cli.hpp"

#include "jointlmr/decomposition.hpp"
#include "jointlmr/errors.hpp"
#include "jointlmr/fusion.hpp"
#include "jointlmr/io.hpp"
#include "jointlmr/synth.hpp"
#include "jointlmr/version.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>

namespace jointlmr::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// Option bundles, filled by CLI11 and consumed by the command bodies.

struct SolverFlags {
  std::optional<double> lambda;
  std::optional<double> mu;
  std::optional<int> max_iters;
  std::optional<double> epsilon;
  std::string config_path;

  /// defaults < config file < flags
  SolverConfig resolve() const {
    SolverConfig cfg;
    if (!config_path.empty()) io::load_config(config_path).apply_to(cfg);
    io::ConfigOverrides{lambda, mu, max_iters, epsilon}.apply_to(cfg);
    cfg.validate();
    return cfg;
  }
};

void add_solver_flags(CLI::App* cmd, SolverFlags& f, bool with_max_iters = true) {
  cmd->add_option("--lambda", f.lambda, "Sparsity weight lambda (default 1.0)");
  cmd->add_option("--mu", f.mu, "Penalty parameter mu (default 10.0)");
  if (with_max_iters) {
    cmd->add_option("--max-iters", f.max_iters, "Iteration cap K (default 3000)");
  }
  cmd->add_option("--epsilon", f.epsilon,
                  "Absolute tolerance on the max Frobenius residual (default 1e-7)");
  cmd->add_option("--config", f.config_path,
                  "JSON file with any of lambda, mu, max_iters, epsilon");
}

struct JointOpts {
  std::string input_i;
  std::string input_t;
  std::string out_dir;
  std::string format = "rdm";
  std::string align = "none";
  bool center = false;
  SolverFlags solver;
};

struct DecomposeOpts {
  std::string input;
  std::string out_dir;
  std::string format = "rdm";
  std::optional<double> svt_tau;
  bool center = false;
  SolverFlags solver;
};

struct FuseOpts {
  std::string l;
  std::string s_i;
  std::string s_t;
  std::string params;
  std::string out;
};

struct GenerateOpts {
  SyntheticSpec spec;
  std::string out_dir;
  std::string format = "rdm";
};

struct EvalOpts {
  std::string estimate_dir;
  std::string truth_dir;
};

struct SweepOpts {
  JointOpts joint;
  std::vector<int> checkpoints{1000, 2000, 3000, 4000};
  std::string truth_dir;
};

// ---------------------------------------------------------------------------
// Shared helpers.

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

json timing_record(const Stopwatch& clock, const std::string& started_at) {
  return {{"wall_clock_seconds", clock.seconds()}, {"started_at", started_at}};
}

json config_record(const SolverConfig& cfg) {
  return {{"lambda", cfg.lambda},
          {"mu", cfg.mu},
          {"max_iters", cfg.max_iters},
          {"epsilon", cfg.epsilon}};
}

json file_record(const fs::path& path) {
  return {{"path", path.string()}, {"sha256", io::sha256_file(path)}};
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw IoError("cannot create output directory '" + dir.string() + "'");
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("error while writing '" + path.string() + "'");
}

void write_manifest(const fs::path& path, const json& manifest) {
  write_text(path, manifest.dump(2) + "\n");
}

DenseMatrix require_input(const fs::path& path) {
  if (!fs::exists(path)) throw IoError("input file '" + path.string() + "' does not exist");
  return io::read_matrix(path);
}

/// Writes `m` as <dir>/<stem><ext> and returns its manifest record.
json emit_matrix(const fs::path& dir, const std::string& stem, const DenseMatrix& m,
                 io::MatrixFormat format) {
  const fs::path path = dir / (stem + std::string(io::file_extension(format)));
  io::write_matrix(path, m);
  return {{"path", path.filename().string()}, {"sha256", io::sha256_file(path)}};
}

/// Finds <dir>/<stem>.rdm, falling back to <dir>/<stem>.csv.
fs::path locate_matrix(const fs::path& dir, const std::string& stem) {
  for (const char* ext : {".rdm", ".csv"}) {
    fs::path p = dir / (stem + ext);
    if (fs::exists(p)) return p;
  }
  throw IoError("no " + stem + ".rdm or " + stem + ".csv in '" + dir.string() + "'");
}

struct ComponentSet {
  DenseMatrix l, s_i, s_t;
};

ComponentSet load_components(const fs::path& dir) {
  return {io::read_matrix(locate_matrix(dir, "L")),
          io::read_matrix(locate_matrix(dir, "S_I")),
          io::read_matrix(locate_matrix(dir, "S_T"))};
}

std::string metrics_report(const RecoveryMetrics& m) {
  std::ostringstream os;
  os << "rel_err_L=" << io::format_double(m.rel_err_l) << "\n"
     << "rel_err_S_I=" << io::format_double(m.rel_err_s_i) << "\n"
     << "rel_err_S_T=" << io::format_double(m.rel_err_s_t) << "\n"
     << "rank_L=" << m.rank_l << "\n"
     << "support_tp=" << m.true_positives << "\n"
     << "support_fp=" << m.false_positives << "\n"
     << "support_fn=" << m.false_negatives << "\n"
     << "support_precision=" << io::format_double(m.precision) << "\n"
     << "support_recall=" << io::format_double(m.recall) << "\n"
     << "support_f1=" << io::format_double(m.f1) << "\n";
  return os.str();
}

json metrics_record(const RecoveryMetrics& m) {
  return {{"rel_err_L", m.rel_err_l},       {"rel_err_S_I", m.rel_err_s_i},
          {"rel_err_S_T", m.rel_err_s_t},   {"rank_L", m.rank_l},
          {"support_precision", m.precision}, {"support_recall", m.recall},
          {"support_f1", m.f1}};
}

struct JointInputs {
  DenseMatrix i;
  DenseMatrix t;
  json record;
};

JointInputs ingest_pair(const JointOpts& o) {
  const io::AlignMode align = io::parse_align_mode(o.align);
  DenseMatrix i = require_input(o.input_i);
  DenseMatrix t = require_input(o.input_t);
  auto [ai, at] = io::align_rows(i, t, align);
  if (o.center) {
    ai = io::center_columns(ai);
    at = io::center_columns(at);
  }
  json record = {{"i", file_record(o.input_i)},
                 {"t", file_record(o.input_t)},
                 {"align", io::to_string(align)},
                 {"center", o.center},
                 {"rows", ai.rows()},
                 {"cols", ai.cols()}};
  return {std::move(ai), std::move(at), std::move(record)};
}

// ---------------------------------------------------------------------------
// Commands.

int cmd_joint(const JointOpts& o, std::ostream& out) {
  const std::string started_at = utc_timestamp();
  const Stopwatch clock;
  const SolverConfig cfg = o.solver.resolve();
  const io::MatrixFormat format = io::parse_matrix_format(o.format);
  JointInputs in = ingest_pair(o);

  const JointDecomposition dec = joint_decompose(in.i, in.t, cfg);

  const fs::path dir = o.out_dir;
  ensure_dir(dir);
  json outputs;
  outputs["L"] = emit_matrix(dir, "L", dec.l, format);
  outputs["S_I"] = emit_matrix(dir, "S_I", dec.s_i, format);
  outputs["S_T"] = emit_matrix(dir, "S_T", dec.s_t, format);

  std::string table = "iteration,r_I,r_T\n";
  for (std::size_t k = 0; k < dec.residual_history.size(); ++k) {
    const ResidualPair& r = dec.residual_history[k];
    table += std::to_string(k + 1) + "," + io::format_double(r.r_i) + "," +
             io::format_double(r.r_t) + "\n";
  }
  write_text(dir / "residuals.csv", table);
  outputs["residuals"] = file_record(dir / "residuals.csv");
  outputs["residuals"]["path"] = "residuals.csv";

  const ResidualPair fin = dec.final_residuals();
  json manifest = {
      {"format_version", kManifestVersion},
      {"tool_version", std::string(kVersion)},
      {"command", "joint"},
      {"config", config_record(cfg)},
      {"config_file", o.solver.config_path},
      {"inputs", in.record},
      {"output_format", io::to_string(format)},
      {"outputs", outputs},
      {"result",
       {{"iterations_run", dec.iterations_run},
        {"converged", dec.converged},
        {"final_residuals", {{"r_I", fin.r_i}, {"r_T", fin.r_t}}}}},
  };
  manifest["timing"] = timing_record(clock, started_at);
  write_manifest(dir / "manifest.json", manifest);

  out << "converged=" << (dec.converged ? "true" : "false") << "\n"
      << "iterations=" << dec.iterations_run << "\n"
      << "r_I=" << io::format_double(fin.r_i) << "\n"
      << "r_T=" << io::format_double(fin.r_t) << "\n";
  return kOk;
}

int cmd_decompose(const DecomposeOpts& o, std::ostream& out) {
  const std::string started_at = utc_timestamp();
  const Stopwatch clock;
  const SolverConfig cfg = o.solver.resolve();
  const double svt_tau = o.svt_tau.value_or(1.0 / cfg.mu);
  const io::MatrixFormat format = io::parse_matrix_format(o.format);

  DenseMatrix x = require_input(o.input);
  if (o.center) x = io::center_columns(x);

  const SingleDecomposition dec = lmr_decompose(x, cfg, svt_tau);

  const fs::path dir = o.out_dir;
  ensure_dir(dir);
  json outputs;
  outputs["L"] = emit_matrix(dir, "L", dec.l, format);
  outputs["S"] = emit_matrix(dir, "S", dec.s, format);

  std::string table = "iteration,r\n";
  for (std::size_t k = 0; k < dec.residual_history.size(); ++k) {
    table += std::to_string(k + 1) + "," + io::format_double(dec.residual_history[k]) + "\n";
  }
  write_text(dir / "residuals.csv", table);
  outputs["residuals"] = file_record(dir / "residuals.csv");
  outputs["residuals"]["path"] = "residuals.csv";

  const double fin = dec.residual_history.empty() ? 0.0 : dec.residual_history.back();
  json config = config_record(cfg);
  config["svt_tau"] = svt_tau;
  json manifest = {
      {"format_version", kManifestVersion},
      {"tool_version", std::string(kVersion)},
      {"command", "decompose"},
      {"config", config},
      {"config_file", o.solver.config_path},
      {"inputs",
       {{"x", file_record(o.input)},
        {"center", o.center},
        {"rows", x.rows()},
        {"cols", x.cols()}}},
      {"output_format", io::to_string(format)},
      {"outputs", outputs},
      {"result",
       {{"iterations_run", dec.iterations_run},
        {"converged", dec.converged},
        {"final_residual", fin}}},
  };
  manifest["timing"] = timing_record(clock, started_at);
  write_manifest(dir / "manifest.json", manifest);

  out << "converged=" << (dec.converged ? "true" : "false") << "\n"
      << "iterations=" << dec.iterations_run << "\n"
      << "r=" << io::format_double(fin) << "\n";
  return kOk;
}

AttentionParams load_params(const fs::path& path, const DenseMatrix& like) {
  const DenseMatrix raw = require_input(path);
  const auto expected = static_cast<std::size_t>(like.size()) + 1;
  if (raw.rows() != 1 || static_cast<std::size_t>(raw.cols()) != expected) {
    throw DimensionError("attention params file '" + path.string() + "' has shape " +
                         shape_string(raw) + ", expected 1x" + std::to_string(expected) +
                         " (weights for " + shape_string(like) + " then bias)");
  }
  AttentionParams p;
  p.w.assign(raw.data(), raw.data() + raw.size() - 1);
  p.b = raw.data()[raw.size() - 1];
  return p;
}

int cmd_fuse(const FuseOpts& o, std::ostream& out) {
  const std::string started_at = utc_timestamp();
  const Stopwatch clock;
  const DenseMatrix l = require_input(o.l);
  const DenseMatrix s_i = require_input(o.s_i);
  const DenseMatrix s_t = require_input(o.s_t);
  require_same_shape(l, s_i, "fuse inputs L vs S_I");
  require_same_shape(l, s_t, "fuse inputs L vs S_T");

  const AttentionParams params =
      o.params.empty() ? AttentionParams::zeros(static_cast<std::size_t>(l.rows()),
                                                static_cast<std::size_t>(l.cols()))
                       : load_params(o.params, l);

  const FusionResult res = fuse(l, s_i, s_t, params);

  const fs::path out_path = o.out;
  if (out_path.has_parent_path()) ensure_dir(out_path.parent_path());
  io::write_matrix(out_path, res.r);

  json inputs = {{"L", file_record(o.l)}, {"S_I", file_record(o.s_i)},
                 {"S_T", file_record(o.s_t)}};
  inputs["params"] = o.params.empty() ? json("zero-init") : file_record(o.params);
  json manifest = {
      {"format_version", kManifestVersion},
      {"tool_version", std::string(kVersion)},
      {"command", "fuse"},
      {"inputs", inputs},
      {"outputs", {{"R", file_record(out_path)}}},
      {"weights",
       {{"alpha_L", res.weights[0]}, {"alpha_I", res.weights[1]},
        {"alpha_T", res.weights[2]}}},
      {"scores",
       {{"s_L", res.scores[0]}, {"s_I", res.scores[1]}, {"s_T", res.scores[2]}}},
  };
  manifest["timing"] = timing_record(clock, started_at);
  write_manifest(fs::path(out_path.string() + ".manifest.json"), manifest);

  out << "alpha_L=" << io::format_double(res.weights[0]) << "\n"
      << "alpha_I=" << io::format_double(res.weights[1]) << "\n"
      << "alpha_T=" << io::format_double(res.weights[2]) << "\n"
      << "s_L=" << io::format_double(res.scores[0]) << "\n"
      << "s_I=" << io::format_double(res.scores[1]) << "\n"
      << "s_T=" << io::format_double(res.scores[2]) << "\n";
  return kOk;
}

json spec_record(const SyntheticSpec& s) {
  return {{"rows", s.rows},
          {"cols", s.cols},
          {"rank", s.rank},
          {"density", s.density},
          {"low_rank_scale", s.low_rank_scale},
          {"spike_scale", s.spike_scale},
          {"seed", s.seed}};
}

int cmd_generate(const GenerateOpts& o, std::ostream& out) {
  const io::MatrixFormat format = io::parse_matrix_format(o.format);
  const SyntheticInstance inst = generate(o.spec);

  const fs::path dir = o.out_dir;
  const fs::path truth = dir / "truth";
  ensure_dir(truth);

  json outputs;
  outputs["I"] = emit_matrix(dir, "I", inst.i, format);
  outputs["T"] = emit_matrix(dir, "T", inst.t, format);
  outputs["truth/L"] = emit_matrix(truth, "L", inst.l0, format);
  outputs["truth/S_I"] = emit_matrix(truth, "S_I", inst.s_i0, format);
  outputs["truth/S_T"] = emit_matrix(truth, "S_T", inst.s_t0, format);

  const json metadata = {{"format_version", kManifestVersion},
                         {"tool_version", std::string(kVersion)},
                         {"command", "generate"},
                         {"generator", std::string(kGeneratorId)},
                         {"spec", spec_record(o.spec)},
                         {"spike_count", spike_count(o.spec)},
                         {"output_format", io::to_string(format)},
                         {"outputs", outputs}};
  write_manifest(dir / "metadata.json", metadata);

  out << "generator=" << kGeneratorId << "\n"
      << "rows=" << o.spec.rows << "\n"
      << "cols=" << o.spec.cols << "\n"
      << "spikes_per_modality=" << spike_count(o.spec) << "\n";
  return kOk;
}

int cmd_eval(const EvalOpts& o, std::ostream& out) {
  for (const auto& d : {o.estimate_dir, o.truth_dir}) {
    if (!fs::is_directory(d)) throw IoError("'" + d + "' is not a directory");
  }
  const ComponentSet est = load_components(o.estimate_dir);
  const ComponentSet truth = load_components(o.truth_dir);
  const RecoveryMetrics m = recovery_metrics(ComponentView{est.l, est.s_i, est.s_t},
                                             ComponentView{truth.l, truth.s_i, truth.s_t});
  out << metrics_report(m);
  return kOk;
}

int cmd_sweep(const SweepOpts& o, std::ostream& out) {
  const std::string started_at = utc_timestamp();
  const Stopwatch clock;
  if (o.checkpoints.empty()) throw ValidationError("--checkpoints must not be empty");
  std::vector<int> checkpoints = o.checkpoints;
  std::sort(checkpoints.begin(), checkpoints.end());
  checkpoints.erase(std::unique(checkpoints.begin(), checkpoints.end()), checkpoints.end());
  if (checkpoints.front() < 1) throw ValidationError("checkpoints must be >= 1");

  SolverConfig cfg = o.joint.solver.resolve();
  cfg.max_iters = checkpoints.back();

  JointInputs in = ingest_pair(o.joint);
  std::optional<ComponentSet> truth;
  if (!o.truth_dir.empty()) {
    truth = load_components(o.truth_dir);
    require_same_shape(truth->l, in.i, "sweep truth vs input");
  }

  struct Row {
    int checkpoint;
    int iterations_run;
    ResidualPair r;
    std::optional<RecoveryMetrics> metrics;
  };
  std::vector<Row> rows;
  std::size_t next = 0;

  const auto snapshot = [&](int iteration, const JointState& state, const ResidualPair& r,
                            int checkpoint) {
    Row row{checkpoint, iteration, r, std::nullopt};
    if (truth) {
      row.metrics = recovery_metrics(ComponentView{state.l, state.s_i, state.s_t},
                                     ComponentView{truth->l, truth->s_i, truth->s_t});
    }
    rows.push_back(std::move(row));
  };

  JointState last;
  ResidualPair last_r;
  int last_iteration = 0;
  const JointDecomposition dec = joint_decompose(
      in.i, in.t, cfg, [&](int k, const JointState& state, const ResidualPair& r) {
        while (next < checkpoints.size() && checkpoints[next] == k) {
          snapshot(k, state, r, checkpoints[next]);
          ++next;
        }
        last = state;
        last_r = r;
        last_iteration = k;
      });
  // Stopped early: remaining checkpoints see the converged state.
  while (next < checkpoints.size()) {
    snapshot(last_iteration, last, last_r, checkpoints[next]);
    ++next;
  }

  std::string table = "checkpoint,iterations_run,r_I,r_T,max_residual";
  if (truth) {
    table += ",rel_err_L,rel_err_S_I,rel_err_S_T,rank_L,support_precision,support_recall,support_f1";
  }
  table += "\n";
  for (const Row& row : rows) {
    table += std::to_string(row.checkpoint) + "," + std::to_string(row.iterations_run) +
             "," + io::format_double(row.r.r_i) + "," + io::format_double(row.r.r_t) +
             "," + io::format_double(row.r.max());
    if (row.metrics) {
      const RecoveryMetrics& m = *row.metrics;
      table += "," + io::format_double(m.rel_err_l) + "," + io::format_double(m.rel_err_s_i) +
               "," + io::format_double(m.rel_err_s_t) + "," + std::to_string(m.rank_l) +
               "," + io::format_double(m.precision) + "," + io::format_double(m.recall) +
               "," + io::format_double(m.f1);
    }
    table += "\n";
  }

  const fs::path dir = o.joint.out_dir;
  ensure_dir(dir);
  write_text(dir / "sweep.csv", table);

  json cps = json::array();
  for (const Row& row : rows) {
    json entry = {{"checkpoint", row.checkpoint},
                  {"iterations_run", row.iterations_run},
                  {"r_I", row.r.r_i},
                  {"r_T", row.r.r_t}};
    if (row.metrics) entry["metrics"] = metrics_record(*row.metrics);
    cps.push_back(entry);
  }
  json manifest = {
      {"format_version", kManifestVersion},
      {"tool_version", std::string(kVersion)},
      {"command", "sweep"},
      {"config", config_record(cfg)},
      {"config_file", o.joint.solver.config_path},
      {"inputs", in.record},
      {"truth_dir", o.truth_dir},
      {"checkpoints", cps},
      {"outputs", {{"sweep", {{"path", "sweep.csv"}, {"sha256", io::sha256_file(dir / "sweep.csv")}}}}},
      {"result", {{"iterations_run", dec.iterations_run}, {"converged", dec.converged}}},
  };
  manifest["timing"] = timing_record(clock, started_at);
  write_manifest(dir / "manifest.json", manifest);

  out << table;
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Joint low-rank + sparse decomposition of paired feature matrices"};
  app.name("jointlmr");
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  JointOpts joint;
  auto* joint_cmd = app.add_subcommand(
      "joint", "Decompose two aligned matrices into shared L plus sparse S_I, S_T");
  joint_cmd->add_option("--input-i", joint.input_i, "First modality matrix (.rdm or .csv)")
      ->required();
  joint_cmd->add_option("--input-t", joint.input_t, "Second modality matrix (.rdm or .csv)")
      ->required();
  joint_cmd->add_option("--out-dir", joint.out_dir, "Output directory")->required();
  joint_cmd->add_option("--format", joint.format, "Output matrix format")
      ->check(CLI::IsMember({"rdm", "csv"}));
  joint_cmd->add_option("--align", joint.align, "Row-count equalization")
      ->check(CLI::IsMember({"none", "truncate", "mean-pool"}));
  joint_cmd->add_flag("--center", joint.center, "Subtract per-column means before solving");
  add_solver_flags(joint_cmd, joint.solver);

  DecomposeOpts decompose;
  auto* dec_cmd = app.add_subcommand("decompose", "Standard single-matrix low-rank + sparse recovery");
  dec_cmd->add_option("--input", decompose.input, "Input matrix (.rdm or .csv)")->required();
  dec_cmd->add_option("--out-dir", decompose.out_dir, "Output directory")->required();
  dec_cmd->add_option("--format", decompose.format, "Output matrix format")
      ->check(CLI::IsMember({"rdm", "csv"}));
  dec_cmd->add_option("--svt-tau", decompose.svt_tau,
                      "Singular value threshold (default 1/mu)");
  dec_cmd->add_flag("--center", decompose.center, "Subtract per-column means before solving");
  add_solver_flags(dec_cmd, decompose.solver);

  FuseOpts fuse_opts;
  auto* fuse_cmd = app.add_subcommand("fuse", "Attention-weighted aggregation of L, S_I, S_T");
  fuse_cmd->add_option("--l", fuse_opts.l, "Shared low-rank component")->required();
  fuse_cmd->add_option("--s-i", fuse_opts.s_i, "First sparse component")->required();
  fuse_cmd->add_option("--s-t", fuse_opts.s_t, "Second sparse component")->required();
  fuse_cmd->add_option("--params", fuse_opts.params,
                       "1 x (m*n+1) matrix: scoring weights then bias (default zeros)");
  fuse_cmd->add_option("--out", fuse_opts.out, "Output path for R")->required();

  GenerateOpts gen;
  auto* gen_cmd = app.add_subcommand("generate", "Synthetic shared low-rank + sparse instance");
  gen_cmd->add_option("--rows", gen.spec.rows, "Rows")->capture_default_str();
  gen_cmd->add_option("--cols", gen.spec.cols, "Columns")->capture_default_str();
  gen_cmd->add_option("--rank", gen.spec.rank, "Rank of the shared component")
      ->capture_default_str();
  gen_cmd->add_option("--density", gen.spec.density, "Spike fraction per modality")
      ->capture_default_str();
  gen_cmd->add_option("--low-rank-scale", gen.spec.low_rank_scale,
                      "Factor entries drawn uniformly from [-s, s]")
      ->capture_default_str();
  gen_cmd->add_option("--spike-scale", gen.spec.spike_scale, "Spike magnitude")
      ->capture_default_str();
  gen_cmd->add_option("--seed", gen.spec.seed, "Generator seed")->capture_default_str();
  gen_cmd->add_option("--out-dir", gen.out_dir, "Output directory")->required();
  gen_cmd->add_option("--format", gen.format, "Output matrix format")
      ->check(CLI::IsMember({"rdm", "csv"}));

  EvalOpts eval;
  auto* eval_cmd = app.add_subcommand("eval", "Recovery metrics of an estimate against ground truth");
  eval_cmd->add_option("--estimate", eval.estimate_dir, "Directory with L, S_I, S_T")->required();
  eval_cmd->add_option("--truth", eval.truth_dir, "Directory with true L, S_I, S_T")->required();

  SweepOpts sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "Residuals (and metrics) at iteration checkpoints");
  sweep_cmd->add_option("--input-i", sweep.joint.input_i, "First modality matrix")->required();
  sweep_cmd->add_option("--input-t", sweep.joint.input_t, "Second modality matrix")->required();
  sweep_cmd->add_option("--out-dir", sweep.joint.out_dir, "Output directory")->required();
  sweep_cmd->add_option("--align", sweep.joint.align, "Row-count equalization")
      ->check(CLI::IsMember({"none", "truncate", "mean-pool"}));
  sweep_cmd->add_flag("--center", sweep.joint.center, "Subtract per-column means before solving");
  sweep_cmd->add_option("--checkpoints", sweep.checkpoints, "Comma-separated iteration counts")
      ->delimiter(',');
  sweep_cmd->add_option("--truth", sweep.truth_dir, "Ground-truth directory for metrics");
  add_solver_flags(sweep_cmd, sweep.joint.solver, /*with_max_iters=*/false);

  std::vector<const char*> argv{"jointlmr"};
  for (const auto& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*joint_cmd) return cmd_joint(joint, out);
    if (*dec_cmd) return cmd_decompose(decompose, out);
    if (*fuse_cmd) return cmd_fuse(fuse_opts, out);
    if (*gen_cmd) return cmd_generate(gen, out);
    if (*eval_cmd) return cmd_eval(eval, out);
    if (*sweep_cmd) return cmd_sweep(sweep, out);
  } catch (const DimensionError& e) {
    err << "shape error: " << e.what() << "\n";
    return kValidation;
  } catch (const ValidationError& e) {
    err << "invalid argument: " << e.what() << "\n";
    return kValidation;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << "\n";
    return kIo;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kInternal;
  }
  return kUsage;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int k = 1; k < argc; ++k) args.emplace_back(argv[k]);
  return run(args, out, err);
}

}  // namespace jointlmr::cli
