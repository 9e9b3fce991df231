// Copyright 2026 The diffpir-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <thread>

#include "diffpir/bridge_client.hpp"
#include "diffpir/error.hpp"
#include "diffpir/io.hpp"
#include "diffpir/metrics.hpp"
#include "diffpir/toy.hpp"
#include "presets.hpp"

namespace diffpir::cli {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::kInvalidConfig, what); }

bool is_inpaint(const std::string& task) { return task.rfind("inpaint", 0) == 0; }

void check_task(const std::string& task) {
  for (const char* t : {"deblur-gauss", "deblur-motion", "inpaint-box", "inpaint-random", "sr"}) {
    if (task == t) return;
  }
  bad("unknown task '" + task + "'");
}

nlohmann::json psnr_json(double v) {
  if (std::isinf(v)) return "Infinite";
  return v;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  f << text;
  if (!f) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
}

void save_output(const Image& x, const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  if (path.extension() == ".f64") {
    io::save_raw(x, path);
  } else {
    io::save_png(x, path);
  }
}

fs::path with_suffix(const fs::path& out, const std::string& suffix) {
  fs::path p = out;
  p.replace_extension();
  return p.string() + suffix;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

ResolvedHyperparameters resolve_hyperparameters(const Settings& s) {
  const std::string task = s.str("task");
  check_task(task);
  ResolvedHyperparameters h;
  h.steps = static_cast<int>(s.integer("steps"));
  h.sigma_n = s.real("sigma_n");
  h.lambda = s.real("lambda");
  h.zeta = s.real("zeta");
  if (is_inpaint(task) && !s.explicitly_set("sigma_n")) h.sigma_n = 0.0;

  std::string name = s.str("preset");
  const bool explicit_preset = !name.empty();
  if (!explicit_preset && s.str("denoiser").rfind("extern", 0) == 0) {
    name = default_preset_name(h.steps, h.sigma_n);
  }
  std::optional<Hyperparameters> cell;
  if (!name.empty()) {
    const Preset* p = find_preset(name);
    if (p == nullptr) bad("unknown preset '" + name + "'");
    cell = lookup(*p, task);
    if (!cell && explicit_preset) bad("preset '" + name + "' has no entry for task " + task);
    if (explicit_preset) {
      if (!s.explicitly_set("steps")) h.steps = p->nfe;
      if (!s.explicitly_set("sigma_n")) h.sigma_n = p->sigma_n;
    }
  }
  const bool lambda_set = s.explicitly_set("lambda");
  const bool zeta_set = s.explicitly_set("zeta");
  if (cell) {
    if (!lambda_set) h.lambda = cell->lambda;
    if (!zeta_set) h.zeta = cell->zeta;
  }
  if (lambda_set && zeta_set) {
    h.source = "explicit";
  } else if (cell) {
    h.source = "preset:" + name;
  } else {
    h.source = "default";
  }
  return h;
}

NoiseSchedule make_schedule(const Settings& s) {
  const long long n = s.integer("n_train");
  const double b0 = s.real("beta_start");
  const double b1 = s.real("beta_end");
  if (n < 1 || !(b0 > 0.0) || !(b0 <= b1) || !(b1 < 1.0)) {
    throw Error(ErrorCode::kInvalidRange, "schedule needs n_train >= 1, 0 < beta_start <= beta_end < 1");
  }
  return build_linear_schedule(static_cast<int>(n), b0, b1);
}

SamplerConfig make_sampler_config(const Settings& s, const ResolvedHyperparameters& h) {
  SamplerConfig cfg;
  cfg.kind = parse_sampler_kind(s.str("sampler"));
  cfg.lambda = h.lambda;
  cfg.zeta = h.zeta;
  cfg.eta = s.real("eta");
  cfg.steps = h.steps;
  cfg.t_start = static_cast<int>(s.integer("t_start"));
  cfg.seed = s.seed();
  cfg.sigma_floor = s.real("sigma_floor");
  const std::string init = s.str("initializer");
  if (init == "pseudo-inverse") {
    cfg.initializer = Initializer::kPseudoInverse;
  } else if (init == "zeros") {
    cfg.initializer = Initializer::kZeros;
  } else {
    bad("unknown initializer '" + init + "'");
  }
  const std::string solver = s.str("sr_solver");
  if (solver == "closed") {
    cfg.solver.sr_solver = prox::SrSolver::kClosedForm;
  } else if (solver == "ibp") {
    cfg.solver.sr_solver = prox::SrSolver::kBackProjection;
  } else {
    bad("unknown sr_solver '" + solver + "'");
  }
  cfg.solver.ibp_gamma = s.real("ibp_gamma");
  cfg.solver.ibp_iters = static_cast<int>(s.integer("ibp_iters"));
  cfg.record_trajectory = !s.str("dump_trajectory").empty();
  cfg.fd_step = s.real("fd_step");
  cfg.validate();
  return cfg;
}

std::string extern_endpoint(const std::string& denoiser) {
  if (const char* env = std::getenv("DIFFPIR_BRIDGE"); env != nullptr && *env != '\0') return env;
  if (denoiser.rfind("extern:", 0) == 0 && denoiser.size() > 7) return denoiser.substr(7);
  bad("extern denoiser needs an endpoint (extern:<endpoint> or DIFFPIR_BRIDGE)");
}

std::unique_ptr<Denoiser> make_denoiser(const Settings& s, const Image* truth) {
  const std::string name = s.str("denoiser");
  if (name == "gaussian") {
    return std::make_unique<GaussianPrior>(s.real("prior_mean"), s.real("prior_var"));
  }
  if (name == "gmm") {
    const auto w = s.real_list("gmm_weights");
    const auto m = s.real_list("gmm_means");
    const auto v = s.real_list("gmm_vars");
    if (w.empty() || w.size() != m.size() || w.size() != v.size()) {
      bad("gmm_weights, gmm_means and gmm_vars need the same non-zero length");
    }
    std::vector<GmmComponent> comps;
    comps.resize(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
      comps[i].weight = w[i];
      comps[i].mean = PriorMean(m[i]);
      comps[i].variance = v[i];
    }
    return std::make_unique<GmmPrior>(std::move(comps));
  }
  if (name == "oracle") {
    if (truth == nullptr) bad("the oracle denoiser needs --gt");
    return std::make_unique<OracleDenoiser>(*truth);
  }
  if (name.rfind("extern", 0) == 0) {
    bridge::ClientOptions opts;
    opts.timeout = std::chrono::milliseconds(s.integer("timeout_ms"));
    return std::make_unique<bridge::ExternalDenoiser>(extern_endpoint(name), opts);
  }
  bad("unknown denoiser '" + name + "'");
}

DegradationModel make_model(const Settings& s, const Shape& clean, double sigma_n, Rng& rng) {
  const std::string task = s.str("task");
  check_task(task);
  if (!(sigma_n >= 0.0)) throw Error(ErrorCode::kInvalidRange, "sigma_n must be >= 0");
  const std::string kernel_path = s.str("kernel");
  const std::string mask_path = s.str("mask");
  const int ksize = static_cast<int>(s.integer("kernel_size"));
  DegradationModel m;
  m.sigma_n = sigma_n;
  if (task == "deblur-gauss" || task == "deblur-motion") {
    Kernel2D k;
    if (!kernel_path.empty()) {
      k = io::load_kernel(kernel_path);
    } else if (task == "deblur-gauss") {
      k = gaussian_kernel(ksize, s.real("kernel_std"));
    } else {
      k = motion_kernel(ksize, s.real("motion_intensity"), rng);
    }
    m.op = BlurOp{std::move(k)};
  } else if (task == "inpaint-box" || task == "inpaint-random") {
    Mask mask;
    if (!mask_path.empty()) {
      mask = io::load_mask_png(mask_path);
    } else if (task == "inpaint-box") {
      const long long top = s.integer("box_top");
      const long long left = s.integer("box_left");
      std::optional<std::pair<int, int>> offset;
      if (top >= 0 || left >= 0) {
        if (top < 0 || left < 0) bad("box_top and box_left must be given together");
        offset = std::pair{static_cast<int>(top), static_cast<int>(left)};
      }
      mask = make_box_mask(clean.height, clean.width, static_cast<int>(s.integer("box")), offset);
    } else {
      mask = make_random_mask(clean.height, clean.width, s.real("drop_ratio"), rng);
    }
    m.op = InpaintOp{std::move(mask)};
  } else {
    DownsampleOp op;
    op.sf = static_cast<int>(s.integer("sf"));
    if (!kernel_path.empty()) op.kernel = io::load_kernel(kernel_path);
    m.op = std::move(op);
  }
  check_input_shape(m, clean);
  return m;
}

void dump_trajectory(const Trajectory& trajectory, const fs::path& dir) {
  fs::create_directories(dir);
  nlohmann::json steps = nlohmann::json::array();
  for (std::size_t i = 0; i < trajectory.records.size(); ++i) {
    const StepRecord& r = trajectory.records[i];
    std::ostringstream stem;
    stem << "step_" << std::setw(4) << std::setfill('0') << i << "_t" << std::setw(4) << r.t;
    const std::string xt = stem.str() + "_xt.png";
    const std::string x0 = stem.str() + "_x0.png";
    const std::string x0h = stem.str() + "_x0hat.png";
    io::save_png(r.x_t, dir / xt);
    io::save_png(r.x0, dir / x0);
    io::save_png(r.x0_hat, dir / x0h);
    steps.push_back({{"index", i}, {"t", r.t}, {"residual", r.residual},
                     {"frames", {{"x_t", xt}, {"x0", x0}, {"x0_hat", x0h}}}});
  }
  write_text(dir / "manifest.json", nlohmann::json{{"steps", steps}}.dump(2) + "\n");
}

void print_report(const nlohmann::json& report, std::ostream& out) {
  std::size_t width = 0;
  for (const auto& [k, v] : report.items()) {
    if (v.is_primitive()) width = std::max(width, k.size());
  }
  for (const auto& [k, v] : report.items()) {
    if (!v.is_primitive()) continue;
    out << std::left << std::setw(static_cast<int>(width)) << k << "  "
        << (v.is_string() ? v.get<std::string>() : v.dump()) << "\n";
  }
}

// ---------------------------------------------------------------------------

int cmd_degrade(const Settings& s, std::ostream& out, std::ostream&) {
  if (s.str("in").empty() || s.str("out").empty()) bad("degrade needs --in and --out");
  const ResolvedHyperparameters h = resolve_hyperparameters(s);
  const Image x = io::load_image(s.str("in"));
  Rng rng(s.seed());
  const DegradationModel model = make_model(s, x.shape(), h.sigma_n, rng);
  const Image y = apply(model, x, rng);

  const fs::path out_path = s.str("out");
  const fs::path raw = with_suffix(out_path, ".f64");
  const fs::path provenance_path = s.str("report").empty() ? with_suffix(out_path, ".json")
                                                           : fs::path(s.str("report"));
  save_output(y, out_path);
  io::save_raw(y, raw);

  nlohmann::json outputs = {{"measurement", out_path.string()}, {"raw", raw.string()}};
  if (const auto* blur = std::get_if<BlurOp>(&model.op)) {
    const fs::path k2d = with_suffix(out_path, ".kernel.k2d");
    const fs::path kpng = with_suffix(out_path, ".kernel.png");
    io::save_kernel_k2d(blur->kernel, k2d);
    io::save_kernel_png(blur->kernel, kpng);
    outputs["kernel"] = k2d.string();
    outputs["kernel_png"] = kpng.string();
  } else if (const auto* inp = std::get_if<InpaintOp>(&model.op)) {
    const fs::path mpng = with_suffix(out_path, ".mask.png");
    io::save_mask_png(inp->mask, mpng);
    outputs["mask"] = mpng.string();
    outputs["dropped_pixels"] = inp->mask.dropped_count();
  } else if (const auto* ds = std::get_if<DownsampleOp>(&model.op); ds && ds->kernel) {
    const fs::path k2d = with_suffix(out_path, ".kernel.k2d");
    io::save_kernel_k2d(*ds->kernel, k2d);
    outputs["kernel"] = k2d.string();
  }

  nlohmann::json config = s.to_json();
  config["sigma_n"] = h.sigma_n;
  const nlohmann::json record = {
      {"command", "degrade"},
      {"task", s.str("task")},
      {"seed", s.seed()},
      {"sigma_n", h.sigma_n},
      {"input_shape", to_string(x.shape())},
      {"measurement_shape", to_string(y.shape())},
      {"outputs", outputs},
      {"config", config},
  };
  write_text(provenance_path, record.dump(2) + "\n");
  print_report(record, out);
  out << "outputs  " << outputs.dump() << "\n";
  return 0;
}

int cmd_restore(const Settings& s, std::ostream& out, std::ostream&) {
  if (s.str("in").empty()) bad("restore needs --in");
  const ResolvedHyperparameters h = resolve_hyperparameters(s);
  const SamplerConfig cfg = make_sampler_config(s, h);
  const NoiseSchedule schedule = make_schedule(s);
  const Image y = io::load_image(s.str("in"));
  std::optional<Image> gt;
  if (!s.str("gt").empty()) gt = io::load_image(s.str("gt"));

  Shape clean = y.shape();
  if (s.str("task") == "sr") {
    const long long sf = s.integer("sf");
    if (sf < 1) throw Error(ErrorCode::kInvalidRange, "sf must be >= 1");
    clean.height *= static_cast<int>(sf);
    clean.width *= static_cast<int>(sf);
  }
  Rng model_rng(s.seed());
  const DegradationModel model = make_model(s, clean, h.sigma_n, model_rng);
  if (measurement_shape(model, clean) != y.shape()) {
    throw Error(ErrorCode::kShapeMismatch, "measurement " + to_string(y.shape()) +
                                               " does not match the task operator");
  }
  const auto denoiser = make_denoiser(s, gt ? &*gt : nullptr);

  const auto t0 = Clock::now();
  const SampleResult result = restore(y, model, *denoiser, schedule, cfg);
  const double wall = seconds_since(t0);

  nlohmann::json report = {
      {"command", "restore"},
      {"task", s.str("task")},
      {"sampler", to_string(cfg.kind)},
      {"denoiser", denoiser->name()},
      {"nfe", result.nfe},
      {"steps", cfg.steps},
      {"t_start", cfg.t_start},
      {"lambda", cfg.lambda},
      {"zeta", cfg.zeta},
      {"sigma_n", h.sigma_n},
      {"seed", cfg.seed},
      {"hyperparameter_source", h.source},
      {"wall_time_s", wall},
      {"timesteps", result.timesteps},
      {"residuals", result.residuals},
  };
  if (!result.residuals.empty()) report["final_residual"] = result.residuals.back();
  if (gt && s.boolean("metrics")) {
    require_same_shape(gt->shape(), result.x.shape(), "ground truth");
    report["psnr_db"] = psnr_json(psnr(quantize8(result.x), *gt));
    report["psnr_unquantized_db"] = psnr_json(psnr(result.x, *gt));
  }
  if (!s.str("out").empty()) {
    save_output(result.x, s.str("out"));
    report["output"] = s.str("out");
  }
  if (!s.str("dump_trajectory").empty()) {
    dump_trajectory(result.trajectory, s.str("dump_trajectory"));
    report["trajectory"] = s.str("dump_trajectory");
  }
  nlohmann::json config = s.to_json();
  config["lambda"] = cfg.lambda;
  config["zeta"] = cfg.zeta;
  config["steps"] = cfg.steps;
  config["sigma_n"] = h.sigma_n;
  report["config"] = config;
  if (!s.str("report").empty()) write_text(s.str("report"), report.dump(2) + "\n");
  print_report(report, out);
  return 0;
}

// ---------------------------------------------------------------------------

namespace {

struct BenchCell {
  int steps = 0;
  int t_start = 0;
  double lambda = 0.0;
  double zeta = 0.0;
};

struct BenchRow {
  BenchCell cell;
  bool ok = false;
  double rmse = 0.0;
  double psnr = 0.0;
  double residual = 0.0;
  double nfe = 0.0;
  double seconds = 0.0;
  std::string message;
};

std::string csv_field(const std::string& v) {
  if (v.find_first_of(",\"\n") == std::string::npos) return v;
  std::string q = "\"";
  for (char c : v) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

std::string num(double v) {
  if (std::isinf(v)) return "inf";
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

template <typename T, typename F>
std::vector<T> axis(const Settings& s, const std::string& key, T base, F parse) {
  if (!s.explicitly_set(key)) return {base};
  std::vector<T> out;
  for (auto v : parse(key)) out.push_back(static_cast<T>(v));
  return out;
}

}  // namespace

int cmd_bench(const Settings& s, std::ostream& out, std::ostream& err) {
  Settings scalar = s;
  for (const char* key : {"steps", "t_start", "lambda", "zeta"}) scalar.reset(key);
  const ResolvedHyperparameters h = resolve_hyperparameters(scalar);
  const NoiseSchedule schedule = make_schedule(s);
  auto ints = [&](const std::string& k) { return s.integer_list(k); };
  auto reals = [&](const std::string& k) { return s.real_list(k); };
  const auto steps = axis<int>(s, "steps", h.steps, ints);
  const auto starts = axis<int>(s, "t_start", static_cast<int>(schedule.n_train()), ints);
  const auto lambdas = axis<double>(s, "lambda", h.lambda, reals);
  const auto zetas = axis<double>(s, "zeta", h.zeta, reals);

  std::vector<BenchCell> cells;
  for (int st : steps) {
    for (int ts : starts) {
      for (double l : lambdas) {
        for (double z : zetas) cells.push_back({st, ts, l, z});
      }
    }
  }

  const bool use_toy = s.str("in").empty();
  const int runs = static_cast<int>(s.integer("runs"));
  if (use_toy && runs < 1) bad("runs must be >= 1");
  const toy::Task toy_task = toy::parse_task(s.str("toy_task"));
  const GmmPrior toy_prior = toy::make_prior();

  std::optional<Image> y;
  std::optional<Image> gt;
  std::optional<DegradationModel> model;
  if (!use_toy) {
    y = io::load_image(s.str("in"));
    if (!s.str("gt").empty()) gt = io::load_image(s.str("gt"));
    Shape clean = y->shape();
    if (s.str("task") == "sr") {
      clean.height *= static_cast<int>(s.integer("sf"));
      clean.width *= static_cast<int>(s.integer("sf"));
    }
    Rng model_rng(s.seed());
    model = make_model(s, clean, h.sigma_n, model_rng);
  }

  std::vector<BenchRow> rows(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    std::unique_ptr<Denoiser> own;
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      BenchRow& row = rows[i];
      row.cell = cells[i];
      const auto t0 = Clock::now();
      try {
        SamplerConfig cfg = make_sampler_config(scalar, h);
        cfg.steps = row.cell.steps;
        cfg.t_start = row.cell.t_start;
        cfg.lambda = row.cell.lambda;
        cfg.zeta = row.cell.zeta;
        cfg.record_trajectory = false;
        if (use_toy) {
          double e = 0.0, p = 0.0, r = 0.0, n = 0.0;
          for (int k = 0; k < runs; ++k) {
            const auto problem = toy::make_problem(toy_prior, toy::PriorOptions{}.size, toy_task,
                                                   s.seed() + static_cast<std::uint64_t>(k));
            cfg.seed = s.seed() + static_cast<std::uint64_t>(k);
            GmmPrior d = toy_prior;
            const SampleResult res = restore(problem.y, problem.model, d, schedule, cfg);
            e += toy::rmse(res.x, problem.truth);
            p += psnr(res.x, problem.truth);
            r += res.residuals.empty() ? 0.0 : res.residuals.back();
            n += static_cast<double>(res.nfe);
          }
          row.rmse = e / runs;
          row.psnr = p / runs;
          row.residual = r / runs;
          row.nfe = n / runs;
        } else {
          if (!own) own = make_denoiser(s, gt ? &*gt : nullptr);
          const SampleResult res = restore(*y, *model, *own, schedule, cfg);
          if (gt) {
            row.rmse = toy::rmse(res.x, *gt);
            row.psnr = psnr(quantize8(res.x), *gt);
          } else {
            row.rmse = row.psnr = std::nan("");
          }
          row.residual = res.residuals.empty() ? 0.0 : res.residuals.back();
          row.nfe = static_cast<double>(res.nfe);
        }
        row.ok = true;
      } catch (const std::exception& e) {
        row.ok = false;
        row.message = e.what();
      }
      row.seconds = seconds_since(t0);
    }
  };
  const int width = std::max<int>(1, static_cast<int>(s.integer("workers")));
  std::vector<std::thread> pool;
  for (int w = 0; w < std::min<int>(width, static_cast<int>(std::max<std::size_t>(cells.size(), 1))); ++w) {
    pool.emplace_back(worker);
  }
  for (auto& t : pool) t.join();

  std::ostringstream csv;
  csv << "cell,steps,t_start,lambda,zeta,status,rmse,psnr_db,residual,nfe,time_s,message\n";
  nlohmann::json json_rows = nlohmann::json::array();
  int failed = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const BenchRow& r = rows[i];
    failed += r.ok ? 0 : 1;
    csv << i << "," << r.cell.steps << "," << r.cell.t_start << "," << num(r.cell.lambda) << ","
        << num(r.cell.zeta) << "," << (r.ok ? "ok" : "error") << "," << num(r.rmse) << ","
        << num(r.psnr) << "," << num(r.residual) << "," << num(r.nfe) << "," << num(r.seconds)
        << "," << csv_field(r.message) << "\n";
    json_rows.push_back({{"cell", i}, {"steps", r.cell.steps}, {"t_start", r.cell.t_start},
                         {"lambda", r.cell.lambda}, {"zeta", r.cell.zeta},
                         {"status", r.ok ? "ok" : "error"}, {"rmse", r.rmse},
                         {"psnr_db", psnr_json(r.psnr)}, {"residual", r.residual},
                         {"nfe", r.nfe}, {"time_s", r.seconds}, {"message", r.message}});
  }
  if (s.str("out").empty()) {
    out << csv.str();
  } else {
    write_text(s.str("out"), csv.str());
  }
  if (!s.str("report").empty()) {
    const nlohmann::json report = {{"command", "bench"},
                                   {"source", use_toy ? "toy:" + toy::to_string(toy_task) : "images"},
                                   {"runs_per_cell", use_toy ? runs : 1},
                                   {"rows", json_rows},
                                   {"config", s.to_json()}};
    write_text(s.str("report"), report.dump(2) + "\n");
  }
  if (failed > 0) err << failed << " of " << rows.size() << " cells failed\n";
  return 0;
}

}  // namespace diffpir::cli
