#include "vxgan/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>

#include "vxgan/checkpoint.hpp"
#include "vxgan/errors.hpp"
#include "vxgan/gradcheck.hpp"
#include "vxgan/metrics.hpp"
#include "vxgan/nets.hpp"
#include "vxgan/phantom.hpp"
#include "vxgan/png_io.hpp"
#include "vxgan/trainer.hpp"
#include "vxgan/volume_io.hpp"

namespace vxgan {
namespace {

namespace fs = std::filesystem;

struct Common {
  std::uint64_t seed = 0;
};

void add_seed(CLI::App* cmd, Common& common) {
  cmd->add_option("--seed", common.seed, "Random seed");
}

ReslicePlane parse_plane(const std::string& name) {
  if (name == "xz") return ReslicePlane::XZ;
  if (name == "yz") return ReslicePlane::YZ;
  throw ConfigError("plane must be xz or yz, got '" + name + "'");
}

Volume load_normalized(const fs::path& path) { return normalize(read_vxv(path)); }

// Accepts a checkpoint file or a training directory (uses its latest step).
fs::path resolve_generator(const fs::path& ckpt) {
  if (!fs::is_directory(ckpt)) return ckpt;
  const auto step = latest_checkpoint_step(ckpt);
  if (!step) throw DataError(ckpt.string() + " has no 'latest' checkpoint marker");
  return generator_checkpoint_path(ckpt, *step);
}

// ---- gen-phantom ----------------------------------------------------------

struct PhantomArgs {
  std::vector<Index> dims{64, 64, 64};
  double scale = 8.0;
  Index jitter = 0;
  double noise = 0.0;
  Index drop = 0;
  bool averaging = false;
  std::string out, clean_out, sidecar;
};

void setup_gen_phantom(CLI::App& app, Common& common, PhantomArgs& a) {
  auto* cmd = app.add_subcommand("gen-phantom", "Generate a synthetic phantom volume");
  add_seed(cmd, common);
  cmd->add_option("--dims", a.dims, "Extents Z Y X")->expected(3);
  cmd->add_option("--scale", a.scale, "Feature wavelength in voxels");
  cmd->add_option("--jitter", a.jitter, "Max per-section shift J");
  cmd->add_option("--noise", a.noise, "Gaussian noise std");
  cmd->add_option("--drop", a.drop, "Number of sections to zero");
  cmd->add_flag("--averaging", a.averaging, "Emit the linear-in-z averaging volume instead");
  cmd->add_option("--out", a.out, "Degraded (or averaging) volume, VXV")->required();
  cmd->add_option("--clean-out", a.clean_out, "Clean volume, VXV");
  cmd->add_option("--sidecar", a.sidecar, "Offsets and dropped sections, text");
  cmd->callback([&] {
    const Dims dims{a.dims[0], a.dims[1], a.dims[2]};
    if (a.averaging) {
      write_vxv(a.out, make_averaging_volume(dims, a.noise, common.seed));
      return;
    }
    PhantomConfig cfg;
    cfg.dims = dims;
    cfg.structure_scale = a.scale;
    cfg.jitter = a.jitter;
    cfg.noise_sigma = a.noise;
    cfg.drop_count = a.drop;
    cfg.seed = common.seed;
    const PhantomTruth truth = generate_phantom(cfg);
    write_vxv(a.out, truth.degraded);
    if (!a.clean_out.empty()) write_vxv(a.clean_out, truth.clean);
    if (!a.sidecar.empty()) write_phantom_sidecar(a.sidecar, truth);
  });
}

// ---- import-raw / export-raw ----------------------------------------------

struct RawArgs {
  std::string in, out;
  std::vector<Index> dims;
  std::vector<double> voxel_size;
};

void setup_raw(CLI::App& app, Common& common, RawArgs& imp, RawArgs& exp) {
  auto* cmd = app.add_subcommand("import-raw", "Convert a headerless u8 volume to VXV");
  add_seed(cmd, common);
  cmd->add_option("--in", imp.in, "Raw u8 file, z-major")->required();
  cmd->add_option("--dims", imp.dims, "Extents Z Y X")->expected(3)->required();
  cmd->add_option("--voxel-size", imp.voxel_size, "Voxel size z y x in nm")->expected(3);
  cmd->add_option("--out", imp.out, "VXV output")->required();
  cmd->callback([&] {
    std::optional<VoxelSize> vs;
    if (!imp.voxel_size.empty()) vs = VoxelSize{imp.voxel_size[0], imp.voxel_size[1], imp.voxel_size[2]};
    write_vxv(imp.out, import_raw_u8(imp.in, Dims{imp.dims[0], imp.dims[1], imp.dims[2]}, vs));
  });

  auto* back = app.add_subcommand("export-raw", "Convert a VXV volume with values in [0,1] to raw u8");
  add_seed(back, common);
  back->add_option("--in", exp.in, "VXV input")->required();
  back->add_option("--out", exp.out, "Raw u8 output")->required();
  back->callback([&] {
    const auto bytes = export_raw_u8(read_vxv(exp.in));
    std::ofstream out(exp.out, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("cannot write " + exp.out);
  });
}

// ---- train ----------------------------------------------------------------

struct TrainArgs {
  std::string task = "interp", in, out, config, loss = "l1";
  bool adversarial = true, pixel = true, baseline = false, resume = false, quiet = false;
  double lr = 0, beta1 = 0, lambda_pix = 0, dropout = 0;
  int batch = 0;
  std::int64_t steps = 0, checkpoint_every = 0;
  Index patch = 0, width = 0;
};

TrainingConfig resolve_training_config(CLI::App* cmd, const TrainArgs& a, std::uint64_t seed) {
  auto given = [cmd](const char* name) { return cmd->get_option(name)->count() > 0; };
  // Defaults, then the config file, then explicit flags.
  bool baseline = a.baseline;
  if (!given("--baseline") && !a.config.empty()) baseline = read_config(a.config).baseline;
  TrainingConfig cfg = baseline ? TrainingConfig::baseline_defaults() : TrainingConfig{};
  const Task task = parse_task(a.task);
  cfg.task = task;
  cfg.patch = 0;  // resolved per task below unless set
  if (!a.config.empty()) cfg = read_config(a.config, cfg);
  if (given("--task")) cfg.task = task;
  if (given("--baseline")) cfg.baseline = a.baseline;
  if (cfg.baseline) cfg.adversarial = false;
  if (given("--adversarial")) cfg.adversarial = a.adversarial;
  if (given("--pixel-loss")) cfg.use_pixelwise_loss = a.pixel;
  if (given("--loss")) {
    if (a.loss != "l1" && a.loss != "mse") throw ConfigError("--loss must be l1 or mse");
    cfg.pixel_loss = a.loss == "l1" ? PixelLoss::L1 : PixelLoss::Mse;
  }
  if (given("--lr")) cfg.learning_rate = a.lr;
  if (given("--beta1")) cfg.beta1 = a.beta1;
  if (given("--batch")) cfg.batch_size = a.batch;
  if (given("--steps")) cfg.max_step = a.steps;
  if (given("--lambda-pix")) cfg.lambda_pix = a.lambda_pix;
  if (given("--patch")) cfg.patch = a.patch;
  if (given("--width")) cfg.width = a.width;
  if (given("--dropout")) cfg.dropout = a.dropout;
  if (given("--checkpoint-every")) cfg.checkpoint_every = a.checkpoint_every;
  if (given("--seed") || cmd->get_parent()->get_option("--seed")->count() > 0) cfg.seed = seed;
  if (cfg.patch == 0) cfg.patch = cfg.task == Task::Interp ? 100 : 64;
  if (cfg.baseline && cfg.adversarial) throw ConfigError("--baseline excludes --adversarial");
  cfg.validate();
  return cfg;
}

void setup_train(CLI::App& app, Common& common, TrainArgs& a) {
  auto* cmd = app.add_subcommand("train", "Train a generator (adversarial, or pixel-only baseline)");
  add_seed(cmd, common);
  cmd->add_option("--task", a.task, "interp | align | sr");
  cmd->add_option("--in", a.in, "Training volume, VXV")->required();
  cmd->add_option("--out", a.out, "Output directory")->required();
  cmd->add_option("--config", a.config, "key=value file; flags override it");
  cmd->add_flag("--adversarial,!--no-adversarial", a.adversarial, "Use the adversarial term");
  cmd->add_flag("--pixel-loss,!--no-pixel-loss", a.pixel, "Use the pixel term");
  cmd->add_flag("--baseline", a.baseline, "Pixel-only training, one generator update per step");
  cmd->add_option("--loss", a.loss, "Pixel loss: l1 | mse");
  cmd->add_option("--lr", a.lr, "Adam learning rate");
  cmd->add_option("--beta1", a.beta1, "Adam beta1");
  cmd->add_option("--batch", a.batch, "Minibatch size");
  cmd->add_option("--steps", a.steps, "Number of steps");
  cmd->add_option("--lambda-pix", a.lambda_pix, "Pixel term weight");
  cmd->add_option("--patch", a.patch, "Patch side (interp) or cube side (align, sr)");
  cmd->add_option("--width", a.width, "Generator feature maps");
  cmd->add_option("--dropout", a.dropout, "Discriminator dropout rate");
  cmd->add_option("--checkpoint-every", a.checkpoint_every, "Checkpoint cadence in steps");
  cmd->add_flag("--resume", a.resume, "Continue from the latest checkpoint in --out");
  cmd->add_flag("--quiet", a.quiet, "Do not echo step lines");
  cmd->callback([cmd, &common, &a] {
    const TrainingConfig cfg = resolve_training_config(cmd, a, common.seed);
    const Volume volume = read_vxv(a.in);
    run_training(cfg, volume, a.out, a.resume, [&](const StepReport& r) {
      if (!a.quiet) std::cout << format_step_line(r) << '\n' << std::flush;
    });
  });
}

// ---- infer ----------------------------------------------------------------

struct InferArgs {
  std::string task = "interp", ckpt, in, out;
  Index tile_z = 0;
};

void setup_infer(CLI::App& app, Common& common, InferArgs& a) {
  auto* cmd = app.add_subcommand("infer", "Run a trained generator over a volume");
  add_seed(cmd, common);
  cmd->add_option("--task", a.task, "interp | align | sr");
  cmd->add_option("--ckpt", a.ckpt, "Generator checkpoint or training directory")->required();
  cmd->add_option("--in", a.in, "Input volume, VXV (normalized before inference)")->required();
  cmd->add_option("--out", a.out, "Output volume, VXV")->required();
  cmd->add_option("--tile-z", a.tile_z, "Output slices per chunk (align, sr)");
  cmd->callback([&] {
    const ParamSet gen = load_checkpoint(resolve_generator(a.ckpt));
    const Volume input = load_normalized(a.in);
    switch (parse_task(a.task)) {
      case Task::Interp: write_vxv(a.out, infer_interp(gen, input)); break;
      case Task::Align: write_vxv(a.out, infer_align(gen, input, a.tile_z)); break;
      case Task::Sr: write_vxv(a.out, infer_sr(gen, input, a.tile_z)); break;
    }
  });
}

// ---- reslice / export-png -------------------------------------------------

struct PngArgs {
  std::string in, out, plane = "xy";
  Index index = 0;
  Index crop = 0;
  bool normalize = false;
};

Image pick_section(const PngArgs& a) {
  Volume v = read_vxv(a.in);
  if (a.normalize) v = normalize(v);
  Image img = a.plane == "xy" ? v.slice(a.index) : reslice(v, parse_plane(a.plane), a.index);
  if (a.crop > 0) img = center_crop(img, a.crop, a.crop);
  return img;
}

void setup_png(CLI::App& app, Common& common, PngArgs& rs, PngArgs& ex) {
  auto* cmd = app.add_subcommand("reslice", "Write an orthogonal reslice as PNG");
  add_seed(cmd, common);
  cmd->add_option("--in", rs.in, "Volume, VXV")->required();
  cmd->add_option("--plane", rs.plane, "xz | yz")->required();
  cmd->add_option("--index", rs.index, "Position along the fixed axis")->required();
  cmd->add_option("--out", rs.out, "PNG output")->required();
  cmd->add_option("--crop", rs.crop, "Center-crop to a square of this side");
  cmd->add_flag("--normalize", rs.normalize, "Normalize the volume before mapping");
  cmd->callback([&] {
    if (rs.plane == "xy") throw ConfigError("reslice planes are xz and yz; use export-png for xy sections");
    write_png(rs.out, pick_section(rs));
  });

  auto* png = app.add_subcommand("export-png", "Write a section (xy, xz or yz) as 8-bit PNG");
  add_seed(png, common);
  png->add_option("--in", ex.in, "Volume, VXV")->required();
  png->add_option("--plane", ex.plane, "xy | xz | yz");
  png->add_option("--index", ex.index, "Section index");
  png->add_option("--out", ex.out, "PNG output")->required();
  png->add_option("--crop", ex.crop, "Center-crop to a square of this side");
  png->add_flag("--normalize", ex.normalize, "Normalize the volume before mapping");
  png->callback([&] {
    if (ex.plane != "xy") parse_plane(ex.plane);
    write_png(ex.out, pick_section(ex));
  });
}

// ---- eval -----------------------------------------------------------------

struct EvalArgs {
  std::string pred, truth, task, ckpt, in, clean;
  Index k = -1;
  Index tile_z = 0;
};

void setup_eval(CLI::App& app, Common& common, EvalArgs& a) {
  auto* cmd = app.add_subcommand("eval", "Print a MetricsReport");
  add_seed(cmd, common);
  cmd->add_option("--pred", a.pred, "Prediction volume, VXV");
  cmd->add_option("--truth", a.truth, "Reference volume, VXV (psnr peak comes from it)");
  cmd->add_option("--task", a.task, "interp | align: evaluate a checkpoint instead");
  cmd->add_option("--ckpt", a.ckpt, "Generator checkpoint or training directory");
  cmd->add_option("--in", a.in, "Input volume for --task");
  cmd->add_option("--clean", a.clean, "Clean volume (align)");
  cmd->add_option("--k", a.k, "Held-out section (interp)");
  cmd->add_option("--tile-z", a.tile_z, "Output slices per chunk (align)");
  cmd->callback([&] {
    if (a.task.empty()) {
      if (a.pred.empty() || a.truth.empty()) throw ConfigError("eval needs --pred and --truth, or --task");
      const Volume pred = read_vxv(a.pred), truth = read_vxv(a.truth);
      // Differing extents are compared on their common centered region.
      const Dims d{std::min(pred.dims().z, truth.dims().z), std::min(pred.dims().y, truth.dims().y),
                   std::min(pred.dims().x, truth.dims().x)};
      std::cout << format_report(compare(center_crop(pred, d), center_crop(truth, d)));
      return;
    }
    if (a.ckpt.empty() || a.in.empty()) throw ConfigError("eval --task needs --ckpt and --in");
    const ParamSet gen = load_checkpoint(resolve_generator(a.ckpt));
    switch (parse_task(a.task)) {
      case Task::Interp: {
        if (a.k < 0) throw ConfigError("eval --task interp needs --k");
        const Volume v = load_normalized(a.in);
        if (a.truth.empty()) {
          std::cout << format_report(evaluate_interpolation(gen, v, a.k));
        } else {
          const Volume t = load_normalized(a.truth);
          std::cout << format_report(evaluate_interpolation(gen, v, a.k, t.slice(a.k)));
        }
        break;
      }
      case Task::Align: {
        if (a.clean.empty()) throw ConfigError("eval --task align needs --clean");
        PhantomTruth truth;
        truth.degraded = read_vxv(a.in);
        truth.clean = read_vxv(a.clean);
        const AlignmentEvaluation e = evaluate_alignment(gen, truth, a.tile_z);
        std::cout << "[input_vs_clean]\n" << format_report(e.input_vs_clean) << "[output_vs_clean]\n"
                  << format_report(e.output_vs_clean);
        break;
      }
      case Task::Sr: throw ConfigError("eval --task sr has no ground-truth comparison; use infer then eval --pred");
    }
  });
}

// ---- grad-check -----------------------------------------------------------

struct GradArgs {
  std::string net = "interp";
  Index width = 3;
  Index coords = 6;
  double tolerance = 1e-4;
};

GradCheckResult check_network(const GradArgs& a, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto random_tensor = [&](Shape shape, bool rg) {
    Tensor t(shape, rg);
    for (Index i = 0; i < t.size(); ++i) t.mutable_value()[i] = normal(rng);
    return t;
  };
  const GeneratorOptions gopt{a.width};
  Network net;
  std::function<Tensor(const ParamSet&)> forward;
  if (a.net == "interp") {
    net = build_interp_generator(seed, gopt);
    const Tensor x = random_tensor({2, 25, 25}, false);
    const Image below = Eigen::Map<const Image>(x.value().data(), 25, 25);
    const Image above = Eigen::Map<const Image>(x.value().data() + 625, 25, 25);
    forward = [below, above](const ParamSet& p) { return forward_interp(p, below, above); };
  } else if (a.net == "align") {
    net = build_align_generator(seed, gopt);
    const Tensor x = random_tensor({1, 14, 14, 14}, false);
    forward = [x](const ParamSet& p) { return forward_align(p, x); };
  } else if (a.net == "sr") {
    net = build_sr_generator(seed, gopt);
    const Tensor x = random_tensor({1, 16, 15, 15}, false);
    forward = [x](const ParamSet& p) { return forward_sr(p, x); };
  } else if (a.net == "disc") {
    DiscriminatorOptions dopt;
    dopt.n_slices = 2;
    dopt.input = {discriminator_min_input(), discriminator_min_input()};
    dopt.channels = 3;
    dopt.hidden = 5;
    net = build_discriminator(seed, dopt);
    const Index side = dopt.input.h;
    const std::vector<Tensor> slices{random_tensor({1, side, side}, false), random_tensor({1, side, side}, false)};
    forward = [slices](const ParamSet& p) {
      Rng unused(0);
      return forward_discriminator(p, slices, unused, false);
    };
  } else {
    throw ConfigError("--net must be interp, align, sr or disc");
  }
  // Zero-initialized output layers would make every upstream gradient vanish.
  for (auto& [name, t] : net.params)
    for (Index i = 0; i < t.size(); ++i) t.mutable_value()[i] = 0.5 * normal(rng);
  const Tensor out_shape_probe = forward(net.params.detached());
  const Tensor weights = random_tensor(out_shape_probe.shape(), false);
  auto loss = [forward, weights](const ParamSet& p) { return sum(mul(forward(p), weights)); };
  GradCheckOptions opt;
  opt.max_coords_per_tensor = a.coords;
  opt.seed = seed;
  return grad_check(loss, net.params, opt);
}

void setup_grad_check(CLI::App& app, Common& common, GradArgs& a, int& status) {
  auto* cmd = app.add_subcommand("grad-check", "Finite-difference check of a full network");
  add_seed(cmd, common);
  cmd->add_option("--net", a.net, "interp | align | sr | disc");
  cmd->add_option("--width", a.width, "Generator feature maps");
  cmd->add_option("--coords", a.coords, "Coordinates per parameter tensor (0 = all)");
  cmd->add_option("--tolerance", a.tolerance, "Maximum relative error");
  cmd->callback([&] {
    const GradCheckResult r = check_network(a, common.seed);
    std::printf("net\t%s\ncoords\t%lld\nmax_relative_error\t%.3e\nworst\t%s[%lld] analytic=%.9g numeric=%.9g\n%s\n",
                a.net.c_str(), static_cast<long long>(r.coords_checked), r.max_relative_error,
                r.worst_param.c_str(), static_cast<long long>(r.worst_index), r.worst_analytic, r.worst_numeric,
                r.max_relative_error < a.tolerance ? "PASS" : "FAIL");
    if (!(r.max_relative_error < a.tolerance)) status = kExitCheckFailed;
  });
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Adversarial restoration of anisotropic volumes: interpolation, alignment, super-resolution"};
  app.require_subcommand(1);
  Common common;
  app.add_option("--seed", common.seed, "Random seed");

  PhantomArgs phantom;
  RawArgs imp, exp;
  TrainArgs train;
  InferArgs infer;
  PngArgs reslice_args, png_args;
  EvalArgs eval;
  GradArgs grad;
  int status = kExitOk;
  setup_gen_phantom(app, common, phantom);
  setup_raw(app, common, imp, exp);
  setup_train(app, common, train);
  setup_infer(app, common, infer);
  setup_png(app, common, reslice_args, png_args);
  setup_eval(app, common, eval);
  setup_grad_check(app, common, grad, status);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const NonFiniteLoss& e) {
    std::cerr << "non-finite loss: " << e.what() << '\n';
    return kExitNonFinite;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return status;
}

}  // namespace vxgan
