#include "vxgan/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "vxgan/checkpoint.hpp"

namespace vxgan {
namespace {

// One minibatch element, prepared so the three generator evaluations of a step
// (discriminator phase plus two generator updates) see identical inputs.
struct Sample {
  std::function<Tensor(const ParamSet&)> generate;
  std::function<std::vector<Tensor>(const Tensor&)> fake;
  std::vector<Tensor> real;
  std::function<std::pair<Tensor, Tensor>(const Tensor&)> pixel;  // (prediction, reference)
};

double pixel_weight(const TrainingConfig& cfg, const Tensor& prediction) {
  if (cfg.lambda_pix) return *cfg.lambda_pix;
  return cfg.pixel_loss == PixelLoss::L1 ? 1.0 / static_cast<double>(prediction.size()) : 1.0;
}

void require_finite(double value, const char* what, std::int64_t counter) {
  if (!std::isfinite(value)) {
    std::ostringstream os;
    os << what << " became non-finite (" << value << ") at update " << counter;
    throw NonFiniteLoss(os.str());
  }
}

double probability(const Tensor& logit) { return 1.0 / (1.0 + std::exp(-logit.item())); }

StepReport adversarial_step(GanState& st, const std::vector<Sample>& samples, const TrainingConfig& cfg, Rng& rng) {
  StepReport report;
  const double m = static_cast<double>(samples.size());

  // Discriminator update on detached generator output.
  {
    const ParamSet frozen_gen = st.generator.params.detached();
    st.discriminator.params.zero_grad();
    for (const auto& s : samples) {
      const Tensor out = s.generate(frozen_gen);
      const Tensor fake_logit = forward_discriminator(st.discriminator.params, s.fake(out), rng, true, cfg.dropout);
      const Tensor real_logit = forward_discriminator(st.discriminator.params, s.real, rng, true, cfg.dropout);
      const Tensor loss = bce_loss(fake_logit, 0) + bce_loss(real_logit, 1);
      backward(loss);
      report.d_loss += loss.item();
      report.p_fake += probability(fake_logit) / m;
      report.p_real += probability(real_logit) / m;
    }
    require_finite(report.d_loss, "D_LOSS", st.counters.discriminator_updates + 1);
    st.disc_opt.step(st.discriminator.params);
    ++st.counters.discriminator_updates;
    if (st.on_update) st.on_update(Player::Discriminator, st);
  }

  for (int update = 0; update < 2; ++update) {
    st.generator.params.zero_grad();
    double g_loss = 0.0, pixel = 0.0;
    for (const auto& s : samples) {
      const Tensor out = s.generate(st.generator.params);
      std::vector<Tensor> terms;
      if (cfg.adversarial)
        terms.push_back(
            bce_loss(forward_discriminator(st.discriminator.params, s.fake(out), rng, true, cfg.dropout), 1));
      if (cfg.use_pixelwise_loss) {
        const auto [pred, ref] = s.pixel(out);
        const Tensor term = scale(pixel_loss(cfg.pixel_loss, pred, ref), pixel_weight(cfg, pred));
        pixel += term.item();
        terms.push_back(term);
      }
      const Tensor loss = add_n(terms);
      backward(loss);
      g_loss += loss.item();
    }
    require_finite(g_loss, "G_LOSS", st.counters.generator_updates + 1);
    st.gen_opt.step(st.generator.params);
    ++st.counters.generator_updates;
    if (update == 0) {
      report.g_loss = g_loss;
      report.pixel_loss = pixel;
    }
    if (st.on_update) st.on_update(Player::Generator, st);
  }
  // Generator backward passes leave gradients on the discriminator; they are never applied.
  st.discriminator.params.zero_grad();
  return report;
}

Tensor image_tensor(const Image& img) { return to_tensor(img); }

std::vector<Sample> interp_samples(const InterpBatch& batch) {
  std::vector<Sample> samples;
  for (std::size_t i = 0; i < batch.x.size(); ++i) {
    const SliceTriple& x = batch.x[i];
    const SlicePair& y = batch.y[i];
    const PatchSize out = interp_output_size({x.below.rows(), x.below.cols()});
    const Tensor below = image_tensor(center_crop(x.below, out.h, out.w));
    const Tensor target = image_tensor(center_crop(x.target, out.h, out.w));
    Sample s;
    s.generate = [x](const ParamSet& p) { return forward_interp(p, x.below, x.above); };
    s.fake = [below](const Tensor& g) { return std::vector<Tensor>{below, g}; };
    s.real = {image_tensor(center_crop(y.below, out.h, out.w)), image_tensor(center_crop(y.target, out.h, out.w))};
    s.pixel = [target](const Tensor& g) { return std::make_pair(g, target); };
    samples.push_back(std::move(s));
  }
  return samples;
}

void check_batch(std::size_t got, const TrainingConfig& cfg) {
  if (static_cast<int>(got) != cfg.batch_size)
    throw ShapeMismatch("minibatch holds " + std::to_string(got) + " samples, config says " +
                        std::to_string(cfg.batch_size));
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

const char* task_name(Task task) {
  switch (task) {
    case Task::Interp: return "interp";
    case Task::Align: return "align";
    case Task::Sr: return "sr";
  }
  return "?";
}

Task parse_task(const std::string& name) {
  if (name == "interp") return Task::Interp;
  if (name == "align") return Task::Align;
  if (name == "sr") return Task::Sr;
  throw ConfigError("unknown task '" + name + "' (expected interp, align or sr)");
}

TrainingConfig TrainingConfig::baseline_defaults(Task task) {
  TrainingConfig cfg;
  cfg.task = task;
  cfg.baseline = true;
  cfg.adversarial = false;
  cfg.use_pixelwise_loss = true;
  cfg.learning_rate = 0.001;
  cfg.batch_size = 6;
  return cfg;
}

void TrainingConfig::validate() const {
  if (batch_size < 1) throw ConfigError("batch size must be >= 1");
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be > 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0)) throw ConfigError("beta1 must lie in [0,1)");
  if (max_step < 0) throw ConfigError("max_step must be >= 0");
  if (width < 1) throw ConfigError("width must be >= 1");
  if (checkpoint_every < 0) throw ConfigError("checkpoint cadence must be >= 0");
  if (!baseline && !adversarial && !use_pixelwise_loss)
    throw ConfigError("training needs the adversarial term, the pixel term, or both");
  if (baseline && !use_pixelwise_loss) throw ConfigError("baseline training is pixel-only");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must lie in [0,1)");
  if (lambda_pix && !(*lambda_pix >= 0.0)) throw ConfigError("lambda_pix must be >= 0");
  switch (task) {
    case Task::Interp: interp_output_size({patch, patch}); break;
    case Task::Align: align_output_dims({patch, patch, patch}); break;
    case Task::Sr: sr_output_dims({patch, patch, patch}); break;
  }
  if (!baseline) {
    const PatchSize d = discriminator_input();
    if (discriminator_tower_extent(d.h) < 1)
      throw ConfigError("patch " + std::to_string(patch) + " gives a " + std::to_string(d.h) +
                        "-pixel discriminator input; the minimum is " + std::to_string(discriminator_min_input()));
  }
}

PatchSize TrainingConfig::discriminator_input() const {
  switch (task) {
    case Task::Interp: return interp_output_size({patch, patch});
    case Task::Align: {
      const Dims d = align_output_dims({patch, patch, patch});
      return {d.y, d.x};
    }
    case Task::Sr: {
      const Dims d = sr_output_dims({patch, patch, patch});
      return {d.y, d.x};
    }
  }
  return {};
}

std::string format_step_line(const StepReport& r) {
  return std::to_string(r.step) + '\t' + format_double(r.d_loss) + '\t' + format_double(r.g_loss) + '\t' +
         format_double(r.pixel_loss) + '\t' + format_double(r.p_real) + '\t' + format_double(r.p_fake);
}

GanState make_gan_state(const TrainingConfig& cfg) {
  GanState st;
  const GeneratorOptions gopt{cfg.width};
  switch (cfg.task) {
    case Task::Interp: st.generator = build_interp_generator(cfg.seed, gopt); break;
    case Task::Align: st.generator = build_align_generator(cfg.seed, gopt); break;
    case Task::Sr: st.generator = build_sr_generator(cfg.seed, gopt); break;
  }
  const AdamConfig adam{cfg.learning_rate, cfg.beta1, 0.999, 1e-8};
  st.gen_opt = Adam(adam);
  st.disc_opt = Adam(adam);
  if (!cfg.baseline) {
    DiscriminatorOptions dopt;
    dopt.n_slices = cfg.task == Task::Interp ? 2 : 1;
    dopt.input = cfg.discriminator_input();
    dopt.channels = cfg.disc_channels;
    dopt.hidden = cfg.disc_hidden;
    dopt.dropout = cfg.dropout;
    // Distinct stream so generator and discriminator initializations are independent.
    st.discriminator = build_discriminator(cfg.seed ^ 0x9E3779B97F4A7C15ULL, dopt);
  }
  return st;
}

Rng make_step_rng(std::uint64_t seed, std::int64_t step, RngStream stream) {
  const auto ustep = static_cast<std::uint64_t>(step);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(ustep), static_cast<std::uint32_t>(ustep >> 32),
                    static_cast<std::uint32_t>(stream)};
  return Rng(seq);
}

InterpBatch sample_interp_batch(const Volume& v, Rng& rng, const TrainingConfig& cfg) {
  InterpBatch b;
  const PatchSize patch{cfg.patch, cfg.patch};
  for (int i = 0; i < cfg.batch_size; ++i) b.x.push_back(sample_triple(v, rng, patch));
  for (int i = 0; i < cfg.batch_size; ++i) b.y.push_back(sample_pair(v, rng, patch));
  return b;
}

CubeBatch sample_cube_batch(const Volume& v, Rng& rng, const TrainingConfig& cfg) {
  CubeBatch b;
  const Index out = cfg.task == Task::Sr ? sr_output_dims({cfg.patch, cfg.patch, cfg.patch}).y
                                         : align_output_dims({cfg.patch, cfg.patch, cfg.patch}).y;
  std::uniform_int_distribution<Index> index(0, out - 1);
  std::uniform_int_distribution<Index> real_z(0, cfg.patch - 1);
  std::bernoulli_distribution coin(0.5);
  for (int i = 0; i < cfg.batch_size; ++i) {
    b.cubes.push_back(sample_cube(v, rng, cfg.patch));
    ResliceChoice c;
    c.plane = coin(rng) ? ReslicePlane::XZ : ReslicePlane::YZ;
    c.index = index(rng);
    c.real_z = real_z(rng);
    b.choices.push_back(c);
  }
  return b;
}

Tensor reslice_tensor(const Tensor& volume, ReslicePlane plane, Index index) {
  if (volume.rank() != 4 || volume.dim(0) != 1)
    throw ShapeMismatch("reslice_tensor: expected [1,Z,Y,X], got " + shape_string(volume.shape()));
  const Index z = volume.dim(1), y = volume.dim(2), x = volume.dim(3);
  if (plane == ReslicePlane::YZ) {
    if (index < 0 || index >= x) throw IndexOutOfRange("yz reslice index " + std::to_string(index));
    const Index start[] = {0, 0, 0, index}, extent[] = {1, z, y, 1};
    return reshape(crop(volume, start, extent), {1, z, y});
  }
  if (index < 0 || index >= y) throw IndexOutOfRange("xz reslice index " + std::to_string(index));
  const Index start[] = {0, 0, index, 0}, extent[] = {1, z, 1, x};
  return reshape(crop(volume, start, extent), {1, z, x});
}

Tensor sr_pixel_loss(const Tensor& output, const Volume& input, PixelLoss kind) {
  const Dims expect = sr_output_dims(input.dims());
  if (output.shape() != Shape{1, expect.z, expect.y, expect.x})
    throw ShapeMismatch("sr_pixel_loss: output " + shape_string(output.shape()) + " does not match input");
  std::vector<Tensor> predicted;
  Array reference(static_cast<Index>(expect.z / 2) * expect.y * expect.x);
  Index offset = 0;
  for (const auto& [out_z, in_z] : sr_slice_correspondence(input.dims().z)) {
    const Index start[] = {0, out_z, 0, 0}, extent[] = {1, 1, expect.y, expect.x};
    predicted.push_back(crop(output, start, extent));
    const Image ref = center_crop(input.slice(in_z), expect.y, expect.x);
    reference.segment(offset, ref.size()) = Eigen::Map<const Array>(ref.data(), ref.size());
    offset += ref.size();
  }
  const Tensor pred = concat(predicted);
  return pixel_loss(kind, pred, Tensor({reference.size()}, reference));
}

StepReport train_step_interp(GanState& state, const InterpBatch& batch, const TrainingConfig& cfg, Rng& rng) {
  check_batch(batch.x.size(), cfg);
  check_batch(batch.y.size(), cfg);
  return adversarial_step(state, interp_samples(batch), cfg, rng);
}

StepReport train_step_align(GanState& state, const CubeBatch& batch, const TrainingConfig& cfg, Rng& rng) {
  check_batch(batch.cubes.size(), cfg);
  std::vector<Sample> samples;
  for (std::size_t i = 0; i < batch.cubes.size(); ++i) {
    const Volume& cube = batch.cubes[i];
    const ResliceChoice c = batch.choices[i];
    const Dims out = align_output_dims(cube.dims());
    const Tensor input = to_tensor(cube);
    const Tensor anchor = to_tensor(center_crop(cube, out));
    Sample s;
    s.generate = [input](const ParamSet& p) { return forward_align(p, input); };
    s.fake = [c](const Tensor& g) { return std::vector<Tensor>{reslice_tensor(g, c.plane, c.index)}; };
    s.real = {to_tensor(center_crop(cube.slice(c.real_z), out.y, out.x))};
    s.pixel = [anchor](const Tensor& g) { return std::make_pair(g, anchor); };
    samples.push_back(std::move(s));
  }
  return adversarial_step(state, samples, cfg, rng);
}

StepReport train_step_sr(GanState& state, const CubeBatch& batch, const TrainingConfig& cfg, Rng& rng) {
  check_batch(batch.cubes.size(), cfg);
  std::vector<Sample> samples;
  for (std::size_t i = 0; i < batch.cubes.size(); ++i) {
    const Volume& cube = batch.cubes[i];
    const ResliceChoice c = batch.choices[i];
    const Dims out = sr_output_dims(cube.dims());
    const Tensor input = to_tensor(cube);
    Sample s;
    s.generate = [input](const ParamSet& p) { return forward_sr(p, input); };
    s.fake = [c, out](const Tensor& g) {
      // The reslice is 2s x s; crop z to the xy size.
      const Tensor r = reslice_tensor(g, c.plane, c.index);
      return std::vector<Tensor>{center_crop(r, {1, out.y, out.x})};
    };
    s.real = {to_tensor(center_crop(cube.slice(c.real_z), out.y, out.x))};
    s.pixel = [cube, out](const Tensor& g) {
      std::vector<Tensor> pred;
      std::vector<Tensor> ref;
      for (const auto& [out_z, in_z] : sr_slice_correspondence(cube.dims().z)) {
        const Index start[] = {0, out_z, 0, 0}, extent[] = {1, 1, out.y, out.x};
        pred.push_back(crop(g, start, extent));
        ref.push_back(to_tensor(center_crop(cube.slice(in_z), out.y, out.x)));
      }
      return std::make_pair(concat(pred), concat(ref));
    };
    samples.push_back(std::move(s));
  }
  return adversarial_step(state, samples, cfg, rng);
}

namespace {

StepReport baseline_step(GanState& st, const std::vector<Sample>& samples, const TrainingConfig& cfg) {
  StepReport report;
  st.generator.params.zero_grad();
  for (const auto& s : samples) {
    const auto [pred, ref] = s.pixel(s.generate(st.generator.params));
    const Tensor loss = scale(pixel_loss(cfg.pixel_loss, pred, ref), pixel_weight(cfg, pred));
    backward(loss);
    report.pixel_loss += loss.item();
  }
  report.g_loss = report.pixel_loss;
  require_finite(report.g_loss, "pixel loss", st.counters.generator_updates + 1);
  st.gen_opt.step(st.generator.params);
  ++st.counters.generator_updates;
  if (st.on_update) st.on_update(Player::Generator, st);
  return report;
}

std::vector<Sample> cube_pixel_samples(const CubeBatch& batch, Task task) {
  std::vector<Sample> samples;
  for (const Volume& cube : batch.cubes) {
    const Tensor input = to_tensor(cube);
    Sample s;
    if (task == Task::Align) {
      const Tensor anchor = to_tensor(center_crop(cube, align_output_dims(cube.dims())));
      s.generate = [input](const ParamSet& p) { return forward_align(p, input); };
      s.pixel = [anchor](const Tensor& g) { return std::make_pair(g, anchor); };
    } else {
      s.generate = [input](const ParamSet& p) { return forward_sr(p, input); };
      s.pixel = [cube](const Tensor& g) {
        // Reuse the loss definition through a (prediction, reference) pair.
        const Dims out = sr_output_dims(cube.dims());
        std::vector<Tensor> pred, ref;
        for (const auto& [out_z, in_z] : sr_slice_correspondence(cube.dims().z)) {
          const Index start[] = {0, out_z, 0, 0}, extent[] = {1, 1, out.y, out.x};
          pred.push_back(crop(g, start, extent));
          ref.push_back(to_tensor(center_crop(cube.slice(in_z), out.y, out.x)));
        }
        return std::make_pair(concat(pred), concat(ref));
      };
    }
    samples.push_back(std::move(s));
  }
  return samples;
}

}  // namespace

std::vector<double> train_baseline_interp(Network& gen, Adam& opt, const Volume& volume, const TrainingConfig& cfg,
                                          const std::function<void(const StepReport&)>& on_step) {
  TrainingConfig c = cfg;
  c.baseline = true;
  c.task = Task::Interp;
  c.validate();
  GanState st;
  st.generator = std::move(gen);
  st.gen_opt = std::move(opt);
  std::vector<double> curve;
  for (std::int64_t step = 1; step <= c.max_step; ++step) {
    Rng rng = make_step_rng(c.seed, step, RngStream::Sampling);
    StepReport r = baseline_step(st, interp_samples(sample_interp_batch(volume, rng, c)), c);
    r.step = step;
    curve.push_back(r.g_loss);
    if (on_step) on_step(r);
  }
  gen = std::move(st.generator);
  opt = std::move(st.gen_opt);
  return curve;
}

Trainer::Trainer(TrainingConfig cfg, const Volume& volume)
    : cfg_(std::move(cfg)), volume_(normalize(volume)), state_(make_gan_state(cfg_)) {
  cfg_.validate();
}

StepReport Trainer::step() {
  const std::int64_t step = steps_done_ + 1;
  Rng sampling = make_step_rng(cfg_.seed, step, RngStream::Sampling);
  Rng dropout = make_step_rng(cfg_.seed, step, RngStream::Dropout);
  StepReport r;
  if (cfg_.baseline) {
    if (cfg_.task == Task::Interp)
      r = baseline_step(state_, interp_samples(sample_interp_batch(volume_, sampling, cfg_)), cfg_);
    else
      r = baseline_step(state_, cube_pixel_samples(sample_cube_batch(volume_, sampling, cfg_), cfg_.task), cfg_);
  } else {
    switch (cfg_.task) {
      case Task::Interp: r = train_step_interp(state_, sample_interp_batch(volume_, sampling, cfg_), cfg_, dropout); break;
      case Task::Align: r = train_step_align(state_, sample_cube_batch(volume_, sampling, cfg_), cfg_, dropout); break;
      case Task::Sr: r = train_step_sr(state_, sample_cube_batch(volume_, sampling, cfg_), cfg_, dropout); break;
    }
  }
  r.step = step;
  steps_done_ = step;
  return r;
}

std::filesystem::path generator_checkpoint_path(const std::filesystem::path& dir, std::int64_t step) {
  return dir / ("gen_step" + std::to_string(step) + ".vxck");
}

std::filesystem::path discriminator_checkpoint_path(const std::filesystem::path& dir, std::int64_t step) {
  return dir / ("disc_step" + std::to_string(step) + ".vxck");
}

std::optional<std::int64_t> latest_checkpoint_step(const std::filesystem::path& dir) {
  std::ifstream in(dir / "latest");
  std::int64_t step = 0;
  if (!(in >> step)) return std::nullopt;
  return step;
}

void Trainer::save_checkpoint(const std::filesystem::path& dir) const {
  vxgan::save_checkpoint(generator_checkpoint_path(dir, steps_done_), state_.generator.params, &state_.gen_opt);
  if (!cfg_.baseline)
    vxgan::save_checkpoint(discriminator_checkpoint_path(dir, steps_done_), state_.discriminator.params,
                           &state_.disc_opt);
  const auto latest = dir / "latest";
  auto tmp = latest;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << steps_done_ << '\n';
    if (!out.flush()) throw DataError("cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, latest);
}

void Trainer::load_checkpoint(const std::filesystem::path& dir, std::int64_t step) {
  auto restore = [](Network& net, Adam& opt, const std::filesystem::path& path) {
    ParamSet loaded = vxgan::load_checkpoint(path, &opt);
    if (loaded.size() != net.params.size()) throw FormatError(path.string() + ": parameter set does not match");
    for (const auto& [name, t] : net.params)
      if (!loaded.contains(name) || loaded.at(name).shape() != t.shape())
        throw FormatError(path.string() + ": parameter '" + name + "' missing or reshaped");
    net.params = std::move(loaded);
  };
  restore(state_.generator, state_.gen_opt, generator_checkpoint_path(dir, step));
  if (!cfg_.baseline) restore(state_.discriminator, state_.disc_opt, discriminator_checkpoint_path(dir, step));
  steps_done_ = step;
}

RunSummary run_training(const TrainingConfig& cfg, const Volume& volume, const std::filesystem::path& out_dir,
                        bool resume, const std::function<void(const StepReport&)>& on_step) {
  std::filesystem::create_directories(out_dir);
  Trainer trainer(cfg, volume);
  const auto log_path = out_dir / "steps.tsv";
  RunSummary summary;

  std::int64_t start = 0;
  if (resume) {
    if (auto latest = latest_checkpoint_step(out_dir)) start = *latest;
  }
  if (start > 0) {
    trainer.load_checkpoint(out_dir, start);
    // Keep exactly the log lines up to the checkpoint.
    std::vector<std::string> kept;
    std::ifstream in(log_path);
    for (std::string line; kept.size() < static_cast<std::size_t>(start) && std::getline(in, line);)
      kept.push_back(line);
    in.close();
    if (kept.size() != static_cast<std::size_t>(start))
      throw DataError(log_path.string() + " holds fewer lines than checkpoint step " + std::to_string(start));
    std::ofstream out(log_path, std::ios::trunc);
    for (const auto& line : kept) out << line << '\n';
  } else {
    std::ofstream(log_path, std::ios::trunc);
    write_config(out_dir / "run.cfg", cfg);
    trainer.save_checkpoint(out_dir);
  }

  summary.first_step = start + 1;
  summary.last_step = start;
  std::ofstream log(log_path, std::ios::app);
  while (trainer.steps_done() < cfg.max_step) {
    const StepReport r = trainer.step();
    log << format_step_line(r) << '\n';
    log.flush();
    summary.reports.push_back(r);
    summary.last_step = r.step;
    if (on_step) on_step(r);
    const bool cadence = cfg.checkpoint_every > 0 && r.step % cfg.checkpoint_every == 0;
    if (cadence || r.step == cfg.max_step) trainer.save_checkpoint(out_dir);
  }
  return summary;
}

void write_config(const std::filesystem::path& path, const TrainingConfig& cfg) {
  std::ostringstream os;
  os << "task=" << task_name(cfg.task) << '\n'
     << "adversarial=" << (cfg.adversarial ? "true" : "false") << '\n'
     << "pixel-loss=" << (cfg.use_pixelwise_loss ? "true" : "false") << '\n'
     << "baseline=" << (cfg.baseline ? "true" : "false") << '\n'
     << "loss=" << (cfg.pixel_loss == PixelLoss::L1 ? "l1" : "mse") << '\n'
     << "lr=" << format_double(cfg.learning_rate) << '\n'
     << "beta1=" << format_double(cfg.beta1) << '\n'
     << "batch=" << cfg.batch_size << '\n'
     << "steps=" << cfg.max_step << '\n';
  if (cfg.lambda_pix) os << "lambda-pix=" << format_double(*cfg.lambda_pix) << '\n';
  os << "patch=" << cfg.patch << '\n'
     << "seed=" << cfg.seed << '\n'
     << "checkpoint-every=" << cfg.checkpoint_every << '\n'
     << "width=" << cfg.width << '\n'
     << "disc-channels=" << cfg.disc_channels << '\n'
     << "disc-hidden=" << cfg.disc_hidden << '\n'
     << "dropout=" << format_double(cfg.dropout) << '\n';
  std::ofstream out(path, std::ios::trunc);
  if (!(out << os.str())) throw DataError("cannot write " + path.string());
}

TrainingConfig read_config(const std::filesystem::path& path, TrainingConfig cfg) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  auto as_bool = [](const std::string& key, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError("bad boolean for " + key + ": " + v);
  };
  for (std::string line; std::getline(in, line);) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(path.string() + ": expected key=value, got '" + line + "'");
    const std::string key = line.substr(0, eq), v = line.substr(eq + 1);
    try {
      if (key == "task") cfg.task = parse_task(v);
      else if (key == "adversarial") cfg.adversarial = as_bool(key, v);
      else if (key == "pixel-loss") cfg.use_pixelwise_loss = as_bool(key, v);
      else if (key == "baseline") cfg.baseline = as_bool(key, v);
      else if (key == "loss") {
        if (v != "l1" && v != "mse") throw ConfigError("loss must be l1 or mse");
        cfg.pixel_loss = v == "l1" ? PixelLoss::L1 : PixelLoss::Mse;
      } else if (key == "lr") cfg.learning_rate = std::stod(v);
      else if (key == "beta1") cfg.beta1 = std::stod(v);
      else if (key == "batch") cfg.batch_size = std::stoi(v);
      else if (key == "steps") cfg.max_step = std::stoll(v);
      else if (key == "lambda-pix") cfg.lambda_pix = std::stod(v);
      else if (key == "patch") cfg.patch = std::stoll(v);
      else if (key == "seed") cfg.seed = std::stoull(v);
      else if (key == "checkpoint-every") cfg.checkpoint_every = std::stoll(v);
      else if (key == "width") cfg.width = std::stoll(v);
      else if (key == "disc-channels") cfg.disc_channels = std::stoll(v);
      else if (key == "disc-hidden") cfg.disc_hidden = std::stoll(v);
      else if (key == "dropout") cfg.dropout = std::stod(v);
      else throw ConfigError("unknown config key '" + key + "'");
    } catch (const std::invalid_argument&) {
      throw ConfigError(path.string() + ": bad value for " + key + ": '" + v + "'");
    } catch (const std::out_of_range&) {
      throw ConfigError(path.string() + ": value out of range for " + key);
    }
  }
  return cfg;
}

}  // namespace vxgan
