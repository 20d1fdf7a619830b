#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vxgan/losses.hpp"
#include "vxgan/nets.hpp"
#include "vxgan/optim.hpp"
#include "vxgan/volume.hpp"

namespace vxgan {

enum class Task { Interp, Align, Sr };

const char* task_name(Task task);
Task parse_task(const std::string& name);

struct TrainingConfig {
  Task task = Task::Interp;
  bool adversarial = true;
  bool use_pixelwise_loss = true;
  /// Pixel-only regression with a single generator update per step (no discriminator).
  bool baseline = false;
  PixelLoss pixel_loss = PixelLoss::L1;
  double learning_rate = 0.002;
  double beta1 = 0.5;
  int batch_size = 6;
  std::int64_t max_step = 1000;
  /// Weight of the pixel term in G_LOSS. Default: 1/(compared voxels) for L1, 1 for MSE.
  std::optional<double> lambda_pix;
  /// Square section side (interp) or cube side (align, sr). The CLI uses 64 for cubes.
  Index patch = 100;
  std::uint64_t seed = 0;
  /// Checkpoint every N steps (0: only at the end).
  std::int64_t checkpoint_every = 0;
  Index width = 50;
  Index disc_channels = 32;
  Index disc_hidden = 256;
  double dropout = 0.5;

  /// Pixel-only defaults: learning rate 0.001, batch 6, L1.
  static TrainingConfig baseline_defaults(Task task = Task::Interp);
  void validate() const;
  /// Discriminator input side implied by task and patch.
  PatchSize discriminator_input() const;
};

struct StepReport {
  std::int64_t step = 0;
  double d_loss = 0.0;
  double g_loss = 0.0;
  double pixel_loss = 0.0;  // weighted pixel component of G_LOSS
  double p_real = 0.0;      // mean sigmoid(D) on real inputs
  double p_fake = 0.0;      // mean sigmoid(D) on generator output
};

/// Tab-separated "step D_loss G_loss pixel_loss p_real p_fake".
std::string format_step_line(const StepReport& r);

struct UpdateCounters {
  std::int64_t discriminator_updates = 0;
  std::int64_t generator_updates = 0;
};

enum class Player { Discriminator, Generator };

struct GanState {
  Network generator;
  Network discriminator;
  Adam gen_opt;
  Adam disc_opt;
  UpdateCounters counters;
  /// Called after every optimizer update.
  std::function<void(Player, const GanState&)> on_update;
};

/// Builds generator and discriminator for the task from cfg.seed.
GanState make_gan_state(const TrainingConfig& cfg);

enum class RngStream : std::uint32_t { Sampling = 1, Dropout = 2 };
/// Independent engine per (seed, step, stream); runs resume without saving RNG state.
Rng make_step_rng(std::uint64_t seed, std::int64_t step, RngStream stream);

struct InterpBatch {
  std::vector<SliceTriple> x;  // generator inputs and targets
  std::vector<SlicePair> y;    // real pairs for the discriminator
};

struct ResliceChoice {
  ReslicePlane plane = ReslicePlane::YZ;
  Index index = 0;     // position along the fixed axis of the generator output
  Index real_z = 0;    // xy section of the input used as the real sample
};

struct CubeBatch {
  std::vector<Volume> cubes;
  std::vector<ResliceChoice> choices;
};

InterpBatch sample_interp_batch(const Volume& v, Rng& rng, const TrainingConfig& cfg);
CubeBatch sample_cube_batch(const Volume& v, Rng& rng, const TrainingConfig& cfg);

// One adversarial step: one discriminator update, then two generator updates,
// each with a fresh forward/backward on the same minibatch.
StepReport train_step_interp(GanState& state, const InterpBatch& batch, const TrainingConfig& cfg, Rng& rng);
StepReport train_step_align(GanState& state, const CubeBatch& batch, const TrainingConfig& cfg, Rng& rng);
StepReport train_step_sr(GanState& state, const CubeBatch& batch, const TrainingConfig& cfg, Rng& rng);

/// Differentiable orthogonal reslice of a [1,Z,Y,X] tensor, returned as [1,Z,Y] (yz) or [1,Z,X] (xz).
Tensor reslice_tensor(const Tensor& volume, ReslicePlane plane, Index index);

/// Pixel loss between the SR output [1,2s,s,s] and the input sections its even slices sit on.
Tensor sr_pixel_loss(const Tensor& output, const Volume& input, PixelLoss kind);

/// Pixel-only interpolation training. Updates `gen` in place and returns the
/// per-step (weighted) loss.
std::vector<double> train_baseline_interp(Network& gen, Adam& opt, const Volume& volume, const TrainingConfig& cfg,
                                          const std::function<void(const StepReport&)>& on_step = {});

/// Drives training steps over a normalized copy of a volume.
class Trainer {
 public:
  Trainer(TrainingConfig cfg, const Volume& volume);

  StepReport step();
  std::int64_t steps_done() const { return steps_done_; }
  const TrainingConfig& config() const { return cfg_; }
  GanState& state() { return state_; }
  const GanState& state() const { return state_; }
  const Volume& volume() const { return volume_; }

  void save_checkpoint(const std::filesystem::path& dir) const;
  /// Restores the state saved by save_checkpoint for step `step`.
  void load_checkpoint(const std::filesystem::path& dir, std::int64_t step);

 private:
  TrainingConfig cfg_;
  Volume volume_;
  GanState state_;
  std::int64_t steps_done_ = 0;
};

struct RunSummary {
  std::int64_t first_step = 1;
  std::int64_t last_step = 0;
  std::vector<StepReport> reports;
};

std::filesystem::path generator_checkpoint_path(const std::filesystem::path& dir, std::int64_t step);
std::filesystem::path discriminator_checkpoint_path(const std::filesystem::path& dir, std::int64_t step);
/// Step recorded in <dir>/latest, or nullopt when absent.
std::optional<std::int64_t> latest_checkpoint_step(const std::filesystem::path& dir);

/// Runs steps up to cfg.max_step, appending to <out_dir>/steps.tsv (flushed per
/// line) and checkpointing at the configured cadence plus the final step. With
/// `resume`, continues from <out_dir>/latest and truncates the log to match.
RunSummary run_training(const TrainingConfig& cfg, const Volume& volume, const std::filesystem::path& out_dir,
                        bool resume = false, const std::function<void(const StepReport&)>& on_step = {});

/// key=value lines; unknown keys throw ConfigError.
void write_config(const std::filesystem::path& path, const TrainingConfig& cfg);
TrainingConfig read_config(const std::filesystem::path& path, TrainingConfig base = {});

}  // namespace vxgan
