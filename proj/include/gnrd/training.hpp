#pragma once

#include "gnrd/assignment.hpp"
#include "gnrd/data.hpp"
#include "gnrd/generator.hpp"
#include "gnrd/random_discriminator.hpp"

#include <functional>
#include <string>
#include <vector>

namespace gnrd {

struct WeightedDiscriminator {
    DiscriminatorSpec spec;
    double weight = 1.0;
};

/// weighted: every step samples all K discriminators and sums w_k times each
/// branch's assignment value. alternate: step t uses only entry t mod K.
enum class DiscriminatorSchedule { weighted, alternate };

DiscriminatorSchedule parse_schedule(std::string_view name);
std::string_view to_string(DiscriminatorSchedule s) noexcept;

struct TrainConfig {
    Index batch_size = 100;
    std::int64_t max_iters = 0;
    double lr = 0.001;
    double beta1 = 0.5;
    double beta2 = 0.9;
    double eps = 1e-8;

    std::vector<Index> generator_dims{100, 256, 256, 2};
    OutputActivation output = OutputActivation::identity;

    std::vector<WeightedDiscriminator> discriminators{WeightedDiscriminator{}};
    DiscriminatorSchedule schedule = DiscriminatorSchedule::weighted;
    AssignMethod assignment = AssignMethod::hungarian;

    std::uint64_t seed = 0;
    std::int64_t eval_every = 0;  // 0 disables evaluation
    Index eval_count = 512;
    std::int64_t checkpoint_every = 0;

    void validate() const;
};

/// Everything one training step consumes, drawn from the step's own stream.
struct StepInputs {
    Matrix real;   // data_dim x n
    Matrix noise;  // noise_dim x n
    std::vector<RandomFeatureMap> discriminators;
    std::vector<double> weights;
};

/// Step t draws from Rng(derive_seed(seed, "train")).split(t), so any step can
/// be regenerated without replaying earlier ones.
StepInputs draw_step_inputs(const TrainConfig& cfg, const Dataset& data, std::int64_t step);

/// c(i, j) = || gen_features.col(i) - real_features.col(j) ||_2.
Matrix build_cost_matrix(const MatrixRef& gen_features, const MatrixRef& real_features);

struct LossAndGrad {
    double loss = 0.0;
    std::vector<double> branch_losses;  // unweighted assignment value per discriminator
    std::vector<Assignment> assignments;
    std::vector<Matrix> costs;
    GeneratorGrads grads;
};

/// Solve the matching for every discriminator branch with `method`, then
/// return the loss and its gradient with the matching held fixed.
LossAndGrad compute_step(const GeneratorNet& g, const StepInputs& inputs, AssignMethod method);

/// loss = sum_k w_k (1/n) sum_i || D_k(h(w, z_i)) - D_k(x_{a_k(i)}) || and its
/// exact gradient for the given matchings. Zero-distance pairs contribute no
/// gradient.
LossAndGrad loss_and_grad(const GeneratorNet& g, const StepInputs& inputs, const std::vector<Assignment>& matchings);

/// Forward-only version of loss_and_grad.
double fixed_matching_loss(const GeneratorNet& g, const StepInputs& inputs, const std::vector<Assignment>& matchings);

struct TrainState {
    GeneratorNet generator;
    AdamState adam;
    std::int64_t step = 0;
};

TrainState init_train_state(const TrainConfig& cfg);

struct StepRecord {
    std::int64_t iter = 0;
    double loss = 0.0;
    AssignMethod method = AssignMethod::hungarian;
    double wall_ms = 0.0;
};

struct EvalRecord {
    std::int64_t iter = 0;
    double ot_identity = 0.0;
    double ot_random_feature = 0.0;
};

struct TrainHistory {
    std::vector<StepRecord> steps;
    std::vector<EvalRecord> evals;
};

/// One iteration: match, differentiate, Adam update.
StepRecord gnrd_step(TrainState& state, const StepInputs& inputs, const TrainConfig& cfg);

struct TrainCallbacks {
    std::function<void(const StepRecord&)> on_step;
    std::function<void(const EvalRecord&)> on_eval;
    std::function<void(const TrainState&)> on_checkpoint;
};

/// Fixed evaluation noise from the "eval" stream of cfg.seed.
Matrix eval_noise(const TrainConfig& cfg);

EvalRecord evaluate(const TrainConfig& cfg, const GeneratorNet& g, const MatrixRef& held_out, std::int64_t iter);

/// Advance `state` to cfg.max_iters. Evaluation (when held_out is given and
/// eval_every > 0) runs at multiples of eval_every and after the last step.
TrainHistory train(const TrainConfig& cfg, const Dataset& data, TrainState& state, const Matrix* held_out = nullptr,
                   const TrainCallbacks& callbacks = {});

std::pair<GeneratorNet, TrainHistory> train(const TrainConfig& cfg, const Dataset& data);

/// Fill input_dim of identity/unset discriminator specs with the data dim.
void bind_data_dim(TrainConfig& cfg, Index data_dim);

}  // namespace gnrd
