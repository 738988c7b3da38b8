#include "gnrd/training.hpp"

#include "gnrd/error.hpp"
#include "gnrd/metrics.hpp"

#include <chrono>
#include <cmath>
#include <optional>
#include <string>

namespace gnrd {

DiscriminatorSchedule parse_schedule(std::string_view name) {
    if (name == "weighted") return DiscriminatorSchedule::weighted;
    if (name == "alternate") return DiscriminatorSchedule::alternate;
    throw ConfigError("unknown discriminator schedule '" + std::string(name) + "'");
}

std::string_view to_string(DiscriminatorSchedule s) noexcept {
    return s == DiscriminatorSchedule::alternate ? "alternate" : "weighted";
}

void TrainConfig::validate() const {
    if (batch_size < 2) throw ConfigError("train: batch_size must be at least 2");
    if (max_iters < 0) throw ConfigError("train: max_iters must be nonnegative");
    if (generator_dims.size() < 2) throw ConfigError("train: generator needs at least two layer dims");
    if (discriminators.empty()) throw ConfigError("train: at least one discriminator is required");
    for (const auto& d : discriminators) {
        d.spec.validate();
        if (d.spec.input_dim != generator_dims.back()) {
            throw ConfigError("train: discriminator input_dim " + std::to_string(d.spec.input_dim) +
                              " does not match generator output " + std::to_string(generator_dims.back()));
        }
        if (!(d.weight >= 0.0)) throw ConfigError("train: discriminator weights must be nonnegative");
    }
    if (schedule == DiscriminatorSchedule::weighted && discriminators.size() > 1) {
        double total = 0.0;
        for (const auto& d : discriminators) total += d.weight;
        if (std::abs(total - 1.0) > 1e-9) throw ConfigError("train: discriminator weights must sum to 1");
    }
    if (eval_every < 0 || checkpoint_every < 0) throw ConfigError("train: cadences must be nonnegative");
    if (eval_every > 0 && eval_count < 1) throw ConfigError("train: eval_count must be positive");
    if (!(lr > 0.0) || !(eps > 0.0)) throw ConfigError("train: lr and eps must be positive");
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
        throw ConfigError("train: betas must lie in [0, 1)");
    }
}

void bind_data_dim(TrainConfig& cfg, Index data_dim) {
    for (auto& d : cfg.discriminators) {
        if (d.spec.input_dim == 0) d.spec.input_dim = data_dim;
    }
}

StepInputs draw_step_inputs(const TrainConfig& cfg, const Dataset& data, std::int64_t step) {
    if (data.count() < cfg.batch_size) {
        throw ConfigError("train: dataset has " + std::to_string(data.count()) + " samples, fewer than batch size " +
                          std::to_string(cfg.batch_size));
    }
    const Rng rng = Rng(derive_seed(cfg.seed, "train")).split(static_cast<std::uint64_t>(step));
    Rng real_rng = rng.split("real");
    Rng noise_rng = rng.split("noise");
    Rng disc_rng = rng.split("discriminator");

    StepInputs in;
    in.real = sample_batch(data, cfg.batch_size, real_rng);
    in.noise = sample_noise(cfg.generator_dims.front(), cfg.batch_size, noise_rng);

    const auto k = static_cast<std::int64_t>(cfg.discriminators.size());
    if (cfg.schedule == DiscriminatorSchedule::alternate) {
        const auto& d = cfg.discriminators[static_cast<std::size_t>(step % k)];
        in.discriminators.push_back(sample_discriminator(d.spec, disc_rng));
        in.weights.push_back(1.0);
    } else {
        for (const auto& d : cfg.discriminators) {
            in.discriminators.push_back(sample_discriminator(d.spec, disc_rng));
            in.weights.push_back(cfg.discriminators.size() == 1 ? 1.0 : d.weight);
        }
    }
    return in;
}

Matrix build_cost_matrix(const MatrixRef& gen_features, const MatrixRef& real_features) {
    if (gen_features.cols() != real_features.cols()) {
        throw ConfigError("cost matrix: batches have " + std::to_string(gen_features.cols()) + " and " +
                          std::to_string(real_features.cols()) + " samples");
    }
    if (gen_features.rows() != real_features.rows()) throw ConfigError("cost matrix: feature dimensions differ");
    const Index n = gen_features.cols();
    Matrix c(n, n);
    for (Index j = 0; j < n; ++j) {
        for (Index i = 0; i < n; ++i) c(i, j) = (gen_features.col(i) - real_features.col(j)).norm();
    }
    return c;
}

namespace {

// Shared body of compute_step / loss_and_grad / fixed_matching_loss. When
// `matchings` is empty the assignment is solved with `method`.
LossAndGrad evaluate_step(const GeneratorNet& g, const StepInputs& in, const std::vector<Assignment>* matchings,
                          AssignMethod method, bool want_grad) {
    const Index n = in.noise.cols();
    if (in.real.cols() != n) throw ConfigError("step: real and noise batches differ in size");
    if (matchings && matchings->size() != in.discriminators.size()) {
        throw ConfigError("step: expected one matching per discriminator");
    }

    GeneratorCache gen_cache;
    const Matrix generated = gen_forward(g, in.noise, want_grad ? &gen_cache : nullptr);
    if (!generated.allFinite()) throw NumericError("step: generator produced non-finite output");

    LossAndGrad out;
    Matrix grad_generated = Matrix::Zero(generated.rows(), n);
    const double inv_n = 1.0 / static_cast<double>(n);

    for (std::size_t k = 0; k < in.discriminators.size(); ++k) {
        const auto& d = in.discriminators[k];
        DiscriminatorCache d_cache;
        const Matrix gen_feat = d.forward(generated, want_grad ? &d_cache : nullptr);
        const Matrix real_feat = d.forward(in.real);

        Assignment a;
        if (matchings) {
            a = (*matchings)[k];
            if (static_cast<Index>(a.perm.size()) != n || !is_permutation(a.perm)) {
                throw ConfigError("step: matching is not a permutation of the batch");
            }
        } else {
            Matrix cost = build_cost_matrix(gen_feat, real_feat);
            a = solve_assignment(cost, method);
            out.costs.push_back(std::move(cost));
        }

        // Recompute distances directly so the loss is exact for the given matching.
        double branch = 0.0;
        Matrix upstream = Matrix::Zero(gen_feat.rows(), n);
        for (Index i = 0; i < n; ++i) {
            const Vector diff = gen_feat.col(i) - real_feat.col(a.perm[i]);
            const double dist = diff.norm();
            branch += dist;
            if (want_grad && dist > 0.0) upstream.col(i) = diff * (in.weights[k] * inv_n / dist);
        }
        branch *= inv_n;
        out.branch_losses.push_back(branch);
        out.loss += in.weights[k] * branch;
        if (want_grad) grad_generated += d.vjp(d_cache, upstream);
        out.assignments.push_back(std::move(a));
    }

    if (!std::isfinite(out.loss)) throw NumericError("step: loss is not finite");
    if (want_grad) out.grads = gen_backward(g, gen_cache, grad_generated);
    return out;
}

}  // namespace

LossAndGrad compute_step(const GeneratorNet& g, const StepInputs& inputs, AssignMethod method) {
    return evaluate_step(g, inputs, nullptr, method, true);
}

LossAndGrad loss_and_grad(const GeneratorNet& g, const StepInputs& inputs, const std::vector<Assignment>& matchings) {
    return evaluate_step(g, inputs, &matchings, AssignMethod::hungarian, true);
}

double fixed_matching_loss(const GeneratorNet& g, const StepInputs& inputs, const std::vector<Assignment>& matchings) {
    return evaluate_step(g, inputs, &matchings, AssignMethod::hungarian, false).loss;
}

TrainState init_train_state(const TrainConfig& cfg) {
    cfg.validate();
    Rng init_rng(derive_seed(cfg.seed, "init"));
    TrainState s;
    s.generator = make_generator(cfg.generator_dims, cfg.output, init_rng);
    s.adam = make_adam(s.generator, cfg.lr, cfg.beta1, cfg.beta2, cfg.eps);
    return s;
}

StepRecord gnrd_step(TrainState& state, const StepInputs& inputs, const TrainConfig& cfg) {
    const auto start = std::chrono::steady_clock::now();
    LossAndGrad step = compute_step(state.generator, inputs, cfg.assignment);
    adam_step(state.adam, step.grads, state.generator);

    StepRecord rec;
    rec.iter = state.step;
    rec.loss = step.loss;
    rec.method = cfg.assignment;
    ++state.step;
    rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return rec;
}

Matrix eval_noise(const TrainConfig& cfg) {
    Rng rng(derive_seed(cfg.seed, "eval"));
    return sample_noise(cfg.generator_dims.front(), cfg.eval_count, rng);
}

EvalRecord evaluate(const TrainConfig& cfg, const GeneratorNet& g, const MatrixRef& held_out, std::int64_t iter) {
    const Matrix generated = gen_forward(g, eval_noise(cfg));
    const RandomFeatureMap feature = eval_feature_map(generated.rows());
    EvalRecord rec;
    rec.iter = iter;
    rec.ot_identity = empirical_ot_eval(generated, held_out);
    rec.ot_random_feature = empirical_ot_eval(generated, held_out, &feature);
    return rec;
}

TrainHistory train(const TrainConfig& cfg, const Dataset& data, TrainState& state, const Matrix* held_out,
                   const TrainCallbacks& callbacks) {
    cfg.validate();
    if (data.count() < 1) throw ConfigError("train: dataset is empty");
    if (data.dim() != cfg.generator_dims.back()) {
        throw ConfigError("train: data dim " + std::to_string(data.dim()) + " does not match generator output " +
                          std::to_string(cfg.generator_dims.back()));
    }
    if (cfg.max_iters > 0 && data.count() < cfg.batch_size) {
        throw ConfigError("train: dataset smaller than batch size");
    }
    const bool do_eval = held_out && cfg.eval_every > 0;
    if (do_eval && held_out->cols() != cfg.eval_count) {
        throw ConfigError("train: held-out set must have eval_count samples");
    }

    TrainHistory history;
    auto run_eval = [&](std::int64_t iter) {
        history.evals.push_back(evaluate(cfg, state.generator, *held_out, iter));
        if (callbacks.on_eval) callbacks.on_eval(history.evals.back());
    };

    while (state.step < cfg.max_iters) {
        if (do_eval && state.step % cfg.eval_every == 0) run_eval(state.step);
        const StepInputs inputs = draw_step_inputs(cfg, data, state.step);
        history.steps.push_back(gnrd_step(state, inputs, cfg));
        if (callbacks.on_step) callbacks.on_step(history.steps.back());
        if (cfg.checkpoint_every > 0 && state.step % cfg.checkpoint_every == 0 && callbacks.on_checkpoint) {
            callbacks.on_checkpoint(state);
        }
    }
    if (do_eval) run_eval(state.step);
    return history;
}

std::pair<GeneratorNet, TrainHistory> train(const TrainConfig& cfg, const Dataset& data) {
    TrainState state = init_train_state(cfg);
    TrainHistory history = train(cfg, data, state);
    return {std::move(state.generator), std::move(history)};
}

}  // namespace gnrd
