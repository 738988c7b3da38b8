#pragma once

#include "gnrd/data.hpp"
#include "gnrd/estimators.hpp"
#include "gnrd/training.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace gnrd::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitNumeric = 3;

/// Apply "a.b.c=value" overrides; value is parsed as JSON, falling back to a
/// plain string.
void apply_overrides(nlohmann::json& config, const std::vector<std::string>& overrides);

nlohmann::json read_json_file(const std::filesystem::path& path);

struct DatasetSource {
    std::string kind;                 // "ring", "mixture" or "idx"
    std::filesystem::path path;       // idx only
    MixtureSpec mixture;              // ring / mixture
    Index count = 0;                  // synthetic sample count
};

struct TrainJob {
    TrainConfig train;
    DatasetSource dataset;
    std::filesystem::path output_dir;
    std::optional<std::filesystem::path> resume;
    Index grid_rows = 8;
    Index grid_cols = 8;
    Index noise_dim = 100;
    std::vector<Index> hidden{256, 256};
};

/// Stream-per-purpose seeds derived from the single config seed.
struct JobSeeds {
    std::uint64_t data;
    std::uint64_t heldout;
};
JobSeeds job_seeds(std::uint64_t seed);

TrainJob parse_train_job(const nlohmann::json& config);

/// Training data and held-out evaluation set for a job.
struct PreparedData {
    Dataset train;
    Matrix held_out;
};
PreparedData prepare_data(TrainJob& job);

struct TrainOutcome {
    TrainHistory history;
    TrainState state;
};

/// Run a job end to end: writes history.csv, eval.csv, timing.csv,
/// checkpoints, final.ckpt and a sample file into job.output_dir.
TrainOutcome run_train_job(TrainJob job);

struct Lemma1Job {
    DiscreteDistribution p{Vector::Ones(1)};
    DiscreteDistribution q{Vector::Ones(1)};
    CostMatrix cost{Matrix::Zero(1, 1), true};
    std::vector<Index> n_values;
    Lemma1Options options;
    std::uint64_t seed = 0;
};

Lemma1Job parse_lemma1_job(const nlohmann::json& config);
void write_lemma1_csv(const Lemma1Report& report, std::ostream& out);

/// Parse rows of comma-separated numbers.
Matrix read_cost_csv(std::istream& in);

// Subcommand bodies; each returns a process exit code and reports errors on `err`.
int cmd_train(const std::filesystem::path& config_path, const std::vector<std::string>& overrides, std::ostream& out,
              std::ostream& err);
int cmd_assign(const std::filesystem::path& cost_csv, const std::string& method, std::optional<double> epsilon,
               std::ostream& out, std::ostream& err);
int cmd_lemma1(const std::filesystem::path& config_path, const std::optional<std::filesystem::path>& out_path,
               std::ostream& out, std::ostream& err);
int cmd_gen(const std::filesystem::path& checkpoint, Index count, const std::filesystem::path& out_path,
            std::uint64_t seed, std::ostream& out, std::ostream& err);

}  // namespace gnrd::cli
