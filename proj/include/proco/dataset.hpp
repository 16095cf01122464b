#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace proco {

// One raw input sample: feature vector plus class index in [0, C).
struct LabeledVector {
    std::vector<double> x;
    int label = 0;
};

// Immutable after construction; safe to share across threads.
struct Dataset {
    std::vector<LabeledVector> samples;
    std::vector<long> class_counts;  // indexed by label, sums to samples.size()

    int num_classes() const { return static_cast<int>(class_counts.size()); }
    int dim() const { return samples.empty() ? 0 : static_cast<int>(samples[0].x.size()); }
    long size() const { return static_cast<long>(samples.size()); }
};

// Rebuilds class_counts from labels (0..max_label).
Dataset make_dataset(std::vector<LabeledVector> samples);

// Per-class count for the exponential long-tail profile:
// n_c = round(n_max * ratio^(-c / (C-1))).
std::vector<long> long_tail_counts(int num_classes, long n_max, double imbalance_ratio);

// Synthetic long-tailed mixture: class c draws n_c samples from a Gaussian
// with unit covariance whose mean sits on a sphere of radius `separation`.
Dataset generate_long_tailed(int num_classes, long n_max, double imbalance_ratio,
                             int dim, double separation, std::uint64_t seed);

// CSV rows are `label, v_1, ..., v_d`; an optional header row is detected by
// a non-numeric first field. Values are written with 17 significant digits
// so a save/load round trip is bit-exact.
Dataset load_embeddings_csv(const std::filesystem::path& path);
void save_embeddings_csv(const Dataset& dataset, const std::filesystem::path& path);

enum class SplitMode { Stratified, Random };

struct SplitResult {
    Dataset train;
    Dataset test;
    std::vector<std::string> warnings;  // single-sample classes, empty test classes
};

// Random partition into train/test. Stratified mode splits within each
// class so no class with >= 2 samples is missing from either side; a
// single-sample class goes to train with a warning.
SplitResult split(const Dataset& dataset, double train_fraction, std::uint64_t seed,
                  SplitMode mode = SplitMode::Stratified);

// Endless batch stream that draws the class uniformly, then a sample
// within that class uniformly with replacement.
class BalancedResampler {
public:
    BalancedResampler(const Dataset& dataset, int batch_size, std::uint64_t seed);

    // Indices into the dataset passed at construction.
    std::vector<int> next_batch();

    int batch_size() const { return batch_size_; }

private:
    std::vector<std::vector<int>> by_class_;
    int batch_size_;
    std::mt19937_64 rng_;
};

}  // namespace proco
