#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hetmia/dataset.hpp"

namespace hetmia {

// One multivariate Gaussian component: all samples of `label` within `group`.
struct SyntheticComponent {
    std::string group;
    int label = 0;
    Vector mean;
    Matrix covariance; // symmetric PSD
    std::int64_t count = 0;
};

struct SyntheticSpec {
    int dim = 0;
    int num_classes = 0;
    std::vector<SyntheticComponent> components;

    void validate() const; // shapes, symmetry/PSD, counts; throws config_error

    static SyntheticSpec from_json(const std::string& text);
    static SyntheticSpec from_file(const std::filesystem::path& path);
};

// Samples every component in listed order; deterministic for a fixed seed.
// Feature names are f0..f{d-1}; class names c0..c{K-1}.
TabularDataset gen_synthetic(const SyntheticSpec& spec, std::uint64_t seed);

} // namespace hetmia
