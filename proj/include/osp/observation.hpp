#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "osp/grid.hpp"
#include "osp/layout.hpp"
#include "osp/rng.hpp"

namespace osp {

enum class ModelVariant { isotropic_2d, windy_3d };

std::string_view variant_name(ModelVariant v);

/// Dimensionless constants of the hit model. The isotropic variant uses
/// lambda_over_dx and r_dt; the windy variant uses r_bar, v_bar and tau_bar.
struct ObservationModelParams {
    ModelVariant variant = ModelVariant::isotropic_2d;
    double lambda_over_dx = 1.0;
    double r_dt = 1.0;
    double r_bar = 1.0;
    double v_bar = 1.0;
    double tau_bar = 1.0;
    int h_max = 1;

    /// Throws std::invalid_argument on non-positive parameters or h_max < 1.
    void validate() const;
    /// Dispersion length in cell units. For the windy model it is derived
    /// from tau_bar and v_bar.
    double dispersion_length() const;
    friend bool operator==(const ObservationModelParams&, const ObservationModelParams&) = default;
};

/// Agent position minus source position, in cells. (0,0) is the terminal state.
struct RelState {
    int dx = 0;
    int dy = 0;
    bool terminal() const { return dx == 0 && dy == 0; }
};

/// Either the terminal observation (source found) or a hit count in [0, h_max].
struct Observation {
    bool terminal = false;
    int hits = 0;

    static Observation omega() { return {true, 0}; }
    static Observation hit(int h) { return {false, h}; }
    friend bool operator==(const Observation&, const Observation&) = default;
};

/// Mean number of hits at `state`. Throws std::invalid_argument for the
/// terminal state or invalid parameters.
double mean_hits(RelState state, const ObservationModelParams& params);

/// Poisson(mu) over [0, h_max] with the mass of h > h_max folded into h_max.
std::vector<double> truncated_poisson(double mu, int h_max);

std::vector<double> hit_distribution(RelState state, const ObservationModelParams& params);

/// Draws from a discrete distribution given by `probs` (need not be exactly normalized).
int sample_discrete(std::span<const double> probs, Rng& rng);

Observation sample_observation(RelState state, const ObservationModelParams& params, Rng& rng);

/// Hit likelihoods tabulated over every source offset of a grid, so belief
/// updates are elementwise products. likelihood(h)[i] = Pr(h | offset i), zero
/// at the origin because a hit implies the source was not found.
class ObservationModel {
public:
    ObservationModel(const GridSpec& grid, const ObservationModelParams& params);

    const OffsetLayout& layout() const { return layout_; }
    const ObservationModelParams& params() const { return params_; }
    int h_max() const { return params_.h_max; }
    int num_hit_values() const { return params_.h_max + 1; }

    std::span<const double> likelihood(int h) const {
        return {table_.data() + static_cast<std::size_t>(h) * layout_.size(), layout_.size()};
    }
    /// Samples a hit count for the source at offset `index` (must not be the origin).
    int sample_hits(std::size_t index, Rng& rng) const;

private:
    OffsetLayout layout_;
    ObservationModelParams params_;
    std::vector<double> table_;  // h-major
};

}  // namespace osp
