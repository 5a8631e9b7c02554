#include "osp/observation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "osp/bessel.hpp"

namespace osp {

std::string_view variant_name(ModelVariant v) {
    return v == ModelVariant::isotropic_2d ? "isotropic" : "windy";
}

void ObservationModelParams::validate() const {
    auto positive = [](double v, const char* what) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw std::invalid_argument(std::string("observation model: ") + what +
                                        " must be positive and finite");
        }
    };
    if (variant == ModelVariant::isotropic_2d) {
        positive(lambda_over_dx, "lambda_over_dx");
        positive(r_dt, "r_dt");
        // ln(2 lambda/dx) must stay positive for the 2D prefactor
        if (!(lambda_over_dx > 0.5)) {
            throw std::invalid_argument("observation model: lambda_over_dx must exceed 0.5");
        }
    } else {
        positive(r_bar, "r_bar");
        positive(v_bar, "v_bar");
        positive(tau_bar, "tau_bar");
    }
    if (h_max < 1) throw std::invalid_argument("observation model: h_max must be >= 1");
}

double ObservationModelParams::dispersion_length() const {
    if (variant == ModelVariant::isotropic_2d) return lambda_over_dx;
    return std::sqrt(tau_bar) / (v_bar * std::sqrt(1.0 + tau_bar / 4.0));
}

double mean_hits(RelState state, const ObservationModelParams& params) {
    if (state.terminal()) throw std::invalid_argument("mean_hits: undefined at the source cell");
    params.validate();
    const double r = std::hypot(static_cast<double>(state.dx), static_cast<double>(state.dy));
    const double lambda = params.dispersion_length();
    if (params.variant == ModelVariant::isotropic_2d) {
        return params.r_dt / std::log(2.0 * lambda) * bessel_k0(r / lambda);
    }
    return params.r_bar / r * std::exp(0.5 * params.v_bar * state.dx - r / lambda);
}

std::vector<double> truncated_poisson(double mu, int h_max) {
    if (!(mu >= 0.0) || h_max < 1) throw std::invalid_argument("truncated_poisson: bad arguments");
    std::vector<double> p(static_cast<std::size_t>(h_max) + 1, 0.0);
    double term = std::exp(-mu);
    double below = 0.0;
    for (int h = 0; h < h_max; ++h) {
        p[h] = term;
        below += term;
        term *= mu / (h + 1);
    }
    p[h_max] = std::max(0.0, 1.0 - below);
    return p;
}

std::vector<double> hit_distribution(RelState state, const ObservationModelParams& params) {
    return truncated_poisson(mean_hits(state, params), params.h_max);
}

int sample_discrete(std::span<const double> probs, Rng& rng) {
    double total = 0.0;
    for (double p : probs) total += p;
    const double u = uniform01(rng) * total;
    double acc = 0.0;
    int last_positive = 0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (probs[i] <= 0.0) continue;
        acc += probs[i];
        last_positive = static_cast<int>(i);
        if (u < acc) return last_positive;
    }
    return last_positive;
}

Observation sample_observation(RelState state, const ObservationModelParams& params, Rng& rng) {
    if (state.terminal()) return Observation::omega();
    const auto dist = hit_distribution(state, params);
    return Observation::hit(sample_discrete(dist, rng));
}

ObservationModel::ObservationModel(const GridSpec& grid, const ObservationModelParams& params)
    : layout_{grid.nx, grid.ny}, params_(params) {
    params_.validate();
    const std::size_t n = layout_.size();
    const int nh = num_hit_values();
    table_.assign(static_cast<std::size_t>(nh) * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (i == layout_.origin()) continue;
        // belief offsets are source - agent; the hit model wants agent - source
        const RelState state{-layout_.dx_of(i), -layout_.dy_of(i)};
        const auto dist = hit_distribution(state, params_);
        for (int h = 0; h < nh; ++h) table_[static_cast<std::size_t>(h) * n + i] = dist[h];
    }
}

int ObservationModel::sample_hits(std::size_t index, Rng& rng) const {
    if (index == layout_.origin()) throw std::invalid_argument("sample_hits: terminal offset");
    const std::size_t n = layout_.size();
    const double u = uniform01(rng);
    double acc = 0.0;
    const int nh = num_hit_values();
    for (int h = 0; h < nh - 1; ++h) {
        acc += table_[static_cast<std::size_t>(h) * n + index];
        if (u < acc) return h;
    }
    return nh - 1;
}

}  // namespace osp
