#pragma once

#include <memory>

#include "osp/belief.hpp"
#include "osp/case_spec.hpp"
#include "osp/observation.hpp"

namespace osp {

/// A validated case together with its tabulated hit model and initial beliefs.
struct Problem {
    CaseSpec spec;
    std::shared_ptr<const ObservationModel> model;
    PriorSet priors;

    static Problem make(const CaseSpec& spec);
    /// Same case and model but a caller-supplied prior set (tests, custom starts).
    static Problem with_priors(const CaseSpec& spec, PriorSet priors);
};

}  // namespace osp
