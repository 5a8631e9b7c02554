#pragma once

#include <vector>

#include "osp/belief.hpp"
#include "osp/case_spec.hpp"
#include "osp/rng.hpp"

namespace osp {

/// Element of the square's dihedral group: optional x/y swap, then optional
/// reflections. Acts on absolute cells about the grid centre and linearly on offsets.
struct Symmetry {
    bool swap_xy = false;
    bool flip_x = false;
    bool flip_y = false;

    bool is_identity() const { return !swap_xy && !flip_x && !flip_y; }
    friend bool operator==(const Symmetry&, const Symmetry&) = default;
};

/// Symmetries under which the hit model and grid are invariant: all 8 for
/// isotropic square grids, the 4 reflections for isotropic rectangles, and
/// {identity, mirror across the wind axis} for windy cases. Identity first.
std::vector<Symmetry> symmetry_group(const GridSpec& grid, ModelVariant variant);

Action apply_symmetry(Action a, Symmetry g);
Cell apply_symmetry(Cell c, Symmetry g, const GridSpec& grid);
Belief apply_symmetry(const Belief& b, Symmetry g);

/// Uniform draw from `group`.
Belief apply_random_symmetry(const Belief& b, const std::vector<Symmetry>& group, Rng& rng);

}  // namespace osp
