#include "osp/symmetry.hpp"

#include <stdexcept>
#include <utility>

namespace osp {

namespace {

Step transform_step(Step s, Symmetry g) {
    if (g.swap_xy) std::swap(s.dx, s.dy);
    if (g.flip_x) s.dx = -s.dx;
    if (g.flip_y) s.dy = -s.dy;
    return s;
}

}  // namespace

std::vector<Symmetry> symmetry_group(const GridSpec& grid, ModelVariant variant) {
    if (variant == ModelVariant::windy_3d) return {Symmetry{}, Symmetry{false, false, true}};
    std::vector<Symmetry> group;
    for (int swap = 0; swap < (grid.nx == grid.ny ? 2 : 1); ++swap) {
        for (int fx = 0; fx < 2; ++fx) {
            for (int fy = 0; fy < 2; ++fy) group.push_back({swap == 1, fx == 1, fy == 1});
        }
    }
    return group;
}

Action apply_symmetry(Action a, Symmetry g) {
    const Step s = transform_step(step_of(a), g);
    for (Action b : kAllActions) {
        const Step t = step_of(b);
        if (t.dx == s.dx && t.dy == s.dy) return b;
    }
    throw std::logic_error("apply_symmetry: no matching action");
}

Cell apply_symmetry(Cell c, Symmetry g, const GridSpec& grid) {
    if (g.swap_xy) {
        if (grid.nx != grid.ny) throw std::invalid_argument("apply_symmetry: swap needs a square grid");
        std::swap(c.x, c.y);
    }
    if (g.flip_x) c.x = grid.nx - 1 - c.x;
    if (g.flip_y) c.y = grid.ny - 1 - c.y;
    return c;
}

Belief apply_symmetry(const Belief& b, Symmetry g) {
    if (g.is_identity()) return b;
    const OffsetLayout& L = b.layout;
    Belief out{L, apply_symmetry(b.agent, g, b.grid()), std::vector<double>(b.probs.size(), 0.0)};
    for (std::size_t i = 0; i < b.probs.size(); ++i) {
        const Step d = transform_step({L.dx_of(i), L.dy_of(i)}, g);
        out.probs[L.index(d.dx, d.dy)] = b.probs[i];
    }
    return out;
}

Belief apply_random_symmetry(const Belief& b, const std::vector<Symmetry>& group, Rng& rng) {
    if (group.empty()) throw std::invalid_argument("apply_random_symmetry: empty group");
    return apply_symmetry(b, group[uniform_index(rng, group.size())]);
}

}  // namespace osp
