#pragma once

#include <cstddef>

namespace osp {

/// Dense (2nx-1) x (2ny-1) array of source offsets relative to the agent,
/// dx in [-(nx-1), nx-1], dy in [-(ny-1), ny-1], stored row-major with dx as
/// the slow index. Offset (0,0) is the terminal state.
struct OffsetLayout {
    int nx = 1;
    int ny = 1;

    int width() const { return 2 * nx - 1; }
    int height() const { return 2 * ny - 1; }
    std::size_t size() const { return static_cast<std::size_t>(width()) * height(); }

    bool contains(int dx, int dy) const {
        return dx > -nx && dx < nx && dy > -ny && dy < ny;
    }
    std::size_t index(int dx, int dy) const {
        return static_cast<std::size_t>(dx + nx - 1) * height() + static_cast<std::size_t>(dy + ny - 1);
    }
    int dx_of(std::size_t i) const { return static_cast<int>(i / height()) - (nx - 1); }
    int dy_of(std::size_t i) const { return static_cast<int>(i % height()) - (ny - 1); }
    std::size_t origin() const { return index(0, 0); }

    friend bool operator==(const OffsetLayout&, const OffsetLayout&) = default;
};

}  // namespace osp
