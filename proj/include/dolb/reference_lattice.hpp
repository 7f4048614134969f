#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <vector>

#include "dolb/chain.hpp"

namespace dolb {

// Object-oriented cell dynamics resolved by virtual dispatch. Every concrete
// class delegates to the same cell-local kernels used by the accelerated
// container, so both containers produce identical arithmetic.
class Dynamics {
  public:
    virtual ~Dynamics() = default;
    virtual void collide(Populations<double>& f) const = 0;
    virtual const DynamicsChain& chain() const = 0;
};

std::unique_ptr<Dynamics> make_dynamics(const DynamicsChain& chain);

struct Box {
    std::array<std::int64_t, 3> lo;  // inclusive
    std::array<std::int64_t, 3> hi;  // exclusive

    std::int64_t volume() const {
        std::int64_t v = 1;
        for (int a = 0; a < 3; ++a) v *= hi[a] > lo[a] ? hi[a] - lo[a] : 0;
        return v;
    }
};

// Array-of-structure lattice with per-cell dynamics chains; the single
// threaded reference container used as the oracle for the accelerated one.
class ReferenceLattice {
  public:
    struct Cell {
        Populations<double> f{};
        const Dynamics* dynamics = nullptr;
    };

    ReferenceLattice(std::array<std::int64_t, 3> dims, std::array<bool, 3> periodic);

    const std::array<std::int64_t, 3>& dims() const { return dims_; }
    const std::array<bool, 3>& periodic() const { return periodic_; }
    std::int64_t num_cells() const { return std::int64_t(cells_.size()); }

    std::int64_t index(std::int64_t x, std::int64_t y, std::int64_t z) const {
        return (z * dims_[1] + y) * dims_[0] + x;
    }

    Cell& cell(std::int64_t x, std::int64_t y, std::int64_t z) { return cells_[index(x, y, z)]; }
    const Cell& cell(std::int64_t x, std::int64_t y, std::int64_t z) const {
        return cells_[index(x, y, z)];
    }
    std::vector<Cell>& cells() { return cells_; }
    const std::vector<Cell>& cells() const { return cells_; }

    // Assigns a chain to every cell of the region; later assignments win.
    // Deduplicates chain instances by value.
    void set_chain(const Box& region, const DynamicsChain& chain);

    // Distinct chain instances currently referenced by at least one cell.
    std::vector<const Dynamics*> chain_instances() const;

    // One lattice Boltzmann step: pull-stream into a scratch array, apply the
    // per-cell chain, then adopt the scratch. Throws if a cell has no chain.
    void collide_and_stream();

    // Sorted, deduplicated chain strings over all cells.
    std::vector<std::string> required_models() const;

  private:
    std::array<std::int64_t, 3> dims_;
    std::array<bool, 3> periodic_;
    std::vector<Cell> cells_;
    std::vector<Populations<double>> scratch_;
    std::vector<std::unique_ptr<Dynamics>> owned_chains_;
};

}  // namespace dolb
