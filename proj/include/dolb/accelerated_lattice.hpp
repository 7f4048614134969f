#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "dolb/chain.hpp"
#include "dolb/reference_lattice.hpp"

namespace dolb {

// Raised when a cell's tag is not part of the dispatch set; carries the chain
// string of the missing model.
class DispatchError : public std::runtime_error {
  public:
    DispatchError(const std::string& chain_name)
        : std::runtime_error("collision model \"" + chain_name +
                             "\" is not part of the dispatch set"),
          chain_name_(chain_name) {}
    const std::string& chain_name() const { return chain_name_; }

  private:
    std::string chain_name_;
};

// Bidirectional map between chain strings and integer tags plus the flat
// parameter table. Tags are the indices of the sorted, deduplicated chain
// string list, so they are reproducible across runs; register every chain
// before baking tags into a block.
class DynamicsRegistry {
  public:
    struct Instance {
        std::string chain_str;
        std::vector<ChainLink> links;
        std::int64_t param_offset = 0;
        std::int64_t param_len = 0;
    };

    // Returns the instance slot; idempotent for identical (chain, params).
    int register_chain(const DynamicsChain& chain);

    int tag_for(const std::string& chain_str) const;
    const std::string& chain_for(int tag) const;
    int tag_of_slot(int slot) const { return tag_for(instances_.at(std::size_t(slot)).chain_str); }

    // Sorted chain strings; index in this list == tag.
    std::vector<std::string> chain_strings() const;

    DynamicsChain chain_at_slot(int slot) const;
    const Instance& instance(int slot) const { return instances_.at(std::size_t(slot)); }
    int num_instances() const { return int(instances_.size()); }
    int num_tags() const { return int(strings_.size()); }
    const std::vector<double>& params_table() const { return params_table_; }

  private:
    std::set<std::string> strings_;
    std::vector<Instance> instances_;
    std::vector<double> params_table_;
};

// Explicit subset of registry tags admitted by the step kernel.
class DispatchSet {
  public:
    DispatchSet() = default;
    explicit DispatchSet(std::set<int> tags) : tags_(std::move(tags)) {}

    static DispatchSet all_of(const DynamicsRegistry& registry);
    static DispatchSet from_strings(const DynamicsRegistry& registry,
                                    const std::vector<std::string>& names);

    bool contains(int tag) const { return tags_.count(tag) != 0; }
    const std::set<int>& tags() const { return tags_; }
    bool empty() const { return tags_.empty(); }

  private:
    std::set<int> tags_;
};

inline constexpr std::int32_t kEnvelopeTag = -1;

// Structure-of-array block with a one-cell envelope on each face and
// two-population storage. Population array i occupies the contiguous range
// [i * vol, (i+1) * vol) of f_in / f_out.
template <typename T>
struct AcceleratedBlock {
    std::array<std::int64_t, 3> interior{};  // cells without the envelope
    std::array<std::int64_t, 3> ext{};       // interior + 2 per axis
    std::array<std::int64_t, 3> origin{};    // global coordinate of interior cell (0,0,0)
    std::array<bool, 3> periodic{};          // used by the self-exchange of monolithic blocks

    std::vector<T> f_in;
    std::vector<T> f_out;
    std::vector<std::int32_t> tag;
    std::vector<std::int32_t> param_index;
    std::vector<std::int64_t> cell_index;  // global Cartesian index; -1 on the envelope

    AcceleratedBlock() = default;
    AcceleratedBlock(std::array<std::int64_t, 3> interior_dims,
                     std::array<std::int64_t, 3> origin_,
                     std::array<std::int64_t, 3> global_dims, std::array<bool, 3> periodic_);

    std::int64_t vol() const { return ext[0] * ext[1] * ext[2]; }
    std::int64_t idx(std::int64_t x, std::int64_t y, std::int64_t z) const {
        return (z * ext[1] + y) * ext[0] + x;  // envelope-inclusive local coordinates
    }
    T& in(int i, std::int64_t at) { return f_in[std::size_t(i) * std::size_t(vol()) + std::size_t(at)]; }
    const T& in(int i, std::int64_t at) const {
        return f_in[std::size_t(i) * std::size_t(vol()) + std::size_t(at)];
    }
};

// Per-instance recipes compiled from the registry, indexed by param slot.
template <typename T>
std::vector<ChainRecipe<T>> compile_recipes(const DynamicsRegistry& registry);

// One step over the interior: pull 19 neighbor populations from f_in, apply
// the tag-selected chain, write to f_out, then swap the two arrays. The
// envelope of f_in must be current. Tags are pre-scanned eagerly: any tag
// outside `dispatch` fails the step before any cell is touched, naming the
// missing chain. nthreads > 1 splits the z range; cell writes are disjoint,
// so results are identical for any thread count.
template <typename T>
void collide_and_stream(AcceleratedBlock<T>& block, const DynamicsRegistry& registry,
                        const std::vector<ChainRecipe<T>>& recipes, const DispatchSet& dispatch,
                        int nthreads = 1);

// Refresh the envelope of a monolithic block from its own interior along the
// periodic axes (wrap-around copy); non-periodic envelopes stay zero.
template <typename T>
void refresh_envelope_periodic(AcceleratedBlock<T>& block);

// Sorted, deduplicated chain strings of the reference lattice. Using this
// list as the dispatch set is sufficient for collide_and_stream on the
// mirrored block.
std::vector<std::string> show_required_models(const ReferenceLattice& reference);

// Lossless round trip between the two containers: populations are copied
// bit-exactly (for T = double), chains registered and re-created by value.
template <typename T>
AcceleratedBlock<T> mirror_to_accelerated(const ReferenceLattice& reference,
                                          DynamicsRegistry& registry);
template <typename T>
ReferenceLattice mirror_to_reference(const AcceleratedBlock<T>& block,
                                     const DynamicsRegistry& registry);

// Field dump: magic "DOLB1", precision flag (bytes per value), population
// count, dims, then the 19 SoA arrays in descriptor order, little endian,
// interior cells only, x fastest.
template <typename T>
void write_field_dump(const std::string& path, const AcceleratedBlock<T>& block);

struct FieldDump {
    std::array<std::int64_t, 3> dims;
    int precision_bytes = 8;
    std::vector<double> data;  // 19 * nx*ny*nz values, direction-major

    double value(int i, std::int64_t cell) const {
        return data[std::size_t(i) * std::size_t(dims[0] * dims[1] * dims[2]) + std::size_t(cell)];
    }
};

FieldDump read_field_dump(const std::string& path);

}  // namespace dolb
