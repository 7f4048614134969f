#pragma once

#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "dolb/accelerated_lattice.hpp"

namespace dolb {

class ExchangeError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Regular block decomposition of a global grid. Blocks tile the domain
// exactly; extents along each axis differ by at most one.
struct BlockPartition {
    std::array<std::int64_t, 3> global_dims{};
    std::array<int, 3> block_grid{};
    struct BlockInfo {
        std::array<std::int64_t, 3> origin;
        std::array<std::int64_t, 3> extent;
        std::array<int, 3> grid_pos;
    };
    std::vector<BlockInfo> blocks;
    std::vector<int> worker_of;

    int block_at(int gx, int gy, int gz) const {
        return (gz * block_grid[1] + gy) * block_grid[0] + gx;
    }
};

BlockPartition partition(std::array<std::int64_t, 3> global_dims, std::array<int, 3> block_grid,
                         int workers);

// One envelope-exchange message: a source-interior strip that maps onto a
// destination-envelope strip of equal shape. Boxes are in local
// envelope-inclusive coordinates of the respective block.
struct ExchangeMessage {
    int index = 0;  // position in the plan, also the wire message id
    int sweep = 0;  // axis of the sweep this message belongs to
    int src_block = 0;
    int dst_block = 0;
    Box src_box;
    Box dst_box;
};

// Deterministic exchange schedule: three axis-by-axis sweeps (x, then y,
// then z). Sweeps later in the order span the full extent of the axes
// already swept, which carries edge values through faces without 26-neighbor
// messages. Every envelope cell along periodic axes is covered exactly once.
struct ExchangePlan {
    std::vector<ExchangeMessage> messages;
    // messages of a sweep, grouped by (src worker, dst worker), in plan order
    std::map<std::pair<int, int>, std::vector<int>> pair_messages[3];
};

ExchangePlan build_exchange_plan(const BlockPartition& partition,
                                 std::array<bool, 3> periodic);

// Byte offsets of the selected messages within one packed buffer, computed by
// an exclusive prefix sum over per-message selected-cell counts.
struct PackLayout {
    std::vector<std::int64_t> offsets;  // per message, strictly increasing
    std::int64_t total_bytes = 0;
};

using CellPredicate = std::function<bool(std::int64_t x, std::int64_t y, std::int64_t z)>;

// Packs the source regions of `messages` (all from the same block) into one
// buffer: for each message in order, for each selected cell in row-major
// order, the 19 populations in descriptor order. A null predicate selects
// every cell. The predicate receives local envelope-inclusive coordinates.
template <typename T>
PackLayout pack_envelope(const AcceleratedBlock<T>& block,
                         const std::vector<const ExchangeMessage*>& messages,
                         const CellPredicate& predicate, std::vector<std::byte>& out);

template <typename T>
void unpack_envelope(AcceleratedBlock<T>& block,
                     const std::vector<const ExchangeMessage*>& messages,
                     const CellPredicate& predicate, const std::byte* data, std::size_t size);

// Message-passing abstraction between workers. Channels are reliable and
// FIFO per (src, dst) pair; each send transfers one framed buffer.
class Transport {
  public:
    virtual ~Transport() = default;
    virtual void send(int src_worker, int dst_worker, std::vector<std::byte> buffer) = 0;
    virtual std::vector<std::byte> receive(int src_worker, int dst_worker) = 0;
};

class InProcessTransport final : public Transport {
  public:
    void send(int src_worker, int dst_worker, std::vector<std::byte> buffer) override;
    std::vector<std::byte> receive(int src_worker, int dst_worker) override;

  private:
    std::mutex mutex_;
    std::condition_variable ready_;
    std::map<std::pair<int, int>, std::deque<std::vector<std::byte>>> queues_;
};

// Wire framing helpers: each message is framed as (u32 plan index,
// u64 payload length, payload bytes).
std::vector<std::byte> frame_messages(const std::vector<int>& indices,
                                      const std::vector<std::vector<std::byte>>& payloads);

// The set of blocks of one simulation, stepped in lockstep by one worker
// thread per worker id. Envelopes are exchanged through the transport before
// every step; workers share no mutable state.
template <typename T>
class MultiBlockRun {
  public:
    MultiBlockRun(BlockPartition partition, std::array<bool, 3> periodic,
                  std::shared_ptr<const DynamicsRegistry> registry, DispatchSet dispatch,
                  std::shared_ptr<Transport> transport = nullptr);

    BlockPartition& partition() { return partition_; }
    const BlockPartition& partition() const { return partition_; }
    std::vector<AcceleratedBlock<T>>& blocks() { return blocks_; }
    const DynamicsRegistry& registry() const { return *registry_; }
    const DispatchSet& dispatch() const { return dispatch_; }
    void set_dispatch(DispatchSet d) { dispatch_ = std::move(d); }
    int workers() const { return workers_; }
    std::int64_t num_cells() const;

    // Populate tags, parameter indices and equilibrium populations from a
    // per-cell description in global coordinates. slot_of returns a registry
    // instance slot; state_of yields the initial density and velocity.
    void fill(const std::function<int(std::int64_t, std::int64_t, std::int64_t)>& slot_of,
              const std::function<void(std::int64_t, std::int64_t, std::int64_t, double&,
                                       std::array<double, 3>&)>& state_of);

    // Envelope exchange only (three sweeps). Also valid before the first step.
    void exchange();

    // Advance n steps; sample(step) runs after the steps where
    // sample_every > 0 divides the 1-based step count, with all blocks
    // quiescent. Throws the first worker error encountered.
    void advance(std::int64_t nsteps, std::int64_t sample_every = 0,
                 const std::function<void(std::int64_t)>& sample = nullptr);

    // Gather interior populations into canonical global order (direction-
    // major, x fastest), independent of the partitioning.
    std::vector<double> gather_populations() const;
    void gather_macroscopic(std::vector<double>& rho, std::vector<double>& ux,
                            std::vector<double>& uy, std::vector<double>& uz) const;

    // Gathers everything into one monolithic block (used for mirroring and
    // field dumps).
    AcceleratedBlock<T> gather_block() const;

  private:
    void worker_loop(int worker, std::int64_t nsteps, std::int64_t sample_every,
                     const std::function<void(std::int64_t)>& sample);
    void exchange_send(int worker, int sweep);
    void exchange_recv(int worker, int sweep);

    BlockPartition partition_;
    std::array<bool, 3> periodic_;
    std::shared_ptr<const DynamicsRegistry> registry_;
    DispatchSet dispatch_;
    std::shared_ptr<Transport> transport_;
    ExchangePlan plan_;
    std::vector<AcceleratedBlock<T>> blocks_;
    std::vector<ChainRecipe<T>> recipes_;
    int workers_ = 1;
};

}  // namespace dolb
