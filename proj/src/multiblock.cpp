#include "dolb/multiblock.hpp"

#include <atomic>
#include <barrier>
#include <cstring>
#include <thread>

namespace dolb {

BlockPartition partition(std::array<std::int64_t, 3> global_dims, std::array<int, 3> block_grid,
                         int workers) {
    BlockPartition part;
    part.global_dims = global_dims;
    part.block_grid = block_grid;
    if (workers < 1) throw std::invalid_argument("partition: workers must be >= 1");
    std::array<std::vector<std::int64_t>, 3> extents;
    std::array<std::vector<std::int64_t>, 3> origins;
    for (int a = 0; a < 3; ++a) {
        const std::int64_t n = global_dims[a];
        const int k = block_grid[a];
        if (k < 1 || std::int64_t(k) > n) {
            throw std::invalid_argument("partition: block grid must be between 1 and the extent");
        }
        // Balanced split: the first n % k blocks are one cell longer.
        std::int64_t at = 0;
        for (int b = 0; b < k; ++b) {
            const std::int64_t len = n / k + (b < int(n % k) ? 1 : 0);
            extents[a].push_back(len);
            origins[a].push_back(at);
            at += len;
        }
    }
    for (int gz = 0; gz < block_grid[2]; ++gz) {
        for (int gy = 0; gy < block_grid[1]; ++gy) {
            for (int gx = 0; gx < block_grid[0]; ++gx) {
                BlockPartition::BlockInfo info;
                info.origin = {origins[0][gx], origins[1][gy], origins[2][gz]};
                info.extent = {extents[0][gx], extents[1][gy], extents[2][gz]};
                info.grid_pos = {gx, gy, gz};
                part.blocks.push_back(info);
            }
        }
    }
    part.worker_of.resize(part.blocks.size());
    for (std::size_t b = 0; b < part.blocks.size(); ++b) {
        part.worker_of[b] = int(b) % workers;
    }
    return part;
}

ExchangePlan build_exchange_plan(const BlockPartition& part, std::array<bool, 3> periodic) {
    ExchangePlan plan;
    int index = 0;
    for (int sweep = 0; sweep < 3; ++sweep) {
        for (std::size_t b = 0; b < part.blocks.size(); ++b) {
            const auto& info = part.blocks[b];
            for (int dir = -1; dir <= 1; dir += 2) {
                int ng = info.grid_pos[sweep] + dir;
                if (ng < 0 || ng >= part.block_grid[sweep]) {
                    if (!periodic[sweep]) continue;
                    ng = (ng + part.block_grid[sweep]) % part.block_grid[sweep];
                }
                std::array<int, 3> npos = info.grid_pos;
                npos[sweep] = ng;
                const int nb = part.block_at(npos[0], npos[1], npos[2]);
                const auto& ninfo = part.blocks[std::size_t(nb)];

                ExchangeMessage msg;
                msg.index = index++;
                msg.sweep = sweep;
                msg.src_block = int(b);
                msg.dst_block = nb;
                // Axes already swept span the full extent including the
                // envelope; later axes span the interior only.
                for (int a = 0; a < 3; ++a) {
                    if (a < sweep) {
                        msg.src_box.lo[a] = 0;
                        msg.src_box.hi[a] = info.extent[a] + 2;
                        msg.dst_box.lo[a] = 0;
                        msg.dst_box.hi[a] = ninfo.extent[a] + 2;
                    } else {
                        msg.src_box.lo[a] = 1;
                        msg.src_box.hi[a] = info.extent[a] + 1;
                        msg.dst_box.lo[a] = 1;
                        msg.dst_box.hi[a] = ninfo.extent[a] + 1;
                    }
                }
                msg.src_box.lo[sweep] = dir > 0 ? info.extent[sweep] : 1;
                msg.src_box.hi[sweep] = msg.src_box.lo[sweep] + 1;
                msg.dst_box.lo[sweep] = dir > 0 ? 0 : ninfo.extent[sweep] + 1;
                msg.dst_box.hi[sweep] = msg.dst_box.lo[sweep] + 1;

                plan.messages.push_back(msg);
                const std::pair<int, int> key = {part.worker_of[b],
                                                 part.worker_of[std::size_t(nb)]};
                plan.pair_messages[sweep][key].push_back(msg.index);
            }
        }
    }
    return plan;
}

namespace {

template <typename T>
std::int64_t count_selected(const Box& box, const CellPredicate& predicate) {
    if (!predicate) return box.volume();
    std::int64_t n = 0;
    for (std::int64_t z = box.lo[2]; z < box.hi[2]; ++z) {
        for (std::int64_t y = box.lo[1]; y < box.hi[1]; ++y) {
            for (std::int64_t x = box.lo[0]; x < box.hi[0]; ++x) {
                if (predicate(x, y, z)) ++n;
            }
        }
    }
    return n;
}

}  // namespace

template <typename T>
PackLayout pack_envelope(const AcceleratedBlock<T>& block,
                         const std::vector<const ExchangeMessage*>& messages,
                         const CellPredicate& predicate, std::vector<std::byte>& out) {
    PackLayout layout;
    const std::int64_t cell_bytes = 19 * std::int64_t(sizeof(T));
    std::int64_t total = 0;
    for (const ExchangeMessage* msg : messages) {
        layout.offsets.push_back(total);
        total += count_selected<T>(msg->src_box, predicate) * cell_bytes;
    }
    layout.total_bytes = total;
    out.resize(std::size_t(total));

    const std::int64_t vol = block.vol();
    std::size_t at = 0;
    for (const ExchangeMessage* msg : messages) {
        const Box& box = msg->src_box;
        for (std::int64_t z = box.lo[2]; z < box.hi[2]; ++z) {
            for (std::int64_t y = box.lo[1]; y < box.hi[1]; ++y) {
                for (std::int64_t x = box.lo[0]; x < box.hi[0]; ++x) {
                    if (predicate && !predicate(x, y, z)) continue;
                    const std::int64_t cell = block.idx(x, y, z);
                    for (int i = 0; i < D3Q19::q; ++i) {
                        const T v = block.f_in[std::size_t(i) * std::size_t(vol) +
                                               std::size_t(cell)];
                        std::memcpy(out.data() + at, &v, sizeof(T));
                        at += sizeof(T);
                    }
                }
            }
        }
    }
    return layout;
}

template <typename T>
void unpack_envelope(AcceleratedBlock<T>& block,
                     const std::vector<const ExchangeMessage*>& messages,
                     const CellPredicate& predicate, const std::byte* data, std::size_t size) {
    const std::int64_t vol = block.vol();
    std::size_t at = 0;
    for (const ExchangeMessage* msg : messages) {
        const Box& box = msg->dst_box;
        for (std::int64_t z = box.lo[2]; z < box.hi[2]; ++z) {
            for (std::int64_t y = box.lo[1]; y < box.hi[1]; ++y) {
                for (std::int64_t x = box.lo[0]; x < box.hi[0]; ++x) {
                    if (predicate && !predicate(x, y, z)) continue;
                    if (at + 19 * sizeof(T) > size) {
                        throw ExchangeError("envelope payload shorter than the plan requires");
                    }
                    const std::int64_t cell = block.idx(x, y, z);
                    for (int i = 0; i < D3Q19::q; ++i) {
                        T v;
                        std::memcpy(&v, data + at, sizeof(T));
                        at += sizeof(T);
                        block.f_in[std::size_t(i) * std::size_t(vol) + std::size_t(cell)] = v;
                    }
                }
            }
        }
    }
    if (at != size) {
        throw ExchangeError("envelope payload longer than the plan requires");
    }
}

void InProcessTransport::send(int src_worker, int dst_worker, std::vector<std::byte> buffer) {
    {
        std::lock_guard<std::mutex> lock(mutex_);
        queues_[{src_worker, dst_worker}].push_back(std::move(buffer));
    }
    ready_.notify_all();
}

std::vector<std::byte> InProcessTransport::receive(int src_worker, int dst_worker) {
    std::unique_lock<std::mutex> lock(mutex_);
    auto& queue = queues_[{src_worker, dst_worker}];
    ready_.wait(lock, [&queue]() { return !queue.empty(); });
    std::vector<std::byte> buffer = std::move(queue.front());
    queue.pop_front();
    return buffer;
}

std::vector<std::byte> frame_messages(const std::vector<int>& indices,
                                      const std::vector<std::vector<std::byte>>& payloads) {
    std::size_t total = 0;
    for (const auto& p : payloads) total += 12 + p.size();
    std::vector<std::byte> out(total);
    std::size_t at = 0;
    for (std::size_t k = 0; k < payloads.size(); ++k) {
        const std::uint32_t index = std::uint32_t(indices[k]);
        const std::uint64_t len = payloads[k].size();
        std::memcpy(out.data() + at, &index, 4);
        std::memcpy(out.data() + at + 4, &len, 8);
        std::memcpy(out.data() + at + 12, payloads[k].data(), payloads[k].size());
        at += 12 + payloads[k].size();
    }
    return out;
}

template <typename T>
MultiBlockRun<T>::MultiBlockRun(BlockPartition part, std::array<bool, 3> periodic,
                                std::shared_ptr<const DynamicsRegistry> registry,
                                DispatchSet dispatch, std::shared_ptr<Transport> transport)
    : partition_(std::move(part)),
      periodic_(periodic),
      registry_(std::move(registry)),
      dispatch_(std::move(dispatch)),
      transport_(transport ? std::move(transport) : std::make_shared<InProcessTransport>()) {
    plan_ = build_exchange_plan(partition_, periodic_);
    for (const auto& info : partition_.blocks) {
        std::array<bool, 3> self_periodic = {false, false, false};
        for (int a = 0; a < 3; ++a) {
            // Monolithic axes wrap through the exchange plan; the flag is
            // kept for gather_block consumers.
            self_periodic[a] = periodic_[a] && partition_.block_grid[a] == 1;
        }
        blocks_.emplace_back(info.extent, info.origin, partition_.global_dims, self_periodic);
    }
    recipes_ = compile_recipes<T>(*registry_);
    workers_ = 1;
    for (const int w : partition_.worker_of) workers_ = std::max(workers_, w + 1);
}

template <typename T>
std::int64_t MultiBlockRun<T>::num_cells() const {
    return partition_.global_dims[0] * partition_.global_dims[1] * partition_.global_dims[2];
}

template <typename T>
void MultiBlockRun<T>::fill(
    const std::function<int(std::int64_t, std::int64_t, std::int64_t)>& slot_of,
    const std::function<void(std::int64_t, std::int64_t, std::int64_t, double&,
                             std::array<double, 3>&)>& state_of) {
    std::map<int, std::int32_t> tag_of_slot;
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
        AcceleratedBlock<T>& block = blocks_[b];
        const std::int64_t vol = block.vol();
        for (std::int64_t z = 0; z < block.interior[2]; ++z) {
            for (std::int64_t y = 0; y < block.interior[1]; ++y) {
                for (std::int64_t x = 0; x < block.interior[0]; ++x) {
                    const std::int64_t gx = block.origin[0] + x;
                    const std::int64_t gy = block.origin[1] + y;
                    const std::int64_t gz = block.origin[2] + z;
                    const int slot = slot_of(gx, gy, gz);
                    auto it = tag_of_slot.find(slot);
                    if (it == tag_of_slot.end()) {
                        it = tag_of_slot.emplace(slot, std::int32_t(registry_->tag_of_slot(slot)))
                                 .first;
                    }
                    const std::int64_t at = block.idx(x + 1, y + 1, z + 1);
                    block.param_index[std::size_t(at)] = slot;
                    block.tag[std::size_t(at)] = it->second;
                    double rho = 1.0;
                    std::array<double, 3> u = {0, 0, 0};
                    state_of(gx, gy, gz, rho, u);
                    const Populations<T> feq =
                        equilibrium2(T(rho), std::array<T, 3>{T(u[0]), T(u[1]), T(u[2])});
                    for (int i = 0; i < D3Q19::q; ++i) {
                        block.f_in[std::size_t(i) * std::size_t(vol) + std::size_t(at)] = feq[i];
                    }
                }
            }
        }
    }
}

template <typename T>
void MultiBlockRun<T>::exchange_send(int worker, int sweep) {
    for (const auto& [key, indices] : plan_.pair_messages[sweep]) {
        if (key.first != worker) continue;
        std::vector<std::vector<std::byte>> payloads;
        for (const int index : indices) {
            const ExchangeMessage& msg = plan_.messages[std::size_t(index)];
            std::vector<const ExchangeMessage*> one = {&msg};
            std::vector<std::byte> payload;
            pack_envelope(blocks_[std::size_t(msg.src_block)], one, nullptr, payload);
            payloads.push_back(std::move(payload));
        }
        transport_->send(worker, key.second, frame_messages(indices, payloads));
    }
}

template <typename T>
void MultiBlockRun<T>::exchange_recv(int worker, int sweep) {
    for (const auto& [key, indices] : plan_.pair_messages[sweep]) {
        if (key.second != worker) continue;
        const std::vector<std::byte> buffer = transport_->receive(key.first, worker);
        std::map<int, std::pair<std::size_t, std::size_t>> received;  // index -> (at, len)
        std::size_t at = 0;
        while (at < buffer.size()) {
            if (at + 12 > buffer.size()) {
                throw ExchangeError("truncated message frame in exchange buffer");
            }
            std::uint32_t index;
            std::uint64_t len;
            std::memcpy(&index, buffer.data() + at, 4);
            std::memcpy(&len, buffer.data() + at + 4, 8);
            at += 12;
            if (at + len > buffer.size()) {
                throw ExchangeError("message frame exceeds exchange buffer");
            }
            if (!received.emplace(int(index), std::make_pair(at, std::size_t(len))).second) {
                throw ExchangeError("duplicate exchange message " + std::to_string(index));
            }
            at += len;
        }
        for (const int index : indices) {
            const auto it = received.find(index);
            if (it == received.end()) {
                throw ExchangeError("lost exchange message " + std::to_string(index));
            }
            const ExchangeMessage& msg = plan_.messages[std::size_t(index)];
            std::vector<const ExchangeMessage*> one = {&msg};
            unpack_envelope(blocks_[std::size_t(msg.dst_block)], one, nullptr,
                            buffer.data() + it->second.first, it->second.second);
            received.erase(it);
        }
        if (!received.empty()) {
            throw ExchangeError("unexpected exchange message " +
                                std::to_string(received.begin()->first));
        }
    }
}

template <typename T>
void MultiBlockRun<T>::exchange() {
    // All sends of a sweep precede the receives so the single-threaded form
    // cannot block on a not-yet-posted buffer.
    for (int sweep = 0; sweep < 3; ++sweep) {
        for (int w = 0; w < workers_; ++w) exchange_send(w, sweep);
        for (int w = 0; w < workers_; ++w) exchange_recv(w, sweep);
    }
}

template <typename T>
void MultiBlockRun<T>::worker_loop(int worker, std::int64_t nsteps, std::int64_t sample_every,
                                   const std::function<void(std::int64_t)>& sample) {
    for (std::int64_t step = 1; step <= nsteps; ++step) {
        for (int sweep = 0; sweep < 3; ++sweep) {
            exchange_send(worker, sweep);
            exchange_recv(worker, sweep);
        }
        for (std::size_t b = 0; b < blocks_.size(); ++b) {
            if (partition_.worker_of[b] == worker) {
                collide_and_stream(blocks_[b], *registry_, recipes_, dispatch_);
            }
        }
        if (sample_every > 0 && step % sample_every == 0 && sample && workers_ == 1) {
            sample(step);
        }
    }
}

template <typename T>
void MultiBlockRun<T>::advance(std::int64_t nsteps, std::int64_t sample_every,
                               const std::function<void(std::int64_t)>& sample) {
    if (nsteps <= 0) return;
    if (workers_ == 1) {
        worker_loop(0, nsteps, sample_every, sample);
        return;
    }
    std::barrier sync(workers_);
    std::vector<std::exception_ptr> errors;
    errors.resize(std::size_t(workers_));
    std::atomic<bool> failed{false};
    auto body = [&](int worker) {
        try {
            for (std::int64_t step = 1; step <= nsteps; ++step) {
                for (int sweep = 0; sweep < 3; ++sweep) {
                    exchange_send(worker, sweep);
                    exchange_recv(worker, sweep);
                }
                for (std::size_t b = 0; b < blocks_.size(); ++b) {
                    if (partition_.worker_of[b] == worker) {
                        collide_and_stream(blocks_[b], *registry_, recipes_, dispatch_);
                    }
                }
                if (sample_every > 0 && step % sample_every == 0) {
                    sync.arrive_and_wait();
                    if (failed.load()) return;
                    if (worker == 0 && sample) sample(step);
                    sync.arrive_and_wait();
                }
            }
        } catch (...) {
            errors[std::size_t(worker)] = std::current_exception();
            failed.store(true);
            sync.arrive_and_drop();
        }
    };
    std::vector<std::thread> threads;
    for (int w = 0; w < workers_; ++w) threads.emplace_back(body, w);
    for (auto& th : threads) th.join();
    for (const auto& err : errors) {
        if (err) std::rethrow_exception(err);
    }
}

template <typename T>
std::vector<double> MultiBlockRun<T>::gather_populations() const {
    const std::int64_t n = num_cells();
    std::vector<double> out(std::size_t(19 * n));
    for (const AcceleratedBlock<T>& block : blocks_) {
        const std::int64_t vol = block.vol();
        for (std::int64_t z = 0; z < block.interior[2]; ++z) {
            for (std::int64_t y = 0; y < block.interior[1]; ++y) {
                for (std::int64_t x = 0; x < block.interior[0]; ++x) {
                    const std::int64_t at = block.idx(x + 1, y + 1, z + 1);
                    const std::int64_t g = block.cell_index[std::size_t(at)];
                    for (int i = 0; i < D3Q19::q; ++i) {
                        out[std::size_t(i) * std::size_t(n) + std::size_t(g)] = double(
                            block.f_in[std::size_t(i) * std::size_t(vol) + std::size_t(at)]);
                    }
                }
            }
        }
    }
    return out;
}

template <typename T>
void MultiBlockRun<T>::gather_macroscopic(std::vector<double>& rho, std::vector<double>& ux,
                                          std::vector<double>& uy,
                                          std::vector<double>& uz) const {
    const std::int64_t n = num_cells();
    rho.assign(std::size_t(n), 1.0);
    ux.assign(std::size_t(n), 0.0);
    uy.assign(std::size_t(n), 0.0);
    uz.assign(std::size_t(n), 0.0);
    for (const AcceleratedBlock<T>& block : blocks_) {
        const std::int64_t vol = block.vol();
        for (std::int64_t z = 0; z < block.interior[2]; ++z) {
            for (std::int64_t y = 0; y < block.interior[1]; ++y) {
                for (std::int64_t x = 0; x < block.interior[0]; ++x) {
                    const std::int64_t at = block.idx(x + 1, y + 1, z + 1);
                    const std::int64_t g = block.cell_index[std::size_t(at)];
                    Populations<double> f;
                    for (int i = 0; i < D3Q19::q; ++i) {
                        f[i] = double(
                            block.f_in[std::size_t(i) * std::size_t(vol) + std::size_t(at)]);
                    }
                    const ChainRecipe<T>& recipe =
                        recipes_[std::size_t(block.param_index[std::size_t(at)])];
                    double r = 1.0;
                    std::array<double, 3> u = {0, 0, 0};
                    using Kind = typename ChainRecipe<T>::Kind;
                    if (recipe.kind == Kind::Collide) {
                        compute_rho_u(f, r, u);
                    } else if (recipe.kind == Kind::MovingBounceBack) {
                        // Wall nodes report their prescribed wall velocity.
                        u = {double(recipe.wall_velocity[0]), double(recipe.wall_velocity[1]),
                             double(recipe.wall_velocity[2])};
                    }
                    rho[std::size_t(g)] = r;
                    ux[std::size_t(g)] = u[0];
                    uy[std::size_t(g)] = u[1];
                    uz[std::size_t(g)] = u[2];
                }
            }
        }
    }
}

template <typename T>
AcceleratedBlock<T> MultiBlockRun<T>::gather_block() const {
    AcceleratedBlock<T> mono(partition_.global_dims, {0, 0, 0}, partition_.global_dims,
                             periodic_);
    const std::int64_t mvol = mono.vol();
    for (const AcceleratedBlock<T>& block : blocks_) {
        const std::int64_t vol = block.vol();
        for (std::int64_t z = 0; z < block.interior[2]; ++z) {
            for (std::int64_t y = 0; y < block.interior[1]; ++y) {
                for (std::int64_t x = 0; x < block.interior[0]; ++x) {
                    const std::int64_t at = block.idx(x + 1, y + 1, z + 1);
                    const std::int64_t mat = mono.idx(block.origin[0] + x + 1,
                                                      block.origin[1] + y + 1,
                                                      block.origin[2] + z + 1);
                    mono.tag[std::size_t(mat)] = block.tag[std::size_t(at)];
                    mono.param_index[std::size_t(mat)] = block.param_index[std::size_t(at)];
                    for (int i = 0; i < D3Q19::q; ++i) {
                        mono.f_in[std::size_t(i) * std::size_t(mvol) + std::size_t(mat)] =
                            block.f_in[std::size_t(i) * std::size_t(vol) + std::size_t(at)];
                    }
                }
            }
        }
    }
    return mono;
}

template PackLayout pack_envelope<float>(const AcceleratedBlock<float>&,
                                         const std::vector<const ExchangeMessage*>&,
                                         const CellPredicate&, std::vector<std::byte>&);
template PackLayout pack_envelope<double>(const AcceleratedBlock<double>&,
                                          const std::vector<const ExchangeMessage*>&,
                                          const CellPredicate&, std::vector<std::byte>&);
template void unpack_envelope<float>(AcceleratedBlock<float>&,
                                     const std::vector<const ExchangeMessage*>&,
                                     const CellPredicate&, const std::byte*, std::size_t);
template void unpack_envelope<double>(AcceleratedBlock<double>&,
                                      const std::vector<const ExchangeMessage*>&,
                                      const CellPredicate&, const std::byte*, std::size_t);
template class MultiBlockRun<float>;
template class MultiBlockRun<double>;

}  // namespace dolb
