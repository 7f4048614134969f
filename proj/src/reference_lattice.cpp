#include "dolb/reference_lattice.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace dolb {

namespace {

class NoDynamicsImpl final : public Dynamics {
  public:
    explicit NoDynamicsImpl(DynamicsChain chain) : chain_(std::move(chain)) {}
    void collide(Populations<double>&) const override {}
    const DynamicsChain& chain() const override { return chain_; }

  private:
    DynamicsChain chain_;
};

class BounceBackImpl final : public Dynamics {
  public:
    explicit BounceBackImpl(DynamicsChain chain) : chain_(std::move(chain)) {}
    void collide(Populations<double>& f) const override { boundary::bounce_back(f); }
    const DynamicsChain& chain() const override { return chain_; }

  private:
    DynamicsChain chain_;
};

class MovingBounceBackImpl final : public Dynamics {
  public:
    explicit MovingBounceBackImpl(DynamicsChain chain)
        : chain_(std::move(chain)), u_wall_(chain_.params.wall_velocity) {}
    void collide(Populations<double>& f) const override {
        boundary::moving_bounce_back(f, u_wall_);
    }
    const DynamicsChain& chain() const override { return chain_; }

  private:
    DynamicsChain chain_;
    std::array<double, 3> u_wall_;
};

// Base collision with an adjustable relaxation rate so that LES wrappers can
// substitute their effective omega.
class CollisionDynamics : public Dynamics {
  public:
    virtual void collide_with(Populations<double>& f, double omega) const = 0;
};

class BgkImpl final : public CollisionDynamics {
  public:
    explicit BgkImpl(DynamicsChain chain) : chain_(std::move(chain)) {}
    void collide(Populations<double>& f) const override {
        collision::bgk(f, chain_.params.collision.omega);
    }
    void collide_with(Populations<double>& f, double omega) const override {
        collision::bgk(f, omega);
    }
    const DynamicsChain& chain() const override { return chain_; }

  private:
    DynamicsChain chain_;
};

class TrtImpl final : public CollisionDynamics {
  public:
    explicit TrtImpl(DynamicsChain chain) : chain_(std::move(chain)) {}
    void collide(Populations<double>& f) const override {
        collide_with(f, chain_.params.collision.omega);
    }
    void collide_with(Populations<double>& f, double omega) const override {
        const double om_minus =
            CollisionParams::derive_omega_minus(omega, chain_.params.collision.lambda);
        collision::trt(f, omega, om_minus);
    }
    const DynamicsChain& chain() const override { return chain_; }

  private:
    DynamicsChain chain_;
};

class RrImpl final : public CollisionDynamics {
  public:
    explicit RrImpl(DynamicsChain chain) : chain_(std::move(chain)) {}
    void collide(Populations<double>& f) const override {
        collide_with(f, chain_.params.collision.omega);
    }
    void collide_with(Populations<double>& f, double omega) const override {
        collision::rr(f, omega, chain_.params.collision.omega_bulk_ho);
    }
    const DynamicsChain& chain() const override { return chain_; }

  private:
    DynamicsChain chain_;
};

class SmagorinskyImpl final : public Dynamics {
  public:
    SmagorinskyImpl(DynamicsChain chain, std::unique_ptr<CollisionDynamics> base)
        : chain_(std::move(chain)), base_(std::move(base)) {}
    void collide(Populations<double>& f) const override {
        const double om_eff = collision::smagorinsky_omega(
            f, chain_.params.collision.omega, chain_.params.collision.smagorinsky_c);
        base_->collide_with(f, om_eff);
    }
    const DynamicsChain& chain() const override { return chain_; }

  private:
    DynamicsChain chain_;
    std::unique_ptr<CollisionDynamics> base_;
};

class RegularizedImpl final : public Dynamics {
  public:
    RegularizedImpl(DynamicsChain chain, ChainLink link, std::unique_ptr<Dynamics> next)
        : chain_(std::move(chain)), link_(link), next_(std::move(next)) {}
    void collide(Populations<double>& f) const override {
        const boundary::RegularizedSpec spec{link_.axis, link_.orient};
        if (link_.type == LinkType::RegularizedPressure) {
            boundary::regularized_pressure(f, spec, chain_.params.target_rho);
        } else {
            boundary::regularized_velocity(f, spec, chain_.params.wall_velocity);
        }
        next_->collide(f);
    }
    const DynamicsChain& chain() const override { return chain_; }

  private:
    DynamicsChain chain_;
    ChainLink link_;
    std::unique_ptr<Dynamics> next_;
};

std::unique_ptr<Dynamics> build(const DynamicsChain& full, std::size_t link_pos) {
    const ChainLink& link = full.links[link_pos];
    DynamicsChain sub{std::vector<ChainLink>(full.links.begin() + std::ptrdiff_t(link_pos),
                                             full.links.end()),
                      full.params};
    switch (link.type) {
        case LinkType::NoDynamics:
            return std::make_unique<NoDynamicsImpl>(link_pos == 0 ? full : sub);
        case LinkType::BounceBack:
            return std::make_unique<BounceBackImpl>(link_pos == 0 ? full : sub);
        case LinkType::MovingBounceBack:
            return std::make_unique<MovingBounceBackImpl>(link_pos == 0 ? full : sub);
        case LinkType::BGK:
            return std::make_unique<BgkImpl>(link_pos == 0 ? full : sub);
        case LinkType::TRT:
            return std::make_unique<TrtImpl>(link_pos == 0 ? full : sub);
        case LinkType::RR:
            return std::make_unique<RrImpl>(link_pos == 0 ? full : sub);
        case LinkType::Smagorinsky: {
            auto next = build(full, link_pos + 1);
            auto* base = dynamic_cast<CollisionDynamics*>(next.get());
            if (base == nullptr) {
                throw std::invalid_argument("LES_Smagorinsky requires a base collision link");
            }
            next.release();
            return std::make_unique<SmagorinskyImpl>(link_pos == 0 ? full : sub,
                                                     std::unique_ptr<CollisionDynamics>(base));
        }
        case LinkType::RegularizedVelocity:
        case LinkType::RegularizedPressure:
            return std::make_unique<RegularizedImpl>(link_pos == 0 ? full : sub, link,
                                                     build(full, link_pos + 1));
    }
    throw std::invalid_argument("unknown link type");
}

}  // namespace

std::unique_ptr<Dynamics> make_dynamics(const DynamicsChain& chain) {
    validate_chain(chain);
    return build(chain, 0);
}

ReferenceLattice::ReferenceLattice(std::array<std::int64_t, 3> dims,
                                   std::array<bool, 3> periodic)
    : dims_(dims), periodic_(periodic) {
    for (int a = 0; a < 3; ++a) {
        if (dims_[a] < 1) throw std::invalid_argument("lattice extents must be >= 1");
    }
    cells_.resize(std::size_t(dims_[0] * dims_[1] * dims_[2]));
    scratch_.resize(cells_.size());
}

void ReferenceLattice::set_chain(const Box& region, const DynamicsChain& chain) {
    for (int a = 0; a < 3; ++a) {
        if (region.lo[a] < 0 || region.hi[a] > dims_[a]) {
            throw std::out_of_range("set_chain: region exceeds lattice dimensions");
        }
    }
    if (region.volume() == 0) return;
    const Dynamics* instance = nullptr;
    for (const auto& owned : owned_chains_) {
        if (owned->chain() == chain) {
            instance = owned.get();
            break;
        }
    }
    if (instance == nullptr) {
        owned_chains_.push_back(make_dynamics(chain));
        instance = owned_chains_.back().get();
    }
    for (std::int64_t z = region.lo[2]; z < region.hi[2]; ++z) {
        for (std::int64_t y = region.lo[1]; y < region.hi[1]; ++y) {
            for (std::int64_t x = region.lo[0]; x < region.hi[0]; ++x) {
                cells_[std::size_t(index(x, y, z))].dynamics = instance;
            }
        }
    }
}

std::vector<const Dynamics*> ReferenceLattice::chain_instances() const {
    std::set<const Dynamics*> used;
    for (const Cell& cell : cells_) {
        if (cell.dynamics != nullptr) used.insert(cell.dynamics);
    }
    return {used.begin(), used.end()};
}

void ReferenceLattice::collide_and_stream() {
    for (const Cell& cell : cells_) {
        if (cell.dynamics == nullptr) {
            throw std::logic_error("collide_and_stream: cell without a dynamics chain");
        }
    }
    const std::int64_t nx = dims_[0], ny = dims_[1], nz = dims_[2];
    for (std::int64_t z = 0; z < nz; ++z) {
        for (std::int64_t y = 0; y < ny; ++y) {
            for (std::int64_t x = 0; x < nx; ++x) {
                Populations<double> g;
                for (int i = 0; i < D3Q19::q; ++i) {
                    std::int64_t sx = x - D3Q19::c[i][0];
                    std::int64_t sy = y - D3Q19::c[i][1];
                    std::int64_t sz = z - D3Q19::c[i][2];
                    bool outside = false;
                    if (sx < 0 || sx >= nx) {
                        if (periodic_[0]) sx = (sx + nx) % nx;
                        else outside = true;
                    }
                    if (sy < 0 || sy >= ny) {
                        if (periodic_[1]) sy = (sy + ny) % ny;
                        else outside = true;
                    }
                    if (sz < 0 || sz >= nz) {
                        if (periodic_[2]) sz = (sz + nz) % nz;
                        else outside = true;
                    }
                    // Outside a non-periodic face the offset populations are
                    // zero, matching the accelerated container's envelope.
                    g[i] = outside ? 0.0 : cells_[std::size_t(index(sx, sy, sz))].f[i];
                }
                cells_[std::size_t(index(x, y, z))].dynamics->collide(g);
                scratch_[std::size_t(index(x, y, z))] = g;
            }
        }
    }
    for (std::size_t k = 0; k < cells_.size(); ++k) {
        cells_[k].f = scratch_[k];
    }
}

std::vector<std::string> ReferenceLattice::required_models() const {
    std::set<std::string> names;
    for (const Cell& cell : cells_) {
        if (cell.dynamics != nullptr) names.insert(chain_string(cell.dynamics->chain()));
    }
    return {names.begin(), names.end()};
}

}  // namespace dolb
