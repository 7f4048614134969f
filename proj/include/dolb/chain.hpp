#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "dolb/boundaries.hpp"
#include "dolb/collision.hpp"
#include "dolb/descriptor.hpp"

namespace dolb {

enum class LinkType {
    NoDynamics,
    BounceBack,
    MovingBounceBack,
    BGK,
    TRT,
    RR,
    Smagorinsky,
    RegularizedVelocity,
    RegularizedPressure,
};

// One link of a dynamics chain. Regularized links carry the boundary normal
// (axis + orientation); the remaining fields are unused for other types.
struct ChainLink {
    LinkType type;
    int axis = 0;
    int orient = 1;

    friend bool operator==(const ChainLink&, const ChainLink&) = default;
};

// Parameters attached to a chain instance. Only the fields consumed by the
// chain's links are serialized into the registry parameter table.
struct ChainParams {
    CollisionParams collision;
    std::array<double, 3> wall_velocity = {0, 0, 0};
    double target_rho = 1.0;

    friend bool operator==(const ChainParams&, const ChainParams&) = default;
};

// Ordered composition of links executed per cell: completion and LES links
// first, exactly one terminal (base collision or a terminal wall rule) last.
struct DynamicsChain {
    std::vector<ChainLink> links;
    ChainParams params;

    friend bool operator==(const DynamicsChain&, const DynamicsChain&) = default;
};

// Frozen string identifiers; registry tags derive from them.
std::string link_id(const ChainLink& link);
ChainLink parse_link_id(const std::string& id);

// Canonical chain string: link ids joined with '|'. The two-link combination
// [regularized boundary, base collision] renders as the composite name
// "Boundary_Regularized<Kind>_<a>_<o>__<BASE>" instead.
std::string chain_string(const DynamicsChain& chain);
std::vector<ChainLink> parse_chain_string(const std::string& s);

// Throws std::invalid_argument when the link sequence is malformed.
void validate_chain(const DynamicsChain& chain);

// Parameter table layout: each link appends its own values in chain order.
std::vector<double> serialize_params(const DynamicsChain& chain);
ChainParams deserialize_params(const std::vector<ChainLink>& links, const double* data,
                               std::size_t len);

// Convenience factories used by the benchmark cases.
DynamicsChain make_collision_chain(LinkType base, const CollisionParams& params,
                                   std::optional<double> smagorinsky_c = std::nullopt);
DynamicsChain make_bounce_back();
DynamicsChain make_no_dynamics();
DynamicsChain make_moving_bounce_back(const std::array<double, 3>& u_wall);
DynamicsChain make_regularized_velocity(int axis, int orient, const std::array<double, 3>& u,
                                        LinkType base, const CollisionParams& params);
DynamicsChain make_regularized_pressure(int axis, int orient, double rho, LinkType base,
                                        const CollisionParams& params);

// Flattened per-instance execution plan; built once, applied per cell by both
// lattice containers so the arithmetic is shared verbatim.
template <typename T>
struct ChainRecipe {
    enum class Kind { NoDynamics, BounceBack, MovingBounceBack, Collide };
    Kind kind = Kind::NoDynamics;

    bool has_regularized = false;
    bool reg_is_pressure = false;
    boundary::RegularizedSpec reg_spec;
    bool has_les = false;
    LinkType base = LinkType::BGK;

    T omega = 1;
    T lambda = T(3.0 / 16.0);
    T smagorinsky_c = 0;
    T omega_bulk_ho = 1;
    std::array<T, 3> wall_velocity = {0, 0, 0};
    T target_rho = 1;

    void apply(Populations<T>& f) const {
        switch (kind) {
            case Kind::NoDynamics:
                return;
            case Kind::BounceBack:
                boundary::bounce_back(f);
                return;
            case Kind::MovingBounceBack:
                boundary::moving_bounce_back(f, wall_velocity);
                return;
            case Kind::Collide:
                break;
        }
        if (has_regularized) {
            if (reg_is_pressure) {
                boundary::regularized_pressure(f, reg_spec, target_rho);
            } else {
                boundary::regularized_velocity(f, reg_spec, wall_velocity);
            }
        }
        T om = omega;
        if (has_les) {
            om = collision::smagorinsky_omega(f, om, smagorinsky_c);
        }
        switch (base) {
            case LinkType::BGK:
                collision::bgk(f, om);
                break;
            case LinkType::TRT: {
                const T om_minus =
                    T(CollisionParams::derive_omega_minus(double(om), double(lambda)));
                collision::trt(f, om, om_minus);
                break;
            }
            case LinkType::RR:
                collision::rr(f, om, omega_bulk_ho);
                break;
            default:
                break;
        }
    }
};

template <typename T>
ChainRecipe<T> compile_chain(const DynamicsChain& chain) {
    validate_chain(chain);
    ChainRecipe<T> r;
    r.omega = T(chain.params.collision.omega);
    r.lambda = T(chain.params.collision.lambda);
    r.smagorinsky_c = T(chain.params.collision.smagorinsky_c);
    r.omega_bulk_ho = T(chain.params.collision.omega_bulk_ho);
    r.wall_velocity = {T(chain.params.wall_velocity[0]), T(chain.params.wall_velocity[1]),
                       T(chain.params.wall_velocity[2])};
    r.target_rho = T(chain.params.target_rho);
    for (const ChainLink& link : chain.links) {
        switch (link.type) {
            case LinkType::NoDynamics:
                r.kind = ChainRecipe<T>::Kind::NoDynamics;
                break;
            case LinkType::BounceBack:
                r.kind = ChainRecipe<T>::Kind::BounceBack;
                break;
            case LinkType::MovingBounceBack:
                r.kind = ChainRecipe<T>::Kind::MovingBounceBack;
                break;
            case LinkType::BGK:
            case LinkType::TRT:
            case LinkType::RR:
                r.kind = ChainRecipe<T>::Kind::Collide;
                r.base = link.type;
                break;
            case LinkType::Smagorinsky:
                r.has_les = true;
                break;
            case LinkType::RegularizedVelocity:
            case LinkType::RegularizedPressure:
                r.has_regularized = true;
                r.reg_is_pressure = link.type == LinkType::RegularizedPressure;
                r.reg_spec = {link.axis, link.orient};
                break;
        }
    }
    return r;
}

}  // namespace dolb
