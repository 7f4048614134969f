#include "dolb/chain.hpp"

#include <stdexcept>

namespace dolb {

namespace {

bool is_terminal(LinkType t) {
    return t == LinkType::NoDynamics || t == LinkType::BounceBack ||
           t == LinkType::MovingBounceBack || t == LinkType::BGK || t == LinkType::TRT ||
           t == LinkType::RR;
}

bool is_base_collision(LinkType t) {
    return t == LinkType::BGK || t == LinkType::TRT || t == LinkType::RR;
}

bool is_regularized(LinkType t) {
    return t == LinkType::RegularizedVelocity || t == LinkType::RegularizedPressure;
}

std::string base_short_name(LinkType t) {
    switch (t) {
        case LinkType::BGK: return "BGK";
        case LinkType::TRT: return "TRT";
        case LinkType::RR: return "RR";
        default: throw std::invalid_argument("not a base collision link");
    }
}

std::string orient_token(int orient) {
    return orient > 0 ? "1" : "M1";
}

}  // namespace

std::string link_id(const ChainLink& link) {
    switch (link.type) {
        case LinkType::NoDynamics: return "NoDynamics";
        case LinkType::BounceBack: return "BounceBack";
        case LinkType::MovingBounceBack: return "MovingBounceBack";
        case LinkType::BGK: return "COLL_BGK";
        case LinkType::TRT: return "COLL_TRT";
        case LinkType::RR: return "COLL_RR";
        case LinkType::Smagorinsky: return "LES_Smagorinsky";
        case LinkType::RegularizedVelocity:
            return "Boundary_RegularizedVelocity_" + std::to_string(link.axis) + "_" +
                   orient_token(link.orient);
        case LinkType::RegularizedPressure:
            return "Boundary_RegularizedPressure_" + std::to_string(link.axis) + "_" +
                   orient_token(link.orient);
    }
    throw std::invalid_argument("unknown link type");
}

ChainLink parse_link_id(const std::string& id) {
    if (id == "NoDynamics") return {LinkType::NoDynamics};
    if (id == "BounceBack") return {LinkType::BounceBack};
    if (id == "MovingBounceBack") return {LinkType::MovingBounceBack};
    if (id == "COLL_BGK") return {LinkType::BGK};
    if (id == "COLL_TRT") return {LinkType::TRT};
    if (id == "COLL_RR") return {LinkType::RR};
    if (id == "LES_Smagorinsky") return {LinkType::Smagorinsky};
    for (const char* prefix : {"Boundary_RegularizedVelocity_", "Boundary_RegularizedPressure_"}) {
        const std::string p(prefix);
        if (id.rfind(p, 0) == 0) {
            const std::string rest = id.substr(p.size());
            const auto sep = rest.find('_');
            if (sep == std::string::npos) break;
            const std::string axis_s = rest.substr(0, sep);
            const std::string orient_s = rest.substr(sep + 1);
            if (axis_s.size() != 1 || axis_s[0] < '0' || axis_s[0] > '2') break;
            int orient = 0;
            if (orient_s == "1") orient = 1;
            else if (orient_s == "M1") orient = -1;
            else break;
            const LinkType t = p.find("Velocity") != std::string::npos
                                   ? LinkType::RegularizedVelocity
                                   : LinkType::RegularizedPressure;
            return {t, axis_s[0] - '0', orient};
        }
    }
    throw std::invalid_argument("unknown model identifier: \"" + id + "\"");
}

std::string chain_string(const DynamicsChain& chain) {
    if (chain.links.size() == 2 && is_regularized(chain.links[0].type) &&
        is_base_collision(chain.links[1].type)) {
        return link_id(chain.links[0]) + "__" + base_short_name(chain.links[1].type);
    }
    std::string s;
    for (std::size_t k = 0; k < chain.links.size(); ++k) {
        if (k > 0) s += '|';
        s += link_id(chain.links[k]);
    }
    return s;
}

std::vector<ChainLink> parse_chain_string(const std::string& s) {
    std::vector<ChainLink> links;
    const auto composite = s.rfind("__");
    if (composite != std::string::npos && s.rfind("Boundary_Regularized", 0) == 0) {
        links.push_back(parse_link_id(s.substr(0, composite)));
        const std::string base = s.substr(composite + 2);
        links.push_back(parse_link_id("COLL_" + base));
        return links;
    }
    std::size_t start = 0;
    while (start <= s.size()) {
        const auto bar = s.find('|', start);
        const std::string tok =
            bar == std::string::npos ? s.substr(start) : s.substr(start, bar - start);
        links.push_back(parse_link_id(tok));
        if (bar == std::string::npos) break;
        start = bar + 1;
    }
    return links;
}

void validate_chain(const DynamicsChain& chain) {
    if (chain.links.empty()) {
        throw std::invalid_argument("dynamics chain must contain at least one link");
    }
    int terminals = 0;
    for (std::size_t k = 0; k < chain.links.size(); ++k) {
        const LinkType t = chain.links[k].type;
        if (is_terminal(t)) {
            ++terminals;
            if (k + 1 != chain.links.size()) {
                throw std::invalid_argument("terminal link \"" + link_id(chain.links[k]) +
                                            "\" must be the last link of the chain");
            }
        }
        if (is_regularized(t) && (chain.links[k].orient != 1 && chain.links[k].orient != -1)) {
            throw std::invalid_argument("regularized boundary orientation must be +1 or -1");
        }
    }
    if (terminals != 1) {
        throw std::invalid_argument("dynamics chain \"" + chain_string(chain) +
                                    "\" needs exactly one terminal link");
    }
    const LinkType last = chain.links.back().type;
    for (std::size_t k = 0; k + 1 < chain.links.size(); ++k) {
        const LinkType t = chain.links[k].type;
        if ((is_regularized(t) || t == LinkType::Smagorinsky) && !is_base_collision(last)) {
            throw std::invalid_argument("link \"" + link_id(chain.links[k]) +
                                        "\" requires a base collision terminal");
        }
    }
}

std::vector<double> serialize_params(const DynamicsChain& chain) {
    std::vector<double> out;
    for (const ChainLink& link : chain.links) {
        switch (link.type) {
            case LinkType::BGK:
                out.push_back(chain.params.collision.omega);
                break;
            case LinkType::TRT:
                out.push_back(chain.params.collision.omega);
                out.push_back(chain.params.collision.lambda);
                break;
            case LinkType::RR:
                out.push_back(chain.params.collision.omega);
                out.push_back(chain.params.collision.omega_bulk_ho);
                break;
            case LinkType::Smagorinsky:
                out.push_back(chain.params.collision.smagorinsky_c);
                break;
            case LinkType::MovingBounceBack:
            case LinkType::RegularizedVelocity:
                out.push_back(chain.params.wall_velocity[0]);
                out.push_back(chain.params.wall_velocity[1]);
                out.push_back(chain.params.wall_velocity[2]);
                break;
            case LinkType::RegularizedPressure:
                out.push_back(chain.params.target_rho);
                break;
            case LinkType::NoDynamics:
            case LinkType::BounceBack:
                break;
        }
    }
    return out;
}

ChainParams deserialize_params(const std::vector<ChainLink>& links, const double* data,
                               std::size_t len) {
    ChainParams p;
    std::size_t k = 0;
    auto next = [&]() {
        if (k >= len) throw std::invalid_argument("parameter record too short for chain");
        return data[k++];
    };
    for (const ChainLink& link : links) {
        switch (link.type) {
            case LinkType::BGK:
                p.collision.omega = next();
                break;
            case LinkType::TRT:
                p.collision.omega = next();
                p.collision.lambda = next();
                p.collision.omega_minus =
                    CollisionParams::derive_omega_minus(p.collision.omega, p.collision.lambda);
                break;
            case LinkType::RR:
                p.collision.omega = next();
                p.collision.omega_bulk_ho = next();
                break;
            case LinkType::Smagorinsky:
                p.collision.smagorinsky_c = next();
                break;
            case LinkType::MovingBounceBack:
            case LinkType::RegularizedVelocity:
                p.wall_velocity[0] = next();
                p.wall_velocity[1] = next();
                p.wall_velocity[2] = next();
                break;
            case LinkType::RegularizedPressure:
                p.target_rho = next();
                break;
            case LinkType::NoDynamics:
            case LinkType::BounceBack:
                break;
        }
    }
    if (k != len) throw std::invalid_argument("parameter record too long for chain");
    return p;
}

namespace {

// Only the fields a chain's links consume are kept; everything else stays at
// its default so that serialization round-trips to an equal chain.
CollisionParams canonical_collision_params(LinkType base, const CollisionParams& params) {
    CollisionParams canon;
    canon.omega = params.omega;
    if (base == LinkType::TRT) {
        canon.set_trt(params.omega, params.lambda);
    } else if (base == LinkType::RR) {
        canon.omega_bulk_ho = params.omega_bulk_ho;
    }
    return canon;
}

}  // namespace

DynamicsChain make_collision_chain(LinkType base, const CollisionParams& params,
                                   std::optional<double> smagorinsky_c) {
    DynamicsChain chain;
    chain.params.collision = canonical_collision_params(base, params);
    if (smagorinsky_c) {
        chain.params.collision.smagorinsky_c = *smagorinsky_c;
        chain.links.push_back({LinkType::Smagorinsky});
    }
    chain.links.push_back({base});
    validate_chain(chain);
    return chain;
}

DynamicsChain make_bounce_back() {
    return DynamicsChain{{{LinkType::BounceBack}}, {}};
}

DynamicsChain make_no_dynamics() {
    return DynamicsChain{{{LinkType::NoDynamics}}, {}};
}

DynamicsChain make_moving_bounce_back(const std::array<double, 3>& u_wall) {
    DynamicsChain chain;
    chain.links.push_back({LinkType::MovingBounceBack});
    chain.params.wall_velocity = u_wall;
    return chain;
}

DynamicsChain make_regularized_velocity(int axis, int orient, const std::array<double, 3>& u,
                                        LinkType base, const CollisionParams& params) {
    DynamicsChain chain;
    chain.links.push_back({LinkType::RegularizedVelocity, axis, orient});
    chain.links.push_back({base});
    chain.params.collision = canonical_collision_params(base, params);
    chain.params.wall_velocity = u;
    validate_chain(chain);
    return chain;
}

DynamicsChain make_regularized_pressure(int axis, int orient, double rho, LinkType base,
                                        const CollisionParams& params) {
    DynamicsChain chain;
    chain.links.push_back({LinkType::RegularizedPressure, axis, orient});
    chain.links.push_back({base});
    chain.params.collision = canonical_collision_params(base, params);
    chain.params.target_rho = rho;
    validate_chain(chain);
    return chain;
}

}  // namespace dolb
