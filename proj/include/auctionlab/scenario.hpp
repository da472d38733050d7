#pragma once

#include <cstdint>
#include <initializer_list>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "auctionlab/assignment.hpp"
#include "auctionlab/bundled_auction.hpp"
#include "auctionlab/distributions.hpp"
#include "auctionlab/errors.hpp"
#include "auctionlab/objectives.hpp"
#include "auctionlab/single_auction.hpp"
#include "auctionlab/tso_auction.hpp"

// Scenario files: one JSON document holding exactly one mechanism section
// (auction, bundled, tsvcg or assignment) plus optional simulation and
// verification settings.  Parsing is strict: unknown keys, missing fields
// and type mismatches raise ParseError; out-of-range values that survive
// the schema raise the library's domain errors instead, so callers can
// tell a malformed file (exit 2) from an invalid model (exit 3).

namespace auctionlab {

struct SimulationSpec {
    std::int64_t trials = 0;
    std::optional<std::uint64_t> seed;
    bool operator==(const SimulationSpec&) const = default;
};

struct VerifySpec {
    std::optional<double> tolerance;
    std::optional<int> grid_points;
    bool operator==(const VerifySpec&) const = default;
};

struct AuctionSection {
    Mechanism mechanism = Mechanism::svcg;
    int winner_count = 1;
    double resale_price = 1.0;
    ObjectiveFn objective = ObjectiveFn::identity();
    std::vector<Bid> bids;
};

struct BundledSection {
    Mechanism mechanism = Mechanism::svcg;
    BundledScenario scenario{{}, MultiObjectiveFn::min_of_all()};
};

struct TsvcgSection {
    std::vector<GenEntry> gens;
    std::vector<TsoCost> tsos;
    std::optional<AccessMatrix> access;
};

struct AssignmentSection {
    enum class Mode { vcg, ivcg };

    Mode mode = Mode::vcg;
    double spot_price = 1.0;
    DemandLaw demand = DemandLaw::scaled(GenDistribution::uniform(0.0, 1.0), 1.0);
    // Demand is written in natural units and rescaled at parse time; the
    // source object is kept verbatim so serialization round-trips bitwise.
    nlohmann::json demand_source;
    std::vector<AssignmentPlayer> players;
    std::optional<std::vector<TwoDimBid>> bids;  // explicit two-part profile

    AssignmentProblem problem() const {
        return AssignmentProblem(players, demand, spot_price);
    }
};

struct Scenario {
    int schema_version = 1;
    std::variant<AuctionSection, BundledSection, TsvcgSection,
                 AssignmentSection>
        section;
    SimulationSpec simulation;
    VerifySpec verify;

    const char* section_name() const {
        switch (section.index()) {
            case 0: return "auction";
            case 1: return "bundled";
            case 2: return "tsvcg";
            default: return "assignment";
        }
    }
};

namespace detail {

using nlohmann::json;

inline void expect_object(const json& j, const std::string& ctx) {
    if (!j.is_object()) throw ParseError(ctx + ": expected an object");
}

inline void expect_keys(const json& j, const std::string& ctx,
                        std::initializer_list<const char*> allowed) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* k : allowed) {
            if (it.key() == k) {
                known = true;
                break;
            }
        }
        if (!known) {
            throw ParseError(ctx + ": unknown key \"" + it.key() + "\"");
        }
    }
}

inline const json& require_key(const json& j, const char* key,
                               const std::string& ctx) {
    const auto it = j.find(key);
    if (it == j.end()) {
        throw ParseError(ctx + ": missing key \"" + key + "\"");
    }
    return *it;
}

inline double get_number(const json& j, const char* key,
                         const std::string& ctx) {
    const json& v = require_key(j, key, ctx);
    if (!v.is_number()) {
        throw ParseError(ctx + ": \"" + key + "\" must be a number");
    }
    return v.get<double>();
}

inline long long get_integer(const json& j, const char* key,
                             const std::string& ctx) {
    const json& v = require_key(j, key, ctx);
    if (!v.is_number_integer()) {
        throw ParseError(ctx + ": \"" + key + "\" must be an integer");
    }
    return v.get<long long>();
}

inline std::string get_string(const json& j, const char* key,
                              const std::string& ctx) {
    const json& v = require_key(j, key, ctx);
    if (!v.is_string()) {
        throw ParseError(ctx + ": \"" + key + "\" must be a string");
    }
    return v.get<std::string>();
}

// Entry ids ("player_id", "gen_id", "tso_id") are optional; absent ids
// default to the 1-based position in their list.
inline int entry_id(const json& j, const char* key, int position,
                    const std::string& ctx) {
    if (!j.contains(key)) return position + 1;
    return static_cast<int>(get_integer(j, key, ctx));
}

inline std::vector<CdfKnot> parse_cdf_knots(const json& v,
                                            const std::string& ctx) {
    if (!v.is_array()) throw ParseError(ctx + ": \"knots\" must be an array");
    std::vector<CdfKnot> knots;
    for (const auto& k : v) {
        if (!k.is_array() || k.size() != 2 || !k[0].is_number() ||
            !k[1].is_number()) {
            throw ParseError(ctx + ": each knot must be [x, F]");
        }
        knots.push_back({k[0].get<double>(), k[1].get<double>()});
    }
    return knots;
}

// Capacity law on [0, 1] from a flat object: {"family": ..., params...}.
// `extra` names sibling keys (entry ids and such) that may coexist.
inline GenDistribution parse_law(const json& j, const std::string& ctx,
                                 std::initializer_list<const char*> extra = {}) {
    expect_object(j, ctx);
    const std::string family = get_string(j, "family", ctx);
    std::vector<const char*> allowed(extra);
    allowed.push_back("family");
    const auto check = [&](std::initializer_list<const char*> params) {
        auto all = allowed;
        all.insert(all.end(), params.begin(), params.end());
        for (auto it = j.begin(); it != j.end(); ++it) {
            bool known = false;
            for (const char* k : all) {
                if (it.key() == k) known = true;
            }
            if (!known) {
                throw ParseError(ctx + ": unknown key \"" + it.key() + "\"");
            }
        }
    };
    if (family == "uniform") {
        check({"a", "b"});
        return GenDistribution::uniform(get_number(j, "a", ctx),
                                        get_number(j, "b", ctx));
    }
    if (family == "beta") {
        check({"alpha", "beta"});
        return GenDistribution::beta(get_number(j, "alpha", ctx),
                                     get_number(j, "beta", ctx));
    }
    if (family == "point_mass") {
        check({"c"});
        return GenDistribution::point_mass(get_number(j, "c", ctx));
    }
    if (family == "piecewise_linear_cdf") {
        check({"knots"});
        return GenDistribution::piecewise_linear_cdf(
            parse_cdf_knots(require_key(j, "knots", ctx), ctx));
    }
    throw ParseError(ctx + ": unknown family \"" + family + "\"");
}

inline json law_to_json(const GenDistribution& d) {
    json j;
    return std::visit(
        [](const auto& v) -> json {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, GenDistribution::Uniform>) {
                return {{"family", "uniform"}, {"a", v.lo}, {"b", v.hi}};
            } else if constexpr (std::is_same_v<T, GenDistribution::Beta>) {
                return {{"family", "beta"},
                        {"alpha", v.alpha},
                        {"beta", v.beta}};
            } else if constexpr (std::is_same_v<T,
                                                GenDistribution::PointMass>) {
                return {{"family", "point_mass"}, {"c", v.c}};
            } else {
                json knots = json::array();
                for (const auto& k : v.knots) {
                    knots.push_back(json::array({k.x, k.F}));
                }
                return {{"family", "piecewise_linear_cdf"}, {"knots", knots}};
            }
        },
        d.value());
}

// Demand laws are written in natural units: parameters describe Z itself
// and an optional "z_max" pins the support scale.  When "z_max" is absent
// it defaults to the natural support maximum (uniform: b; point_mass: c,
// or 1 when c = 0; piecewise knots: the last x; beta: 1).
inline DemandLaw parse_demand(const json& j, const std::string& ctx) {
    expect_object(j, ctx);
    const std::string family = get_string(j, "family", ctx);
    const bool has_z = j.contains("z_max");
    const double z_explicit = has_z ? get_number(j, "z_max", ctx) : 0.0;
    if (family == "uniform") {
        expect_keys(j, ctx, {"family", "a", "b", "z_max"});
        const double a = get_number(j, "a", ctx);
        const double b = get_number(j, "b", ctx);
        const double z = has_z ? z_explicit : b;
        return DemandLaw::scaled(GenDistribution::uniform(a / z, b / z), z);
    }
    if (family == "beta") {
        expect_keys(j, ctx, {"family", "alpha", "beta", "z_max"});
        const double z = has_z ? z_explicit : 1.0;
        return DemandLaw::scaled(
            GenDistribution::beta(get_number(j, "alpha", ctx),
                                  get_number(j, "beta", ctx)),
            z);
    }
    if (family == "point_mass") {
        expect_keys(j, ctx, {"family", "c", "z_max"});
        const double c = get_number(j, "c", ctx);
        const double z = has_z ? z_explicit : (c > 0.0 ? c : 1.0);
        return DemandLaw::scaled(GenDistribution::point_mass(c / z), z);
    }
    if (family == "piecewise_linear_cdf") {
        expect_keys(j, ctx, {"family", "knots", "z_max"});
        auto knots = parse_cdf_knots(require_key(j, "knots", ctx), ctx);
        if (knots.empty()) throw ParseError(ctx + ": empty knot list");
        const double z = has_z ? z_explicit : knots.back().x;
        if (!(z > 0.0)) {
            throw InvalidDistribution("demand scale z_max must be > 0");
        }
        for (auto& k : knots) k.x /= z;
        return DemandLaw::scaled(
            GenDistribution::piecewise_linear_cdf(std::move(knots)), z);
    }
    throw ParseError(ctx + ": unknown family \"" + family + "\"");
}

inline ObjectiveFn parse_objective(const json& j, const std::string& ctx) {
    expect_object(j, ctx);
    const std::string kind = get_string(j, "kind", ctx);
    if (kind == "identity") {
        expect_keys(j, ctx, {"kind"});
        return ObjectiveFn::identity();
    }
    if (kind == "capped_demand") {
        expect_keys(j, ctx, {"kind", "D"});
        return ObjectiveFn::capped_demand(get_number(j, "D", ctx));
    }
    if (kind == "monomial") {
        expect_keys(j, ctx, {"kind", "degree"});
        return ObjectiveFn::monomial(
            static_cast<int>(get_integer(j, "degree", ctx)));
    }
    if (kind == "piecewise_linear") {
        expect_keys(j, ctx, {"kind", "knots"});
        const json& v = require_key(j, "knots", ctx);
        if (!v.is_array()) {
            throw ParseError(ctx + ": \"knots\" must be an array");
        }
        std::vector<ObjectiveKnot> knots;
        for (const auto& k : v) {
            if (!k.is_array() || k.size() != 2 || !k[0].is_number() ||
                !k[1].is_number()) {
                throw ParseError(ctx + ": each knot must be [x, y]");
            }
            knots.push_back({k[0].get<double>(), k[1].get<double>()});
        }
        return ObjectiveFn::piecewise_linear(std::move(knots));
    }
    if (kind == "affine_clip") {
        expect_keys(j, ctx, {"kind", "intercept", "slope"});
        return ObjectiveFn::affine_clip(get_number(j, "intercept", ctx),
                                        get_number(j, "slope", ctx));
    }
    throw ParseError(ctx + ": unknown objective kind \"" + kind + "\"");
}

inline json objective_to_json(const ObjectiveFn& h) {
    return std::visit(
        [](const auto& v) -> json {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, ObjectiveFn::Identity>) {
                return {{"kind", "identity"}};
            } else if constexpr (std::is_same_v<T,
                                                ObjectiveFn::CappedDemand>) {
                return {{"kind", "capped_demand"}, {"D", v.cap}};
            } else if constexpr (std::is_same_v<T, ObjectiveFn::Monomial>) {
                return {{"kind", "monomial"}, {"degree", v.degree}};
            } else if constexpr (std::is_same_v<T,
                                                ObjectiveFn::PiecewiseLinear>) {
                json knots = json::array();
                for (const auto& k : v.knots) {
                    knots.push_back(json::array({k.x, k.y}));
                }
                return {{"kind", "piecewise_linear"}, {"knots", knots}};
            } else {
                return {{"kind", "affine_clip"},
                        {"intercept", v.intercept},
                        {"slope", v.slope}};
            }
        },
        h.value());
}

inline MultiObjectiveFn parse_multi_objective(const json& j,
                                              const std::string& ctx) {
    expect_object(j, ctx);
    const std::string kind = get_string(j, "kind", ctx);
    if (kind == "min") {
        expect_keys(j, ctx, {"kind"});
        return MultiObjectiveFn::min_of_all();
    }
    if (kind == "product") {
        expect_keys(j, ctx, {"kind"});
        return MultiObjectiveFn::product_form();
    }
    if (kind == "weighted_sum") {
        expect_keys(j, ctx, {"kind", "weights"});
        const json& v = require_key(j, "weights", ctx);
        if (!v.is_array()) {
            throw ParseError(ctx + ": \"weights\" must be an array");
        }
        std::vector<double> weights;
        for (const auto& w : v) {
            if (!w.is_number()) {
                throw ParseError(ctx + ": weights must be numbers");
            }
            weights.push_back(w.get<double>());
        }
        return MultiObjectiveFn::weighted_sum(std::move(weights));
    }
    throw ParseError(ctx + ": unknown objective kind \"" + kind + "\"");
}

inline json multi_objective_to_json(const MultiObjectiveFn& h) {
    return std::visit(
        [](const auto& v) -> json {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, MultiObjectiveFn::MinOfAll>) {
                return {{"kind", "min"}};
            } else if constexpr (std::is_same_v<T,
                                                MultiObjectiveFn::WeightedSum>) {
                return {{"kind", "weighted_sum"}, {"weights", v.weights}};
            } else {
                return {{"kind", "product"}};
            }
        },
        h.value());
}

inline TsoCost parse_tso_cost(const json& j, int position,
                              const std::string& ctx) {
    expect_object(j, ctx);
    const std::string kind = get_string(j, "kind", ctx);
    const int id = entry_id(j, "tso_id", position, ctx);
    if (kind == "affine") {
        expect_keys(j, ctx, {"kind", "tso_id", "gamma", "kappa"});
        return TsoCost::affine(id, get_number(j, "gamma", ctx),
                               get_number(j, "kappa", ctx));
    }
    if (kind == "quadratic") {
        expect_keys(j, ctx, {"kind", "tso_id", "gamma1", "gamma2"});
        return TsoCost::quadratic_monotone(id, get_number(j, "gamma1", ctx),
                                           get_number(j, "gamma2", ctx));
    }
    throw ParseError(ctx + ": unknown cost kind \"" + kind + "\"");
}

inline json tso_cost_to_json(const TsoCost& c) {
    json j;
    j["tso_id"] = c.tso_id();
    if (const auto* a = std::get_if<TsoCost::Affine>(&c.value())) {
        j["kind"] = "affine";
        j["gamma"] = a->gamma;
        j["kappa"] = a->kappa;
    } else {
        const auto& q = std::get<TsoCost::Quadratic>(c.value());
        j["kind"] = "quadratic";
        j["gamma1"] = q.gamma1;
        j["gamma2"] = q.gamma2;
    }
    return j;
}

inline Mechanism parse_mechanism(const std::string& name, bool bundled,
                                 const std::string& ctx) {
    if (bundled) {
        if (name == "bsvcg") return Mechanism::svcg;
        if (name == "bssp") return Mechanism::ssp;
    } else {
        if (name == "svcg") return Mechanism::svcg;
        if (name == "ssp") return Mechanism::ssp;
    }
    throw ParseError(ctx + ": unknown mechanism \"" + name + "\"");
}

inline AuctionSection parse_auction_section(const json& j) {
    const std::string ctx = "auction";
    expect_object(j, ctx);
    expect_keys(j, ctx, {"mechanism", "M", "objective", "bids",
                         "resale_price"});
    AuctionSection s;
    s.mechanism = parse_mechanism(get_string(j, "mechanism", ctx), false, ctx);
    s.winner_count =
        j.contains("M") ? static_cast<int>(get_integer(j, "M", ctx)) : 1;
    s.resale_price =
        j.contains("resale_price") ? get_number(j, "resale_price", ctx) : 1.0;
    s.objective = parse_objective(require_key(j, "objective", ctx),
                                  ctx + ".objective");
    const json& bids = require_key(j, "bids", ctx);
    if (!bids.is_array()) throw ParseError(ctx + ": \"bids\" must be an array");
    for (std::size_t i = 0; i < bids.size(); ++i) {
        const std::string bctx = ctx + ".bids[" + std::to_string(i) + "]";
        expect_object(bids[i], bctx);
        const int id =
            entry_id(bids[i], "player_id", static_cast<int>(i), bctx);
        s.bids.push_back({id, parse_law(bids[i], bctx, {"player_id"})});
    }
    return s;
}

inline BundledSection parse_bundled_section(const json& j) {
    const std::string ctx = "bundled";
    expect_object(j, ctx);
    expect_keys(j, ctx, {"mechanism", "objective", "links"});
    BundledSection s;
    // "mechanism" is our addition to the section (default bsvcg); the
    // bundled rule is otherwise ambiguous between the two payment schemes.
    s.mechanism =
        j.contains("mechanism")
            ? parse_mechanism(get_string(j, "mechanism", ctx), true, ctx)
            : Mechanism::svcg;
    s.scenario.objective = parse_multi_objective(
        require_key(j, "objective", ctx), ctx + ".objective");
    const json& links = require_key(j, "links", ctx);
    if (!links.is_array()) {
        throw ParseError(ctx + ": \"links\" must be an array");
    }
    for (std::size_t l = 0; l < links.size(); ++l) {
        const std::string lctx = ctx + ".links[" + std::to_string(l) + "]";
        if (!links[l].is_array()) {
            throw ParseError(lctx + ": expected an array of bids");
        }
        std::vector<BundledBid> link;
        for (std::size_t i = 0; i < links[l].size(); ++i) {
            const std::string bctx = lctx + "[" + std::to_string(i) + "]";
            expect_object(links[l][i], bctx);
            const int id =
                entry_id(links[l][i], "player_id", static_cast<int>(i), bctx);
            link.push_back(
                {id, parse_law(links[l][i], bctx, {"player_id"})});
        }
        s.scenario.links.push_back(std::move(link));
    }
    return s;
}

inline TsvcgSection parse_tsvcg_section(const json& j) {
    const std::string ctx = "tsvcg";
    expect_object(j, ctx);
    expect_keys(j, ctx, {"gens", "tsos", "access"});
    TsvcgSection s;
    const json& gens = require_key(j, "gens", ctx);
    if (!gens.is_array()) throw ParseError(ctx + ": \"gens\" must be an array");
    for (std::size_t i = 0; i < gens.size(); ++i) {
        const std::string gctx = ctx + ".gens[" + std::to_string(i) + "]";
        expect_object(gens[i], gctx);
        const int id = entry_id(gens[i], "gen_id", static_cast<int>(i), gctx);
        s.gens.push_back({id, parse_law(gens[i], gctx, {"gen_id"})});
    }
    const json& tsos = require_key(j, "tsos", ctx);
    if (!tsos.is_array()) throw ParseError(ctx + ": \"tsos\" must be an array");
    for (std::size_t i = 0; i < tsos.size(); ++i) {
        const std::string tctx = ctx + ".tsos[" + std::to_string(i) + "]";
        s.tsos.push_back(
            parse_tso_cost(tsos[i], static_cast<int>(i), tctx));
    }
    if (j.contains("access")) {
        const json& rows = j["access"];
        if (!rows.is_array()) {
            throw ParseError(ctx + ": \"access\" must be an array of arrays");
        }
        AccessMatrix m;
        for (const auto& row : rows) {
            if (!row.is_array()) {
                throw ParseError(ctx +
                                 ": \"access\" must be an array of arrays");
            }
            std::vector<bool> r;
            for (const auto& cell : row) {
                if (!cell.is_boolean()) {
                    throw ParseError(ctx + ": access cells must be booleans");
                }
                r.push_back(cell.get<bool>());
            }
            m.push_back(std::move(r));
        }
        s.access = std::move(m);
    }
    return s;
}

inline AssignmentSection parse_assignment_section(const json& j) {
    const std::string ctx = "assignment";
    expect_object(j, ctx);
    expect_keys(j, ctx, {"lambda", "demand", "players", "mode", "bids"});
    AssignmentSection s;
    const std::string mode = get_string(j, "mode", ctx);
    if (mode == "vcg") {
        s.mode = AssignmentSection::Mode::vcg;
    } else if (mode == "ivcg") {
        s.mode = AssignmentSection::Mode::ivcg;
    } else {
        throw ParseError(ctx + ": unknown mode \"" + mode + "\"");
    }
    s.spot_price = get_number(j, "lambda", ctx);
    const json& demand = require_key(j, "demand", ctx);
    s.demand = parse_demand(demand, ctx + ".demand");
    s.demand_source = demand;
    const json& players = require_key(j, "players", ctx);
    if (!players.is_array()) {
        throw ParseError(ctx + ": \"players\" must be an array");
    }
    for (std::size_t i = 0; i < players.size(); ++i) {
        const std::string pctx = ctx + ".players[" + std::to_string(i) + "]";
        expect_object(players[i], pctx);
        const int id =
            entry_id(players[i], "player_id", static_cast<int>(i), pctx);
        s.players.push_back({id, parse_law(players[i], pctx, {"player_id"})});
    }
    if (j.contains("bids")) {
        if (s.mode != AssignmentSection::Mode::ivcg) {
            throw ParseError(ctx + ": \"bids\" only applies to mode ivcg");
        }
        const json& bids = j["bids"];
        if (!bids.is_array()) {
            throw ParseError(ctx + ": \"bids\" must be an array");
        }
        std::vector<TwoDimBid> out;
        for (std::size_t i = 0; i < bids.size(); ++i) {
            const std::string bctx = ctx + ".bids[" + std::to_string(i) + "]";
            expect_object(bids[i], bctx);
            expect_keys(bids[i], bctx,
                        {"player_id", "ask_price", "max_quantity"});
            const int id =
                entry_id(bids[i], "player_id", static_cast<int>(i), bctx);
            out.push_back({id, get_number(bids[i], "ask_price", bctx),
                           get_number(bids[i], "max_quantity", bctx)});
        }
        s.bids = std::move(out);
    }
    return s;
}

}  // namespace detail

inline Scenario parse_scenario_json(const nlohmann::json& j) {
    using detail::expect_keys;
    using detail::get_integer;
    using detail::require_key;
    detail::expect_object(j, "scenario");
    expect_keys(j, "scenario",
                {"schema_version", "auction", "bundled", "tsvcg",
                 "assignment", "simulation", "verify"});
    Scenario s;
    s.schema_version =
        static_cast<int>(get_integer(j, "schema_version", "scenario"));
    if (s.schema_version != 1) {
        throw ParseError("scenario: unsupported schema_version " +
                         std::to_string(s.schema_version));
    }
    int sections = 0;
    if (j.contains("auction")) {
        s.section = detail::parse_auction_section(j["auction"]);
        ++sections;
    }
    if (j.contains("bundled")) {
        s.section = detail::parse_bundled_section(j["bundled"]);
        ++sections;
    }
    if (j.contains("tsvcg")) {
        s.section = detail::parse_tsvcg_section(j["tsvcg"]);
        ++sections;
    }
    if (j.contains("assignment")) {
        s.section = detail::parse_assignment_section(j["assignment"]);
        ++sections;
    }
    if (sections != 1) {
        throw ParseError(
            "scenario: exactly one mechanism section required, found " +
            std::to_string(sections));
    }
    if (j.contains("simulation")) {
        const nlohmann::json& sim = j["simulation"];
        detail::expect_object(sim, "simulation");
        expect_keys(sim, "simulation", {"trials", "seed"});
        if (sim.contains("trials")) {
            const long long t = get_integer(sim, "trials", "simulation");
            if (t < 0) throw ParseError("simulation: trials must be >= 0");
            s.simulation.trials = t;
        }
        if (sim.contains("seed")) {
            const nlohmann::json& v = sim["seed"];
            if (!v.is_number_unsigned()) {
                throw ParseError(
                    "simulation: \"seed\" must be a nonnegative integer");
            }
            s.simulation.seed = v.get<std::uint64_t>();
        }
        if (s.simulation.trials > 0 && !s.simulation.seed) {
            throw ParseError("simulation: seed is mandatory when trials > 0");
        }
    }
    if (j.contains("verify")) {
        const nlohmann::json& v = j["verify"];
        detail::expect_object(v, "verify");
        expect_keys(v, "verify", {"tolerance", "grid_points"});
        if (v.contains("tolerance")) {
            s.verify.tolerance = detail::get_number(v, "tolerance", "verify");
        }
        if (v.contains("grid_points")) {
            const long long g = get_integer(v, "grid_points", "verify");
            if (g < 2) throw ParseError("verify: grid_points must be >= 2");
            s.verify.grid_points = static_cast<int>(g);
        }
    }
    return s;
}

inline Scenario parse_scenario_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("scenario is not valid JSON: ") +
                         e.what());
    }
    return parse_scenario_json(j);
}

inline nlohmann::json scenario_to_json(const Scenario& s) {
    using detail::json;
    json j;
    j["schema_version"] = s.schema_version;
    if (const auto* a = std::get_if<AuctionSection>(&s.section)) {
        json sec;
        sec["mechanism"] = mechanism_name(a->mechanism);
        sec["M"] = a->winner_count;
        sec["resale_price"] = a->resale_price;
        sec["objective"] = detail::objective_to_json(a->objective);
        json bids = json::array();
        for (const auto& b : a->bids) {
            json e = detail::law_to_json(b.reported_type);
            e["player_id"] = b.player_id;
            bids.push_back(std::move(e));
        }
        sec["bids"] = std::move(bids);
        j["auction"] = std::move(sec);
    } else if (const auto* b = std::get_if<BundledSection>(&s.section)) {
        json sec;
        sec["mechanism"] = b->mechanism == Mechanism::svcg ? "bsvcg" : "bssp";
        sec["objective"] = detail::multi_objective_to_json(b->scenario.objective);
        json links = json::array();
        for (const auto& link : b->scenario.links) {
            json arr = json::array();
            for (const auto& bid : link) {
                json e = detail::law_to_json(bid.reported_type);
                e["player_id"] = bid.player_id;
                arr.push_back(std::move(e));
            }
            links.push_back(std::move(arr));
        }
        sec["links"] = std::move(links);
        j["bundled"] = std::move(sec);
    } else if (const auto* t = std::get_if<TsvcgSection>(&s.section)) {
        json sec;
        json gens = json::array();
        for (const auto& g : t->gens) {
            json e = detail::law_to_json(g.reported_type);
            e["gen_id"] = g.gen_id;
            gens.push_back(std::move(e));
        }
        sec["gens"] = std::move(gens);
        json tsos = json::array();
        for (const auto& c : t->tsos) tsos.push_back(detail::tso_cost_to_json(c));
        sec["tsos"] = std::move(tsos);
        if (t->access) {
            json rows = json::array();
            for (const auto& row : *t->access) {
                json r = json::array();
                for (bool cell : row) r.push_back(cell);
                rows.push_back(std::move(r));
            }
            sec["access"] = std::move(rows);
        }
        j["tsvcg"] = std::move(sec);
    } else {
        const auto& as = std::get<AssignmentSection>(s.section);
        json sec;
        sec["mode"] =
            as.mode == AssignmentSection::Mode::vcg ? "vcg" : "ivcg";
        sec["lambda"] = as.spot_price;
        sec["demand"] = as.demand_source;
        json players = json::array();
        for (const auto& p : as.players) {
            json e = detail::law_to_json(p.type);
            e["player_id"] = p.player_id;
            players.push_back(std::move(e));
        }
        sec["players"] = std::move(players);
        if (as.bids) {
            json bids = json::array();
            for (const auto& b : *as.bids) {
                bids.push_back({{"player_id", b.player_id},
                                {"ask_price", b.ask_price},
                                {"max_quantity", b.max_quantity}});
            }
            sec["bids"] = std::move(bids);
        }
        j["assignment"] = std::move(sec);
    }
    if (s.simulation.trials > 0 || s.simulation.seed) {
        json sim;
        sim["trials"] = s.simulation.trials;
        if (s.simulation.seed) sim["seed"] = *s.simulation.seed;
        j["simulation"] = std::move(sim);
    }
    if (s.verify.tolerance || s.verify.grid_points) {
        json v;
        if (s.verify.tolerance) v["tolerance"] = *s.verify.tolerance;
        if (s.verify.grid_points) v["grid_points"] = *s.verify.grid_points;
        j["verify"] = std::move(v);
    }
    return j;
}

inline std::string serialize_scenario(const Scenario& s) {
    return scenario_to_json(s).dump(2) + "\n";
}

}  // namespace auctionlab
