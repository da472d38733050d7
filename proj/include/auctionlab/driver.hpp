#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "auctionlab/equilibrium_lab.hpp"
#include "auctionlab/report.hpp"
#include "auctionlab/scenario.hpp"

// Executes one parsed scenario for one subcommand and renders the report.
// Everything here is deterministic: sampling is keyed by (seed, trial),
// sweeps reduce in caller order, and every float is rendered by fmt_num,
// so identical (scenario, seed) invocations produce byte-identical text.

namespace auctionlab {

enum class CliCommand { run, settle, verify, revenue };

inline const char* cli_command_name(CliCommand c) {
    switch (c) {
        case CliCommand::run: return "run";
        case CliCommand::settle: return "settle";
        case CliCommand::verify: return "verify";
        default: return "revenue";
    }
}

struct CliOptions {
    std::optional<std::uint64_t> seed;
    std::optional<std::int64_t> trials;
    std::optional<double> tolerance;
};

struct CliResult {
    int exit_code;
    std::string report;
};

namespace detail {

inline std::uint64_t need_seed(const Scenario& s, const CliOptions& opt,
                               const char* cmd) {
    if (opt.seed) return *opt.seed;
    if (s.simulation.seed) return *s.simulation.seed;
    throw SpecError(std::string(cmd) +
                    " needs a seed: pass --seed or set simulation.seed");
}

inline std::int64_t effective_trials(const Scenario& s, const CliOptions& opt,
                                     std::int64_t fallback) {
    std::int64_t t = opt.trials ? *opt.trials
                     : s.simulation.trials > 0 ? s.simulation.trials
                                               : fallback;
    if (t < 1) throw SpecError("trials must be >= 1");
    return t;
}

inline double effective_tolerance(const Scenario& s, const CliOptions& opt) {
    if (opt.tolerance) return *opt.tolerance;
    if (s.verify.tolerance) return *s.verify.tolerance;
    return 1e-7;
}

inline std::string join_ints(std::span<const int> xs) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) out += ' ';
        out += std::to_string(xs[i]);
    }
    return out;
}

// Mixed candidate grid spanning all closed-form families; `g` scales the
// point-mass axis and the other families shrink with it.
inline std::vector<GenDistribution> mixed_law_grid(int g) {
    auto grid = point_mass_grid(g);
    const auto uni = uniform_family_grid(std::max(2, g / 3));
    const auto bet = beta_family_grid(std::max(2, g / 4));
    grid.insert(grid.end(), uni.begin(), uni.end());
    grid.insert(grid.end(), bet.begin(), bet.end());
    return grid;
}

inline std::string mixed_grid_spec(int g) {
    return "pm" + std::to_string(g) + "+uni" +
           std::to_string(std::max(2, g / 3)) + "+beta" +
           std::to_string(std::max(2, g / 4));
}

class VerifyLog {
public:
    explicit VerifyLog(Report& r) : r_(r) {}

    void check(const std::string& name, const std::string& fields,
               bool pass) {
        std::string line = "check " + name;
        if (!fields.empty()) line += " " + fields;
        line += pass ? " PASS" : " FAIL";
        r_.raw(line);
        all_ &= pass;
    }

    void skip(const std::string& name, const std::string& why) {
        r_.raw("check " + name + " SKIP " + why);
    }

    // Deviation-search convenience: passes when the best candidate beats
    // the baseline by at most `bound`.
    void gain(const std::string& name, const DeviationReport& d,
              double bound) {
        check(name,
              "gain " + fmt_num(d.gain) + " bound " + fmt_num(bound) +
                  " grid " + d.grid_spec,
              d.gain <= bound);
    }

    bool all_pass() const { return all_; }

    int finish() {
        r_.kv("verdict", all_ ? "PASS" : "FAIL");
        return all_ ? 0 : 4;
    }

private:
    Report& r_;
    bool all_ = true;
};

// ---- auction section -------------------------------------------------------

inline Contract run_auction(const AuctionSection& a) {
    return a.mechanism == Mechanism::svcg
               ? run_svcg(a.bids, a.objective, a.winner_count)
               : run_ssp(a.bids, a.objective, a.winner_count);
}

inline const GenDistribution& law_of(const AuctionSection& a, int id) {
    for (const auto& b : a.bids) {
        if (b.player_id == id) return b.reported_type;
    }
    throw SpecError("no bid for player " + std::to_string(id));
}

inline void describe_auction_contract(Report& r, const AuctionSection& a,
                                      const Contract& c) {
    r.kv("mechanism", mechanism_name(a.mechanism));
    r.kv("winner_count", a.winner_count);
    r.kv("objective", a.objective.kind_name());
    r.kv("participants", join_ints(c.participants));
    for (int id : c.participants) {
        r.raw("player " + std::to_string(id) + " expected_value " +
              fmt_num(expect(law_of(a, id), a.objective)));
    }
    r.kv("winners", join_ints(c.winners));
    r.kv("marginal_loser", c.marginal_loser);
    r.kv("reference_value", c.reference_value);
    r.kv("pre_payment", c.pre_payment);
    if (c.penalty_price) r.kv("penalty_price", *c.penalty_price);
    std::string summary = std::string(mechanism_name(a.mechanism)) +
                          " awards " + std::to_string(a.winner_count) +
                          " contract(s); winner(s) " + join_ints(c.winners) +
                          " receive " + fmt_num(c.pre_payment) +
                          " at contract time";
    if (c.penalty_price) {
        summary += "; penalty multiplier lambda = " + fmt_num(*c.penalty_price);
    }
    r.kv("summary", summary);
}

inline int cmd_auction_run(Report& r, const AuctionSection& a) {
    describe_auction_contract(r, a, run_auction(a));
    return 0;
}

inline int cmd_auction_settle(Report& r, const Scenario& s,
                              const AuctionSection& a, const CliOptions& opt) {
    const Contract c = run_auction(a);
    const std::uint64_t seed = need_seed(s, opt, "settle");
    const std::int64_t trials = effective_trials(s, opt, 1);
    r.kv("mechanism", mechanism_name(a.mechanism));
    r.kv("trials", static_cast<long long>(trials));
    r.kv("seed", static_cast<unsigned long long>(seed));
    std::map<int, double> mean_payoff;
    for (std::int64_t t = 0; t < trials; ++t) {
        Rng rng = Rng::for_trial(seed, static_cast<std::uint64_t>(t));
        std::map<int, double> xs;
        for (int id : c.participants) xs[id] = law_of(a, id).sample(rng);
        for (const auto& row : settle(c, xs)) {
            r.raw("trial " + std::to_string(t) + " player " +
                  std::to_string(row.player_id) + " x " +
                  fmt_num(row.realization) + " pre " +
                  fmt_num(row.pre_payment) + " post " +
                  fmt_num(row.post_payment) + " payoff " +
                  fmt_num(row.payoff));
            mean_payoff[row.player_id] += row.payoff;
        }
    }
    for (const auto& [id, sum] : mean_payoff) {
        r.raw("player " + std::to_string(id) + " mean_payoff " +
              fmt_num(sum / static_cast<double>(trials)));
    }
    r.kv("summary", "settled " + std::to_string(trials) + " trial(s) for " +
                        std::to_string(c.participants.size()) + " player(s)");
    return 0;
}

inline int cmd_auction_verify(Report& r, const Scenario& s,
                              const AuctionSection& a, const CliOptions& opt) {
    const double tol = effective_tolerance(s, opt);
    const int g = s.verify.grid_points.value_or(21);
    const auto grid = mixed_law_grid(g);
    const std::string spec = mixed_grid_spec(g);
    r.kv("tolerance", tol);
    r.kv("grid", spec);
    VerifyLog log(r);
    const Contract c = run_auction(a);
    for (const auto& b : a.bids) {
        const auto d = deviation_gain_single(a.mechanism, a.bids, a.objective,
                                             b.player_id, b.reported_type,
                                             grid, spec, a.winner_count);
        log.gain("truthful_best_response player " +
                     std::to_string(b.player_id),
                 d, tol);
    }
    if (c.penalty_price) {
        log.check("penalty_multiplier_floor",
                  "lambda " + fmt_num(*c.penalty_price) + " bound 1",
                  *c.penalty_price >= 1.0);
    }
    try {
        const double rev_svcg = expected_revenue(
            Mechanism::svcg, a.bids, a.objective, a.resale_price,
            a.winner_count);
        const double rev_ssp = expected_revenue(
            Mechanism::ssp, a.bids, a.objective, a.resale_price,
            a.winner_count);
        log.check("revenue_ordering",
                  "svcg " + fmt_num(rev_svcg) + " ssp " + fmt_num(rev_ssp),
                  rev_svcg >= rev_ssp - 1e-9);
    } catch (const AuctionError& e) {
        log.skip("revenue_ordering", e.name());
    }
    return log.finish();
}

inline int cmd_auction_revenue(Report& r, const Scenario& s,
                               const AuctionSection& a,
                               const CliOptions& opt) {
    const std::uint64_t seed = need_seed(s, opt, "revenue");
    const std::int64_t trials = effective_trials(s, opt, 100000);
    const double closed = expected_revenue(a.mechanism, a.bids, a.objective,
                                           a.resale_price, a.winner_count);
    const auto mc = mc_revenue(a.mechanism, a.bids, a.objective,
                               a.resale_price, a.winner_count, trials, seed);
    r.kv("mechanism", mechanism_name(a.mechanism));
    r.kv("resale_price", a.resale_price);
    r.kv("closed_form", closed);
    r.kv("trials", static_cast<long long>(mc.trials));
    r.kv("seed", static_cast<unsigned long long>(seed));
    r.kv("mc_estimate", mc.estimate);
    r.kv("mc_std_error", mc.std_error);
    r.kv("abs_error", std::fabs(mc.estimate - closed));
    r.kv("summary", "closed-form revenue " + fmt_num(closed) +
                        "; monte-carlo " + fmt_num(mc.estimate) + " (se " +
                        fmt_num(mc.std_error) + ") over " +
                        std::to_string(mc.trials) + " trial(s)");
    return 0;
}

// ---- bundled section -------------------------------------------------------

inline const char* bundled_name(Mechanism m) {
    return m == Mechanism::svcg ? "bsvcg" : "bssp";
}

inline BundledContract run_bundled(const BundledSection& b) {
    return b.mechanism == Mechanism::svcg ? run_bsvcg(b.scenario)
                                          : run_bssp(b.scenario);
}

inline const GenDistribution& bundled_law_of(const BundledSection& b, int link,
                                             int id) {
    for (const auto& bid : b.scenario.links[static_cast<std::size_t>(link)]) {
        if (bid.player_id == id) return bid.reported_type;
    }
    throw SpecError("no bid for player " + std::to_string(id) + " on link " +
                    std::to_string(link));
}

inline int cmd_bundled_run(Report& r, const BundledSection& b) {
    const BundledContract c = run_bundled(b);
    r.kv("mechanism", bundled_name(b.mechanism));
    r.kv("links", static_cast<long long>(b.scenario.links.size()));
    r.kv("objective", b.scenario.objective.kind_name());
    r.kv("winners", join_ints(c.winners));
    r.kv("welfare", c.welfare);
    for (const auto& aw : c.awards) {
        std::string line = "award link " + std::to_string(aw.link) +
                           " player " + std::to_string(aw.player_id) +
                           " pre_payment " + fmt_num(aw.pre_payment) +
                           " marginal_welfare " + fmt_num(aw.marginal_welfare);
        if (aw.penalty_price) {
            line += " penalty_price " + fmt_num(*aw.penalty_price);
        }
        r.raw(line);
    }
    std::string summary = std::string(bundled_name(b.mechanism)) +
                          " contracts winners " + join_ints(c.winners) +
                          " at joint expected welfare " + fmt_num(c.welfare);
    if (b.mechanism == Mechanism::ssp && !c.awards.empty()) {
        summary += "; penalty multiplier lambda = " +
                   fmt_num(*c.awards.front().penalty_price);
    }
    r.kv("summary", summary);
    return 0;
}

inline int cmd_bundled_settle(Report& r, const Scenario& s,
                              const BundledSection& b,
                              const CliOptions& opt) {
    const BundledContract c = run_bundled(b);
    const std::uint64_t seed = need_seed(s, opt, "settle");
    const std::int64_t trials = effective_trials(s, opt, 1);
    r.kv("mechanism", bundled_name(b.mechanism));
    r.kv("trials", static_cast<long long>(trials));
    r.kv("seed", static_cast<unsigned long long>(seed));
    std::map<std::pair<int, int>, double> mean_payoff;
    for (std::int64_t t = 0; t < trials; ++t) {
        Rng rng = Rng::for_trial(seed, static_cast<std::uint64_t>(t));
        std::map<std::pair<int, int>, double> xs;
        for (const auto& [link, id] : c.participants) {
            xs[{link, id}] = bundled_law_of(b, link, id).sample(rng);
        }
        for (const auto& row : settle_bundled(c, xs)) {
            r.raw("trial " + std::to_string(t) + " link " +
                  std::to_string(row.link) + " player " +
                  std::to_string(row.player_id) + " x " +
                  fmt_num(row.realization) + " pre " +
                  fmt_num(row.pre_payment) + " post " +
                  fmt_num(row.post_payment) + " payoff " +
                  fmt_num(row.payoff));
            mean_payoff[{row.link, row.player_id}] += row.payoff;
        }
    }
    for (const auto& [key, sum] : mean_payoff) {
        r.raw("link " + std::to_string(key.first) + " player " +
              std::to_string(key.second) + " mean_payoff " +
              fmt_num(sum / static_cast<double>(trials)));
    }
    r.kv("summary", "settled " + std::to_string(trials) + " trial(s) over " +
                        std::to_string(b.scenario.links.size()) + " link(s)");
    return 0;
}

inline int cmd_bundled_verify(Report& r, const Scenario& s,
                              const BundledSection& b, const CliOptions& opt) {
    const double tol = effective_tolerance(s, opt);
    const int g = s.verify.grid_points.value_or(9);
    const auto grid = mixed_law_grid(g);
    const std::string spec = mixed_grid_spec(g);
    r.kv("tolerance", tol);
    r.kv("grid", spec);
    VerifyLog log(r);
    const BundledContract c = run_bundled(b);
    for (std::size_t l = 0; l < b.scenario.links.size(); ++l) {
        for (const auto& bid : b.scenario.links[l]) {
            const auto d = deviation_gain_bundled(
                b.mechanism, b.scenario, static_cast<int>(l), bid.player_id,
                bid.reported_type, grid, spec);
            log.gain("truthful_best_response link " + std::to_string(l) +
                         " player " + std::to_string(bid.player_id),
                     d, tol);
        }
    }
    if (b.mechanism == Mechanism::ssp) {
        for (const auto& aw : c.awards) {
            log.check("penalty_multiplier_floor link " +
                          std::to_string(aw.link),
                      "lambda " + fmt_num(*aw.penalty_price) + " bound 1",
                      *aw.penalty_price >= 1.0);
        }
    }
    const auto brute = brute_force_welfare_argmax(b.scenario);
    log.check("welfare_argmax",
              "selected " + join_ints(c.winners) + " brute_force " +
                  join_ints(brute),
              brute == c.winners);
    return log.finish();
}

// ---- two-class section -----------------------------------------------------

inline int cmd_tsvcg_run(Report& r, const TsvcgSection& t) {
    const AccessMatrix* access = t.access ? &*t.access : nullptr;
    const TsvcgOutcome o = run_tsvcg(t.gens, t.tsos, access);
    r.kv("generators", join_ints(o.gen_ids));
    r.kv("operators", join_ints(o.tso_ids));
    r.kv("winner_gen", o.winner_gen);
    r.kv("winner_tso", o.winner_tso);
    r.kv("surplus", o.surplus);
    r.kv("s_minus_gen", o.s_minus_gen);
    r.kv("s_minus_tso", o.s_minus_tso);
    r.kv("winner_gen_mean", o.winner_gen_mean);
    r.kv("winner_cost_expectation", o.winner_cost_expectation);
    if (o.surplus < 0.0) {
        r.raw("warning: best pair has negative expected surplus");
    }
    r.kv("summary", "pair (" + std::to_string(o.winner_gen) + ", " +
                        std::to_string(o.winner_tso) +
                        ") contracts at expected net surplus " +
                        fmt_num(o.surplus));
    return 0;
}

inline int cmd_tsvcg_settle(Report& r, const Scenario& s,
                            const TsvcgSection& t, const CliOptions& opt) {
    const AccessMatrix* access = t.access ? &*t.access : nullptr;
    const TsvcgOutcome o = run_tsvcg(t.gens, t.tsos, access);
    const std::uint64_t seed = need_seed(s, opt, "settle");
    const std::int64_t trials = effective_trials(s, opt, 1);
    const GenDistribution* law = nullptr;
    for (const auto& gentry : t.gens) {
        if (gentry.gen_id == o.winner_gen) law = &gentry.reported_type;
    }
    r.kv("winner_gen", o.winner_gen);
    r.kv("winner_tso", o.winner_tso);
    r.kv("trials", static_cast<long long>(trials));
    r.kv("seed", static_cast<unsigned long long>(seed));
    double gen_sum = 0.0;
    double tso_sum = 0.0;
    for (std::int64_t k = 0; k < trials; ++k) {
        Rng rng = Rng::for_trial(seed, static_cast<std::uint64_t>(k));
        const double x = law->sample(rng);
        const auto row = settle_tsvcg(o, x);
        r.raw("trial " + std::to_string(k) + " x " + fmt_num(x) +
              " gen_payoff " + fmt_num(row.gen_payoff) + " tso_payoff " +
              fmt_num(row.tso_payoff));
        gen_sum += row.gen_payoff;
        tso_sum += row.tso_payoff;
    }
    r.kv("gen_mean_payoff", gen_sum / static_cast<double>(trials));
    r.kv("tso_mean_payoff", tso_sum / static_cast<double>(trials));
    r.kv("summary", "settled " + std::to_string(trials) +
                        " trial(s) for pair (" + std::to_string(o.winner_gen) +
                        ", " + std::to_string(o.winner_tso) + ")");
    return 0;
}

inline int cmd_tsvcg_verify(Report& r, const Scenario& s,
                            const TsvcgSection& t, const CliOptions& opt) {
    const AccessMatrix* access = t.access ? &*t.access : nullptr;
    const double tol = effective_tolerance(s, opt);
    const int g = s.verify.grid_points.value_or(21);
    const auto grid = mixed_law_grid(g);
    const std::string spec = mixed_grid_spec(g);
    r.kv("tolerance", tol);
    r.kv("grid", spec);
    VerifyLog log(r);
    const TsvcgOutcome o = run_tsvcg(t.gens, t.tsos, access);
    if (o.surplus < 0.0) {
        r.raw("warning: best pair has negative expected surplus");
    }
    for (const auto& gentry : t.gens) {
        const auto d =
            deviation_gain_tso_gen(t.gens, t.tsos, gentry.gen_id,
                                   gentry.reported_type, grid, spec, access);
        log.gain("truthful_best_response gen " +
                     std::to_string(gentry.gen_id),
                 d, tol);
    }
    for (const auto& cost : t.tsos) {
        const auto candidates = affine_cost_grid(cost.tso_id(), g);
        const auto d = deviation_gain_tso_tso(
            t.gens, t.tsos, cost.tso_id(), cost, candidates,
            "affine" + std::to_string(g), access);
        log.gain("truthful_best_response tso " +
                     std::to_string(cost.tso_id()),
                 d, tol);
    }
    return log.finish();
}

// ---- assignment section ----------------------------------------------------

inline std::vector<TwoDimBid> assignment_profile(const AssignmentSection& a,
                                                 const AssignmentProblem& p) {
    return a.bids ? *a.bids : efficient_bid_profile(p);
}

inline int cmd_assignment_run(Report& r, const AssignmentSection& a) {
    const AssignmentProblem p = a.problem();
    r.kv("mode", a.mode == AssignmentSection::Mode::vcg ? "vcg" : "ivcg");
    r.kv("lambda", p.spot_price);
    r.kv("demand_mean", p.demand.mean());
    if (a.mode == AssignmentSection::Mode::vcg) {
        const auto res = run_vcg_complete(p);
        r.kv("total", res.assignment.total);
        r.kv("multiplier", res.assignment.multiplier);
        for (std::size_t i = 0; i < p.players.size(); ++i) {
            r.raw("player " + std::to_string(p.players[i].player_id) + " y " +
                  fmt_num(res.assignment.y[i]) + " payment " +
                  fmt_num(res.payments[i]));
        }
        r.kv("summary", "welfare-optimal assignment commits " +
                            fmt_num(res.assignment.total) +
                            " unit(s) at marginal level " +
                            fmt_num(res.assignment.multiplier));
    } else {
        const auto bids = assignment_profile(a, p);
        r.kv("bids", a.bids ? "explicit" : "efficient");
        const auto res = run_ivcg(bids, p.demand, p.spot_price);
        r.kv("total", res.assignment.total);
        r.kv("multiplier", res.assignment.multiplier);
        for (std::size_t i = 0; i < bids.size(); ++i) {
            r.raw("player " + std::to_string(bids[i].player_id) + " ask " +
                  fmt_num(bids[i].ask_price) + " quantity " +
                  fmt_num(bids[i].max_quantity) + " y " +
                  fmt_num(res.assignment.y[i]) + " payment " +
                  fmt_num(res.payments[i]));
        }
        r.kv("summary", "two-part bids commit " +
                            fmt_num(res.assignment.total) +
                            " unit(s) at marginal level " +
                            fmt_num(res.assignment.multiplier));
    }
    return 0;
}

inline int cmd_assignment_settle(Report& r, const Scenario& s,
                                 const AssignmentSection& a,
                                 const CliOptions& opt) {
    const AssignmentProblem p = a.problem();
    std::vector<double> y;
    std::vector<double> payments;
    std::vector<int> ids;
    if (a.mode == AssignmentSection::Mode::vcg) {
        const auto res = run_vcg_complete(p);
        y = res.assignment.y;
        payments = res.payments;
        for (const auto& pl : p.players) ids.push_back(pl.player_id);
    } else {
        const auto bids = assignment_profile(a, p);
        const auto res = run_ivcg(bids, p.demand, p.spot_price);
        y = res.assignment.y;
        payments = res.payments;
        for (const auto& bid : bids) ids.push_back(bid.player_id);
    }
    const std::uint64_t seed = need_seed(s, opt, "settle");
    const std::int64_t trials = effective_trials(s, opt, 1);
    r.kv("mode", a.mode == AssignmentSection::Mode::vcg ? "vcg" : "ivcg");
    r.kv("trials", static_cast<long long>(trials));
    r.kv("seed", static_cast<unsigned long long>(seed));
    double committed = 0.0;
    for (double v : y) committed += v;
    // Output laws live in problem order; map committed slots back to ids.
    for (std::int64_t t = 0; t < trials; ++t) {
        Rng rng = Rng::for_trial(seed, static_cast<std::uint64_t>(t));
        for (std::size_t i = 0; i < ids.size(); ++i) {
            const GenDistribution* law = nullptr;
            for (const auto& pl : p.players) {
                if (pl.player_id == ids[i]) law = &pl.type;
            }
            const double x = law->sample(rng);
            const double charge =
                p.spot_price * std::max(0.0, y[i] - x);
            r.raw("trial " + std::to_string(t) + " player " +
                  std::to_string(ids[i]) + " x " + fmt_num(x) + " y " +
                  fmt_num(y[i]) + " charge " + fmt_num(charge) +
                  " payment " + fmt_num(payments[i]) + " payoff " +
                  fmt_num(payments[i] - charge));
        }
        const double z = p.demand.sample(rng);
        r.raw("trial " + std::to_string(t) + " aggregate z " + fmt_num(z) +
              " committed " + fmt_num(committed) + " residual_cost " +
              fmt_num(p.spot_price * std::max(0.0, z - committed)));
    }
    r.kv("summary", "settled " + std::to_string(trials) + " trial(s) for " +
                        std::to_string(ids.size()) + " player(s)");
    return 0;
}

inline int cmd_assignment_verify(Report& r, const Scenario& s,
                                 const AssignmentSection& a,
                                 const CliOptions& opt) {
    const AssignmentProblem p = a.problem();
    const double tol = effective_tolerance(s, opt);
    r.kv("tolerance", tol);
    VerifyLog log(r);
    if (a.mode == AssignmentSection::Mode::vcg) {
        const int g = s.verify.grid_points.value_or(21);
        const auto grid = mixed_law_grid(g);
        const std::string spec = mixed_grid_spec(g);
        r.kv("grid", spec);
        const auto res = run_vcg_complete(p);
        for (const auto& pl : p.players) {
            const auto d =
                deviation_gain_vcg_complete(p, pl.player_id, grid, spec);
            log.gain("truthful_best_response player " +
                         std::to_string(pl.player_id),
                     d, tol);
        }
        for (std::size_t i = 0; i < p.players.size(); ++i) {
            log.check("nonnegative_payment player " +
                          std::to_string(p.players[i].player_id),
                      "value " + fmt_num(res.payments[i]),
                      res.payments[i] >= -1e-9);
        }
    } else {
        const int g = s.verify.grid_points.value_or(20);
        std::vector<std::pair<double, double>> grid;
        for (int i = 0; i < g; ++i) {
            for (int k = 0; k < g; ++k) {
                grid.emplace_back(
                    p.spot_price * static_cast<double>(i) /
                        static_cast<double>(g - 1),
                    static_cast<double>(k) / static_cast<double>(g - 1));
            }
        }
        const std::string spec =
            "askxqty" + std::to_string(g) + "x" + std::to_string(g);
        r.kv("grid", spec);
        const auto bids = assignment_profile(a, p);
        const auto res = run_ivcg(bids, p.demand, p.spot_price);
        for (const auto& bid : bids) {
            const auto d =
                deviation_gain_ivcg(p, bids, bid.player_id, grid, spec);
            log.gain("equilibrium_best_response player " +
                         std::to_string(bid.player_id),
                     d, tol);
        }
        if (!a.bids) {
            const auto eff = solve_swo(p);
            double gap = 0.0;
            for (std::size_t i = 0; i < eff.y.size(); ++i) {
                gap = std::max(gap,
                               std::fabs(eff.y[i] - res.assignment.y[i]));
            }
            log.check("efficient_profile_reproduction",
                      "max_gap " + fmt_num(gap) + " bound 1e-09",
                      gap <= 1e-9);
        }
        for (std::size_t i = 0; i < bids.size(); ++i) {
            log.check("nonnegative_payment player " +
                          std::to_string(bids[i].player_id),
                      "value " + fmt_num(res.payments[i]),
                      res.payments[i] >= -1e-9);
        }
    }
    return log.finish();
}

}  // namespace detail

// Runs one subcommand against a parsed scenario.  Throws AuctionError for
// validation problems; verification failures are reported via exit code 4
// rather than an exception.
inline CliResult execute_scenario(const Scenario& s, CliCommand cmd,
                                  const CliOptions& opt) {
    Report r;
    r.raw("auction-lab report");
    r.kv("command", cli_command_name(cmd));
    r.kv("section", s.section_name());
    r.kv("schema_version", s.schema_version);
    int code = 0;
    if (const auto* a = std::get_if<AuctionSection>(&s.section)) {
        switch (cmd) {
            case CliCommand::run: code = detail::cmd_auction_run(r, *a); break;
            case CliCommand::settle:
                code = detail::cmd_auction_settle(r, s, *a, opt);
                break;
            case CliCommand::verify:
                code = detail::cmd_auction_verify(r, s, *a, opt);
                break;
            case CliCommand::revenue:
                code = detail::cmd_auction_revenue(r, s, *a, opt);
                break;
        }
    } else if (const auto* b = std::get_if<BundledSection>(&s.section)) {
        switch (cmd) {
            case CliCommand::run: code = detail::cmd_bundled_run(r, *b); break;
            case CliCommand::settle:
                code = detail::cmd_bundled_settle(r, s, *b, opt);
                break;
            case CliCommand::verify:
                code = detail::cmd_bundled_verify(r, s, *b, opt);
                break;
            case CliCommand::revenue:
                throw SpecError(
                    "revenue applies to the single-auction section only");
        }
    } else if (const auto* t = std::get_if<TsvcgSection>(&s.section)) {
        switch (cmd) {
            case CliCommand::run: code = detail::cmd_tsvcg_run(r, *t); break;
            case CliCommand::settle:
                code = detail::cmd_tsvcg_settle(r, s, *t, opt);
                break;
            case CliCommand::verify:
                code = detail::cmd_tsvcg_verify(r, s, *t, opt);
                break;
            case CliCommand::revenue:
                throw SpecError(
                    "revenue applies to the single-auction section only");
        }
    } else {
        const auto& as = std::get<AssignmentSection>(s.section);
        switch (cmd) {
            case CliCommand::run:
                code = detail::cmd_assignment_run(r, as);
                break;
            case CliCommand::settle:
                code = detail::cmd_assignment_settle(r, s, as, opt);
                break;
            case CliCommand::verify:
                code = detail::cmd_assignment_verify(r, s, as, opt);
                break;
            case CliCommand::revenue:
                throw SpecError(
                    "revenue applies to the single-auction section only");
        }
    }
    return {code, r.text()};
}

// File-level entry point used by the CLI binary: reads, parses, executes,
// and maps failures onto the exit-code contract (2 = malformed scenario,
// 3 = domain validation with the error's name, 4 = verification failure).
inline CliResult run_scenario_file(const std::string& path, CliCommand cmd,
                                   const CliOptions& opt) {
    const auto error_result = [&](const std::string& name,
                                  const std::string& what,
                                  int code) -> CliResult {
        Report r;
        r.raw("auction-lab report");
        r.kv("command", cli_command_name(cmd));
        r.kv("error", name);
        r.kv("detail", what);
        return {code, r.text()};
    };
    try {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw ParseError("cannot read scenario file: " + path);
        std::string text{std::istreambuf_iterator<char>(in),
                         std::istreambuf_iterator<char>()};
        const Scenario s = parse_scenario_text(text);
        return execute_scenario(s, cmd, opt);
    } catch (const ParseError& e) {
        return error_result(e.name(), e.what(), 2);
    } catch (const AuctionError& e) {
        return error_result(e.name(), e.what(), 3);
    } catch (const std::exception& e) {
        return error_result("InternalError", e.what(), 3);
    }
}

}  // namespace auctionlab
