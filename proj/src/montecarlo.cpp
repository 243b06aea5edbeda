#include "zbias/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <thread>

#include "zbias/conditions.hpp"
#include "zbias/error.hpp"
#include "zbias/estimators.hpp"
#include "zbias/scenario_io.hpp"

namespace zbias {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

// Bound on internal resampling per draw; with uniform inputs the expected
// number of attempts is below 10 for every sampler.
constexpr std::uint32_t kMaxAttempts = 1u << 16;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) noexcept {
    const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(product >> 32);
    lo = static_cast<std::uint32_t>(product);
}

enum class Sampler { Uniform, AdditiveProjection, MultiplicativeProjection };

struct Plan {
    Sampler sampler = Sampler::Uniform;
    bool need_weaker = false;
    bool need_thm1 = false;
};

Plan make_plan(const McConfig& cfg) {
    Plan plan;
    for (const std::string& id : cfg.filter) {
        if (id == "cor1") {
            if (plan.sampler == Sampler::MultiplicativeProjection) {
                throw ValidationError("filters cor1 and cor2 cannot be combined");
            }
            plan.sampler = Sampler::AdditiveProjection;
        } else if (id == "cor2") {
            if (plan.sampler == Sampler::AdditiveProjection) {
                throw ValidationError("filters cor1 and cor2 cannot be combined");
            }
            plan.sampler = Sampler::MultiplicativeProjection;
        } else if (id == "weaker") {
            plan.need_weaker = true;
        } else if (id == "thm1") {
            plan.need_thm1 = true;
        } else {
            throw ValidationError("unknown Monte Carlo filter '" + id + "' (expected weaker, thm1, cor1 or cor2)");
        }
    }
    return plan;
}

/// Project onto the no-interaction surface; false when the draw must be resampled.
bool project(BinaryScenario& s, Sampler sampler) {
    if (sampler == Sampler::Uniform) return true;
    const double p10 = s.p[1][0], p01 = s.p[0][1], p00 = s.p[0][0];
    if (p10 < p00 || p01 < p00) return false;
    if (s.r[1][1] < s.r[1][0] || s.r[0][1] < s.r[0][0]) return false;
    const double p11 = sampler == Sampler::AdditiveProjection ? p10 + p01 - p00 : p10 * p01 / p00;
    if (p11 > 1.0) return false;
    s.p[1][1] = p11;
    return true;
}

bool passes(const BinaryScenario& s, const Plan& plan) {
    if (plan.need_weaker) {
        try {
            if (!check_weaker_condition(s).holds) return false;
        } catch (const DegenerateError&) {
            return false;
        }
    }
    if (plan.need_thm1 && !all_hold(check_thm1(to_discrete(s)))) return false;
    return true;
}

ScoredDraw score(const McConfig& cfg, const Plan& plan, std::uint64_t index) {
    ScoredDraw out;
    DrawStream stream(cfg.seed, index);
    for (std::uint32_t attempt = 0;; ++attempt) {
        if (attempt >= kMaxAttempts) {
            throw std::runtime_error("Monte Carlo sampler failed to produce a valid draw");
        }
        BinaryScenario s = draw_scenario(stream);
        s.binary_outcome = cfg.binary_outcome;
        if (!project(s, plan.sampler)) {
            ++out.redraws;
            continue;
        }
        const double f = treated_fraction(to_discrete(s));
        if (!(f > 0.0 && f < 1.0)) {
            ++out.redraws;
            continue;
        }
        out.scenario = s;
        break;
    }
    out.accepted = passes(out.scenario, plan);
    const EstimateSet e = estimates(out.scenario);
    out.bias_adj = e.adj_all - e.true_all;
    out.bias_unadj = e.unadj - e.true_all;
    const double gap = std::fabs(out.bias_adj) - std::fabs(out.bias_unadj);
    out.zbias = gap > kIdentityTol;
    out.tie = std::fabs(gap) <= kIdentityTol;
    return out;
}

struct Tally {
    std::uint64_t accepted = 0;
    std::uint64_t zbias = 0;
    std::uint64_t ties = 0;
    std::uint64_t redraws = 0;
};

unsigned worker_count(const McConfig& cfg) {
    unsigned n = cfg.threads != 0 ? cfg.threads : std::thread::hardware_concurrency();
    n = std::max(1u, n);
    return static_cast<unsigned>(std::min<std::uint64_t>(n, cfg.draws));
}

}  // namespace

Philox4x32::Block Philox4x32::generate(Block ctr, Key key) noexcept {
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kPhiloxM0, ctr[0], hi0, lo0);
        mulhilo(kPhiloxM1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kPhiloxW0;
        key[1] += kPhiloxW1;
    }
    return ctr;
}

DrawStream::DrawStream(std::uint64_t seed, std::uint64_t draw_index) noexcept
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)}, draw_index_(draw_index) {}

double DrawStream::next_uniform() noexcept {
    if (used_ == 2) {
        buffer_ = Philox4x32::generate({static_cast<std::uint32_t>(draw_index_),
                                        static_cast<std::uint32_t>(draw_index_ >> 32), block_++, 0u},
                                       key_);
        used_ = 0;
    }
    const std::uint64_t bits =
        (static_cast<std::uint64_t>(buffer_[2 * used_]) << 32) | buffer_[2 * used_ + 1];
    ++used_;
    // 53 random bits centred in their cell: the result is never 0 or 1.
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

BinaryScenario draw_scenario(DrawStream& stream) {
    BinaryScenario s;
    s.p_z = stream.next_uniform();
    s.p_u = stream.next_uniform();
    s.p[1][1] = stream.next_uniform();
    s.p[1][0] = stream.next_uniform();
    s.p[0][1] = stream.next_uniform();
    s.p[0][0] = stream.next_uniform();
    s.r[1][1] = stream.next_uniform();
    s.r[1][0] = stream.next_uniform();
    s.r[0][1] = stream.next_uniform();
    s.r[0][0] = stream.next_uniform();
    return s;
}

void validate(const McConfig& cfg) {
    if (cfg.draws < 1) throw ValidationError("Monte Carlo draws must be at least 1");
    (void)make_plan(cfg);
}

ScoredDraw score_draw(const McConfig& cfg, std::uint64_t index) {
    validate(cfg);
    return score(cfg, make_plan(cfg), index);
}

McResult estimate_volume(const McConfig& cfg) {
    validate(cfg);
    const Plan plan = make_plan(cfg);
    const unsigned workers = worker_count(cfg);
    std::vector<Tally> tallies(workers);

    auto run_shard = [&](unsigned shard) {
        const std::uint64_t begin = cfg.draws * shard / workers;
        const std::uint64_t end = cfg.draws * (shard + 1) / workers;
        Tally& t = tallies[shard];
        for (std::uint64_t i = begin; i < end; ++i) {
            const ScoredDraw d = score(cfg, plan, i);
            t.redraws += d.redraws;
            if (!d.accepted) continue;
            ++t.accepted;
            if (d.zbias) ++t.zbias;
            if (d.tie) ++t.ties;
        }
    };

    if (workers == 1) {
        run_shard(0);
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run_shard, w);
    }

    Tally total;
    for (const Tally& t : tallies) {
        total.accepted += t.accepted;
        total.zbias += t.zbias;
        total.ties += t.ties;
        total.redraws += t.redraws;
    }
    McResult r;
    r.draws = cfg.draws;
    r.seed = cfg.seed;
    r.accepted = total.accepted;
    r.zbias_count = total.zbias;
    r.tie_count = total.ties;
    r.redraws = total.redraws;
    if (total.accepted > 0) {
        const double n = static_cast<double>(total.accepted);
        r.volume = static_cast<double>(total.zbias) / n;
        r.stderr_ = std::sqrt(r.volume * (1.0 - r.volume) / n);
    }
    return r;
}

std::uint64_t write_scatter(const McConfig& cfg, std::ostream& out) {
    validate(cfg);
    const Plan plan = make_plan(cfg);
    out << "pZ,pU,p11,p10,p01,p00,r11,r10,r01,r00,bias_adj,bias_unadj,zbias\n";
    std::uint64_t rows = 0;
    std::string line;
    for (std::uint64_t i = 0; i < cfg.draws; ++i) {
        const ScoredDraw d = score(cfg, plan, i);
        if (!d.accepted) continue;
        const BinaryScenario& s = d.scenario;
        line.clear();
        for (double v : {s.p_z, s.p_u, s.p[1][1], s.p[1][0], s.p[0][1], s.p[0][0], s.r[1][1], s.r[1][0], s.r[0][1],
                         s.r[0][0], d.bias_adj, d.bias_unadj}) {
            line += format_shortest(v);
            line += ',';
        }
        line += d.zbias ? "true\n" : "false\n";
        out << line;
        ++rows;
    }
    return rows;
}

std::uint64_t export_scatter(const McConfig& cfg, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    const std::uint64_t rows = write_scatter(cfg, out);
    out.flush();
    if (!out) throw IoError("error writing '" + path.string() + "'");
    return rows;
}

}  // namespace zbias
