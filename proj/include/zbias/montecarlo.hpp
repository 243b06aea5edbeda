#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "zbias/scenario.hpp"

namespace zbias {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// Output block n of the stream keyed by `key` is philox(counter = n, key).
/// Streams are addressable, so any draw can be regenerated without replaying
/// the ones before it.
class Philox4x32 {
public:
    using Block = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Block generate(Block counter, Key key) noexcept;
};

/// Uniform(0,1) stream for one Monte Carlo draw, keyed by (seed, draw index).
///
/// Each uniform consumes 64 bits (53 used), so one Philox block yields two.
/// Values lie strictly inside (0,1).
class DrawStream {
public:
    DrawStream(std::uint64_t seed, std::uint64_t draw_index) noexcept;

    double next_uniform() noexcept;

private:
    Philox4x32::Key key_;
    std::uint64_t draw_index_;
    std::uint32_t block_ = 0;
    Philox4x32::Block buffer_{};
    int used_ = 2;
};

/// Ten i.i.d. Uniform(0,1) probabilities in the order
/// pZ, pU, p11, p10, p01, p00, r11, r10, r01, r00.
BinaryScenario draw_scenario(DrawStream& stream);

/// How each draw is produced before it is scored.
///
/// `filter` may name any of: weaker, thm1, cor1, cor2. cor1 and cor2 have
/// probability zero under uniform sampling, so they switch the sampler to a
/// projection (p11 := p10 + p01 - p00, resp. p11 := p10 p01 / p00) with
/// rejection of non-monotone draws. The other ids reject failing draws.
struct McConfig {
    std::uint64_t draws = 1;
    std::uint64_t seed = 0;
    bool binary_outcome = true;
    std::vector<std::string> filter;
    /// Worker threads; 0 picks std::thread::hardware_concurrency().
    unsigned threads = 0;
};

struct McResult {
    double volume = 0.0;
    double stderr_ = 0.0;
    std::uint64_t draws = 0;
    /// Draws that passed the filter and enter the volume.
    std::uint64_t accepted = 0;
    std::uint64_t seed = 0;
    std::uint64_t zbias_count = 0;
    std::uint64_t tie_count = 0;
    /// Internal resamples (degenerate treated fraction or projection rejections).
    std::uint64_t redraws = 0;
};

void validate(const McConfig& cfg);

/// Scored draw: the scenario with the whole-population biases.
struct ScoredDraw {
    BinaryScenario scenario;
    double bias_adj = 0.0;
    double bias_unadj = 0.0;
    bool accepted = false;
    bool zbias = false;
    bool tie = false;
    std::uint64_t redraws = 0;
};

/// Produce and score draw `index`. Deterministic in (cfg.seed, index).
ScoredDraw score_draw(const McConfig& cfg, std::uint64_t index);

McResult estimate_volume(const McConfig& cfg);

/// Write one CSV row per accepted draw; returns the number of data rows.
/// Throws IoError when the destination cannot be written.
std::uint64_t export_scatter(const McConfig& cfg, const std::filesystem::path& path);

/// Same rows to an arbitrary stream.
std::uint64_t write_scatter(const McConfig& cfg, std::ostream& out);

}  // namespace zbias
