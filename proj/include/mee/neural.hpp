#pragma once

#include <span>
#include <utility>
#include <vector>

#include "mee/channel.hpp"
#include "mee/genome.hpp"

namespace mee {

struct NetState {
    std::vector<double> activations;      // post-ReLU, one per node
    std::vector<double> last_prediction;  // x_hat for the current tick, length W_s

    bool operator==(const NetState&) const = default;
};

struct CycleOutput {
    std::vector<double> prediction_next;  // length W_s
    std::vector<double> emission;         // length D_e, zero past emission_width
    int v_repr = 0;                       // internal nodes with activation > tau
    double k_cost = 0.0;                  // nonzero connections * propagation steps
    bool corrupt = false;                 // a non-finite value appeared
};

struct CycleSettings {
    double tau = 0.05;
    double eps_p = 1e-3;
    std::span<const ChannelKind> kinds;  // per sensory channel
};

/// All activations zero, predictions at mid-range.
NetState zero_state(const Genome& g);

/// One processing cycle: `propagation_steps` synchronous updates
/// a <- ReLU(W a + sensory), with sensory added at the injection nodes on every
/// step. Predictions are the logistic of the prediction readouts' final
/// pre-activation; emissions are the emission readouts' activations times
/// emission_gain.
std::pair<NetState, CycleOutput> forward_cycle(const Genome& g, const NetState& state,
                                               std::span<const double> sensory, const CycleSettings& settings);

/// In-place variant used by the world loop. `scratch` is reused between calls.
void forward_cycle_inplace(const Genome& g, NetState& state, std::span<const double> sensory,
                           const CycleSettings& settings, CycleOutput& out, std::vector<double>& scratch);

}  // namespace mee
