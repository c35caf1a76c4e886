#include "mee/plasticity.hpp"

#include <algorithm>
#include <cmath>

namespace mee {

int hebbian_update_inplace(Genome& genome, const NetState& state, double surplus, const PhysicsParams& p) {
    const auto& a = state.activations;
    const double gate = p.eta * surplus;
    int reset = 0;
    for (auto& c : genome.connections) {
        const auto src = static_cast<std::size_t>(c.src);
        const auto dst = static_cast<std::size_t>(c.dst);
        const double x = src < a.size() ? a[src] : 0.0;
        const double y = dst < a.size() ? a[dst] : 0.0;
        double w = c.weight + gate * x * y - p.lambda_decay * c.weight;
        if (!std::isfinite(w)) {
            w = 0.0;
            ++reset;
        }
        c.weight = std::clamp(w, -p.w_cap, p.w_cap);
    }
    return reset;
}

HebbianResult hebbian_update(const Genome& genome, const NetState& state, double surplus, const PhysicsParams& p) {
    HebbianResult r{genome, 0};
    r.reset_weights = hebbian_update_inplace(r.genome, state, surplus, p);
    return r;
}

}  // namespace mee
