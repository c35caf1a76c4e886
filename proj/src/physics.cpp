#include "mee/physics.hpp"

#include <cassert>
#include <cmath>
#include <limits>
#include <sstream>

namespace mee {

std::string SourceTag::label() const {
    return is_stream ? std::string(to_string(stream)) : "unit:" + std::to_string(emitter);
}

double prediction_error(std::span<const double> actual, std::span<const double> predicted,
                        std::span<const ChannelKind> kinds, std::span<const std::uint8_t> scored) {
    assert(actual.size() == predicted.size());
    assert(actual.size() == kinds.size());
    assert(actual.size() == scored.size());
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        if (!scored[i]) continue;
        const double a = actual[i];
        const double p = predicted[i];
        if (kinds[i] == ChannelKind::Continuous) {
            sum += (a - p) * (a - p);
        } else {
            sum -= a * std::log(p) + (1.0 - a) * std::log1p(-p);
        }
        ++n;
    }
    return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

double prediction_error(std::span<const double> actual, std::span<const double> predicted,
                        std::span<const ChannelKind> kinds) {
    std::vector<std::uint8_t> all(actual.size(), 1);
    return prediction_error(actual, predicted, kinds, all);
}

double compression_ratio(int v_in, int v_repr, double error) {
    if (v_repr <= 0 || v_in <= 0) return 0.0;
    return static_cast<double>(v_in) / static_cast<double>(v_repr) * std::exp(-error);
}

EnergyStep energy_update(double e, double c, double v, double k, const PhysicsParams& p) {
    EnergyStep s;
    s.gain = p.alpha * c * v;
    s.compute_cost = p.beta * k;
    s.maintenance = p.gamma;
    s.surplus = s.gain - s.compute_cost;
    s.e_next = e + s.gain - s.compute_cost - s.maintenance;
    return s;
}

GuardReport validate_params(const PhysicsParams& p, int w_s, const PerStream& baselines) {
    GuardReport r;
    r.worst_margin = std::numeric_limits<double>::infinity();
    for (auto kind : kAllStreamKinds) {
        const double baseline = baselines[index_of(kind)];
        const double trivial_gain = p.alpha * static_cast<double>(w_s) * std::exp(-baseline);
        const double margin = p.gamma - trivial_gain;
        r.worst_margin = std::min(r.worst_margin, margin);
        if (!(margin > 0.0)) {
            r.ok = false;
            std::ostringstream line;
            line.precision(6);
            line << "GUARD-FAIL stream=" << to_string(kind) << " alpha*V_in*exp(-baseline)=" << trivial_gain
                 << " >= gamma=" << p.gamma << " (alpha=" << p.alpha << " V_in=" << w_s << " baseline=" << baseline
                 << ")";
            r.lines.push_back(line.str());
        }
    }
    if (!(p.repro_threshold > p.e_start)) {
        r.ok = false;
        std::ostringstream line;
        line << "GUARD-FAIL repro_threshold=" << p.repro_threshold << " <= e_start=" << p.e_start;
        r.lines.push_back(line.str());
    }
    return r;
}

}  // namespace mee
