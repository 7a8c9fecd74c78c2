#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "toricflow/config.hpp"
#include "toricflow/diagnostics.hpp"
#include "toricflow/soliton.hpp"

namespace toricflow {

struct FlowTrace {
    std::vector<DiagnosticsRow> rows;
    FlowState final_state;
    std::optional<SolitonCertificate> certificate;
    std::optional<double> lambda1_final;
    std::optional<LegendreReport> legendre_initial, legendre_final;
    DecayFit decay;
};

struct RunHooks {
    std::function<void(const DiagnosticsRow&, const FlowState&)> on_row;
    std::function<void(const BlowupEvent&)> on_blowup;
};

PotentialField initial_potential(const RunConfig& c, std::shared_ptr<const Discretization> d);

// Integrates to t_end, one row per snapshot interval (t = k * snapshot_every).
// BlowupSuspected propagates after on_blowup has seen the rescaled event.
FlowTrace run(const RunConfig& c, const RunHooks& hooks = {});

}  // namespace toricflow
