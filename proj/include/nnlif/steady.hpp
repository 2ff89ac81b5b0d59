/**
 * @file steady.hpp
 * @brief Closed-form steady states of the limit equation, their boundary
 *        fluxes, a finite-difference stationary solver and the ratio h = p/p∞.
 */
#pragma once

#include "nnlif/grid.hpp"
#include "nnlif/model.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace nnlif {

struct SteadyState {
    Regime regime = Regime::MildlyExcitatory;
    ModelParams params;
    double Z = std::numeric_limits<double>::quiet_NaN(); // excitatory only
    double M_inf = 0.0;
    bool normalized = false;
    DensityProfile profile;

    /// Closed form on each side of V_R; both agree at V_R.
    double left_branch(double v) const;
    double right_branch(double v) const;
    double value(double v) const;
    /// One-sided derivatives; derivative() averages them at V_R.
    double derivative_left(double v) const;
    double derivative_right(double v) const;
    double derivative(double v) const;
};

SteadyState steady_excitatory(const ModelParams& params, const Grid& grid);
SteadyState steady_inhibitory(const ModelParams& params, const Grid& grid);
/// Excitatory or inhibitory branch chosen from the sign of b.
SteadyState steady_state(const ModelParams& params, const Grid& grid);

/// Centered second-order discretization of the stationary limit equation with
/// a unit reset source at V_R, normalized to unit trapezoidal mass.
DensityProfile steady_numeric(const ModelParams& params, const Grid& grid);

struct RatioProfile {
    std::vector<double> h; // nodal ratio, h[n] = nu
    double nu = 0.0;
    bool blended = false; // resolution guard fired at the last interior node
};

/// h = p/p∞ on interior nodes, h(v_f) = slope ratio. The Dirichlet node at
/// v_min copies its neighbour's ratio.
RatioProfile reference_ratio(const DensityProfile& p, const SteadyState& s, bool guard = true);

} // namespace nnlif
