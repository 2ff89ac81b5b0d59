/**
 * @file grid.hpp
 * @brief Uniform truncated voltage grid with the reset potential on a node,
 *        and the nodal density profile living on it.
 */
#pragma once

#include "nnlif/model.hpp"

#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace nnlif {

struct Grid {
    double v_min = 0.0;
    double v_f = 1.0;
    double V_R = 0.0;
    double h = 0.0;
    int n = 0;          // cell count; nodes are 0..n
    int i_reset = 0;    // node that coincides with V_R
    bool heuristic_tail = false; // v_min chosen by the width heuristic (b <= 0)

    /// Node coordinate, built outward from V_R so node(i_reset) == V_R exactly.
    double node(int i) const;
    std::vector<double> nodes() const;
};

/// Grid whose left end is at or below v_min_target; V_R is snapped onto a node.
Grid make_grid(double v_min_target, double V_R, double V_F, int n);

/// Chooses v_min from the tail of the reference steady profile (or a width
/// heuristic when b <= 0). An explicit override replaces the tail rule.
Grid build_grid(const ModelParams& params, int n, double tail_tolerance,
                std::optional<double> v_min_override = std::nullopt);

/// Left end proposed by the tail rule before snapping.
double tail_v_min(const ModelParams& params, double tail_tolerance);

struct DensityProfile {
    Grid grid;
    std::vector<double> values;

    DensityProfile() = default;
    explicit DensityProfile(const Grid& g) : grid(g), values(static_cast<size_t>(g.n) + 1, 0.0) {}
    DensityProfile(const Grid& g, std::vector<double> v);

    double& operator[](int i) { return values[static_cast<size_t>(i)]; }
    double operator[](int i) const { return values[static_cast<size_t>(i)]; }
    int n() const { return grid.n; }
};

double total_mass(const DensityProfile& p);

enum class SlopeStatus { Ok, Clamped, Reported };

struct SlopeReport {
    double g = 0.0;     // returned slope, never negative
    double raw = 0.0;   // stencil value before clamping
    SlopeStatus status = SlopeStatus::Ok;
};

/// g = -dp/dv at v_f from the second-order one-sided stencil.
SlopeReport boundary_slope_report(const DensityProfile& p);
double boundary_slope(const DensityProfile& p);

DensityProfile project_function(const std::function<double(double)>& f, const Grid& grid,
                                bool normalize);

/// L1 distance by trapezoidal quadrature; both profiles must share the grid.
double l1_distance(const DensityProfile& a, const DensityProfile& b);
double max_abs_difference(const DensityProfile& a, const DensityProfile& b);

/// `v,p` CSV with 17 significant digits.
void write_profile_csv(std::ostream& os, const DensityProfile& p);
std::string format_number(double x);

} // namespace nnlif
