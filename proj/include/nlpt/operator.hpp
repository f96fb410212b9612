#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "nlpt/domain.hpp"
#include "nlpt/far_field.hpp"
#include "nlpt/kernel.hpp"

namespace nlpt {

/// L(a, b) = |a - b|^(p-2) (a - b), with L(a, a) = 0 for every p.
double l_pairing(double a, double b, double p);

/// Smoothed pairing t (t^2 + eps^2)^((p-2)/2); equals l_pairing(t, 0, p) at eps = 0.
double l_smoothed(double t, double p, double eps);

/// Pair potential matching l_smoothed: ((t^2 + eps^2)^(p/2) - eps^p) / p.
double pair_potential(double t, double p, double eps);

/// One quadrature node of the far-field coupling of an interior cell:
/// the cell couples to the value `value` with weight `weight` (kernel included).
struct FarNode {
    double weight;
    double value;
};

/// Dense discretisation of the weak form on a masked grid.
///
/// Row i (interior cells only) stores W_ij = w_i w_j K(x_i, x_j) against every
/// grid cell j, with W_ii = 0. The coupling to the field outside the box is a
/// per-row list of far nodes built for one far-field model.
class Assembly {
public:
    Assembly(const RegionMask& mask, const KernelSpec& spec, const FarFieldModel& far);

    const RegionMask& mask() const { return mask_; }
    const Grid& grid() const { return mask_.grid(); }
    const KernelSpec& spec() const { return spec_; }
    const FarFieldModel& far() const { return far_; }
    std::size_t rows() const { return mask_.interior_count(); }
    std::size_t cols() const { return grid().size(); }

    std::span<const double> row(std::size_t slot) const {
        return {weights_->data() + slot * cols(), cols()};
    }
    double weight(std::size_t slot, std::size_t cell) const { return (*weights_)[slot * cols() + cell]; }
    /// Sum_j W_ij.
    double row_mass(std::size_t slot) const { return (*row_mass_)[slot]; }
    /// w_i times the total far-node weight.
    double far_mass(std::size_t slot) const { return far_mass_[slot]; }
    std::span<const FarNode> far_nodes(std::size_t slot) const {
        return {far_nodes_.data() + far_offset_[slot], far_offset_[slot + 1] - far_offset_[slot]};
    }
    /// True when the far energy is renormalised (unbounded Power models).
    bool renormalised() const { return renormalised_; }

    /// Same weight table, far coupling rebuilt for another model.
    Assembly with_far_field(const FarFieldModel& far) const;

    /// Checks grid and far model of u against this assembly.
    void require_compatible(const FieldFunction& u) const;

    /// r_i = sum_j W_ij L_eps(u_i - u_j) + w_i sum_n omega_n L_eps(u_i - g_n), per interior slot.
    void gradient(std::span<const double> values, double eps, std::span<double> out) const;
    /// Energy terms that depend on interior values.
    double variable_energy(std::span<const double> values, double eps) const;
    /// Diagonal of the Hessian of the smoothed energy (Jacobi preconditioner).
    void hessian_diagonal(std::span<const double> values, double eps, std::span<double> out) const;
    /// Off-diagonal Hessian magnitude W_ij * phi''(u_i - u_j) between an interior slot and a cell.
    double coupling(std::span<const double> values, double eps, std::size_t slot, std::size_t cell) const;

private:
    Assembly(const Assembly& base, const FarFieldModel& far);
    void build_far();

    RegionMask mask_;
    KernelSpec spec_;
    FarFieldModel far_;
    std::shared_ptr<const std::vector<double>> weights_;
    std::shared_ptr<const std::vector<double>> row_mass_;
    std::vector<FarNode> far_nodes_;
    std::vector<std::size_t> far_offset_;
    std::vector<double> far_mass_;
    bool renormalised_ = false;
};

/// Nonlocal tail Tail(f; z, r) with its decomposition.
struct TailEstimate {
    double value = 0.0;
    /// Contribution of resolved cells to value^(p-1).
    double resolved = 0.0;
    /// Contribution of the analytic far field to value^(p-1).
    double farfield = 0.0;
    /// Bound on the truncated far remainder (already inside farfield).
    double remainder_bound = 0.0;
};

/// Resolved cells use the exact kernel integral over the part of each cell
/// outside B_r(z) (product rule); the far field is integrated in polar shells.
/// Throws ConfigError when the far model is not in the tail space.
TailEstimate tail(const FieldFunction& f, const Point& z, double r, const KernelSpec& spec);

/// Full discrete energy (1/2p) sum_{i != j} W_ij |u_i - u_j|^p + (1/p) sum_i w_i F_i(u_i).
double energy(const FieldFunction& u, const Assembly& assembly);

/// Per-interior-slot residual r_i (weak residual against the cell indicator).
std::vector<double> residual(const FieldFunction& u, const Assembly& assembly, double eps = 0.0);

/// <A(u), phi> for phi given on every grid cell and zero off the interior.
double weak_residual(const FieldFunction& u, std::span<const double> phi, const Assembly& assembly);

/// Residual scale (row mass + far mass) * osc^(p-1) per interior slot.
std::vector<double> residual_scale(const Assembly& assembly, double oscillation);

/// Oscillation of the field values (max - min), 1 when the field is flat.
double data_oscillation(std::span<const double> values);

/// Principal-value operator at an interior cell with symmetric pairing y <-> 2x - y.
double operator_pointwise(const FieldFunction& u, std::size_t cell, const KernelSpec& spec);

/// Discrete Gagliardo seminorm (sum_{i != j in region} w_i w_j |u_i-u_j|^q / |x_i-x_j|^(n + h q))^(1/q).
double seminorm(const FieldFunction& u, std::span<const std::size_t> region, double h_order, double q);

struct SupersolutionReport {
    bool pass = false;
    /// min_i r_i / scale_i
    double worst = 0.0;
    /// Grid cell attaining the minimum.
    std::size_t witness = 0;
};

/// Tests r_i >= -tol * scale_i for every interior hat function.
SupersolutionReport supersolution_check(const FieldFunction& u, const Assembly& assembly, double tol);

}  // namespace nlpt
