#pragma once

// Sampled model of a parameter interval's image under xi_n. Not installed.

#include <vector>

#include "quadlab/exclusion.hpp"

namespace quadlab::internal {

struct Sample {
    double a = 0.0;
    double x = 0.0;     // xi_n(a)
    double logD = 0.0;  // log|d/dx F^{n-1}(1; a)|
    bool poisoned = false;  // broke (BA) at some earlier time
};

/// A slice I_{rl}, the core (-delta_n/3, delta_n/3), or a length-S block
/// of the outside region (l counts blocks from delta).
struct Cell {
    enum Kind { Core, Slice, Left, Right } kind = Core;
    int r = 0;
    int l = 0;

    bool operator==(const Cell&) const = default;
};

/// Per-run constants plus delta_j / 3 tabulated up to `limit`.
class Context {
public:
    Context(const RunConfig& conf, int limit);

    const RunConfig& conf() const noexcept { return conf_; }
    double delta() const noexcept { return delta_; }
    double large() const noexcept { return large_; }
    /// delta_j / 3, or 0 where the rate is undefined.
    double core(int j) const;

    Sample evaluate(double a, int n) const;
    Cell cell_of(double x, int n) const;
    /// Largest admissible gap between neighbouring sample images.
    double tolerance(double x1, double x2, int n) const;

private:
    const RunConfig& conf_;
    double delta_;
    double large_;
    std::vector<double> core_;
};

/// Evenly spaced samples on [lo, hi] at time n.
std::vector<Sample> initial_grid(double lo, double hi, int count, int n, const Context& ctx);

/// Inserts midpoints until neighbouring images are within tolerance.
void refine(std::vector<Sample>& s, int n, const Context& ctx);

/// Moves every sample from time n to n + 1.
void step_samples(std::vector<Sample>& s, int n);

struct Group {
    double lo = 0.0;
    double hi = 0.0;
    Cell cell;
    double xmin = 0.0;
    double xmax = 0.0;
    std::vector<double> params;
};

/// Tiles [s.front().a, s.back().a] into runs with one cell each. Cell
/// changes inside a segment are bracketed by bisection; a bracket that
/// touches the core, crosses 0, or (with usePoison) touches a poisoned
/// sample is assigned to the core.
std::vector<Group> group_by_cell(std::vector<Sample>& s, int n, const Context& ctx, bool usePoison);

/// Bounded period for a parameter range whose image spans [xmin, xmax].
int bound_period_for(double lo, double hi, double xmin, double xmax, int n, const Context& ctx);

/// |r| of the outermost slice met by [xmin, xmax], 0 when it misses (-delta, delta).
int shallow_depth(double xmin, double xmax, const Context& ctx);

}  // namespace quadlab::internal
