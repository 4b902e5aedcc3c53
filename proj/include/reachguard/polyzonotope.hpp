#pragma once

// Polynomial zonotopes: sets of the form
//
//   { c + sum_m g_m * prod_k x_k^(E(m,k)) + sum_l beta_l h_l :
//     x in [-1,1]^p, beta in [-1,1]^q }
//
// where the x_k are named indeterminates shared across sets (so that the same
// trajectory parameter or time variable is coupled between joints), the g_m
// are dependent generators with integer exponent rows E, and the h_l are
// independent generators carrying unstructured over-approximation error.
// All operations below are conservative: the exact image of the operation is
// contained in the returned set for every fixed assignment of the shared
// indeterminates.

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace reachguard {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using MatI = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic>;

// ------------------------------------------------------------ indeterminates

enum class IndetKind : std::uint8_t {
    TrajParam = 0,  // one per actuated joint; sliced when a plan is fixed
    Time = 1,       // one per time interval of the partition
    Error = 2,      // bookkeeping for dependent error terms
};

struct Indet {
    IndetKind kind = IndetKind::Error;
    int id = 0;

    friend bool operator==(const Indet& a, const Indet& b) {
        return a.kind == b.kind && a.id == b.id;
    }
    friend bool operator<(const Indet& a, const Indet& b) {
        if (a.kind != b.kind) return static_cast<int>(a.kind) < static_cast<int>(b.kind);
        return a.id < b.id;
    }
};

inline Indet traj_param(int j) { return Indet{IndetKind::TrajParam, j}; }
inline Indet time_indet(int i) { return Indet{IndetKind::Time, i}; }
inline Indet error_indet(int s) { return Indet{IndetKind::Error, s}; }

std::string to_string(const Indet& v);

// ----------------------------------------------------------------- zonotopes

// Plain zonotope <c, G>: { c + G beta : beta in [-1,1]^m }.
struct Zonotope {
    Vec center;
    Mat generators;  // dim x m

    Zonotope() = default;
    Zonotope(Vec c, Mat g);

    int dim() const { return static_cast<int>(center.size()); }
    int num_generators() const { return static_cast<int>(generators.cols()); }

    // Support value max_{z in Z} <dir, z>.
    double support(const Vec& dir) const;

    // Per-axis half-extents sum_l |g_l| (box enclosure half widths).
    Vec box_halfwidths() const;
};

Zonotope minkowski_sum(const Zonotope& a, const Zonotope& b);

// ---------------------------------------------------------------------- PZ

class PolyZonotope {
  public:
    PolyZonotope() = default;

    // Constant set {c}.
    explicit PolyZonotope(Vec c);
    static PolyZonotope constant(double value);  // dim-1 helper

    // Fully specified; canonicalizes (sorts indeterminates, merges like
    // monomials, folds constant rows into the center, boxes the independent
    // part).
    PolyZonotope(Vec center, Mat dep, MatI expo, std::vector<Indet> indets, Mat indep);

    // Dim-1 set {c + g * x_v}: the canonical sliceable parameter.
    static PolyZonotope scalar_generator(double c, double g, const Indet& v);

    int dim() const { return static_cast<int>(center_.size()); }
    int num_monomials() const { return static_cast<int>(dep_.cols()); }
    int num_indets() const { return static_cast<int>(indets_.size()); }
    int num_indep() const { return static_cast<int>(indep_.cols()); }

    const Vec& center() const { return center_; }
    const Mat& dep() const { return dep_; }
    const MatI& expo() const { return expo_; }
    const std::vector<Indet>& indets() const { return indets_; }
    const Mat& indep() const { return indep_; }

    bool has_indet_kind(IndetKind kind) const;

    // Dim-1 component extraction / stacking.
    PolyZonotope component(int axis) const;

    // Evaluation of the dependent polynomial at a full assignment (one value
    // per indeterminate of this set, by position).  Test/diagnostic oracle;
    // the independent part is reported separately via indep_radius().
    Vec eval_dep(const Vec& assignment) const;

    // Per-axis radius of the independent box.
    Vec indep_radius() const;

  private:
    friend PolyZonotope pz_add(const PolyZonotope&, const PolyZonotope&);
    friend PolyZonotope pz_scale(const PolyZonotope&, double);
    friend PolyZonotope pz_mul(const PolyZonotope&, const PolyZonotope&);
    friend PolyZonotope pz_slice(const PolyZonotope&,
                                 const std::vector<std::pair<Indet, double>>&);
    friend std::pair<Vec, Vec> interval_bound(const PolyZonotope&);
    friend PolyZonotope reduce(const PolyZonotope&, int);
    friend PolyZonotope pz_stack(const std::vector<PolyZonotope>&);

    void canonicalize();

    Vec center_;
    Mat dep_;                   // dim x n_monomials
    MatI expo_;                 // n_monomials x n_indets
    std::vector<Indet> indets_; // sorted, unique
    Mat indep_;                 // dim x n_indep (axis-aligned box after canon)
};

// Minkowski-style exact sum; indeterminate lists are merged by name so shared
// parameters stay coupled.
PolyZonotope pz_add(const PolyZonotope& a, const PolyZonotope& b);

// Scale by a real constant.
PolyZonotope pz_scale(const PolyZonotope& a, double s);

// Shift by a constant vector.
PolyZonotope pz_shift(const PolyZonotope& a, const Vec& delta);

// Product.  One factor must be one-dimensional; dependent x dependent terms
// multiply exactly (exponent rows add), every term touching an independent
// generator is bounded into the independent part.
PolyZonotope pz_mul(const PolyZonotope& a, const PolyZonotope& b);

// Substitute fixed values (each in [-1,1]) for a subset of indeterminates.
PolyZonotope pz_slice(const PolyZonotope& a,
                      const std::vector<std::pair<Indet, double>>& values);

// Per-axis conservative interval: [c - r, c + r] with r the absolute sum of
// all dependent and independent generators.
std::pair<Vec, Vec> interval_bound(const PolyZonotope& a);

// Keep at most max_monomials dependent monomials (largest 2-norm first);
// dropped monomials are boxed into the independent part.
PolyZonotope reduce(const PolyZonotope& a, int max_monomials);

// Stack dim-1 sets into one vector-valued set (shared indeterminates merge).
PolyZonotope pz_stack(const std::vector<PolyZonotope>& components);

// Taylor enclosures of cos and sin over a dim-1 angle set.  Expansion is
// about the midpoint of the angle's interval bound with the Lagrange
// remainder |dq|^(order+1)/(order+1)! pushed into the independent part.
// Requires the angle interval to be narrower than pi.
struct TrigPair {
    PolyZonotope cos_pz;
    PolyZonotope sin_pz;
};
TrigPair pz_trig(const PolyZonotope& angle, int order = 2);

// Value and gradient of the dependent polynomial at a full assignment given
// as (indeterminate, value) pairs; every indeterminate of the set must be
// covered.  The gradient columns follow the order of `values`.
std::pair<Vec, Mat> pz_eval_grad(const PolyZonotope& a,
                                 const std::vector<std::pair<Indet, double>>& values);

// Interval bound of a dim-1 set after substituting the given values for (at
// least) its sliceable indeterminates, together with the derivative of both
// endpoints with respect to those values.  Monomials whose exponents touch
// only assigned indeterminates form the sliced center; each residual
// exponent signature contributes |a_s(values)| to the radius, which is
// differentiable wherever a_s != 0 (subgradient 0 is returned at a kink).
struct SlicedBound {
    double lo = 0.0;
    double hi = 0.0;
    Vec dlo;
    Vec dhi;
};
SlicedBound pz_sliced_bound(const PolyZonotope& a,
                            const std::vector<std::pair<Indet, double>>& values);

}  // namespace reachguard
