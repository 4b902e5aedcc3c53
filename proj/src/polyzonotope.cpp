#include "reachguard/polyzonotope.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace reachguard {

namespace {

constexpr double kDropTol = 1e-14;  // monomials below this norm are boxed away

// Union of two sorted unique indeterminate lists, plus column maps from each
// input list into the union.
std::vector<Indet> merge_indets(const std::vector<Indet>& a, const std::vector<Indet>& b,
                                std::vector<int>& map_a, std::vector<int>& map_b) {
    std::vector<Indet> out;
    out.reserve(a.size() + b.size());
    std::size_t i = 0, j = 0;
    map_a.assign(a.size(), -1);
    map_b.assign(b.size(), -1);
    while (i < a.size() || j < b.size()) {
        if (j == b.size() || (i < a.size() && a[i] < b[j])) {
            map_a[i] = static_cast<int>(out.size());
            out.push_back(a[i++]);
        } else if (i == a.size() || b[j] < a[i]) {
            map_b[j] = static_cast<int>(out.size());
            out.push_back(b[j++]);
        } else {
            map_a[i] = map_b[j] = static_cast<int>(out.size());
            out.push_back(a[i++]);
            ++j;
        }
    }
    return out;
}

MatI remap_expo(const MatI& expo, const std::vector<int>& col_map, int new_cols) {
    MatI out = MatI::Zero(expo.rows(), new_cols);
    for (int c = 0; c < expo.cols(); ++c) out.col(col_map[static_cast<std::size_t>(c)]) = expo.col(c);
    return out;
}

}  // namespace

std::string to_string(const Indet& v) {
    const char* prefix = v.kind == IndetKind::TrajParam ? "k" : v.kind == IndetKind::Time ? "t" : "e";
    return prefix + std::to_string(v.id);
}

// ----------------------------------------------------------------- Zonotope

Zonotope::Zonotope(Vec c, Mat g) : center(std::move(c)), generators(std::move(g)) {
    if (generators.size() > 0 && generators.rows() != center.size())
        throw std::invalid_argument("Zonotope: generator rows must match center dimension");
    if (generators.size() == 0) generators.resize(center.size(), 0);
}

double Zonotope::support(const Vec& dir) const {
    if (dir.size() != center.size())
        throw std::invalid_argument("Zonotope::support: direction dimension mismatch");
    double s = dir.dot(center);
    for (int l = 0; l < generators.cols(); ++l) s += std::abs(dir.dot(generators.col(l)));
    return s;
}

Vec Zonotope::box_halfwidths() const { return generators.cwiseAbs().rowwise().sum(); }

Zonotope minkowski_sum(const Zonotope& a, const Zonotope& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("minkowski_sum: dimension mismatch");
    Mat g(a.dim(), a.generators.cols() + b.generators.cols());
    g << a.generators, b.generators;
    return Zonotope(a.center + b.center, std::move(g));
}

// ------------------------------------------------------------- PolyZonotope

PolyZonotope::PolyZonotope(Vec c)
    : center_(std::move(c)),
      dep_(center_.size(), 0),
      expo_(0, 0),
      indep_(center_.size(), 0) {}

PolyZonotope PolyZonotope::constant(double value) {
    Vec c(1);
    c[0] = value;
    return PolyZonotope(std::move(c));
}

PolyZonotope::PolyZonotope(Vec center, Mat dep, MatI expo, std::vector<Indet> indets, Mat indep)
    : center_(std::move(center)),
      dep_(std::move(dep)),
      expo_(std::move(expo)),
      indets_(std::move(indets)),
      indep_(std::move(indep)) {
    const int d = static_cast<int>(center_.size());
    if (dep_.size() == 0) dep_.resize(d, 0);
    if (indep_.size() == 0) indep_.resize(d, 0);
    if (dep_.rows() != d || indep_.rows() != d)
        throw std::invalid_argument("PolyZonotope: generator rows must match center dimension");
    if (expo_.rows() != dep_.cols())
        throw std::invalid_argument("PolyZonotope: one exponent row per dependent monomial required");
    if (expo_.cols() != static_cast<int>(indets_.size()))
        throw std::invalid_argument("PolyZonotope: one exponent column per indeterminate required");
    if ((expo_.array() < 0).any())
        throw std::invalid_argument("PolyZonotope: exponents must be non-negative");
    for (std::size_t i = 1; i < indets_.size(); ++i)
        if (!(indets_[i - 1] < indets_[i]))
            throw std::invalid_argument("PolyZonotope: indeterminates must be sorted and unique");
    canonicalize();
}

PolyZonotope PolyZonotope::scalar_generator(double c, double g, const Indet& v) {
    Vec center(1);
    center[0] = c;
    Mat dep(1, 1);
    dep(0, 0) = g;
    MatI expo(1, 1);
    expo(0, 0) = 1;
    return PolyZonotope(std::move(center), std::move(dep), std::move(expo), {v}, Mat());
}

bool PolyZonotope::has_indet_kind(IndetKind kind) const {
    for (const auto& v : indets_)
        if (v.kind == kind) return true;
    return false;
}

PolyZonotope PolyZonotope::component(int axis) const {
    if (axis < 0 || axis >= dim()) throw std::invalid_argument("PolyZonotope::component: axis out of range");
    Vec c(1);
    c[0] = center_[axis];
    Mat dep = dep_.row(axis);
    Mat indep = indep_.row(axis);
    return PolyZonotope(std::move(c), std::move(dep), expo_, indets_, std::move(indep));
}

Vec PolyZonotope::eval_dep(const Vec& assignment) const {
    if (assignment.size() != static_cast<Eigen::Index>(indets_.size()))
        throw std::invalid_argument("PolyZonotope::eval_dep: one value per indeterminate required");
    Vec out = center_;
    for (int m = 0; m < dep_.cols(); ++m) {
        double mono = 1.0;
        for (int k = 0; k < expo_.cols(); ++k) {
            const int e = expo_(m, k);
            for (int t = 0; t < e; ++t) mono *= assignment[k];
        }
        out += dep_.col(m) * mono;
    }
    return out;
}

Vec PolyZonotope::indep_radius() const { return indep_.cwiseAbs().rowwise().sum(); }

void PolyZonotope::canonicalize() {
    const int d = dim();
    Vec extra_box = Vec::Zero(d);  // conservative slack from dropped monomials

    // Sort monomials lexicographically by exponent row, then merge duplicates.
    const int n = static_cast<int>(dep_.cols());
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    const MatI& E = expo_;
    std::sort(order.begin(), order.end(), [&E](int a, int b) {
        for (int k = 0; k < E.cols(); ++k) {
            if (E(a, k) != E(b, k)) return E(a, k) < E(b, k);
        }
        return false;
    });

    Mat new_dep(d, n);
    MatI new_expo(n, expo_.cols());
    int out = 0;
    for (int idx = 0; idx < n; ++idx) {
        const int m = order[static_cast<std::size_t>(idx)];
        if (out > 0 && new_expo.row(out - 1) == expo_.row(m)) {
            new_dep.col(out - 1) += dep_.col(m);
            continue;
        }
        new_dep.col(out) = dep_.col(m);
        new_expo.row(out) = expo_.row(m);
        ++out;
    }

    // Fold constant monomials into the center; box away negligible ones
    // (dropping them outright would shrink the set, so they widen the
    // independent part instead).
    Mat kept_dep(d, out);
    MatI kept_expo(out, expo_.cols());
    int kept = 0;
    for (int m = 0; m < out; ++m) {
        if ((new_expo.row(m).array() == 0).all()) {
            center_ += new_dep.col(m);
            continue;
        }
        const double nrm = new_dep.col(m).norm();
        if (nrm == 0.0) continue;
        if (nrm < kDropTol) {
            extra_box += new_dep.col(m).cwiseAbs();
            continue;
        }
        kept_dep.col(kept) = new_dep.col(m);
        kept_expo.row(kept) = new_expo.row(m);
        ++kept;
    }
    dep_ = kept_dep.leftCols(kept);
    expo_ = kept_expo.topRows(kept);

    // Prune indeterminates that no longer appear.
    std::vector<int> live;
    for (int k = 0; k < expo_.cols(); ++k)
        if (kept > 0 && (expo_.col(k).array() != 0).any()) live.push_back(k);
    if (static_cast<int>(live.size()) != expo_.cols()) {
        MatI pruned(kept, static_cast<int>(live.size()));
        std::vector<Indet> keep_ids;
        keep_ids.reserve(live.size());
        for (std::size_t c = 0; c < live.size(); ++c) {
            pruned.col(static_cast<int>(c)) = expo_.col(live[c]);
            keep_ids.push_back(indets_[static_cast<std::size_t>(live[c])]);
        }
        expo_ = std::move(pruned);
        indets_ = std::move(keep_ids);
    }

    // Box the independent part per axis.  Independent generators carry no
    // cross-axis coupling semantics, so the axis-aligned enclosure is a valid
    // (and bounded-size) over-approximation.
    Vec r = indep_.cwiseAbs().rowwise().sum() + extra_box;
    int nz = 0;
    for (int axis = 0; axis < d; ++axis)
        if (r[axis] > 0.0) ++nz;
    Mat box = Mat::Zero(d, nz);
    int c = 0;
    for (int axis = 0; axis < d; ++axis) {
        if (r[axis] > 0.0) box(axis, c++) = r[axis];
    }
    indep_ = std::move(box);
}

PolyZonotope pz_add(const PolyZonotope& a, const PolyZonotope& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("pz_add: dimension mismatch");
    std::vector<int> map_a, map_b;
    std::vector<Indet> ids = merge_indets(a.indets_, b.indets_, map_a, map_b);
    const int p = static_cast<int>(ids.size());

    Mat dep(a.dim(), a.num_monomials() + b.num_monomials());
    dep << a.dep_, b.dep_;
    MatI expo(dep.cols(), p);
    expo << remap_expo(a.expo_, map_a, p), remap_expo(b.expo_, map_b, p);
    Mat indep(a.dim(), a.num_indep() + b.num_indep());
    indep << a.indep_, b.indep_;

    return PolyZonotope(a.center_ + b.center_, std::move(dep), std::move(expo), std::move(ids),
                        std::move(indep));
}

PolyZonotope pz_scale(const PolyZonotope& a, double s) {
    return PolyZonotope(a.center() * s, a.dep() * s, a.expo(), a.indets(), a.indep() * s);
}

PolyZonotope pz_shift(const PolyZonotope& a, const Vec& delta) {
    if (delta.size() != a.center().size()) throw std::invalid_argument("pz_shift: dimension mismatch");
    return PolyZonotope(a.center() + delta, a.dep(), a.expo(), a.indets(), a.indep());
}

PolyZonotope pz_mul(const PolyZonotope& a, const PolyZonotope& b) {
    if (a.dim() != 1 && b.dim() != 1)
        throw std::invalid_argument("pz_mul: at least one factor must be one-dimensional");
    const PolyZonotope& s = (a.dim() == 1) ? a : b;  // scalar factor
    const PolyZonotope& v = (a.dim() == 1) ? b : a;
    const int d = v.dim();

    std::vector<int> map_s, map_v;
    std::vector<Indet> ids = merge_indets(s.indets_, v.indets_, map_s, map_v);
    const int p = static_cast<int>(ids.size());
    MatI es = remap_expo(s.expo_, map_s, p);
    MatI ev = remap_expo(v.expo_, map_v, p);

    const double cs = s.center_[0];
    const int ns = s.num_monomials();
    const int nv = v.num_monomials();

    const int total = nv + ns + ns * nv;
    Mat dep(d, total);
    MatI expo(total, p);
    int m = 0;
    for (int j = 0; j < nv; ++j) {  // cs * v_j
        dep.col(m) = cs * v.dep_.col(j);
        expo.row(m) = ev.row(j);
        ++m;
    }
    for (int i = 0; i < ns; ++i) {  // s_i * cv
        dep.col(m) = s.dep_(0, i) * v.center_;
        expo.row(m) = es.row(i);
        ++m;
    }
    for (int i = 0; i < ns; ++i) {  // s_i * v_j
        for (int j = 0; j < nv; ++j) {
            dep.col(m) = s.dep_(0, i) * v.dep_.col(j);
            expo.row(m) = es.row(i) + ev.row(j);
            ++m;
        }
    }

    // Cross terms with independent generators are bounded by magnitude:
    // |s| <= Ms pointwise on the dependent part, |e_s| <= rs, etc.
    const double rs = s.indep_radius()[0];
    const Vec rv = v.indep_radius();
    const double Ms = std::abs(cs) + s.dep_.cwiseAbs().sum();
    const Vec Mv = v.center_.cwiseAbs() + v.dep_.cwiseAbs().rowwise().sum();
    Vec box = Ms * rv + rs * Mv + rs * rv;

    int nz = 0;
    for (int axis = 0; axis < d; ++axis)
        if (box[axis] > 0.0) ++nz;
    Mat indep = Mat::Zero(d, nz);
    int c = 0;
    for (int axis = 0; axis < d; ++axis)
        if (box[axis] > 0.0) indep(axis, c++) = box[axis];

    return PolyZonotope(cs * v.center_, std::move(dep), std::move(expo), std::move(ids),
                        std::move(indep));
}

PolyZonotope pz_slice(const PolyZonotope& a,
                      const std::vector<std::pair<Indet, double>>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (std::abs(values[i].second) > 1.0 + 1e-12)
            throw std::invalid_argument("pz_slice: slice value for " + to_string(values[i].first) +
                                        " outside [-1,1]");
        for (std::size_t j = i + 1; j < values.size(); ++j)
            if (values[i].first == values[j].first)
                throw std::invalid_argument("pz_slice: duplicate value for " + to_string(values[i].first));
    }

    // Map indeterminate position -> slice value (absent assignments ignored).
    std::vector<double> val(a.indets_.size());
    std::vector<bool> sliced(a.indets_.size(), false);
    for (const auto& [id, x] : values) {
        for (std::size_t k = 0; k < a.indets_.size(); ++k) {
            if (a.indets_[k] == id) {
                sliced[k] = true;
                val[k] = std::clamp(x, -1.0, 1.0);
            }
        }
    }

    Mat dep = a.dep_;
    MatI expo = a.expo_;
    for (int m = 0; m < dep.cols(); ++m) {
        double f = 1.0;
        for (int k = 0; k < expo.cols(); ++k) {
            if (!sliced[static_cast<std::size_t>(k)]) continue;
            for (int t = 0; t < expo(m, k); ++t) f *= val[static_cast<std::size_t>(k)];
            expo(m, k) = 0;
        }
        dep.col(m) *= f;
    }

    // Remove sliced indeterminates entirely.
    std::vector<Indet> ids;
    std::vector<int> keep_cols;
    for (std::size_t k = 0; k < a.indets_.size(); ++k) {
        if (!sliced[k]) {
            keep_cols.push_back(static_cast<int>(k));
            ids.push_back(a.indets_[k]);
        }
    }
    MatI pruned(expo.rows(), static_cast<int>(keep_cols.size()));
    for (std::size_t c = 0; c < keep_cols.size(); ++c) pruned.col(static_cast<int>(c)) = expo.col(keep_cols[c]);

    return PolyZonotope(a.center_, std::move(dep), std::move(pruned), std::move(ids), a.indep_);
}

std::pair<Vec, Vec> interval_bound(const PolyZonotope& a) {
    Vec r = a.dep_.cwiseAbs().rowwise().sum() + a.indep_radius();
    return {a.center_ - r, a.center_ + r};
}

PolyZonotope reduce(const PolyZonotope& a, int max_monomials) {
    if (max_monomials < 0) throw std::invalid_argument("reduce: max_monomials must be non-negative");
    if (a.num_monomials() <= max_monomials) return a;

    std::vector<int> order(static_cast<std::size_t>(a.num_monomials()));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&a](int x, int y) {
        return a.dep_.col(x).norm() > a.dep_.col(y).norm();
    });

    const int d = a.dim();
    Mat dep(d, max_monomials);
    MatI expo(max_monomials, a.expo_.cols());
    for (int m = 0; m < max_monomials; ++m) {
        dep.col(m) = a.dep_.col(order[static_cast<std::size_t>(m)]);
        expo.row(m) = a.expo_.row(order[static_cast<std::size_t>(m)]);
    }
    Vec box = Vec::Zero(d);
    for (std::size_t m = static_cast<std::size_t>(max_monomials); m < order.size(); ++m)
        box += a.dep_.col(order[m]).cwiseAbs();

    Mat indep(d, a.num_indep() + 1);
    indep << a.indep_, box;
    return PolyZonotope(a.center_, std::move(dep), std::move(expo), a.indets_, std::move(indep));
}

PolyZonotope pz_stack(const std::vector<PolyZonotope>& components) {
    if (components.empty()) throw std::invalid_argument("pz_stack: no components");
    const int d = static_cast<int>(components.size());
    PolyZonotope out;
    // Build by summing axis embeddings: component i contributes to axis i.
    Vec center = Vec::Zero(d);
    std::vector<PolyZonotope> lifted;
    lifted.reserve(components.size());
    for (int i = 0; i < d; ++i) {
        const PolyZonotope& c = components[static_cast<std::size_t>(i)];
        if (c.dim() != 1) throw std::invalid_argument("pz_stack: components must be one-dimensional");
        Vec ctr = Vec::Zero(d);
        ctr[i] = c.center()[0];
        Mat dep = Mat::Zero(d, c.num_monomials());
        dep.row(i) = c.dep();
        Mat indep = Mat::Zero(d, c.num_indep());
        indep.row(i) = c.indep();
        lifted.emplace_back(std::move(ctr), std::move(dep), c.expo(), c.indets(), std::move(indep));
    }
    out = lifted[0];
    for (int i = 1; i < d; ++i) out = pz_add(out, lifted[static_cast<std::size_t>(i)]);
    return out;
}

namespace {

// Per-monomial value and partial derivatives of prod x_k^(e_k) at x.
double monomial_value(const MatI& expo, int m, const std::vector<double>& x) {
    double v = 1.0;
    for (int k = 0; k < expo.cols(); ++k)
        for (int t = 0; t < expo(m, k); ++t) v *= x[static_cast<std::size_t>(k)];
    return v;
}

double monomial_partial(const MatI& expo, int m, const std::vector<double>& x, int wrt) {
    const int e = expo(m, wrt);
    if (e == 0) return 0.0;
    double v = static_cast<double>(e);
    for (int t = 0; t < e - 1; ++t) v *= x[static_cast<std::size_t>(wrt)];
    for (int k = 0; k < expo.cols(); ++k) {
        if (k == wrt) continue;
        for (int t = 0; t < expo(m, k); ++t) v *= x[static_cast<std::size_t>(k)];
    }
    return v;
}

}  // namespace

std::pair<Vec, Mat> pz_eval_grad(const PolyZonotope& a,
                                 const std::vector<std::pair<Indet, double>>& values) {
    const auto& ids = a.indets();
    std::vector<double> x(ids.size(), 0.0);
    std::vector<int> value_slot(ids.size(), -1);  // indet position -> values index
    for (std::size_t k = 0; k < ids.size(); ++k) {
        bool found = false;
        for (std::size_t v = 0; v < values.size(); ++v) {
            if (values[v].first == ids[k]) {
                x[k] = values[v].second;
                value_slot[k] = static_cast<int>(v);
                found = true;
                break;
            }
        }
        if (!found)
            throw std::invalid_argument("pz_eval_grad: no value for indeterminate " + to_string(ids[k]));
    }

    Vec val = a.center();
    Mat grad = Mat::Zero(a.dim(), static_cast<int>(values.size()));
    for (int m = 0; m < a.num_monomials(); ++m) {
        val += a.dep().col(m) * monomial_value(a.expo(), m, x);
        for (std::size_t k = 0; k < ids.size(); ++k) {
            if (value_slot[k] < 0) continue;
            const double p = monomial_partial(a.expo(), m, x, static_cast<int>(k));
            if (p != 0.0) grad.col(value_slot[k]) += a.dep().col(m) * p;
        }
    }
    return {val, grad};
}

SlicedBound pz_sliced_bound(const PolyZonotope& a,
                            const std::vector<std::pair<Indet, double>>& values) {
    if (a.dim() != 1) throw std::invalid_argument("pz_sliced_bound: set must be one-dimensional");
    const auto& ids = a.indets();
    const int p = static_cast<int>(ids.size());
    std::vector<double> x(static_cast<std::size_t>(p), 0.0);
    std::vector<int> value_slot(static_cast<std::size_t>(p), -1);
    for (std::size_t k = 0; k < ids.size(); ++k) {
        for (std::size_t v = 0; v < values.size(); ++v) {
            if (values[v].first == ids[k]) {
                x[k] = values[v].second;
                value_slot[k] = static_cast<int>(v);
                break;
            }
        }
    }

    // Group monomials by their residual (unassigned-indeterminate) exponent
    // signature.  Signature all-zero -> sliced center; otherwise the group's
    // sliced coefficient a_s contributes |a_s| to the radius.
    const int n = a.num_monomials();
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    auto residual_cmp = [&](int m1, int m2) {
        for (int k = 0; k < p; ++k) {
            const int e1 = value_slot[static_cast<std::size_t>(k)] < 0 ? a.expo()(m1, k) : 0;
            const int e2 = value_slot[static_cast<std::size_t>(k)] < 0 ? a.expo()(m2, k) : 0;
            if (e1 != e2) return e1 < e2;
        }
        return false;
    };
    std::sort(order.begin(), order.end(), residual_cmp);

    const int nv = static_cast<int>(values.size());
    SlicedBound out;
    out.lo = out.hi = a.center()[0];
    out.dlo = Vec::Zero(nv);
    out.dhi = Vec::Zero(nv);
    const double r_indep = a.indep_radius()[0];
    out.lo -= r_indep;
    out.hi += r_indep;

    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        double group_val = 0.0;
        Vec group_grad = Vec::Zero(nv);
        bool residual_zero = true;
        for (int k = 0; k < p; ++k)
            if (value_slot[static_cast<std::size_t>(k)] < 0 && a.expo()(order[i], k) != 0) residual_zero = false;
        while (j < order.size() && !residual_cmp(order[i], order[j]) && !residual_cmp(order[j], order[i])) {
            const int m = order[j];
            // Evaluate the assigned-indeterminate factor of the monomial.
            double f = a.dep()(0, m);
            for (int k = 0; k < p; ++k) {
                if (value_slot[static_cast<std::size_t>(k)] < 0) continue;
                for (int t = 0; t < a.expo()(m, k); ++t) f *= x[static_cast<std::size_t>(k)];
            }
            group_val += f;
            for (int k = 0; k < p; ++k) {
                const int slot = value_slot[static_cast<std::size_t>(k)];
                if (slot < 0) continue;
                const int e = a.expo()(m, k);
                if (e == 0) continue;
                double d = a.dep()(0, m) * e;
                for (int t = 0; t < e - 1; ++t) d *= x[static_cast<std::size_t>(k)];
                for (int k2 = 0; k2 < p; ++k2) {
                    if (k2 == k || value_slot[static_cast<std::size_t>(k2)] < 0) continue;
                    for (int t = 0; t < a.expo()(m, k2); ++t) d *= x[static_cast<std::size_t>(k2)];
                }
                group_grad[slot] += d;
            }
            ++j;
        }
        if (residual_zero) {
            out.lo += group_val;
            out.hi += group_val;
            out.dlo += group_grad;
            out.dhi += group_grad;
        } else {
            const double s = group_val > 0.0 ? 1.0 : (group_val < 0.0 ? -1.0 : 0.0);
            out.lo -= std::abs(group_val);
            out.hi += std::abs(group_val);
            out.dlo -= s * group_grad;
            out.dhi += s * group_grad;
        }
        i = j;
    }
    return out;
}

TrigPair pz_trig(const PolyZonotope& angle, int order) {
    if (angle.dim() != 1) throw std::invalid_argument("pz_trig: angle must be one-dimensional");
    if (order < 1) throw std::invalid_argument("pz_trig: order must be >= 1");
    auto [lo, hi] = interval_bound(angle);
    const double width = hi[0] - lo[0];
    if (!(width < M_PI))
        throw std::invalid_argument("pz_trig: angle interval width " + std::to_string(width) +
                                    " must be below pi");
    const double c0 = 0.5 * (lo[0] + hi[0]);
    const double r = 0.5 * width;

    Vec shift(1);
    shift[0] = -c0;
    const PolyZonotope delta = pz_shift(angle, shift);

    PolyZonotope cos_pz = PolyZonotope::constant(std::cos(c0));
    PolyZonotope sin_pz = PolyZonotope::constant(std::sin(c0));
    PolyZonotope power = PolyZonotope::constant(1.0);
    double factorial = 1.0;
    for (int n = 1; n <= order; ++n) {
        power = pz_mul(power, delta);
        factorial *= n;
        const double cc = std::cos(c0 + n * M_PI_2) / factorial;  // d^n cos
        const double sc = std::sin(c0 + n * M_PI_2) / factorial;  // d^n sin
        cos_pz = pz_add(cos_pz, pz_scale(power, cc));
        sin_pz = pz_add(sin_pz, pz_scale(power, sc));
    }

    // Lagrange remainder over |dq| <= r, |d^(n+1) cos| <= 1.
    double rem = 1.0;
    for (int n = 1; n <= order + 1; ++n) rem *= r / n;
    Mat rem_gen(1, 1);
    rem_gen(0, 0) = rem;
    PolyZonotope rem_pz(Vec::Zero(1), Mat(), MatI(), {}, rem_gen);
    return TrigPair{pz_add(cos_pz, rem_pz), pz_add(sin_pz, rem_pz)};
}

}  // namespace reachguard
