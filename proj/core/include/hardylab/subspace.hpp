#pragma once

#include <vector>

#include "hardylab/hardy.hpp"

namespace hardylab {

struct OperatorMatrix;

struct Subspace {
  FramePtr frame;
  Mat onb;  // dim x k, orthonormal columns
  double rank_tol = 1e-10;

  int dim() const { return static_cast<int>(onb.cols()); }
  Vec project_coords(const Vec& x) const { return onb * (onb.adjoint() * x); }
};

// Modified Gram-Schmidt with one re-orthogonalization pass.  A candidate is
// discarded when its residual is below rank_tol * scale; scale defaults to
// the largest input norm.  An explicit scale matters when the inputs may all
// be numerically zero (projections of an orthogonal set, say): without it the
// cut is relative to noise and fabricates dimensions.
Subspace orthonormalize(const FramePtr& frame, const std::vector<Vec>& vectors,
                        double rank_tol = 1e-10, double scale = -1.0);
Subspace orthonormalize(const std::vector<WoldVector>& vectors,
                        double rank_tol = 1e-10, double scale = -1.0);

WoldVector project(const Subspace& S, const WoldVector& v);
Subspace complement(const Subspace& S);

// principal-angle intersection: directions with singular value >= 1 - eps
Subspace intersect(const Subspace& S1, const Subspace& S2, double eps = 1e-8);

// M cap S^perp, computed as intersect(M, complement(S))
Subspace ominus(const Subspace& M, const Subspace& S, double eps = 1e-8);

Subspace span_union(const Subspace& S1, const Subspace& S2);

std::vector<double> principal_angles(const Subspace& S1, const Subspace& S2);

// smallest subspace containing the seeds and invariant under every operator
Subspace krylov_closure(const std::vector<const OperatorMatrix*>& ops,
                        const std::vector<WoldVector>& seeds,
                        double rank_tol = 1e-10);

}  // namespace hardylab
