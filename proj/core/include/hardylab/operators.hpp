#pragma once

#include <utility>
#include <vector>

#include "hardylab/subspace.hpp"

namespace hardylab {

enum class Exactness { exact, truncation_leaky };

struct OperatorMatrix {
  FramePtr domain;
  FramePtr codomain;
  Mat mat;  // dim_out x dim_in
  Exactness exactness = Exactness::exact;
  double column_residual = 0.0;  // worst conversion residual during assembly

  WoldVector apply(const WoldVector& v) const;
  OperatorMatrix adjoint() const;
};

// block right shift; the top block leaks out of the truncation
OperatorMatrix toeplitz_forward(const FramePtr& frame);

// block left shift; exact restriction of the untruncated adjoint
OperatorMatrix toeplitz_adjoint(const FramePtr& frame);

// multiplication by a scalar symbol, acting fiberwise
OperatorMatrix multiplier_matrix(const Vec& symbol_taylor, const FramePtr& frame);
OperatorMatrix multiplier_matrix(const BlaschkeProduct& C, const FramePtr& frame);

// multiplication by a fixed C^m valued function: maps the scalar frame into
// the m-fiber frame; entries are Taylor inner products, so the matrix is the
// exact compression to the two frames
OperatorMatrix vector_multiplier(const H2Element& sym, const FramePtr& scalar_frame,
                                 const FramePtr& vec_frame);

OperatorMatrix rank_one(const WoldVector& V, const WoldVector& U);

// toeplitz_adjoint(frame) - sum_i rank_one(V_i, U_i)
OperatorMatrix perturbed_backward(const FramePtr& frame,
                                  const std::vector<std::pair<WoldVector, WoldVector>>& pairs);

// norms of ((T P_M)^H)^n h for n = 1..nmax
std::vector<double> c0_decay(const OperatorMatrix& T, const Subspace& M,
                             const WoldVector& h, int nmax);

}  // namespace hardylab
