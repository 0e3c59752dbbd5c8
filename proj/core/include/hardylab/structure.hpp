#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "hardylab/operators.hpp"

namespace hardylab {

// A converse-style operation refuses to run when one of its stated
// hypotheses fails numerically; the failed hypothesis is named.
struct HypothesisError : std::runtime_error {
  std::string hypothesis;
  HypothesisError(std::string hyp, const std::string& msg)
      : std::runtime_error(msg), hypothesis(std::move(hyp)) {}
};

// Per-element record of the block recursion.  Column n of A holds the
// wandering coefficients at step n; column n of Hblocks holds the block-0
// coordinates split off at step n; alpha holds defect coefficients when a
// defect space participates.
struct ElementDecomposition {
  Mat A;        // p x N
  Mat alpha;    // defect x N
  Mat Hblocks;  // l*m x N
  std::vector<double> iterate_norms;  // ||L_0|| .. ||L_N||
  double terminal_ratio = 0.0;        // ||L_N|| / ||L_0||
  double reconstruction_residual = 0.0;
  double parseval_gap = 0.0;
};

struct DecompositionResult {
  int p = 0;
  std::vector<WoldVector> G;  // orthonormal, in the input frame
  FramePtr concat;            // fiber p+m frame carrying K
  Subspace K;
  std::vector<ElementDecomposition> elements;
  double invariance_residual = 0.0;
  double parseval_gap = 0.0;
  double reconstruction_residual = 0.0;
  double k_invariance_residual = 0.0;
  double r_support_residual = 0.0;
  double isometry_residual = 0.0;
  double max_terminal_ratio = 0.0;
};

struct CanonicalReport {
  double c1 = 0.0;  // wandering-coefficient consistency
  double c2 = 0.0;  // block-0 split consistency
  double c3 = 0.0;  // norm identity
  double uniqueness_margin = 0.0;  // residual jump after a 1e-3 tamper
  bool pass = false;
};

struct DefectReport {
  int defect = 0;
  std::vector<WoldVector> basis;
  double residual = 0.0;
};

struct AlmostEquivReport {
  double dir_a_invariance = 0.0;  // residual of the supplied perturbation
  int defect = 0;
  int k = 0;
  double dir_b_residual = 0.0;  // residual of the defect-built perturbation
  bool pass = false;
};

struct Thm310Result {
  DefectReport defect;
  DecompositionResult dec;
};

struct Thm37Result {
  int p = 0;
  std::vector<WoldVector> G;  // in the orthocomplement of M
  Subspace Nspace;            // in the fiber p+m frame
  DecompositionResult inner;  // decomposition of the orthocomplement
  double forward_invariance_residual = 0.0;
  double n_invariance_residual = 0.0;
  double unitary_residual = 0.0;
};

struct WanderingBound {
  int dim = 0;
  int bound = 0;
};

struct NearlyReport {
  bool ok = false;
  double residual = 0.0;
  Subspace intersection;  // M cap T_{B'} H^2
};

struct Thm313Result {
  int p = 0;
  std::vector<WoldVector> G;
  FramePtr pframe;  // fiber p frame (null when p = 0)
  Subspace Nsub;
  double unitary_residual = 0.0;
  double h_residual = 0.0;
  double n_invariance_residual = 0.0;
  double nearly_residual = 0.0;
  DecompositionResult dec;
};

struct NearlyDefectResult {
  bool contained = false;  // M inside the multiplier range: the R-free case
  int p = 0;
  int defect = 0;
  std::vector<WoldVector> G, Js;
  FramePtr concat;  // fiber p+defect frame
  Subspace K;
  std::vector<ElementDecomposition> elements;
  double nearly_residual = 0.0;
  double norm_gap = 0.0;
  double reconstruction_residual = 0.0;
  double k_invariance_residual = 0.0;
  double isometry_residual = 0.0;
  double max_terminal_ratio = 0.0;
};

struct NearlyConverseReport {
  double residual = 0.0;
  int defect = 0;
  bool pass = false;
};

// --- shared helpers -------------------------------------------------------

double op_norm(const Mat& M);

// span of the projections of the other product's model-space basis onto the
// frame; a frame vector lies in T_{Bp} H^2 exactly when it is orthogonal to
// this span
Subspace model_projection(const FramePtr& frame, const BlaschkeProduct& Bp);

// M cap T_{Bp} H^2, via the kernel of the model-projection inner products
Subspace intersect_multiplier_range(const Subspace& M, const BlaschkeProduct& Bp,
                                    double eps = 1e-8);

// --- theorem operations ---------------------------------------------------

DecompositionResult decompose_thm32(const Subspace& M,
                                    const std::vector<WoldVector>& Us,
                                    const std::vector<WoldVector>& Vs, double tol);

CanonicalReport verify_canonical_conditions(const DecompositionResult& res,
                                            const Subspace& M, double tol);

double check_thm36_converse(const std::vector<WoldVector>& G, const Subspace& K,
                            const Subspace& M, double tol);

Thm37Result forward_thm37(const Subspace& M, const std::vector<WoldVector>& Us,
                          const std::vector<WoldVector>& Vs, double tol);

bool membership_via_model(const WoldVector& F, const std::vector<WoldVector>& Fs,
                          const Subspace& Nspace, double tol);

DefectReport almost_defect(const OperatorMatrix& T, const Subspace& M,
                           double rank_tol = 1e-10);

AlmostEquivReport almost_equiv_check(const OperatorMatrix& T, const Subspace& M,
                                     const std::vector<std::pair<WoldVector, WoldVector>>& pairs,
                                     double tol);

Thm310Result almost_decompose_thm310(const Subspace& M, double tol);

WanderingBound wandering_bound_lemma39(const Subspace& M, const BlaschkeProduct& Bp,
                                       double tol);

NearlyReport nearly_check(const Subspace& M, const BlaschkeProduct& Bp, double tol);

Thm313Result nearly_decompose_thm313(const Subspace& M, const BlaschkeProduct& Bp,
                                     double tol);

NearlyDefectResult nearly_defect_decompose(const Subspace& M, const BlaschkeProduct& Bp,
                                           double tol);

NearlyConverseReport nearly_defect_converse(const std::vector<WoldVector>& G,
                                            const Subspace& K,
                                            const std::vector<WoldVector>& Js,
                                            const BlaschkeProduct& Bp, double tol);

}  // namespace hardylab
