#pragma once

#include <memory>
#include <utility>

#include "hardylab/blaschke.hpp"

namespace hardylab {

// Taylor-coefficient form of a C^m valued function on the disk.
// Row s of coeffs holds the coefficients of component s, degrees 0..D.
struct H2Element {
  int m = 0;
  Mat coeffs;  // m x (D+1)

  int D() const { return static_cast<int>(coeffs.cols()) - 1; }
  double norm() const { return coeffs.norm(); }
};

cplx inner(const H2Element& F, const H2Element& G);

// Takenaka-Malmquist basis of the model space K_B, as Taylor rows.
struct ModelBasis {
  BlaschkeProduct B;
  int D = 0;
  Mat tm;  // degree(B) x (D+1), row j = e_{j+1}
};

ModelBasis tm_basis(const BlaschkeProduct& B, int D);

// Orthonormal coordinate system for the first N blocks of the orbit
// decomposition induced by multiplication by B: block n is B^n (K_B (x) C^m).
// Flat coordinate of (block n, model index j in 0..l-1, fiber s in 0..m-1)
// is (n*l + j)*m + s.  Immutable; shared by reference.
class WoldFrame {
 public:
  WoldFrame(BlaschkeProduct B, int m, int N, int D, bool allow_any_fiber);

  const BlaschkeProduct& B() const { return B_; }
  int l() const { return B_.degree(); }
  int m() const { return m_; }
  int N() const { return N_; }
  int D() const { return D_; }
  int dim() const { return dim_; }
  const ModelBasis& basis() const { return basis_; }

  // Taylor rows of the scalar frame functions B^n e_j, row index n*l + j
  const Mat& scalar_funcs() const { return scalar_; }

  int index(int n, int j, int s) const { return (n * l() + j) * m_ + s; }

  bool compatible(const WoldFrame& other) const {
    return B_ == other.B_ && m_ == other.m_ && N_ == other.N_ && D_ == other.D_;
  }

 private:
  BlaschkeProduct B_;
  int m_, N_, D_, dim_;
  ModelBasis basis_;
  Mat scalar_;
};

using FramePtr = std::shared_ptr<const WoldFrame>;

// Requires B(0) = 0 (operator domains assume it) and m >= 1.
FramePtr frame_build(const BlaschkeProduct& B, int m, int N, int D);

// Same B, N, D; fiber dimension p + m.  p = 0 returns a frame identical to fm.
FramePtr concat_frames(const FramePtr& fp, const FramePtr& fm);

struct WoldVector {
  FramePtr frame;
  Vec coords;

  double norm() const { return coords.norm(); }
};

struct WoldProjection {
  WoldVector vec;
  double residual;
};

WoldProjection to_wold(const H2Element& F, const FramePtr& frame);
H2Element from_wold(const WoldVector& v);

// Exact block shifts in frame coordinates.  shift_up reports the norm of the
// top block that falls off the truncation.
WoldVector shift_down(const WoldVector& v);
std::pair<WoldVector, double> shift_up(const WoldVector& v);

Vec shift_down_coords(const WoldFrame& fr, const Vec& x);
Vec shift_up_coords(const WoldFrame& fr, const Vec& x, double* overflow = nullptr);

}  // namespace hardylab
