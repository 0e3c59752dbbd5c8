#pragma once

#include <complex>
#include <vector>
#include <Eigen/Dense>

namespace hardylab {

using cplx = std::complex<double>;
using Vec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXcd;

// Truncated power series helpers.  All series are coefficient vectors of
// length D+1; products are truncated convolutions at the same length.
namespace series {

// coefficients of 1/(1 - wbar z)
Vec geometric(cplx wbar, int D);

// truncated product, result has the length of a
Vec mul(const Vec& a, const Vec& b);

cplx eval(const Vec& a, cplx z);

}  // namespace series

// Finite Blaschke product prod (z - w_i)/(1 - conj(w_i) z), unimodular
// constant fixed to 1.  Zeros are kept in a canonical order: origin zeros
// first, the rest sorted by (modulus, argument, real part), so equal zero
// multisets compare equal.
class BlaschkeProduct {
 public:
  BlaschkeProduct() = default;  // empty product, identically 1
  explicit BlaschkeProduct(std::vector<cplx> zeros);

  const std::vector<cplx>& zeros() const { return zeros_; }
  int degree() const { return static_cast<int>(zeros_.size()); }
  bool vanishes_at_zero() const;

  cplx eval(cplx z) const;
  Vec taylor(int D) const;

  // true iff the zero multiset of *this is contained in Bp's, with
  // multiplicity, using exact equality of stored values
  bool divides(const BlaschkeProduct& Bp) const;

  friend bool operator==(const BlaschkeProduct& a, const BlaschkeProduct& b) {
    return a.zeros_ == b.zeros_;
  }

 private:
  std::vector<cplx> zeros_;
};

// Taylor coefficients (p x (D+1)) of sum_n blocks[n] * B^n
Mat compose_power_series(const std::vector<Vec>& blocks,
                         const BlaschkeProduct& B, int D);

}  // namespace hardylab
