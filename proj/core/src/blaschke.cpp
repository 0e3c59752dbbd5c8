#include "hardylab/blaschke.hpp"

#include <algorithm>
#include <stdexcept>

namespace hardylab {

namespace series {

Vec geometric(cplx wbar, int D) {
  Vec out = Vec::Zero(D + 1);
  out[0] = 1.0;
  for (int d = 1; d <= D; ++d) out[d] = out[d - 1] * wbar;
  return out;
}

Vec mul(const Vec& a, const Vec& b) {
  const auto n = a.size();
  Vec out = Vec::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (a[i] == 0.0) continue;
    const Eigen::Index top = std::min(n - i, b.size());
    for (Eigen::Index j = 0; j < top; ++j) out[i + j] += a[i] * b[j];
  }
  return out;
}

cplx eval(const Vec& a, cplx z) {
  cplx acc = 0.0;
  for (Eigen::Index i = a.size() - 1; i >= 0; --i) acc = acc * z + a[i];
  return acc;
}

}  // namespace series

BlaschkeProduct::BlaschkeProduct(std::vector<cplx> zeros) : zeros_(std::move(zeros)) {
  for (const cplx& w : zeros_) {
    if (!(std::abs(w) < 1.0))
      throw std::invalid_argument("Blaschke zero must lie in the open disk");
  }
  std::sort(zeros_.begin(), zeros_.end(), [](const cplx& a, const cplx& b) {
    const bool a0 = (a == cplx(0.0, 0.0)), b0 = (b == cplx(0.0, 0.0));
    if (a0 != b0) return a0;
    const double ma = std::abs(a), mb = std::abs(b);
    if (ma != mb) return ma < mb;
    const double aa = std::arg(a), ab = std::arg(b);
    if (aa != ab) return aa < ab;
    return a.real() < b.real();
  });
}

bool BlaschkeProduct::vanishes_at_zero() const {
  return !zeros_.empty() && zeros_.front() == cplx(0.0, 0.0);
}

cplx BlaschkeProduct::eval(cplx z) const {
  cplx out = 1.0;
  for (const cplx& w : zeros_) out *= (z - w) / (1.0 - std::conj(w) * z);
  return out;
}

Vec BlaschkeProduct::taylor(int D) const {
  if (D < 0) throw std::invalid_argument("taylor: D must be >= 0");
  Vec out = Vec::Zero(D + 1);
  out[0] = 1.0;
  for (const cplx& w : zeros_) {
    // (z - w)/(1 - conj(w) z) by long division
    Vec num = Vec::Zero(D + 1);
    num[0] = -w;
    if (D >= 1) num[1] = 1.0;
    out = series::mul(out, series::mul(num, series::geometric(std::conj(w), D)));
  }
  return out;
}

bool BlaschkeProduct::divides(const BlaschkeProduct& Bp) const {
  std::vector<cplx> rest = Bp.zeros_;
  for (const cplx& w : zeros_) {
    auto it = std::find(rest.begin(), rest.end(), w);
    if (it == rest.end()) return false;
    rest.erase(it);
  }
  return true;
}

Mat compose_power_series(const std::vector<Vec>& blocks,
                         const BlaschkeProduct& B, int D) {
  if (blocks.empty()) return Mat::Zero(0, D + 1);
  const auto p = blocks.front().size();
  for (const Vec& b : blocks)
    if (b.size() != p) throw std::invalid_argument("compose_power_series: ragged blocks");
  const Vec Bt = B.taylor(D);
  // Horner in the series algebra
  Mat acc = Mat::Zero(p, D + 1);
  for (auto it = blocks.rbegin(); it != blocks.rend(); ++it) {
    Mat next = Mat::Zero(p, D + 1);
    for (Eigen::Index r = 0; r < p; ++r)
      next.row(r) = series::mul(acc.row(r).transpose(), Bt).transpose();
    next.col(0) += *it;
    acc = std::move(next);
  }
  return acc;
}

}  // namespace hardylab
