#include "kpo/model.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include "kpo/error.hpp"

namespace kpo {

namespace {

void require_finite(double value, const char* name) {
  if (!std::isfinite(value)) {
    throw InvalidParameter(std::string(name) + " must be finite");
  }
}

// Band entries of the Hamiltonian for any dim >= 1.
FockMatrix fill_bands(const ModelParams& params) {
  const std::size_t dim = params.dim;
  FockMatrix m = FockMatrix::zeros(dim);
  const double ne = params.classicality;
  const double one_photon_scale = params.one_photon * std::sqrt(ne);
  for (std::size_t n = 0; n < dim; ++n) {
    const double nd = static_cast<double>(n);
    m.diagonal[n] = nd * (nd - 1.0) / ne;
    if (n + 1 < dim) m.band1[n] = one_photon_scale * std::sqrt(nd + 1.0);
    if (n + 2 < dim) m.band2[n] = -params.two_photon * std::sqrt((nd + 1.0) * (nd + 2.0));
  }
  return m;
}

FockMatrix restrict_to_parity(const FockMatrix& full, std::size_t parity) {
  const std::size_t size = (full.dim + 1 - parity) / 2;
  FockMatrix block = FockMatrix::zeros(size);
  for (std::size_t k = 0; k < size; ++k) {
    const std::size_t n = 2 * k + parity;
    block.diagonal[k] = full.diagonal[n];
    if (k + 1 < size) block.band1[k] = full.band2[n];
  }
  return block;
}

MpBandedMatrix mp_zeros(std::size_t dim, mp::Bits bits) {
  MpBandedMatrix m;
  m.dim = dim;
  m.bits = bits;
  m.diagonal.assign(dim, mp::Float(bits));
  m.band1.assign(dim > 0 ? dim - 1 : 0, mp::Float(bits));
  m.band2.assign(dim > 1 ? dim - 2 : 0, mp::Float(bits));
  return m;
}

MpBandedMatrix restrict_to_parity(const MpBandedMatrix& full, std::size_t parity) {
  const std::size_t size = (full.dim + 1 - parity) / 2;
  MpBandedMatrix block = mp_zeros(size, full.bits);
  for (std::size_t k = 0; k < size; ++k) {
    const std::size_t n = 2 * k + parity;
    block.diagonal[k] = full.diagonal[n];
    if (k + 1 < size) block.band1[k] = full.band2[n];
  }
  return block;
}

}  // namespace

std::size_t default_dimension(double one_photon, double two_photon, double classicality) {
  const double scale = std::max(
      1.0, std::abs(two_photon) * classicality + std::abs(one_photon) * std::sqrt(classicality));
  const auto dim = static_cast<std::size_t>(std::ceil(kTruncationFactor * scale));
  return std::max(dim, kMinimumDimension);
}

double default_symmetry_breaking(double two_photon, double classicality) {
  return 1e-8 * std::max(1.0, two_photon * two_photon * classicality);
}

ModelParams make_params(double one_photon, double two_photon, double classicality) {
  ModelParams p;
  p.one_photon = one_photon;
  p.two_photon = two_photon;
  p.classicality = classicality;
  p.dim = default_dimension(one_photon, two_photon, classicality);
  return p;
}

void validate(const ModelParams& params, std::size_t min_dim) {
  require_finite(params.one_photon, "xi1");
  require_finite(params.two_photon, "xi2");
  require_finite(params.classicality, "Ne");
  require_finite(params.symmetry_breaking, "epsilon");
  if (!(params.classicality > 0.0)) throw InvalidParameter("Ne must be positive");
  if (params.symmetry_breaking < 0.0) throw InvalidParameter("epsilon must be non-negative");
  if (params.dim < min_dim) {
    throw InvalidParameter("truncation dimension " + std::to_string(params.dim) +
                           " is below the minimum of " + std::to_string(min_dim));
  }
}

bool truncation_adequate(const ModelParams& params) {
  return static_cast<double>(params.dim) >=
         kTruncationFactor * std::abs(params.two_photon) * params.classicality;
}

FockMatrix FockMatrix::zeros(std::size_t dim) {
  FockMatrix m;
  m.dim = dim;
  m.diagonal.assign(dim, 0.0);
  m.band1.assign(dim > 0 ? dim - 1 : 0, 0.0);
  m.band2.assign(dim > 1 ? dim - 2 : 0, 0.0);
  return m;
}

Eigen::MatrixXd FockMatrix::dense() const {
  const auto n = static_cast<Eigen::Index>(dim);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out(i, i) = diagonal[i];
    if (i + 1 < n) out(i, i + 1) = out(i + 1, i) = band1[i];
    if (i + 2 < n) out(i, i + 2) = out(i + 2, i) = band2[i];
  }
  return out;
}

Eigen::VectorXd FockMatrix::apply(const Eigen::VectorXd& v) const {
  const auto n = static_cast<Eigen::Index>(dim);
  Eigen::VectorXd out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double acc = diagonal[i] * v[i];
    if (i + 1 < n) acc += band1[i] * v[i + 1];
    if (i >= 1) acc += band1[i - 1] * v[i - 1];
    if (i + 2 < n) acc += band2[i] * v[i + 2];
    if (i >= 2) acc += band2[i - 2] * v[i - 2];
    out[i] = acc;
  }
  return out;
}

double FockMatrix::norm_inf() const {
  double best = 0.0;
  for (std::size_t i = 0; i < dim; ++i) {
    double row = std::abs(diagonal[i]);
    if (i + 1 < dim) row += std::abs(band1[i]);
    if (i >= 1) row += std::abs(band1[i - 1]);
    if (i + 2 < dim) row += std::abs(band2[i]);
    if (i >= 2) row += std::abs(band2[i - 2]);
    best = std::max(best, row);
  }
  return best;
}

Eigen::MatrixXd QuadratureMatrices::q_matrix() const {
  const auto n = static_cast<Eigen::Index>(dim);
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i + 1 < n; ++i) q(i, i + 1) = q(i + 1, i) = ladder[i];
  return q;
}

Eigen::MatrixXcd QuadratureMatrices::p_matrix() const {
  const auto n = static_cast<Eigen::Index>(dim);
  Eigen::MatrixXcd p = Eigen::MatrixXcd::Zero(n, n);
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    p(i + 1, i) = std::complex<double>(0.0, ladder[i]);
    p(i, i + 1) = std::complex<double>(0.0, -ladder[i]);
  }
  return p;
}

FockMatrix build_hamiltonian(const ModelParams& params) {
  validate(params, 3);
  return fill_bands(params);
}

std::pair<FockMatrix, FockMatrix> build_parity_blocks(const ModelParams& params) {
  validate(params, 3);
  if (!params.parity_symmetric()) {
    throw SymmetryViolation("parity blocks need xi1 == 0; the one-photon drive mixes parities");
  }
  const FockMatrix full = fill_bands(params);
  return {restrict_to_parity(full, 0), restrict_to_parity(full, 1)};
}

QuadratureMatrices build_quadratures(const ModelParams& params) {
  validate(params, 2);
  QuadratureMatrices quads;
  quads.dim = params.dim;
  quads.classicality = params.classicality;
  quads.ladder.resize(params.dim - 1);
  for (std::size_t n = 0; n + 1 < params.dim; ++n) {
    quads.ladder[n] = std::sqrt(static_cast<double>(n + 1) / (2.0 * params.classicality));
  }
  return quads;
}

HermitianMatrix build_perturbed(const ModelParams& params) {
  validate(params, 2);
  if (!(params.symmetry_breaking > 0.0)) {
    throw InvalidParameter("epsilon must be positive; use the real banded path when it is 0");
  }
  const FockMatrix h = fill_bands(params);
  const QuadratureMatrices quads = build_quadratures(params);
  const auto n = static_cast<Eigen::Index>(params.dim);
  const double eps = params.symmetry_breaking;

  HermitianMatrix out;
  out.dim = params.dim;
  out.entries = Eigen::MatrixXcd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.entries(i, i) = h.diagonal[i];
    if (i + 1 < n) {
      // Upper element <i|H + eps(Q+P)|i+1>; the lower one is its conjugate.
      const std::complex<double> upper(h.band1[i] + eps * quads.ladder[i], -eps * quads.ladder[i]);
      out.entries(i, i + 1) = upper;
      out.entries(i + 1, i) = std::conj(upper);
    }
    if (i + 2 < n) out.entries(i, i + 2) = out.entries(i + 2, i) = h.band2[i];
  }
  return out;
}

MpBandedMatrix MpBandedMatrix::lift(const FockMatrix& m, mp::Bits bits) {
  MpBandedMatrix out = mp_zeros(m.dim, bits);
  for (std::size_t i = 0; i < m.dim; ++i) out.diagonal[i] = m.diagonal[i];
  for (std::size_t i = 0; i < m.band1.size(); ++i) out.band1[i] = m.band1[i];
  for (std::size_t i = 0; i < m.band2.size(); ++i) out.band2[i] = m.band2[i];
  return out;
}

FockMatrix MpBandedMatrix::rounded() const {
  FockMatrix out = FockMatrix::zeros(dim);
  for (std::size_t i = 0; i < dim; ++i) out.diagonal[i] = diagonal[i].to_double();
  for (std::size_t i = 0; i < band1.size(); ++i) out.band1[i] = band1[i].to_double();
  for (std::size_t i = 0; i < band2.size(); ++i) out.band2[i] = band2[i].to_double();
  return out;
}

mp::Matrix MpBandedMatrix::dense() const {
  mp::Matrix out(dim, dim, bits);
  for (std::size_t i = 0; i < dim; ++i) {
    out(i, i) = diagonal[i];
    if (i + 1 < dim) out(i, i + 1) = out(i + 1, i) = band1[i];
    if (i + 2 < dim) out(i, i + 2) = out(i + 2, i) = band2[i];
  }
  return out;
}

MpBandedMatrix build_hamiltonian_mp(const ModelParams& params, mp::Bits bits) {
  validate(params, 3);
  const std::size_t dim = params.dim;
  MpBandedMatrix m = mp_zeros(dim, bits);

  const mp::Float ne(params.classicality, bits);
  const mp::Float one_photon_scale = mp::Float(params.one_photon, bits) * mp::sqrt(ne);
  const mp::Float two_photon(params.two_photon, bits);
  mp::Float scratch(bits);
  for (std::size_t n = 0; n < dim; ++n) {
    // n(n-1) is exact in any mantissa wide enough for dim^2.
    mpfr_set_ui(scratch.get(), static_cast<unsigned long>(n * (n > 0 ? n - 1 : 0)), MPFR_RNDN);
    mpfr_div(m.diagonal[n].get(), scratch.get(), ne.get(), MPFR_RNDN);
    if (n + 1 < dim) {
      mpfr_sqrt_ui(scratch.get(), static_cast<unsigned long>(n + 1), MPFR_RNDN);
      mpfr_mul(m.band1[n].get(), scratch.get(), one_photon_scale.get(), MPFR_RNDN);
    }
    if (n + 2 < dim) {
      mpfr_sqrt_ui(scratch.get(), static_cast<unsigned long>((n + 1) * (n + 2)), MPFR_RNDN);
      mpfr_mul(m.band2[n].get(), scratch.get(), two_photon.get(), MPFR_RNDN);
      mpfr_neg(m.band2[n].get(), m.band2[n].get(), MPFR_RNDN);
    }
  }
  return m;
}

std::pair<MpBandedMatrix, MpBandedMatrix> build_parity_blocks_mp(const ModelParams& params,
                                                                 mp::Bits bits) {
  if (!params.parity_symmetric()) {
    throw SymmetryViolation("parity blocks need xi1 == 0; the one-photon drive mixes parities");
  }
  const MpBandedMatrix full = build_hamiltonian_mp(params, bits);
  return {restrict_to_parity(full, 0), restrict_to_parity(full, 1)};
}

}  // namespace kpo
