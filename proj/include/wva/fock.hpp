#pragma once

// Dense state-vector engine for a register of truncated bosonic modes.
//
// Amplitudes are stored row-major over the declared mode order, so the last
// mode has stride 1. All operations are free functions that take a register by
// const reference and return a new one; a FockRegister is never mutated after
// construction.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "wva/errors.hpp"

namespace wva {

struct ModeSpec {
  int cutoff = 1;  // basis is |0> .. |cutoff-1>
};

/// Cutoff for a mode expected to hold a coherent amplitude of the given
/// modulus: ceil(|a|^2 + 6|a| + 10).
inline int default_cutoff(double amplitude_modulus) {
  const double a = std::abs(amplitude_modulus);
  return static_cast<int>(std::ceil(a * a + 6.0 * a + 10.0));
}

struct TruncationPolicy {
  // Norm^2 discarded by a single operation above which it throws.
  double leakage_tolerance = 1e-6;
};

inline constexpr std::int64_t kDefaultMaxAmplitudes = std::int64_t{1} << 24;

template <typename Real>
struct TruncationDiagnostics {
  Real leakage = 0;          // accumulated norm^2 dropped past cutoffs
  Real boundary_weight = 0;  // norm^2 seen in a top Fock level when mixing
  int warnings = 0;

  TruncationDiagnostics& operator+=(const TruncationDiagnostics& o) {
    leakage += o.leakage;
    boundary_weight += o.boundary_weight;
    warnings += o.warnings;
    return *this;
  }
};

template <typename Real>
class FockRegister {
 public:
  using RealScalar = Real;
  using Scalar = std::complex<Real>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  FockRegister(std::vector<ModeSpec> modes, Vector amplitudes,
               TruncationDiagnostics<Real> diagnostics = {})
      : modes_(std::move(modes)),
        amplitudes_(std::move(amplitudes)),
        diagnostics_(diagnostics) {
    if (modes_.empty()) throw InvalidInput("FockRegister needs at least one mode");
    strides_.assign(modes_.size(), 1);
    Eigen::Index total = 1;
    for (std::size_t k = modes_.size(); k-- > 0;) {
      if (modes_[k].cutoff < 1) {
        throw InvalidInput("mode " + std::to_string(k) + " has cutoff < 1");
      }
      strides_[k] = total;
      total *= modes_[k].cutoff;
    }
    if (amplitudes_.size() != total) {
      throw InvalidInput("amplitude count " + std::to_string(amplitudes_.size()) +
                         " does not match product of cutoffs " + std::to_string(total));
    }
  }

  static FockRegister vacuum(std::vector<ModeSpec> modes) {
    Eigen::Index total = 1;
    for (const auto& m : modes) total *= std::max(m.cutoff, 1);
    Vector amps = Vector::Zero(total);
    amps(0) = Scalar(1);
    return FockRegister(std::move(modes), std::move(amps));
  }

  static FockRegister basis_state(std::vector<ModeSpec> modes, std::span<const int> occupation) {
    FockRegister reg = vacuum(std::move(modes));
    const Eigen::Index idx = reg.flat_index(occupation);
    reg.amplitudes_(0) = Scalar(0);
    reg.amplitudes_(idx) = Scalar(1);
    return reg;
  }

  int num_modes() const { return static_cast<int>(modes_.size()); }
  const std::vector<ModeSpec>& modes() const { return modes_; }
  int cutoff(int mode) const { return modes_[checked(mode)].cutoff; }
  Eigen::Index stride(int mode) const { return strides_[checked(mode)]; }
  Eigen::Index size() const { return amplitudes_.size(); }
  const Vector& amplitudes() const { return amplitudes_; }
  const TruncationDiagnostics<Real>& diagnostics() const { return diagnostics_; }

  Eigen::Index flat_index(std::span<const int> occupation) const {
    if (occupation.size() != modes_.size()) {
      throw InvalidInput("occupation list length does not match mode count");
    }
    Eigen::Index idx = 0;
    for (std::size_t k = 0; k < modes_.size(); ++k) {
      if (occupation[k] < 0 || occupation[k] >= modes_[k].cutoff) {
        throw InvalidInput("occupation of mode " + std::to_string(k) + " out of range");
      }
      idx += occupation[k] * strides_[k];
    }
    return idx;
  }

  /// Occupation number of `mode` in the basis state at flat index `idx`.
  int occupation(Eigen::Index idx, int mode) const {
    return static_cast<int>((idx / strides_[mode]) % modes_[mode].cutoff);
  }

  Scalar amplitude(std::span<const int> occupation) const {
    return amplitudes_(flat_index(occupation));
  }

  Real squared_norm() const { return amplitudes_.squaredNorm(); }

  FockRegister normalized() const {
    const Real n2 = squared_norm();
    if (!(n2 > Real(0))) throw DegenerateState("cannot normalize a zero-norm register");
    return FockRegister(modes_, amplitudes_ / std::sqrt(n2), diagnostics_);
  }

  int checked(int mode) const {
    if (mode < 0 || mode >= num_modes()) {
      throw InvalidInput("mode index " + std::to_string(mode) + " out of range");
    }
    return mode;
  }

 private:
  std::vector<ModeSpec> modes_;
  std::vector<Eigen::Index> strides_;
  Vector amplitudes_;
  TruncationDiagnostics<Real> diagnostics_;
};

using FockRegisterd = FockRegister<double>;

template <typename Real>
struct CoherentState {
  FockRegister<Real> state;
  Real deficit;  // 1 - sum |c_n|^2, the Poisson tail beyond the cutoff
};

/// Poisson tail P(N >= cutoff) for mean `mean`, summed directly.
template <typename Real>
Real poisson_tail(Real mean, int cutoff) {
  using std::exp;
  using std::lgamma;
  using std::log;
  if (mean == Real(0)) return Real(0);
  Real sum = 0;
  const Real log_mean = log(mean);
  for (int n = std::max(cutoff, 0);; ++n) {
    const Real term = exp(-mean + Real(n) * log_mean - lgamma(Real(n) + 1));
    sum += term;
    if (Real(n) > mean && term <= sum * std::numeric_limits<Real>::epsilon()) break;
    if (n > cutoff + 100000) break;
  }
  return sum;
}

/// Truncated coherent state e^{-|a|^2/2} a^n / sqrt(n!) on |0> .. |cutoff-1>.
template <typename Real>
CoherentState<Real> make_coherent(std::complex<Real> amplitude, int cutoff) {
  using std::isfinite;
  if (!isfinite(amplitude.real()) || !isfinite(amplitude.imag())) {
    throw InvalidInput("coherent amplitude must be finite");
  }
  if (cutoff < 1) throw InvalidInput("cutoff must be >= 1");
  using Vector = typename FockRegister<Real>::Vector;
  Vector amps = Vector::Zero(cutoff);
  const Real modulus = std::abs(amplitude);
  const Real mean = modulus * modulus;
  if (modulus == Real(0)) {
    amps(0) = 1;
  } else {
    const Real log_mod = std::log(modulus);
    const Real arg = std::arg(amplitude);
    for (int n = 0; n < cutoff; ++n) {
      const Real log_mag = -mean / 2 + Real(n) * log_mod - std::lgamma(Real(n) + 1) / 2;
      amps(n) = std::polar(std::exp(log_mag), Real(n) * arg);
    }
  }
  return {FockRegister<Real>({ModeSpec{cutoff}}, std::move(amps)), poisson_tail(mean, cutoff)};
}

/// Kronecker product; modes of `a` come first.
template <typename Real>
FockRegister<Real> tensor(const FockRegister<Real>& a, const FockRegister<Real>& b,
                          std::int64_t max_amplitudes = kDefaultMaxAmplitudes) {
  const double requested = double(a.size()) * double(b.size());
  if (requested > double(max_amplitudes)) {
    throw ResourceError("tensor product needs " + std::to_string(requested) +
                        " amplitudes, budget is " + std::to_string(max_amplitudes));
  }
  std::vector<ModeSpec> modes = a.modes();
  modes.insert(modes.end(), b.modes().begin(), b.modes().end());
  using Vector = typename FockRegister<Real>::Vector;
  Vector amps(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    amps.segment(i * b.size(), b.size()) = a.amplitudes()(i) * b.amplitudes();
  }
  auto diag = a.diagnostics();
  diag += b.diagnostics();
  return FockRegister<Real>(std::move(modes), std::move(amps), diag);
}

/// Fock-space matrices of the two-mode rotation, one per total photon number.
///
/// blocks[N](m, n) = <m, N-m| U |n, N-n>, where U maps mode operators as
/// a_out = cos(theta) a_in - sin(theta) b_in and
/// b_out = sin(theta) a_in + cos(theta) b_in. Columns are built by repeated
/// application of a_in^+ = cos a_out^+ + sin b_out^+ and
/// b_in^+ = -sin a_out^+ + cos b_out^+ to the vacuum.
template <typename Real>
std::vector<Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>> beam_splitter_blocks(
    Real c, Real s, int max_total) {
  using Matrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
  using Column = Eigen::Matrix<Real, Eigen::Dynamic, 1>;
  std::vector<Matrix> blocks;
  blocks.reserve(std::max(max_total, 0) + 1);
  blocks.push_back(Matrix::Ones(1, 1));
  for (int total = 1; total <= max_total; ++total) {
    const Matrix& prev = blocks.back();
    Matrix next(total + 1, total + 1);
    // raise_a / raise_b act on an (total)-photon column and give (total+1) entries.
    auto create = [&](const Column& v, Real coef_a, Real coef_b) {
      Column w = Column::Zero(total + 1);
      for (int m = 0; m < total; ++m) {
        w(m + 1) += coef_a * std::sqrt(Real(m + 1)) * v(m);
        w(m) += coef_b * std::sqrt(Real(total - m)) * v(m);
      }
      return w;
    };
    next.col(0) = create(prev.col(0), -s, c) / std::sqrt(Real(total));
    for (int j = 1; j <= total; ++j) {
      next.col(j) = create(prev.col(j - 1), c, s) / std::sqrt(Real(j));
    }
    blocks.push_back(std::move(next));
  }
  return blocks;
}

template <typename Real>
std::vector<Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>> beam_splitter_blocks(
    Real theta, int max_total) {
  return beam_splitter_blocks<Real>(std::cos(theta), std::sin(theta), max_total);
}

namespace detail {

// Flat offsets of every basis state with the listed modes in |0>.
template <typename Real>
std::vector<Eigen::Index> base_offsets(const FockRegister<Real>& state, int mode_a, int mode_b) {
  std::vector<Eigen::Index> out;
  out.reserve(state.size() / (state.cutoff(mode_a) * state.cutoff(mode_b)));
  for (Eigen::Index i = 0; i < state.size(); ++i) {
    if (state.occupation(i, mode_a) == 0 && state.occupation(i, mode_b) == 0) out.push_back(i);
  }
  return out;
}

}  // namespace detail

/// Two-mode rotation between `mode_a` and `mode_b` given cos(theta) and
/// sin(theta) directly (c^2 + s^2 = 1); see beam_splitter_blocks for the
/// convention. Throws TruncationError when the norm^2 pushed past the cutoffs
/// exceeds the policy tolerance.
template <typename Real>
FockRegister<Real> apply_rotation(const FockRegister<Real>& state, int mode_a, int mode_b, Real c,
                                  Real s, const TruncationPolicy& policy = {}) {
  state.checked(mode_a);
  state.checked(mode_b);
  if (mode_a == mode_b) throw InvalidInput("beam splitter needs two distinct modes");
  using Scalar = std::complex<Real>;
  using CVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  const int ca = state.cutoff(mode_a);
  const int cb = state.cutoff(mode_b);
  const Eigen::Index sa = state.stride(mode_a);
  const Eigen::Index sb = state.stride(mode_b);
  const int max_total = (ca - 1) + (cb - 1);
  if (!(std::abs(c * c + s * s - Real(1)) <= Real(64) * std::numeric_limits<Real>::epsilon())) {
    throw InvalidInput("beam splitter needs cos^2 + sin^2 = 1");
  }
  const auto blocks = beam_splitter_blocks<Real>(c, s, max_total);

  typename FockRegister<Real>::Vector out = FockRegister<Real>::Vector::Zero(state.size());
  const auto& in = state.amplitudes();
  Real leakage = 0;
  Real boundary = 0;

  CVector x;
  CVector y;
  for (Eigen::Index base : detail::base_offsets(state, mode_a, mode_b)) {
    for (int total = 0; total <= max_total; ++total) {
      const int lo = std::max(0, total - (cb - 1));
      const int hi = std::min(total, ca - 1);
      x.setZero(total + 1);
      bool occupied = false;
      for (int na = lo; na <= hi; ++na) {
        const Scalar amp = in(base + na * sa + (total - na) * sb);
        x(na) = amp;
        if (amp != Scalar(0)) {
          occupied = true;
          if ((ca > 1 && na == ca - 1) || (cb > 1 && total - na == cb - 1)) {
            boundary += std::norm(amp);
          }
        }
      }
      if (!occupied) continue;
      y.noalias() = blocks[total].template cast<Scalar>() * x;
      for (int m = 0; m <= total; ++m) {
        if (m < ca && total - m < cb) {
          out(base + m * sa + (total - m) * sb) = y(m);
        } else {
          leakage += std::norm(y(m));
        }
      }
    }
  }

  if (leakage > Real(policy.leakage_tolerance)) {
    throw TruncationError("beam splitter leaked norm^2 " + std::to_string(double(leakage)) +
                          " past cutoffs (tolerance " + std::to_string(policy.leakage_tolerance) +
                          ")");
  }
  auto diag = state.diagnostics();
  diag.leakage += leakage;
  diag.boundary_weight += boundary;
  if (boundary > Real(0)) ++diag.warnings;
  return FockRegister<Real>(state.modes(), std::move(out), diag);
}

template <typename Real>
FockRegister<Real> apply_beam_splitter(const FockRegister<Real>& state, int mode_a, int mode_b,
                                       Real theta, const TruncationPolicy& policy = {}) {
  return apply_rotation(state, mode_a, mode_b, Real(std::cos(theta)), Real(std::sin(theta)),
                        policy);
}

/// Multiplies each basis amplitude by exp(i phi n_s n_pr).
template <typename Real>
FockRegister<Real> apply_cross_kerr(const FockRegister<Real>& state, int mode_s, int mode_pr,
                                    Real phi) {
  state.checked(mode_s);
  state.checked(mode_pr);
  if (mode_s == mode_pr) throw InvalidInput("cross-Kerr needs two distinct modes");
  using Scalar = std::complex<Real>;
  const int max_product = (state.cutoff(mode_s) - 1) * (state.cutoff(mode_pr) - 1);
  std::vector<Scalar> phase(max_product + 1);
  for (int k = 0; k <= max_product; ++k) phase[k] = std::polar(Real(1), phi * Real(k));

  typename FockRegister<Real>::Vector out = state.amplitudes();
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    out(i) *= phase[state.occupation(i, mode_s) * state.occupation(i, mode_pr)];
  }
  return FockRegister<Real>(state.modes(), std::move(out), state.diagnostics());
}

template <typename Real>
struct ProjectionOutcome {
  FockRegister<Real> state;  // remaining modes, not renormalized
  Real probability;          // squared norm of `state`
};

/// Projects `mode` onto |n> and removes it from the register.
template <typename Real>
ProjectionOutcome<Real> project_fock(const FockRegister<Real>& state, int mode, int n) {
  state.checked(mode);
  const int cut = state.cutoff(mode);
  if (n < 0 || n >= cut) {
    throw InvalidInput("projection onto |" + std::to_string(n) + "> outside cutoff " +
                       std::to_string(cut));
  }
  if (state.num_modes() == 1) {
    throw InvalidInput("cannot project out the only mode of a register");
  }
  std::vector<ModeSpec> modes = state.modes();
  modes.erase(modes.begin() + mode);

  const Eigen::Index inner = state.stride(mode);
  const Eigen::Index outer = state.size() / (inner * cut);
  typename FockRegister<Real>::Vector out(outer * inner);
  for (Eigen::Index o = 0; o < outer; ++o) {
    out.segment(o * inner, inner) = state.amplitudes().segment(o * cut * inner + n * inner, inner);
  }
  const Real p = out.squaredNorm();
  return {FockRegister<Real>(std::move(modes), std::move(out), state.diagnostics()), p};
}

/// P(n) for n = 0 .. cutoff-1 of one mode, unnormalized (sums to squared_norm).
template <typename Real>
std::vector<Real> photon_number_weights(const FockRegister<Real>& state, int mode) {
  state.checked(mode);
  std::vector<Real> w(state.cutoff(mode), Real(0));
  const auto& amps = state.amplitudes();
  for (Eigen::Index i = 0; i < amps.size(); ++i) w[state.occupation(i, mode)] += std::norm(amps(i));
  return w;
}

/// <psi|a|psi> / <psi|psi> for the given mode.
template <typename Real>
std::complex<Real> mean_field(const FockRegister<Real>& state, int mode) {
  state.checked(mode);
  const Real n2 = state.squared_norm();
  if (!(n2 > Real(0))) throw DegenerateState("mean field of a zero-norm register");
  const Eigen::Index st = state.stride(mode);
  const int cut = state.cutoff(mode);
  const auto& amps = state.amplitudes();
  std::complex<Real> acc(0);
  for (Eigen::Index i = 0; i < amps.size(); ++i) {
    const int n = state.occupation(i, mode);
    if (n + 1 < cut) acc += std::conj(amps(i)) * amps(i + st) * std::sqrt(Real(n + 1));
  }
  return acc / n2;
}

/// <n> of one mode, normalized by the register norm.
template <typename Real>
Real number_expectation(const FockRegister<Real>& state, int mode) {
  const auto w = photon_number_weights(state, mode);
  Real total = 0;
  Real acc = 0;
  for (std::size_t n = 0; n < w.size(); ++n) {
    total += w[n];
    acc += Real(n) * w[n];
  }
  if (!(total > Real(0))) throw DegenerateState("number expectation of a zero-norm register");
  return acc / total;
}

}  // namespace wva
