"""Gaussian probe states and their post-target outputs.

Conventions used throughout the package:

* quadratures  X = (a + a^dag)/sqrt(2),  P = (a - a^dag)/(i sqrt(2))
* covariance   sigma_ij = <R_i R_j + R_j R_i> - 2 <R_i><R_j>, so the vacuum
  covariance is the identity and a thermal state with mean photon number N
  has sigma = (2N+1) I
* first moments  mu = sqrt(2) (Re alpha, Im alpha) per mode

Three probe families are supported: a displaced squeezed single-mode state
(DS; a coherent state is the r = 0 special case), the two-mode squeezed
vacuum (TMSV), and the classically correlated thermal state (CCT, a thermal
state split on a beam splitter).  The target is a beam splitter of
reflectivity kappa embedded in thermal noise; `n_bath` is the mean thermal
photon number seen by the detector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

_SQRT2 = math.sqrt(2.0)


class ProbeKind(str, Enum):
    DS = "ds"
    TMSV = "tmsv"
    CCT = "cct"


def _check_nonneg(name, value):
    if not (value >= 0.0):
        raise ValueError(f"{name} must be >= 0, got {value}")


def _check_kappa(kappa):
    if not (0.0 <= kappa <= 1.0):
        raise ValueError(f"kappa must lie in [0, 1], got {kappa}")


@dataclass(frozen=True)
class ProbeSpec:
    """Input-state description for one of the three probe families.

    For a DS probe the displacement is alpha = alpha_mag * exp(i alpha_phase)
    and the squeezing parameter is xi = squeeze_mag * exp(i squeeze_phase);
    its signal mean photon number is |alpha|^2 + sinh^2(squeeze_mag).
    `n_idler` is meaningful only for CCT probes.
    """

    kind: ProbeKind
    alpha_mag: float = 0.0
    alpha_phase: float = 0.0
    squeeze_mag: float = 0.0
    squeeze_phase: float = 0.0
    n_signal: float = 0.0
    n_idler: float = 0.0

    def __post_init__(self):
        _check_nonneg("alpha_mag", self.alpha_mag)
        _check_nonneg("squeeze_mag", self.squeeze_mag)
        _check_nonneg("n_signal", self.n_signal)
        _check_nonneg("n_idler", self.n_idler)
        if self.kind == ProbeKind.DS:
            ns = self.alpha_mag**2 + math.sinh(self.squeeze_mag) ** 2
            if abs(self.n_signal - ns) > 1e-12 * (1.0 + ns):
                raise ValueError(
                    "DS probe must satisfy n_signal = |alpha|^2 + sinh^2 r"
                )

    # -- constructors -------------------------------------------------

    @staticmethod
    def ds(alpha_mag, alpha_phase=0.0, squeeze_mag=0.0, squeeze_phase=0.0):
        ns = alpha_mag**2 + math.sinh(squeeze_mag) ** 2
        return ProbeSpec(ProbeKind.DS, alpha_mag, alpha_phase,
                         squeeze_mag, squeeze_phase, n_signal=ns)

    @staticmethod
    def ds_from_split(n_signal, split, alpha_phase=0.0, squeeze_phase=0.0):
        """DS probe with |alpha|^2 = split * n_signal and the remainder in
        squeezing, so n_signal = |alpha|^2 + sinh^2 r by construction."""
        if not (0.0 <= split <= 1.0):
            raise ValueError("split must lie in [0, 1]")
        _check_nonneg("n_signal", n_signal)
        alpha_mag = math.sqrt(split * n_signal)
        squeeze_mag = math.asinh(math.sqrt((1.0 - split) * n_signal))
        return ProbeSpec.ds(alpha_mag, alpha_phase, squeeze_mag, squeeze_phase)

    @staticmethod
    def coherent(n_signal, alpha_phase=0.0):
        return ProbeSpec.ds(math.sqrt(n_signal), alpha_phase)

    @staticmethod
    def tmsv(n_signal):
        _check_nonneg("n_signal", n_signal)
        return ProbeSpec(ProbeKind.TMSV, n_signal=n_signal)

    @staticmethod
    def cct(n_signal, n_idler):
        _check_nonneg("n_signal", n_signal)
        _check_nonneg("n_idler", n_idler)
        return ProbeSpec(ProbeKind.CCT, n_signal=n_signal, n_idler=n_idler)

    # -- derived quantities -------------------------------------------

    @property
    def n_squeeze(self):
        return math.sinh(self.squeeze_mag) ** 2

    @property
    def n_modes(self):
        return 1 if self.kind == ProbeKind.DS else 2


@dataclass(frozen=True)
class Scenario:
    """A probe plus the target/noise parameters of one detection run."""

    probe: ProbeSpec
    kappa: float
    n_bath: float
    modes: int = 1

    def __post_init__(self):
        _check_kappa(self.kappa)
        _check_nonneg("n_bath", self.n_bath)
        if self.modes < 1:
            raise ValueError("modes must be >= 1")


def symplectic_form(n_modes):
    """Standard symplectic form in (X1, P1, X2, P2, ...) ordering."""
    omega = np.zeros((2 * n_modes, 2 * n_modes))
    for k in range(n_modes):
        omega[2 * k, 2 * k + 1] = 1.0
        omega[2 * k + 1, 2 * k] = -1.0
    return omega


@dataclass(frozen=True)
class GaussianState:
    """Mean vector and covariance matrix of a Gaussian state.

    The constructor enforces symmetry of the covariance and the physicality
    (uncertainty) condition sigma + i Omega >= 0 to within 1e-9 on the
    eigenvalues, which absorbs double-precision round-off at n_bath ~ 1e3.
    """

    n_modes: int
    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.array(self.mean, dtype=float)
        cov = np.array(self.cov, dtype=float)
        if mean.shape != (2 * self.n_modes,):
            raise ValueError("mean must have length 2 * n_modes")
        if cov.shape != (2 * self.n_modes, 2 * self.n_modes):
            raise ValueError("cov must be 2K x 2K")
        scale = max(1.0, float(np.max(np.abs(cov))))
        if np.max(np.abs(cov - cov.T)) > 1e-12 * scale:
            raise ValueError("covariance matrix is not symmetric")
        cov = 0.5 * (cov + cov.T)
        eig = np.linalg.eigvalsh(cov + 1j * symplectic_form(self.n_modes))
        if eig.min() < -1e-9 * scale:
            raise ValueError(
                f"unphysical covariance: min eig(sigma + i Omega) = {eig.min():.3e}"
            )
        mean.flags.writeable = False
        cov.flags.writeable = False
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    def mode_marginal(self, mode):
        """Single-mode reduced state (2x2 block of cov, 2-vector of mean)."""
        if not 0 <= mode < self.n_modes:
            raise IndexError(f"mode {mode} out of range")
        s = slice(2 * mode, 2 * mode + 2)
        return self.mean[s].copy(), self.cov[s, s].copy()


# ---------------------------------------------------------------------------
# output-state builders
# ---------------------------------------------------------------------------

def build_ds_output(spec, kappa, n_bath):
    """Reflected single-mode state for a DS probe.

    Covariance entries are A1 -/+ A2 cos(phi_sq) on the diagonal and
    -A2 sin(phi_sq) off it, with A1 = 1 + 2 n_bath + 2 kappa N_sq and
    A2 = 2 kappa sqrt(N_sq (N_sq + 1)); the mean is
    sqrt(2 kappa) |alpha| (cos, sin)(alpha_phase).  kappa = 0 leaves a
    thermal state with zero mean.
    """
    if spec.kind != ProbeKind.DS:
        raise ValueError("build_ds_output requires a DS probe")
    _check_kappa(kappa)
    _check_nonneg("n_bath", n_bath)
    nsq = spec.n_squeeze
    a1 = 1.0 + 2.0 * n_bath + 2.0 * kappa * nsq
    a2 = 2.0 * kappa * math.sqrt(nsq * (nsq + 1.0))
    cp, sp = math.cos(spec.squeeze_phase), math.sin(spec.squeeze_phase)
    cov = np.array([[a1 - a2 * cp, -a2 * sp],
                    [-a2 * sp, a1 + a2 * cp]])
    amp = math.sqrt(2.0 * kappa) * spec.alpha_mag
    mean = amp * np.array([math.cos(spec.alpha_phase), math.sin(spec.alpha_phase)])
    return GaussianState(1, mean, cov)


def build_tmsv_output(n_signal, kappa, n_bath):
    """Reflected signal + retained idler for a TMSV probe."""
    _check_nonneg("n_signal", n_signal)
    _check_kappa(kappa)
    _check_nonneg("n_bath", n_bath)
    b = 1.0 + 2.0 * n_bath + 2.0 * kappa * n_signal
    c = 2.0 * math.sqrt(kappa * n_signal * (n_signal + 1.0))
    s = 1.0 + 2.0 * n_signal
    cov = np.array([[b, 0.0, c, 0.0],
                    [0.0, b, 0.0, -c],
                    [c, 0.0, s, 0.0],
                    [0.0, -c, 0.0, s]])
    return GaussianState(2, np.zeros(4), cov)


def build_cct_output(n_signal, n_idler, kappa, n_bath):
    """Reflected signal + retained idler for a CCT probe."""
    _check_nonneg("n_signal", n_signal)
    _check_nonneg("n_idler", n_idler)
    _check_kappa(kappa)
    _check_nonneg("n_bath", n_bath)
    b = 1.0 + 2.0 * n_bath + 2.0 * kappa * n_signal
    d = 2.0 * math.sqrt(kappa * n_signal * n_idler)
    s = 1.0 + 2.0 * n_idler
    cov = np.array([[b, 0.0, d, 0.0],
                    [0.0, b, 0.0, d],
                    [d, 0.0, s, 0.0],
                    [0.0, d, 0.0, s]])
    return GaussianState(2, np.zeros(4), cov)


def build_output(scenario, kappa_override=None):
    """Post-target state for a scenario, optionally at a different kappa."""
    kappa = scenario.kappa if kappa_override is None else kappa_override
    p = scenario.probe
    if p.kind == ProbeKind.DS:
        return build_ds_output(p, kappa, scenario.n_bath)
    if p.kind == ProbeKind.TMSV:
        return build_tmsv_output(p.n_signal, kappa, scenario.n_bath)
    return build_cct_output(p.n_signal, p.n_idler, kappa, scenario.n_bath)


def build_input(probe):
    """Input state of a probe (the kappa = 1, n_bath = 0 output)."""
    if probe.kind == ProbeKind.DS:
        return build_ds_output(probe, 1.0, 0.0)
    if probe.kind == ProbeKind.TMSV:
        return build_tmsv_output(probe.n_signal, 1.0, 0.0)
    return build_cct_output(probe.n_signal, probe.n_idler, 1.0, 0.0)


# ---------------------------------------------------------------------------
# photon-number moments
# ---------------------------------------------------------------------------

def mean_photon(state, mode):
    """Mean photon number of one mode: (sxx + spp - 2)/4 + (mux^2 + mup^2)/2."""
    mu, sig = state.mode_marginal(mode)
    return (sig[0, 0] + sig[1, 1] - 2.0) / 4.0 + (mu[0] ** 2 + mu[1] ** 2) / 2.0


def _ladder_moments(state):
    """First moments and ordered second contractions of (a1, a1^dag, ...).

    Returns (m, gamma) with m[u] = <O_u> and gamma[u, v] = <dO_u dO_v>
    (operator order preserved), from which arbitrary ordered moments follow
    by the Gaussian moment recursion.
    """
    k = state.n_modes
    omega = symplectic_form(k)
    # non-symmetrized quadrature covariances <dR_i dR_j> = (sigma + i Omega)/2
    rmat = (state.cov + 1j * omega) / 2.0
    t = np.zeros((2 * k, 2 * k), dtype=complex)
    for j in range(k):
        t[2 * j, 2 * j] = 1.0 / _SQRT2
        t[2 * j, 2 * j + 1] = 1j / _SQRT2
        t[2 * j + 1, 2 * j] = 1.0 / _SQRT2
        t[2 * j + 1, 2 * j + 1] = -1j / _SQRT2
    return t @ state.mean.astype(complex), t @ rmat @ t.T


def _ordered_moment(ops, m, gamma, cache):
    if not ops:
        return 1.0 + 0.0j
    val = cache.get(ops)
    if val is not None:
        return val
    head, rest = ops[0], ops[1:]
    out = m[head] * _ordered_moment(rest, m, gamma, cache)
    for j in range(len(rest)):
        c = gamma[head, rest[j]]
        if c != 0.0:
            out += c * _ordered_moment(rest[:j] + rest[j + 1:], m, gamma, cache)
    cache[ops] = out
    return out


def gaussian_number_moment(state, powers):
    """Expectation of the ordered product prod_k (n_k)^powers[k].

    Evaluated exactly by the Gaussian (Wick) moment recursion over ladder
    operators.  Only exponents up to 2 per mode are supported, which covers
    every moment the detection statistics need.
    """
    if len(powers) != state.n_modes:
        raise IndexError("one exponent per mode required")
    ops = []
    for k, p in enumerate(powers):
        if p < 0:
            raise ValueError("exponents must be >= 0")
        if p > 2:
            raise NotImplementedError("number-moment exponents above 2")
        ops.extend([2 * k + 1, 2 * k] * p)  # a^dag a, repeated
    if not ops:
        return 1.0
    m, gamma = _ladder_moments(state)
    val = _ordered_moment(tuple(ops), m, gamma, {})
    if abs(val.imag) > 1e-10 * (1.0 + abs(val.real)):
        raise ArithmeticError(f"number moment came out complex: {val}")
    return float(val.real)


def mandel_q(spec):
    """Mandel Q of the input signal mode: Var(n)/<n> - 1.

    Zero for a coherent probe, N for a thermal signal marginal, and negative
    (sub-Poissonian) for amplitude-squeezed DS probes.
    """
    state = build_input(spec)
    if state.n_modes == 2:
        mu, sig = state.mode_marginal(0)
        state = GaussianState(1, mu, sig)
    n1 = gaussian_number_moment(state, (1,))
    if n1 <= 0.0:
        raise ValueError("Mandel Q undefined for a zero-mean-photon signal")
    n2 = gaussian_number_moment(state, (2,))
    return (n2 - n1 * n1) / n1 - 1.0
