"""Closed-form click and count statistics for both target hypotheses.

On-off detectors distinguish vacuum from not-vacuum; the coincidence
observable for a two-mode probe is (1 - |0><0|)_S x (1 - |0><0|)_I, so its
mean follows from three vacuum probabilities and its variance is
mean (1 - mean).  Photon-number-resolving detectors measure n_S (single
mode) or n_S n_I (two modes); their means and variances reduce to input
photon-number moments of the probe, all of which the Gaussian moment engine
supplies exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np

from .states import (ProbeKind, build_input, gaussian_number_moment,
                     mandel_q)


@dataclass(frozen=True)
class OnOffStats:
    """Joint click distribution plus the coincidence observable's moments.

    `p_joint` has keys "off"/"on" for single-mode probes and
    "off,off"/"off,on"/"on,off"/"on,on" (signal first) for two-mode probes.
    """

    p_joint: dict
    mean_obs: float
    var_obs: float

    def __post_init__(self):
        total = sum(self.p_joint.values())
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"click probabilities sum to {total}, not 1")
        for key, val in self.p_joint.items():
            if not -1e-12 <= val <= 1.0 + 1e-12:
                raise ValueError(f"P({key}) = {val} outside [0, 1]")
        if self.var_obs != self.mean_obs * (1.0 - self.mean_obs):
            raise ValueError("var_obs must equal mean (1 - mean) exactly")


@dataclass(frozen=True)
class PnrStats:
    """Mean and variance of the count observable (n_S or n_S n_I)."""

    mean_obs: float
    var_obs: float

    def __post_init__(self):
        if self.var_obs < 0.0:
            raise ValueError("variance must be >= 0")


def _ds_p_off(probe, kappa, n_bath):
    """Vacuum probability of the reflected single-mode state."""
    nsq = probe.n_squeeze
    a1 = 1.0 + 2.0 * n_bath + 2.0 * kappa * nsq
    a2 = 2.0 * kappa * math.sqrt(nsq * (nsq + 1.0))
    big_l = (n_bath + 1.0) ** 2 + kappa * nsq * (2.0 + 2.0 * n_bath - kappa)
    theta = probe.squeeze_phase - 2.0 * probe.alpha_phase
    expo = -kappa * probe.alpha_mag**2 * (a1 + 1.0 + a2 * math.cos(theta)) / (2.0 * big_l)
    return math.exp(expo) / math.sqrt(big_l)


def _onoff_probs_analytic(scenario, kappa):
    """Outcome probabilities as analytic functions of kappa, continued to
    small negative kappa for finite-difference stencils.  Returns a vector
    in a fixed outcome order: (off,) (on,) or (off,off) (off,on) (on,off)
    (on,on)."""
    nb = scenario.n_bath
    p = scenario.probe
    if p.kind == ProbeKind.DS:
        p_off = _ds_p_off(p, kappa, nb)
        return np.array([p_off, 1.0 - p_off])
    ns = p.n_signal
    p_s0 = 1.0 / (1.0 + nb + kappa * ns)
    if p.kind == ProbeKind.TMSV:
        p_i0 = 1.0 / (1.0 + ns)
        p_00 = 1.0 / ((1.0 + ns) * (1.0 + nb))
    else:
        p_i0 = 1.0 / (1.0 + p.n_idler)
        p_00 = 1.0 / ((1.0 + p.n_idler) * (1.0 + nb) + kappa * ns)
    return np.array([p_00, p_s0 - p_00, p_i0 - p_00,
                     1.0 - p_s0 - p_i0 + p_00])


def _onoff_probs_mp(scenario, kappa):
    """Same closed forms in the active mpmath working precision, so that
    finite-difference stencils can difference them without float
    cancellation.  Returns a list of mpf values."""
    nb = mpmath.mpf(scenario.n_bath)
    k = mpmath.mpf(kappa)
    p = scenario.probe
    if p.kind == ProbeKind.DS:
        nsq = mpmath.mpf(p.n_squeeze)
        a1 = 1 + 2 * nb + 2 * k * nsq
        a2 = 2 * k * mpmath.sqrt(nsq * (nsq + 1))
        big_l = (nb + 1) ** 2 + k * nsq * (2 + 2 * nb - k)
        theta = mpmath.mpf(p.squeeze_phase) - 2 * mpmath.mpf(p.alpha_phase)
        expo = (-k * mpmath.mpf(p.alpha_mag) ** 2
                * (a1 + 1 + a2 * mpmath.cos(theta)) / (2 * big_l))
        p_off = mpmath.exp(expo) / mpmath.sqrt(big_l)
        return [p_off, 1 - p_off]
    ns = mpmath.mpf(p.n_signal)
    p_s0 = 1 / (1 + nb + k * ns)
    if p.kind == ProbeKind.TMSV:
        p_i0 = 1 / (1 + ns)
        p_00 = 1 / ((1 + ns) * (1 + nb))
    else:
        ni = mpmath.mpf(p.n_idler)
        p_i0 = 1 / (1 + ni)
        p_00 = 1 / ((1 + ni) * (1 + nb) + k * ns)
    return [p_00, p_s0 - p_00, p_i0 - p_00, 1 - p_s0 - p_i0 + p_00]


def onoff_stats(scenario, kappa_override=None):
    """Click statistics of a scenario, optionally at an overridden kappa
    (so one scenario serves both the target-on and target-off hypotheses).

    Closed forms: the single-mode vacuum probability for DS probes, and for
    TMSV/CCT the three vacuum projections composing the joint outcomes.
    """
    kappa = scenario.kappa if kappa_override is None else kappa_override
    if kappa < 0.0:
        raise ValueError("kappa must be >= 0")
    nb = scenario.n_bath
    p = scenario.probe
    if p.kind == ProbeKind.DS:
        p_off = _ds_p_off(p, kappa, nb)
        mean = 1.0 - p_off
        return OnOffStats({"off": p_off, "on": mean}, mean, mean * (1.0 - mean))
    ns = p.n_signal
    p_s0 = 1.0 / (1.0 + nb + kappa * ns)
    if p.kind == ProbeKind.TMSV:
        p_i0 = 1.0 / (1.0 + ns)
        p_00 = 1.0 / ((1.0 + ns) * (1.0 + nb))
    else:
        ni = p.n_idler
        p_i0 = 1.0 / (1.0 + ni)
        p_00 = 1.0 / ((1.0 + ni) * (1.0 + nb) + kappa * ns)
    joint = {"off,off": p_00,
             "off,on": p_s0 - p_00,
             "on,off": p_i0 - p_00,
             "on,on": 1.0 - p_s0 - p_i0 + p_00}
    mean = joint["on,on"]
    return OnOffStats(joint, mean, mean * (1.0 - mean))


def onoff_joint_from_grid(grid, max_tail=None):
    """Coarse-grain a probability grid into click outcomes.

    Entries agree with the closed forms to within the grid's tail bound;
    the residual unresolved mass is assigned to the all-on outcome.  Pass
    `max_tail` to reject grids too loose to certify a desired tolerance.
    """
    if max_tail is not None and grid.tail_mass > max_tail:
        raise ValueError(
            f"grid tail {grid.tail_mass:.3e} exceeds requested bound {max_tail:.3e}")
    p = np.exp(grid.log_probs)
    if len(grid.dims) == 1:
        p_off = float(p[0])
        mean = 1.0 - p_off
        return OnOffStats({"off": p_off, "on": mean}, mean, mean * (1.0 - mean))
    p_00 = float(p[0, 0])
    p_s0 = float(p[0, :].sum())
    p_i0 = float(p[:, 0].sum())
    # writing on,on as 1 - ... assigns the unresolved tail mass to it
    joint = {"off,off": p_00,
             "off,on": p_s0 - p_00,
             "on,off": p_i0 - p_00,
             "on,on": 1.0 - p_s0 - p_i0 + p_00}
    mean = joint["on,on"]
    return OnOffStats(joint, mean, mean * (1.0 - mean))


def cc_mean_difference(scenario, detector, kappa_override=None):
    """Exact mean shift <O>_kappa - <O>_0 of the counting observable.

    Rearranged so nothing cancels when kappa N_S << n_bath (the raw
    subtraction loses ~log10(n_bath / kappa N_S) digits): the bath term
    drops out of the count means analytically, and the click-rate shift
    reduces to expm1/log1p forms.
    """
    kappa = scenario.kappa if kappa_override is None else kappa_override
    if kappa < 0.0:
        raise ValueError("kappa must be >= 0")
    nb = scenario.n_bath
    p = scenario.probe
    ns = p.n_signal
    if detector == "pnr":
        if p.kind == ProbeKind.DS:
            return kappa * ns
        return kappa * gaussian_number_moment(build_input(p), (1, 1))
    if p.kind == ProbeKind.DS:
        nsq = p.n_squeeze
        a1 = 1.0 + 2.0 * nb + 2.0 * kappa * nsq
        a2 = 2.0 * kappa * math.sqrt(nsq * (nsq + 1.0))
        l0 = (nb + 1.0) ** 2
        dl = kappa * nsq * (2.0 + 2.0 * nb - kappa)
        theta = p.squeeze_phase - 2.0 * p.alpha_phase
        y = (kappa * p.alpha_mag**2 * (a1 + 1.0 + a2 * math.cos(theta))
             / (2.0 * (l0 + dl)) + 0.5 * math.log1p(dl / l0))
        return -math.expm1(-y) / (nb + 1.0)
    if p.kind == ProbeKind.TMSV:
        # only the signal-vacuum projector moves with kappa
        return kappa * ns / ((1.0 + nb) * (1.0 + nb + kappa * ns))
    ni = p.n_idler
    f0 = (1.0 + nb) * (1.0 + ni)
    fk = f0 + kappa * ns
    # signal-vacuum and joint-vacuum shifts combined, their difference of
    # reciprocals factored exactly:
    # f0 fk - (1+nb)(1+nb+kappa ns) = (1+nb) ni [(1+nb)(2+ni) + kappa ns]
    gap = (1.0 + nb) * ni * ((1.0 + nb) * (2.0 + ni) + kappa * ns)
    return kappa * ns * gap / ((1.0 + nb) * (1.0 + nb + kappa * ns) * f0 * fk)


def pnr_stats_single(scenario, kappa_override=None):
    """Count statistics of the reflected signal for a single-mode probe:
    mean kappa <n>_in + n_bath and variance
    kappa <n>_in (1 + 2 n_bath + kappa Q_M) + n_bath (1 + n_bath)."""
    p = scenario.probe
    if p.kind != ProbeKind.DS:
        raise ValueError("pnr_stats_single requires a single-mode probe")
    kappa = scenario.kappa if kappa_override is None else kappa_override
    if kappa < 0.0:
        raise ValueError("kappa must be >= 0")
    nb = scenario.n_bath
    n_in = p.n_signal
    mean = kappa * n_in + nb
    if kappa == 0.0 or n_in == 0.0:
        var = nb * (1.0 + nb)
    else:
        var = kappa * n_in * (1.0 + 2.0 * nb + kappa * mandel_q(p)) + nb * (1.0 + nb)
    return PnrStats(mean, var)


def pnr_stats_joint(scenario, kappa_override=None):
    """Coincidence-count statistics for a two-mode probe.

    The mean is kappa <n_S n_I>_in + n_bath <n_I>_in; the variance combines
    the input moments <n_I>, <n_I^2>, <n_S n_I>, <n_S n_I^2> and
    <(n_S n_I)^2>, exact for zero-mean Gaussian inputs.
    """
    p = scenario.probe
    if p.kind == ProbeKind.DS:
        raise ValueError("pnr_stats_joint requires a two-mode probe")
    kappa = scenario.kappa if kappa_override is None else kappa_override
    if kappa < 0.0:
        raise ValueError("kappa must be >= 0")
    nb = scenario.n_bath
    state_in = build_input(p)
    m_si = gaussian_number_moment(state_in, (1, 1))
    m_i1 = gaussian_number_moment(state_in, (0, 1))
    m_i2 = gaussian_number_moment(state_in, (0, 2))
    m_si2 = gaussian_number_moment(state_in, (1, 2))
    m_sisi = gaussian_number_moment(state_in, (2, 2))
    mean = kappa * m_si + nb * m_i1
    var = (kappa**2 * (m_sisi - m_si**2)
           + nb * m_i2
           + nb**2 * (2.0 * m_i2 - m_i1**2)
           - 2.0 * kappa * nb * m_si * m_i1
           + kappa * (1.0 - kappa + 4.0 * nb) * m_si2)
    return PnrStats(mean, var)
