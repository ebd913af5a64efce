"""Signal-to-noise figures of merit, their asymptotic forms, and the
optimization/crossover utilities built on top of them.

Two routes are implemented:

* coincidence counting (CC): SNR = M (dmean)^2 / (2 (sd_k + sd_0)^2) from
  the detection statistics of the two hypotheses;

* Fisher information (FI): SNR = (M kappa^2 / 8) * sum_n (d_k P_n)^2 / P_n
  evaluated at kappa = 0, over the click outcomes (on-off) or the full
  photon-number grid (PNR).  Derivatives are central finite differences
  with Richardson refinement and a step-halving consistency check; the
  closed forms and kernels extend analytically to the negative-kappa points
  of the stencil.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import mpmath
import numpy as np

from .bargmann import pnr_stencil
from .detection import (_onoff_probs_analytic, _onoff_probs_mp,
                        cc_mean_difference, onoff_stats, pnr_stats_joint,
                        pnr_stats_single)
from .states import (ProbeKind, ProbeSpec, Scenario, build_input,
                     gaussian_number_moment)

METHODS = ("cc", "fi")
DETECTORS = ("onoff", "pnr")


class FiConvergenceError(ArithmeticError):
    """Finite-difference derivative failed its step-halving check."""

    def __init__(self, message, diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics


@dataclass(frozen=True)
class SnrReport:
    method: str
    detector: str
    exact: float
    asymptotic: float
    scenario: Scenario
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.exact >= 0.0:
            raise ValueError("exact SNR must be >= 0")
        if not self.asymptotic >= 0.0:
            raise ValueError("asymptotic SNR must be >= 0")


def _cc_moments(scenario, detector, kappa):
    if detector == "onoff":
        s = onoff_stats(scenario, kappa_override=kappa)
    elif scenario.probe.kind == ProbeKind.DS:
        s = pnr_stats_single(scenario, kappa_override=kappa)
    else:
        s = pnr_stats_joint(scenario, kappa_override=kappa)
    return s.mean_obs, s.var_obs


def snr_cc(scenario, detector="onoff"):
    """Coincidence-counting SNR of a scenario for the chosen detector.

    The numerator uses the analytically rearranged mean difference, which
    stays fully accurate when kappa N_S << n_bath swamps the raw
    subtraction of the two hypothesis means.
    """
    if detector not in DETECTORS:
        raise ValueError(f"unknown detector {detector!r}")
    _, var_k = _cc_moments(scenario, detector, scenario.kappa)
    _, var_0 = _cc_moments(scenario, detector, 0.0)
    diff = cc_mean_difference(scenario, detector)
    denom = 2.0 * (math.sqrt(var_k) + math.sqrt(var_0)) ** 2
    if denom == 0.0:
        exact = 0.0 if diff == 0.0 else float("inf")
    else:
        exact = scenario.modes * diff * diff / denom
    return SnrReport("cc", detector, exact,
                     asymptotic_snr(scenario, "cc", detector), scenario,
                     {"mean_diff": diff, "var_on": var_k, "var_off": var_0})


# ---------------------------------------------------------------------------
# Fisher information
# ---------------------------------------------------------------------------

def _fi_onoff(scenario, step=3e-3):
    """FI of the click distribution at kappa = 0 via the closed forms.

    The +-h probability differences are formed in extended precision (the
    outcome values are O(1) while their kappa-slopes can be ~N_S/N_B^2, far
    below the float cancellation floor)."""
    p0 = _onoff_probs_analytic(scenario, 0.0)

    def central(h):
        with mpmath.workdps(50):
            plus = _onoff_probs_mp(scenario, h)
            minus = _onoff_probs_mp(scenario, -h)
            return np.array([float((a - b) / (2 * h))
                             for a, b in zip(plus, minus)])

    d1 = central(step)
    d2 = central(step / 2.0)
    dr = (4.0 * d2 - d1) / 3.0

    def assemble(d):
        out = 0.0
        for pi, di in zip(p0, d):
            if pi > 0.0:
                out += di * di / pi
            elif abs(di) > 1e-13:
                raise ArithmeticError(
                    "zero-probability outcome with nonzero kappa-derivative")
        return out

    fi = assemble(dr)
    fi_h, fi_h2 = assemble(d1), assemble(d2)
    disagree = abs(fi_h - fi_h2) / fi if fi > 0.0 else 0.0
    return fi, {"fi_step": fi_h, "fi_halfstep": fi_h2,
                "fd_disagreement": disagree, "step": step}


def _fi_pnr(scenario, step=1e-3, target_tail=1e-10, shell_rtol=1e-8,
            fd_rtol=1e-5, max_grow=3, max_refine=6):
    """FI of the full photon-number distribution at kappa = 0.

    Uses the shared-box log-probability stencil.  The truncation is grown
    until the boundary shell contributes less than `shell_rtol` of the
    running sum (on top of the certified probability tail), and the step is
    shrunk until the step-halving disagreement passes `fd_rtol` (the
    kappa-analyticity scale narrows at small n_bath, so a fixed step cannot
    serve every regime).
    """
    dims = None
    h = step
    fi, diag = 0.0, {}
    for _ in range(max_refine):
        try:
            for _ in range(max_grow + 1):
                st = pnr_stencil(scenario, h, target_tail=target_tail, dims=dims)
                dims = st.dims
                p0 = np.exp(st.logp0)
                dr = (4.0 * st.dlog_h2 - st.dlog_h) / 3.0
                contrib = p0 * dr * dr
                fi = float(contrib.sum())
                if len(st.dims) == 1:
                    shell = float(contrib[-1])
                else:
                    shell = float(contrib[-1, :].sum() + contrib[:, -1].sum())
                if fi == 0.0 or shell <= shell_rtol * fi:
                    break
                dims = tuple(int(d * 1.35) + 2 for d in st.dims)
        except ArithmeticError:
            # the continuation to -h left the positive domain at a far
            # corner of the box; a smaller step always restores it
            if h <= 1e-8:
                raise
            h /= 8.0
            continue
        fi_h = float((p0 * st.dlog_h**2).sum())
        fi_h2 = float((p0 * st.dlog_h2**2).sum())
        disagree = abs(fi_h - fi_h2) / fi if fi > 0.0 else 0.0
        diag = {"fi_step": fi_h, "fi_halfstep": fi_h2,
                "fd_disagreement": disagree, "step": h, "dims": st.dims,
                "shell_fraction": shell / fi if fi > 0.0 else 0.0,
                "grid_tail": target_tail}
        if disagree <= fd_rtol or h <= 1e-8:
            break
        h /= 8.0
    return fi, diag


def snr_fi(scenario, detector="onoff", step=1e-3, target_tail=1e-10,
           fd_rtol=1e-5):
    """Fisher-information SNR (M kappa^2 / 8) * FI(kappa = 0).

    Raises FiConvergenceError when the step-halving disagreement exceeds
    `fd_rtol`, and rejects n_bath = 0 (outcomes with vanishing probability
    but finite slope make the information diverge there).
    """
    if detector not in DETECTORS:
        raise ValueError(f"unknown detector {detector!r}")
    if scenario.n_bath <= 0.0:
        raise ValueError("Fisher-information SNR requires n_bath > 0")
    if scenario.probe.n_signal == 0.0:
        fi, diag = 0.0, {"fd_disagreement": 0.0, "step": step}
    elif detector == "onoff":
        fi, diag = _fi_onoff(scenario, step=step)
    else:
        fi, diag = _fi_pnr(scenario, step=step, target_tail=target_tail,
                           fd_rtol=fd_rtol)
    if diag["fd_disagreement"] > fd_rtol:
        raise FiConvergenceError(
            f"finite-difference FI disagreement {diag['fd_disagreement']:.2e} "
            f"exceeds {fd_rtol:.2e}", diag)
    exact = scenario.modes * scenario.kappa**2 / 8.0 * fi
    diag["fisher_information"] = fi
    return SnrReport("fi", detector, exact,
                     asymptotic_snr(scenario, "fi", detector), scenario, diag)


def snr(scenario, method, detector):
    if method == "cc":
        return snr_cc(scenario, detector)
    if method == "fi":
        return snr_fi(scenario, detector)
    raise ValueError(f"unknown method {method!r}")


# ---------------------------------------------------------------------------
# asymptotic formulas
# ---------------------------------------------------------------------------

def _safe_div(num, den):
    if den == 0.0:
        return float("inf") if num > 0.0 else 0.0
    return num / den


def asymptotic_snr(scenario, method, detector, variant="refined"):
    """Closed asymptotic SNR formula for the scenario's probe family.

    variant="table" gives the deep-limit forms (N_S, N_I, kappa << 1 << N_B);
    variant="refined" keeps the finite-N_B / finite-N_S structure: the exact
    closed-form information for on-off FI, the (N_B+1)-corrected forms for
    PNR FI, and the small-difference limit M (dmean)^2 / (8 var_0) with exact
    moments for CC.
    """
    if method not in METHODS or detector not in DETECTORS:
        raise ValueError(f"unsupported combination {method!r}/{detector!r}")
    if variant not in ("table", "refined"):
        raise ValueError(f"unknown variant {variant!r}")
    p = scenario.probe
    m = scenario.modes
    kap = scenario.kappa
    nb = scenario.n_bath
    ns = p.n_signal
    ni = p.n_idler
    pre = m * kap * kap
    kind = p.kind
    if variant == "table":
        if method == "cc" and detector == "onoff":
            if kind == ProbeKind.DS:
                return _safe_div(pre * ns * ns, 8.0 * nb**3)
            if kind == ProbeKind.CCT:
                return _safe_div(pre * ns * ns * ni, 2.0 * nb**4)
            return _safe_div(pre * ns, 8.0 * nb**4)
        if method == "fi" and detector == "onoff":
            if kind == ProbeKind.TMSV:
                return _safe_div(pre * ns, 8.0 * nb**3)
            return _safe_div(pre * ns * ns, 8.0 * nb**3)
        if method == "cc" and detector == "pnr":
            if kind == ProbeKind.DS:
                return _safe_div(pre * ns * ns, 8.0 * nb**2)
            if kind == ProbeKind.CCT:
                return _safe_div(pre * ns * ns * ni, 4.0 * nb**2)
            return _safe_div(pre * ns, 16.0 * nb**2)
        if kind == ProbeKind.TMSV:
            return _safe_div(pre * ns, 8.0 * nb**2)
        return _safe_div(pre * ns * ns, 8.0 * nb**2)
    if method == "fi":
        if detector == "onoff":
            if kind == ProbeKind.DS:
                return _safe_div(pre * ns * ns, 8.0 * nb * (nb + 1.0) ** 2)
            if kind == ProbeKind.TMSV:
                return _safe_div(pre * ns * (ns + 1.0), 8.0 * nb * (nb + 1.0) ** 2)
            return _safe_div(pre * ns * ns * (1.0 + ni / (1.0 + ni) ** 2),
                             8.0 * nb * (nb + 1.0) ** 2)
        if kind == ProbeKind.DS:
            return _safe_div(pre * ns * ns, 8.0 * nb * (nb + 1.0))
        if kind == ProbeKind.TMSV:
            return _safe_div(pre * ns * (1.0 + 2.0 * ns), 8.0 * nb * (nb + 1.0))
        return _safe_div(pre * ns * ns * (1.0 + 2.0 * ni),
                         8.0 * nb * (nb + 1.0) * (1.0 + ni))
    # refined CC: small-difference limit of the counting SNR with exact
    # target-off variance
    if detector == "pnr" and kind != ProbeKind.DS:
        state_in = build_input(p)
        m_si = gaussian_number_moment(state_in, (1, 1))
        m_i1 = gaussian_number_moment(state_in, (0, 1))
        m_i2 = gaussian_number_moment(state_in, (0, 2))
        return _safe_div(pre * m_si * m_si,
                         8.0 * (nb**2 * (2.0 * m_i2 - m_i1**2) + nb * m_i2))
    if detector == "pnr":
        return _safe_div(pre * ns * ns, 8.0 * nb * (nb + 1.0))
    s_off = onoff_stats(scenario, kappa_override=0.0)
    diff = cc_mean_difference(scenario, "onoff")
    return _safe_div(m * diff * diff, 8.0 * s_off.var_obs)


# ---------------------------------------------------------------------------
# derived quantities and searches
# ---------------------------------------------------------------------------

class ErrorProb(NamedTuple):
    value: float
    clamped: bool


def error_prob(snr_value):
    """Detection error probability exp(-SNR), clamped at equal-prior
    guessing (1/2); `clamped` flags SNR below ln 2 where the exponential
    approximation stops being meaningful."""
    if snr_value < 0.0:
        raise ValueError("SNR must be >= 0")
    raw = math.exp(-snr_value)
    return ErrorProb(min(raw, 0.5), raw > 0.5)


class SplitOptimum(NamedTuple):
    alpha_sq: float
    snr: float
    flat: bool


def optimize_ds_split(n_signal, kappa, n_bath, detector="onoff", method="cc",
                      modes=1, tol=1e-5):
    """Best coherent/squeezed energy split of a DS probe at fixed N_S.

    Maximizes the SNR over s = |alpha|^2 / N_S in [0, 1] at the optimal
    phase alignment, by golden-section search after a coarse scan; a
    non-unimodal scan falls back to a dense scan to bracket the global
    maximum.  Returns the split's |alpha|^2, the SNR there, and a flag for
    degenerate (flat) objectives.
    """
    if n_signal <= 0.0:
        raise ValueError("n_signal must be > 0")

    def objective(s):
        probe = ProbeSpec.ds_from_split(n_signal, min(max(s, 0.0), 1.0))
        scn = Scenario(probe, kappa, n_bath, modes)
        rep = snr_cc(scn, detector) if method == "cc" else snr_fi(scn, detector)
        return rep.exact

    coarse = np.linspace(0.0, 1.0, 41)
    vals = np.array([objective(s) for s in coarse])
    if np.all(vals == vals[0]):
        return SplitOptimum(float(coarse[-1] * n_signal), float(vals[0]), True)
    interior = (vals[1:-1] > vals[:-2]) & (vals[1:-1] >= vals[2:])
    if np.count_nonzero(interior) > 1:
        dense = np.linspace(0.0, 1.0, 2001)
        dvals = np.array([objective(s) for s in dense])
        i = int(np.argmax(dvals))
        lo = dense[max(i - 1, 0)]
        hi = dense[min(i + 1, len(dense) - 1)]
    else:
        i = int(np.argmax(vals))
        lo = coarse[max(i - 1, 0)]
        hi = coarse[min(i + 1, len(coarse) - 1)]
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = hi - invphi * (hi - lo)
    x2 = lo + invphi * (hi - lo)
    f1, f2 = objective(x1), objective(x2)
    while hi - lo > tol:
        if f1 < f2:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + invphi * (hi - lo)
            f2 = objective(x2)
        else:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - invphi * (hi - lo)
            f1 = objective(x1)
    s_best = (lo + hi) / 2.0
    return SplitOptimum(float(s_best * n_signal), objective(s_best), False)


def probe_family(kind, n_idler=None, split=None):
    """Probe factory N_S -> ProbeSpec for crossover sweeps."""
    kind = str(kind).lower()
    if kind == "coherent":
        return ProbeSpec.coherent
    if kind == "tmsv":
        return ProbeSpec.tmsv
    if kind == "cct":
        if n_idler is None:
            raise ValueError("CCT family needs n_idler")
        return lambda ns: ProbeSpec.cct(ns, n_idler)
    if kind == "ds":
        s = 1.0 if split is None else split
        return lambda ns: ProbeSpec.ds_from_split(ns, s)
    raise ValueError(f"unknown probe kind {kind!r}")


def find_crossover(family_a, family_b, ns_range, *, kappa, n_bath, modes=1,
                   detector="onoff", method="cc", rtol=1e-3, scan_points=41):
    """N_S at which the two probes' SNRs cross, or None if they do not.

    Scans a log grid over `ns_range` for a sign change of SNR_a - SNR_b and
    bisects it (in log N_S) down to the requested relative width.
    """
    if isinstance(family_a, str):
        family_a = probe_family(family_a)
    if isinstance(family_b, str):
        family_b = probe_family(family_b)
    ns_lo, ns_hi = ns_range
    if not (0.0 < ns_lo < ns_hi):
        raise ValueError("need 0 < ns_lo < ns_hi")

    def gap(ns):
        scn_a = Scenario(family_a(ns), kappa, n_bath, modes)
        scn_b = Scenario(family_b(ns), kappa, n_bath, modes)
        rep_a = snr_cc(scn_a, detector) if method == "cc" else snr_fi(scn_a, detector)
        rep_b = snr_cc(scn_b, detector) if method == "cc" else snr_fi(scn_b, detector)
        return rep_a.exact - rep_b.exact

    grid = np.geomspace(ns_lo, ns_hi, scan_points)
    vals = [gap(ns) for ns in grid]
    bracket = None
    for i in range(len(grid) - 1):
        if vals[i] * vals[i + 1] < 0.0:
            bracket = (grid[i], grid[i + 1], vals[i])
            break
        # an exact zero only counts as a crossover when the sign flips
        if (vals[i] == 0.0 and 0 < i
                and vals[i - 1] * vals[i + 1] < 0.0):
            return float(grid[i])
    if bracket is None:
        return None
    lo, hi, f_lo = bracket
    while hi / lo - 1.0 > rtol:
        mid = math.sqrt(lo * hi)
        f_mid = gap(mid)
        if f_mid == 0.0:
            return float(mid)
        if f_mid * f_lo > 0.0:
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return float(math.sqrt(lo * hi))
