"""Generating-function encoding of the output states and Fock-diagonal
probability extraction.

Each post-target state is written as an exponential generating function
K(z, w*) whose monomial coefficients carry the number-basis matrix elements:
<n|rho|m> = sqrt(n! m!) * (coefficient of z^n w*^m).  The detectors only see
diagonals, and for every probe family the diagonal coefficient reduces to a
short ladder sum:

* two-mode kernels couple z1 w1*, z2 w2* and one cross pair, so
  P(n, m) = n! m! e^pref * sum_k g1^(n-k) g2^(m-k) t^(2k) / ((n-k)!(m-k)!(k!)^2)

* the single-mode kernel has z w*, z^2, w*^2 and linear terms, giving
  P(n) = n! e^(pref+const) * sum_p (u_p v_p) a^(n-p) / (n-p)!
  where u_p, v_p are the series coefficients of exp(b z^2 + d z) and its
  w*-side partner, generated by a three-term recurrence.

Everything is accumulated in the log domain with sign tracking; the sums are
rearranged so that no large factorial is ever added and then subtracted
(log P is needed to ~1e-12 absolute for the Fisher-information stencils).
Truncation boxes come with certified tail bounds: exact geometric tails for
thermal marginals, otherwise a Chernoff bound built from the closed-form
generating function E[x^n] of a Gaussian marginal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import mpmath
import numpy as np
from scipy.special import gammaln, logsumexp

from .states import GaussianState, ProbeKind, build_output

_NEG_INF = float("-inf")


class GridResourceError(RuntimeError):
    """Raised when a truncation box cannot reach the requested tail bound
    within the configured size cap; carries the tail actually achieved."""

    def __init__(self, message, achieved_tail):
        super().__init__(message)
        self.achieved_tail = achieved_tail


# ---------------------------------------------------------------------------
# form construction
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BargmannForm:
    """Exponential generating function exp(quad + lin + const) / prefactor.

    Variables are ordered (z_1 .. z_K, w*_1 .. w*_K).  `quad[i, j]` holds the
    full coefficient of v_i v_j (each unordered pair counted once, stored
    symmetrically); `lin` the linear coefficients; `const_term` the constant
    in the exponent; `log_prefactor` the log of the overall scalar factor.
    """

    n_vars: int
    log_prefactor: float
    quad: np.ndarray
    lin: np.ndarray
    const_term: float
    family: str = "generic"
    state: GaussianState | None = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        quad = np.array(self.quad, dtype=complex)
        lin = np.array(self.lin, dtype=complex)
        if quad.shape != (self.n_vars, self.n_vars):
            raise ValueError("quad must be n_vars x n_vars")
        if lin.shape != (self.n_vars,):
            raise ValueError("lin must have length n_vars")
        if np.max(np.abs(quad - quad.T)) > 1e-12 * (1.0 + np.max(np.abs(quad))):
            raise ValueError("quad must be symmetric")
        quad.flags.writeable = False
        lin.flags.writeable = False
        object.__setattr__(self, "quad", quad)
        object.__setattr__(self, "lin", lin)
        self._check_hermitian()

    @property
    def n_modes(self):
        return self.n_vars // 2

    def _check_hermitian(self):
        """The encoded operator is Hermitian iff the form is invariant under
        swapping z <-> w* together with complex conjugation."""
        k = self.n_modes
        perm = np.r_[np.arange(k, 2 * k), np.arange(k)]
        scale = 1.0 + np.max(np.abs(self.quad)) + np.max(np.abs(self.lin))
        if (np.max(np.abs(np.conj(self.quad[np.ix_(perm, perm)]) - self.quad))
                > 1e-12 * scale):
            raise ValueError("form violates Hermitian symmetry (quad)")
        if np.max(np.abs(np.conj(self.lin[perm]) - self.lin)) > 1e-12 * scale:
            raise ValueError("form violates Hermitian symmetry (lin)")
        if abs(complex(self.const_term).imag) > 1e-12 * (1.0 + abs(self.const_term)):
            raise ValueError("form violates Hermitian symmetry (const)")


def _sqrt_signed(kappa):
    """sqrt(kappa) continued to small negative kappa (used only inside
    finite-difference stencils; probabilities stay analytic in kappa)."""
    return math.sqrt(kappa) if kappa >= 0 else 1j * math.sqrt(-kappa)


def _ds_coeffs(alpha_mag, alpha_phase, nsq, squeeze_phase, kappa, n_bath):
    a1 = 1.0 + 2.0 * n_bath + 2.0 * kappa * nsq
    a2 = 2.0 * kappa * math.sqrt(nsq * (nsq + 1.0))
    big_l = (n_bath + 1.0) ** 2 + kappa * nsq * (2.0 + 2.0 * n_bath - kappa)
    alpha = alpha_mag * np.exp(1j * alpha_phase)
    eiv = np.exp(1j * squeeze_phase)
    a_zw = (a1 * a1 - a2 * a2 - 1.0) / (4.0 * big_l)
    b_zz = -a2 * eiv / (4.0 * big_l)
    sk = _sqrt_signed(kappa)
    d_z = sk * (alpha * (a1 + 1.0) + np.conj(alpha) * eiv * a2) / (2.0 * big_l)
    const = (-kappa * alpha_mag**2
             * (a1 + 1.0 + a2 * math.cos(2.0 * alpha_phase - squeeze_phase))
             / (2.0 * big_l))
    return a_zw, b_zz, d_z, const, -0.5 * math.log(big_l)


def _tmsv_coeffs(ns, kappa, n_bath):
    bm1 = 2.0 * n_bath + 2.0 * kappa * ns
    c2 = 4.0 * kappa * ns * (ns + 1.0)
    e = (n_bath + 1.0) * (ns + 1.0)
    g1 = (2.0 * (ns + 1.0) * bm1 - c2) / (4.0 * e)
    g2 = (2.0 * ns * (bm1 + 2.0) - c2) / (4.0 * e)
    t2 = c2 / (4.0 * e * e)
    return g1, g2, t2, -math.log(e)


def _cct_coeffs(ns, ni, kappa, n_bath):
    bm1 = 2.0 * n_bath + 2.0 * kappa * ns
    d2 = 4.0 * kappa * ns * ni
    f = (n_bath + 1.0) * (ni + 1.0) + kappa * ns
    g1 = (2.0 * (ni + 1.0) * bm1 - d2) / (4.0 * f)
    g2 = (2.0 * ni * (bm1 + 2.0) - d2) / (4.0 * f)
    t2 = d2 / (4.0 * f * f)
    return g1, g2, t2, -math.log(f)


def bargmann_of(scenario, kappa_override=None):
    """Generating-function form of the post-target state of a scenario."""
    kappa = scenario.kappa if kappa_override is None else kappa_override
    if kappa < 0.0:
        raise ValueError("bargmann_of requires kappa >= 0; the stencil "
                         "machinery handles the analytic continuation")
    nb = scenario.n_bath
    p = scenario.probe
    state = build_output(scenario, kappa_override=kappa)
    params = {"family": p.kind.value, "kappa": kappa, "nb": nb,
              "ns": p.n_signal, "ni": p.n_idler, "split": None}
    if p.kind == ProbeKind.DS:
        a_zw, b_zz, d_z, const, logpref = _ds_coeffs(
            p.alpha_mag, p.alpha_phase, p.n_squeeze, p.squeeze_phase, kappa, nb)
        quad = np.array([[b_zz, a_zw], [a_zw, np.conj(b_zz)]])
        lin = np.array([d_z, np.conj(d_z)])
        params["split"] = 0.0 if p.n_signal == 0 else p.alpha_mag**2 / p.n_signal
        return BargmannForm(2, logpref, quad, lin, const,
                            family="ds", state=state, params=params)
    if p.kind == ProbeKind.TMSV:
        g1, g2, t2, logpref = _tmsv_coeffs(p.n_signal, kappa, nb)
        t = _sqrt_signed(t2)
        quad = np.array([[0.0, t, g1, 0.0],
                         [t, 0.0, 0.0, g2],
                         [g1, 0.0, 0.0, t],
                         [0.0, g2, t, 0.0]], dtype=complex)
        return BargmannForm(4, logpref, quad, np.zeros(4, complex), 0.0,
                            family="tmsv", state=state, params=params)
    g1, g2, t2, logpref = _cct_coeffs(p.n_signal, p.n_idler, kappa, nb)
    t = _sqrt_signed(t2)
    quad = np.array([[0.0, 0.0, g1, t],
                     [0.0, 0.0, t, g2],
                     [g1, t, 0.0, 0.0],
                     [t, g2, 0.0, 0.0]], dtype=complex)
    return BargmannForm(4, logpref, quad, np.zeros(4, complex), 0.0,
                        family="cct", state=state, params=params)


def _form_scalars(form):
    """Reduced coefficient set for the family fast paths."""
    if form.family == "ds":
        b = complex(form.quad[0, 0])
        a = complex(form.quad[0, 1])
        d = complex(form.lin[0])
        e = complex(form.lin[1])
        return a.real, b, d, e, float(form.const_term), form.log_prefactor
    if form.family in ("tmsv", "cct"):
        g1 = complex(form.quad[0, 2]).real
        g2 = complex(form.quad[1, 3]).real
        t = complex(form.quad[0, 1]) if form.family == "tmsv" else complex(form.quad[0, 3])
        t2 = (t * t).real
        return g1, g2, t2, form.log_prefactor
    raise ValueError(f"no scalar reduction for family {form.family!r}")


# ---------------------------------------------------------------------------
# single-mode ladder evaluation
# ---------------------------------------------------------------------------

def _ds_ladder(b, d, e, pcap):
    """Log-magnitudes and signs of u_p * v_p, where u_p are the series
    coefficients of exp(b z^2 + d z) and v_p of exp(b* w^2 + e w).

    Run as a magnitude/phase three-term recurrence so arbitrarily small
    coefficients never underflow.  The diagonal products u_p v_p must come
    out real (Hermiticity); this is asserted and their signs returned.
    """
    c = np.conj(b)
    lu = np.full(pcap + 1, _NEG_INF)
    lv = np.full(pcap + 1, _NEG_INF)
    pu = np.zeros(pcap + 1, complex)
    pv = np.zeros(pcap + 1, complex)
    lu[0] = lv[0] = 0.0
    pu[0] = pv[0] = 1.0

    def step(lmag, phase, coef_lin, coef_quad, p):
        # value_{p+1} = (coef_lin * value_p + coef_quad * value_{p-1})/(p+1)
        lm = max(lmag[p], lmag[p - 1] if p >= 1 else _NEG_INF)
        if lm == _NEG_INF:
            return _NEG_INF, 0.0j
        t = coef_lin * phase[p] * math.exp(lmag[p] - lm) if lmag[p] > _NEG_INF else 0.0
        if p >= 1 and lmag[p - 1] > _NEG_INF:
            t = t + 2.0 * coef_quad * phase[p - 1] * math.exp(lmag[p - 1] - lm)
        t = t / (p + 1.0)
        m = abs(t)
        if m == 0.0:
            return _NEG_INF, 0.0j
        return lm + math.log(m), t / m

    for p in range(0, pcap):
        lu[p + 1], pu[p + 1] = step(lu, pu, d, b, p)
        lv[p + 1], pv[p + 1] = step(lv, pv, e, c, p)
    luv = lu + lv
    phase = pu * pv
    mag = np.abs(phase)
    live = luv > _NEG_INF
    if np.any(np.abs(phase.imag[live]) > 1e-9 * np.maximum(mag[live], 1e-300)):
        raise ArithmeticError("diagonal ladder product is not real")
    signs = np.where(phase.real >= 0.0, 1.0, -1.0)
    luv = np.where(live, luv + np.log(np.maximum(mag, 1e-300)), _NEG_INF)
    return luv, signs


def _ds_logT(a, b, d, e, nmax, rtol=1e-18):
    """log T(n) with T(n) = sum_p (u_p v_p) Fall(n, p) a^(-p) for n <= nmax.

    Requires a > 0.  Returns (logT, sign) arrays; sign can only deviate from
    +1 under the negative-kappa analytic continuation.
    """
    if a <= 0.0:
        raise ValueError("ladder rearrangement needs a positive zw* coefficient")
    pcap = 64
    loga = math.log(a)
    lognmax = math.log(max(nmax, 1))
    while True:
        luv, signs = _ds_ladder(b, d, e, pcap)
        # envelope of the relative p-term size, term_p <= |uv_p| (nmax/a)^p
        env = luv + np.arange(pcap + 1) * (lognmax - loga)
        peak = np.max(env)
        if pcap >= 4096 or np.all(env[-4:] < peak + math.log(rtol)):
            break
        pcap *= 2
    if not np.all(env[-4:] < peak + math.log(rtol)):
        raise ArithmeticError("single-mode ladder did not converge")
    keep = np.nonzero(env >= peak + math.log(rtol) - 40.0)[0]
    pmax = int(keep.max())
    n = np.arange(nmax + 1, dtype=float)
    m_run = np.zeros(nmax + 1)
    s_run = np.ones(nmax + 1)
    lfall = np.zeros(nmax + 1)
    for p in range(1, pmax + 1):
        lfall = lfall + np.where(n >= p, np.log(np.maximum(n - p + 1.0, 1.0)), _NEG_INF)
        if luv[p] == _NEG_INF:
            continue
        l = lfall + (luv[p] - p * loga)
        m_new = np.maximum(m_run, l)
        with np.errstate(invalid="ignore"):
            grow = np.exp(np.where(np.isneginf(l), 0.0, l - m_new))
        grow[np.isneginf(l)] = 0.0
        s_run = s_run * np.exp(m_run - m_new) + signs[p] * grow
        m_run = m_new
    bad = s_run <= 0.0
    logt = np.where(bad, _NEG_INF, m_run + np.log(np.where(bad, 1.0, s_run)))
    return logt, np.where(bad, 0.0, 1.0)


def _ds_logprobs(form_scalars, nmax):
    """log P(n) for n = 0..nmax from the single-mode kernel scalars."""
    a, b, d, e, const, logpref = form_scalars
    n = np.arange(nmax + 1, dtype=float)
    if a > 0.0:
        logt, sign = _ds_logT(a, b, d, e, nmax)
        logp = logpref + const + n * math.log(a) + logt
        return np.where(sign > 0.0, logp, _NEG_INF)
    # a == 0: pure or vacuum output; only the p = n ladder term survives
    luv, signs = _ds_ladder(b, d, e, nmax)
    logp = logpref + const + gammaln(n + 1.0) + luv
    return np.where(signs > 0.0, logp, _NEG_INF)


# ---------------------------------------------------------------------------
# two-mode ladder evaluation
# ---------------------------------------------------------------------------

def _twomode_logT(x, n1, n2):
    """log T(n, m) with T = sum_k Fall(n,k) Fall(m,k) x^k / (k!)^2.

    The k = 0 term is exactly 1; with the negative-x continuation the sum
    stays positive wherever probabilities are meaningful (x tiny).
    """
    n = np.arange(n1 + 1, dtype=float)[:, None]
    m = np.arange(n2 + 1, dtype=float)[None, :]
    m_run = np.zeros((n1 + 1, n2 + 1))
    s_run = np.ones((n1 + 1, n2 + 1))
    if x != 0.0:
        lx = math.log(abs(x))
        sx = 1.0 if x > 0.0 else -1.0
        lfn = np.zeros((n1 + 1, 1))
        lfm = np.zeros((1, n2 + 1))
        for k in range(1, min(n1, n2) + 1):
            lfn = lfn + np.where(n >= k, np.log(np.maximum(n - k + 1.0, 1.0)), _NEG_INF)
            lfm = lfm + np.where(m >= k, np.log(np.maximum(m - k + 1.0, 1.0)), _NEG_INF)
            l = lfn + lfm + k * lx - 2.0 * gammaln(k + 1.0)
            m_new = np.maximum(m_run, l)
            with np.errstate(invalid="ignore"):
                grow = np.exp(np.where(np.isneginf(l), 0.0, l - m_new))
            grow[np.isneginf(l)] = 0.0
            s_run = s_run * np.exp(m_run - m_new) + (sx ** k) * grow
            m_run = m_new
            if np.max(l) < np.max(m_run) + math.log(1e-19):
                break
    bad = s_run <= 0.0
    logt = np.where(bad, _NEG_INF, m_run + np.log(np.where(bad, 1.0, s_run)))
    return logt, np.where(bad, 0.0, 1.0)


def _twomode_logprobs(scalars, n1, n2):
    """log P(n, m) grid from two-mode kernel scalars (g1, g2, t2, pref)."""
    g1, g2, t2, logpref = scalars
    n = np.arange(n1 + 1, dtype=float)[:, None]
    m = np.arange(n2 + 1, dtype=float)[None, :]
    if g1 > 0.0 and g2 > 0.0:
        logt, sign = _twomode_logT(t2 / (g1 * g2), n1, n2)
        logp = logpref + n * math.log(g1) + m * math.log(g2) + logt
        return np.where(sign > 0.0, logp, _NEG_INF)
    if t2 == 0.0:
        # product kernel; either factor may be a bare vacuum
        ln1 = np.where(n == 0, 0.0, n * (math.log(g1) if g1 > 0 else _NEG_INF))
        ln2 = np.where(m == 0, 0.0, m * (math.log(g2) if g2 > 0 else _NEG_INF))
        return logpref + ln1 + ln2
    if g1 == 0.0 and g2 == 0.0:
        # pure two-mode squeezed output: perfectly correlated diagonal
        return np.where(n == m, logpref + n * math.log(t2), _NEG_INF)
    if g1 == 0.0:
        # lossless-signal corner: only k = n contributes, needs m >= n
        logp = (logpref + gammaln(m + 1.0) - gammaln(n + 1.0)
                - gammaln(np.maximum(m - n, 0.0) + 1.0)
                + np.where(m >= n, (m - n) * math.log(g2), _NEG_INF)
                + n * math.log(t2))
        return np.where(m >= n, logp, _NEG_INF)
    raise ArithmeticError("unsupported two-mode kernel degeneracy")


# ---------------------------------------------------------------------------
# number_prob: single diagonal elements
# ---------------------------------------------------------------------------

def number_prob(form, occ):
    """log <occ| rho |occ> for a diagonal Fock occupation vector."""
    occ = tuple(int(v) for v in np.atleast_1d(occ))
    if any(v < 0 for v in occ):
        raise ValueError("occupations must be >= 0")
    if len(occ) != form.n_modes:
        raise ValueError("one occupation per mode required")
    if form.family == "ds":
        return float(_ds_logprobs(_form_scalars(form), occ[0])[occ[0]])
    if form.family in ("tmsv", "cct"):
        g1, g2, t2, logpref = _form_scalars(form)
        grid = _twomode_logprobs((g1, g2, t2, logpref), occ[0], occ[1])
        return float(grid[occ[0], occ[1]])
    return _number_prob_generic(form, occ)


def _number_prob_generic(form, occ, max_terms=2_000_000):
    """Partition-sum extraction for an arbitrary form (small occupations).

    Enumerates every multi-index over the exponent monomials whose combined
    exponent vector reproduces z^occ w*^occ, accumulating coefficient
    products in the signed log domain.
    """
    target = np.array(list(occ) + list(occ), dtype=int)
    monos = []
    for i in range(form.n_vars):
        for j in range(i, form.n_vars):
            cij = complex(form.quad[i, j])
            if cij != 0.0:
                vec = np.zeros(form.n_vars, dtype=int)
                vec[i] += 1
                vec[j] += 1
                monos.append((vec, cij))
    for i in range(form.n_vars):
        ci = complex(form.lin[i])
        if ci != 0.0:
            vec = np.zeros(form.n_vars, dtype=int)
            vec[i] = 1
            monos.append((vec, ci))
    logmags, phases = [], []
    count = 0

    def dfs(idx, remaining, logmag, phase):
        nonlocal count
        if count > max_terms:
            raise GridResourceError("partition enumeration too large", None)
        if idx == len(monos):
            if not remaining.any():
                logmags.append(logmag)
                phases.append(phase)
            return
        vec, coef = monos[idx]
        sup = np.nonzero(vec)[0]
        jmax = min(remaining[s] // vec[s] for s in sup)
        lc = math.log(abs(coef))
        pc = coef / abs(coef)
        for j in range(jmax + 1):
            count += 1
            dfs(idx + 1, remaining - j * vec,
                logmag + j * lc - gammaln(j + 1.0), phase * pc**j)

    dfs(0, target, 0.0, 1.0 + 0.0j)
    if not logmags:
        return _NEG_INF
    arr = np.array(logmags)
    ph = np.array(phases)
    mref = arr.max()
    total = np.sum(ph * np.exp(arr - mref))
    if abs(total.imag) > 1e-12 * max(abs(total.real), 1e-300):
        raise ArithmeticError("diagonal coefficient has a residual imaginary part")
    if total.real <= 0.0:
        return _NEG_INF
    weight = float(np.sum(gammaln(np.array(occ, dtype=float) + 1.0)))
    return (weight + mref + math.log(total.real)
            + form.log_prefactor + form.const_term)


# ---------------------------------------------------------------------------
# truncation boxes with certified tails
# ---------------------------------------------------------------------------

def _marginal_is_thermal(mu, sig):
    off = abs(sig[0, 1])
    return (abs(mu[0]) == 0.0 and abs(mu[1]) == 0.0
            and off <= 1e-12 * max(1.0, abs(sig[0, 0]))
            and abs(sig[0, 0] - sig[1, 1]) <= 1e-12 * max(1.0, abs(sig[0, 0])))


def _chernoff_logG(mu, sig, x):
    """log E[x^n] for a single-mode Gaussian marginal, valid for
    1 < x < (Vmax+1)/(Vmax-1) where Vmax is the largest eigenvalue of sig."""
    c = (x + 1.0) / (x - 1.0)
    m = c * np.eye(2) - sig
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    if det <= 0.0 or m[0, 0] <= 0.0:
        return None
    quad = (mu @ np.linalg.solve(m, mu))
    return math.log(2.0) + quad - math.log(x - 1.0) - 0.5 * math.log(det)

def _mode_tail_plan(mu, sig, budget, cap):
    """Smallest inclusive occupation bound N with P(n > N) <= budget,
    plus the certified bound actually achieved."""
    nbar = (sig[0, 0] + sig[1, 1] - 2.0) / 4.0 + (mu[0] ** 2 + mu[1] ** 2) / 2.0
    if nbar <= 0.0:
        return 0, 0.0
    if _marginal_is_thermal(mu, sig):
        # exact thermal tail: P(n >= K) = (N/(N+1))^K
        r = nbar / (nbar + 1.0)
        k = max(1, math.ceil(math.log(budget) / math.log(r)))
        if k - 1 > cap:
            raise GridResourceError("thermal tail cap exceeded", r ** (cap + 1))
        return k - 1, r ** k
    vmax = float(np.linalg.eigvalsh(sig).max())
    xstar = (vmax + 1.0) / (vmax - 1.0) if vmax > 1.0 else 1e12
    best_n, best_tail = None, None
    for frac in np.linspace(0.05, 0.999, 120):
        x = 1.0 + (xstar - 1.0) * frac
        logg = _chernoff_logG(mu, sig, x)
        if logg is None:
            continue
        # P(n >= K) <= G(x) / x^K
        k = math.ceil((logg - math.log(budget)) / math.log(x))
        k = max(k, 1)
        tail = math.exp(logg - k * math.log(x))
        if best_n is None or k < best_n or (k == best_n and tail < best_tail):
            best_n, best_tail = k, tail
    if best_n is None:
        raise GridResourceError("no valid Chernoff point", 1.0)
    if best_n - 1 > cap:
        raise GridResourceError("Chernoff tail cap exceeded", best_tail)
    return best_n - 1, best_tail


@dataclass(frozen=True)
class ProbabilityGrid:
    """Truncated table of diagonal Fock log-probabilities with a certified
    bound on the probability mass outside the box."""

    dims: tuple
    log_probs: np.ndarray
    tail_mass: float
    target_tail: float
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "tail_mass", float(self.tail_mass))
        object.__setattr__(self, "target_tail", float(self.target_tail))
        lp = np.asarray(self.log_probs, dtype=float)
        if lp.shape != tuple(d + 1 for d in self.dims):
            raise ValueError("log_probs shape must be dims + 1")
        if np.any(lp > 1e-12):
            raise ValueError("stored probabilities must lie in [0, 1]")
        lp.flags.writeable = False
        object.__setattr__(self, "log_probs", lp)

    def total(self):
        return float(np.exp(logsumexp(self.log_probs)))

    def mean_occupation(self, mode):
        p = np.exp(self.log_probs)
        idx = np.arange(self.dims[mode] + 1, dtype=float)
        if len(self.dims) == 1:
            return float((idx * p).sum())
        axis = 1 - mode
        return float((idx * p.sum(axis=axis)).sum())

    def cross_moment(self):
        if len(self.dims) != 2:
            raise ValueError("cross moment needs a two-mode grid")
        n = np.arange(self.dims[0] + 1, dtype=float)[:, None]
        m = np.arange(self.dims[1] + 1, dtype=float)[None, :]
        return float((n * m * np.exp(self.log_probs)).sum())

    def to_csv(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("# qillum probability grid\n")
            for key in sorted(self.params):
                fh.write(f"# {key}={self.params[key]}\n")
            fh.write(f"# target_tail={float(self.target_tail)!r}\n")
            fh.write(f"# tail_mass={float(self.tail_mass)!r}\n")
            fh.write(f"# dims={','.join(str(d) for d in self.dims)}\n")
            fh.write("n,m,log_prob\n")
            if len(self.dims) == 1:
                for n in range(self.dims[0] + 1):
                    fh.write(f"{n},0,{float(self.log_probs[n])!r}\n")
            else:
                for n in range(self.dims[0] + 1):
                    for m in range(self.dims[1] + 1):
                        fh.write(f"{n},{m},{float(self.log_probs[n, m])!r}\n")

    @staticmethod
    def from_csv(path):
        params, meta = {}, {}
        rows = []
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line.startswith("#"):
                    body = line[1:].strip()
                    if "=" in body:
                        key, val = body.split("=", 1)
                        meta[key.strip()] = val.strip()
                    continue
                if not line or line.startswith("n,"):
                    continue
                n, m, lp = line.split(",")
                rows.append((int(n), int(m), float(lp)))
        dims_s = meta.pop("dims")
        dims = tuple(int(v) for v in dims_s.split(","))
        target_tail = float(meta.pop("target_tail"))
        tail_mass = float(meta.pop("tail_mass"))
        table = np.full(tuple(d + 1 for d in dims), _NEG_INF)
        for n, m, lp in rows:
            if len(dims) == 1:
                table[n] = lp
            else:
                table[n, m] = lp
        return ProbabilityGrid(dims, table, tail_mass, target_tail, params=meta)


def grid_dims(form, target_tail, cap=3_000_000):
    """Certified per-mode truncation bounds for a state-backed form."""
    if form.state is None:
        raise ValueError("grid construction needs a state-backed form")
    k = form.n_modes
    dims, tail = [], 0.0
    for mode in range(k):
        mu, sig = form.state.mode_marginal(mode)
        n, t = _mode_tail_plan(mu, sig, target_tail / k, cap)
        dims.append(n)
        tail += t
    return tuple(dims), tail


def prob_grid(form, target_tail, cap=3_000_000):
    """Diagonal probability table truncated to a certified tail bound.

    The box is sized directly from the per-mode tail bounds (exact geometric
    tails for thermal marginals, Chernoff otherwise) so the certificate
    tail_mass <= target_tail holds by construction; the cap converts runaway
    requests into a GridResourceError carrying the achievable tail.
    """
    if not (0.0 < target_tail < 1.0):
        raise ValueError("target_tail must lie in (0, 1)")
    dims, tail = grid_dims(form, target_tail, cap=cap)
    if form.family == "ds":
        table = _ds_logprobs(_form_scalars(form), dims[0])
    elif form.family in ("tmsv", "cct"):
        table = _twomode_logprobs(_form_scalars(form), dims[0], dims[1])
    else:
        shape = tuple(d + 1 for d in dims)
        table = np.empty(shape)
        for idx in np.ndindex(shape):
            table[idx] = _number_prob_generic(form, idx)
    params = dict(form.params)
    return ProbabilityGrid(tuple(dims), np.minimum(table, 0.0), tail,
                           target_tail, params=params)


def logprob_table(scenario, kappa, dims):
    """log P table on a fixed box at any kappa, including the analytic
    continuation to small negative kappa (float path; no certification)."""
    p = scenario.probe
    nb = scenario.n_bath
    if p.kind == ProbeKind.DS:
        scalars = _ds_coeffs(p.alpha_mag, p.alpha_phase, p.n_squeeze,
                             p.squeeze_phase, kappa, nb)
        a_zw, b_zz, d_z, const, logpref = scalars
        e_z = np.conj(d_z) if kappa >= 0 else -np.conj(d_z)
        return _ds_logprobs((a_zw, b_zz, d_z, e_z, const, logpref), dims[0])
    if p.kind == ProbeKind.TMSV:
        sc = _tmsv_coeffs(p.n_signal, kappa, nb)
    else:
        sc = _cct_coeffs(p.n_signal, p.n_idler, kappa, nb)
    return _twomode_logprobs(sc, dims[0], dims[1])


# ---------------------------------------------------------------------------
# finite-difference stencils for Fisher information
# ---------------------------------------------------------------------------

def _mp_twomode_scalars(family, ns, ni, nb, kappa):
    """Kernel scalar logs in extended precision (mpmath context active)."""
    k = mpmath.mpf(kappa)
    nsm = mpmath.mpf(ns)
    nbm = mpmath.mpf(nb)
    if family == "tmsv":
        bm1 = 2 * nbm + 2 * k * nsm
        c2 = 4 * k * nsm * (nsm + 1)
        e = (nbm + 1) * (nsm + 1)
        g1 = (2 * (nsm + 1) * bm1 - c2) / (4 * e)
        g2 = (2 * nsm * (bm1 + 2) - c2) / (4 * e)
        return mpmath.log(g1), mpmath.log(g2), c2 / (4 * e * e) / (g1 * g2), -mpmath.log(e)
    nim = mpmath.mpf(ni)
    bm1 = 2 * nbm + 2 * k * nsm
    d2 = 4 * k * nsm * nim
    f = (nbm + 1) * (nim + 1) + k * nsm
    g1 = (2 * (nim + 1) * bm1 - d2) / (4 * f)
    g2 = (2 * nim * (bm1 + 2) - d2) / (4 * f)
    return mpmath.log(g1), mpmath.log(g2), d2 / (4 * f * f) / (g1 * g2), -mpmath.log(f)


def _mp_ds_scalars(alpha_mag, alpha_phase, nsq, squeeze_phase, nb, kappa):
    k = mpmath.mpf(kappa)
    nsqm = mpmath.mpf(nsq)
    nbm = mpmath.mpf(nb)
    a1 = 1 + 2 * nbm + 2 * k * nsqm
    a2 = 2 * k * mpmath.sqrt(nsqm * (nsqm + 1))
    big_l = (nbm + 1) ** 2 + k * nsqm * (2 + 2 * nbm - k)
    a = (a1 * a1 - a2 * a2 - 1) / (4 * big_l)
    sk = mpmath.sqrt(k) if kappa >= 0 else mpmath.mpc(0, 1) * mpmath.sqrt(-k)
    alph = mpmath.mpf(alpha_mag) * mpmath.exp(mpmath.mpc(0, 1) * alpha_phase)
    eiv = mpmath.exp(mpmath.mpc(0, 1) * squeeze_phase)
    b = -a2 * eiv / (4 * big_l)
    d = sk * (alph * (a1 + 1) + mpmath.conj(alph) * eiv * a2) / (2 * big_l)
    e = sk * (mpmath.conj(alph) * (a1 + 1) + alph / eiv * a2) / (2 * big_l)
    const = (-k * mpmath.mpf(alpha_mag) ** 2
             * (a1 + 1 + a2 * mpmath.cos(2 * alpha_phase - squeeze_phase))
             / (2 * big_l))
    return mpmath.log(a), b, d, e, const, -mpmath.log(big_l) / 2


@dataclass(frozen=True)
class PnrStencil:
    """kappa = 0 probabilities plus log-derivative arrays at two step sizes,
    assembled so the n-scaled kernel coefficients never lose precision."""

    dims: tuple
    logp0: np.ndarray
    dlog_h: np.ndarray
    dlog_h2: np.ndarray
    step: float


def pnr_stencil(scenario, step, target_tail=1e-10, dims=None, cap=3_000_000):
    """Build the finite-difference stencil for d/dkappa log P at kappa = 0.

    Evaluates log P on one shared truncation box at kappa in
    {+-step, +-step/2}; differences of the coefficient logs that multiply n
    are taken in extended precision so the stencil is cancellation-free.
    """
    p = scenario.probe
    nb = scenario.n_bath
    if nb <= 0.0:
        raise ValueError("Fisher stencil needs n_bath > 0")
    if dims is None:
        form0 = bargmann_of(scenario, kappa_override=step)
        dims, _ = grid_dims(form0, target_tail, cap=cap)
    if p.kind == ProbeKind.DS:
        n1 = dims[0]
        n = np.arange(n1 + 1, dtype=float)
        with mpmath.workdps(50):
            sc = {h: _mp_ds_scalars(p.alpha_mag, p.alpha_phase, p.n_squeeze,
                                    p.squeeze_phase, nb, h)
                  for h in (step, -step, step / 2, -step / 2)}
            deltas = {}
            for h in (step, step / 2):
                la_p, _, _, _, const_p, pref_p = sc[h]
                la_m, _, _, _, const_m, pref_m = sc[-h]
                deltas[h] = (float(la_p - la_m),
                             float(const_p - const_m), float(pref_p - pref_m))
            floats = {h: (math.exp(float(v[0])), complex(v[1]), complex(v[2]),
                          complex(v[3])) for h, v in sc.items()}
        logt = {}
        for h, (a, b, d, e) in floats.items():
            logt[h], sign = _ds_logT(a, b, d, e, n1)
            if np.any(sign <= 0.0):
                raise ArithmeticError("stencil ladder lost positivity")
        logp0 = _ds_logprobs(_form_scalars(bargmann_of(scenario, kappa_override=0.0)), n1)

        def dlog(h):
            dla, dconst, dpref = deltas[h]
            return (n * dla + dconst + dpref + (logt[h] - logt[-h])) / (2.0 * h)

        return PnrStencil((n1,), logp0, dlog(step), dlog(step / 2), step)

    n1, n2 = dims
    n = np.arange(n1 + 1, dtype=float)[:, None]
    m = np.arange(n2 + 1, dtype=float)[None, :]
    fam = p.kind.value
    with mpmath.workdps(50):
        sc = {h: _mp_twomode_scalars(fam, p.n_signal, p.n_idler, nb, h)
              for h in (step, -step, step / 2, -step / 2)}
        deltas = {}
        for h in (step, step / 2):
            lg1p, lg2p, _, prefp = sc[h]
            lg1m, lg2m, _, prefm = sc[-h]
            deltas[h] = (float(lg1p - lg1m), float(lg2p - lg2m),
                         float(prefp - prefm))
        xs = {h: float(v[2]) for h, v in sc.items()}
    logt = {}
    for h, x in xs.items():
        logt[h], sign = _twomode_logT(x, n1, n2)
        if np.any(sign <= 0.0):
            raise ArithmeticError("stencil ladder lost positivity")
    logp0 = _twomode_logprobs(
        _form_scalars(bargmann_of(scenario, kappa_override=0.0)), n1, n2)

    def dlog(h):
        d1, d2, dpref = deltas[h]
        return (n * d1 + m * d2 + dpref + (logt[h] - logt[-h])) / (2.0 * h)

    return PnrStencil((n1, n2), logp0, dlog(step), dlog(step / 2), step)
