"""Brute-force verifiers for the fast probability and information paths.

`dense_expand` Taylor-expands a generating-function exponent by repeated
polynomial multiplication, which is exact for every coefficient whose total
degree fits under the cap; it certifies the ladder-sum extraction at small
occupation numbers.  `fi_analytic_check` differentiates the closed-form
click probabilities by hand-coded expressions, giving a second opinion on
the finite-difference information route.  Both are test instruments, not
production paths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .states import ProbeKind


class BudgetError(MemoryError):
    """Dense expansion would exceed the configured term budget."""


@dataclass(frozen=True)
class DenseSeries:
    """Truncated multivariate Taylor series, coefficients keyed by the
    monomial exponent tuple; exact up to total degree `order_cap`."""

    n_vars: int
    order_cap: int
    coeffs: dict

    def coeff(self, exponents):
        return self.coeffs.get(tuple(int(v) for v in exponents), 0.0 + 0.0j)


def _exponent_monomials(form):
    monos = []
    for i in range(form.n_vars):
        for j in range(i, form.n_vars):
            c = complex(form.quad[i, j])
            if c != 0.0:
                vec = [0] * form.n_vars
                vec[i] += 1
                vec[j] += 1
                monos.append((tuple(vec), c))
    for i in range(form.n_vars):
        c = complex(form.lin[i])
        if c != 0.0:
            vec = [0] * form.n_vars
            vec[i] = 1
            monos.append((tuple(vec), c))
    return monos


def dense_expand(form, order_cap, budget=3_000_000):
    """Taylor-expand exp(quad + lin) up to total degree `order_cap`.

    Coefficients of total degree <= order_cap are exact: the exponent has no
    constant part, so exp contributions of order k > order_cap cannot reach
    them.  The prefactor and the exponent constant are NOT included; apply
    them when reconstructing probabilities.
    """
    est = math.comb(order_cap + form.n_vars, form.n_vars)
    if est > budget:
        raise BudgetError(
            f"dense expansion would hold up to {est} terms (budget {budget})")
    monos = _exponent_monomials(form)
    zero = tuple([0] * form.n_vars)
    series = {zero: 1.0 + 0.0j}
    power = {zero: 1.0 + 0.0j}
    for k in range(1, order_cap + 1):
        nxt = {}
        for vec, c in power.items():
            for mvec, mc in monos:
                new = tuple(a + b for a, b in zip(vec, mvec))
                if sum(new) > order_cap:
                    continue
                nxt[new] = nxt.get(new, 0.0 + 0.0j) + c * mc
        if not nxt:
            break
        power = {v: c / k for v, c in nxt.items()}
        for vec, c in power.items():
            series[vec] = series.get(vec, 0.0 + 0.0j) + c
        if len(series) > budget:
            raise BudgetError("dense expansion exceeded the term budget")
    return DenseSeries(form.n_vars, order_cap, series)


def dense_number_prob(form, occ, order_cap=None, budget=3_000_000):
    """log <occ|rho|occ> from the dense expansion (independent of the
    ladder-sum path).  Requires 2 * sum(occ) <= order_cap for exactness."""
    occ = [int(v) for v in np.atleast_1d(occ)]
    if any(v < 0 for v in occ):
        raise ValueError("occupations must be >= 0")
    if order_cap is None:
        order_cap = 2 * sum(occ)
    series = dense_expand(form, order_cap, budget=budget)
    c = series.coeff(tuple(occ) + tuple(occ))
    if abs(c.imag) > 1e-12 * max(abs(c.real), 1e-300):
        raise ArithmeticError("diagonal dense coefficient is not real")
    if c.real <= 0.0:
        return float("-inf")
    weight = float(np.sum(gammaln(np.array(occ, dtype=float) + 1.0)))
    return (weight + math.log(c.real) + form.log_prefactor + form.const_term)


def fi_analytic_check(scenario, detector="onoff"):
    """Click-distribution Fisher information at kappa = 0 from hand-coded
    derivatives of the closed-form outcome probabilities."""
    if detector != "onoff":
        raise NotImplementedError("analytic check covers on-off detection only")
    nb = scenario.n_bath
    if nb <= 0.0:
        raise ValueError("Fisher information at kappa = 0 needs n_bath > 0")
    p = scenario.probe
    ns = p.n_signal
    if ns == 0.0:
        return 0.0
    if p.kind == ProbeKind.DS:
        # d/dkappa log P_off at 0 is -(N_sq + |alpha|^2)/(N_B + 1)
        p_off = 1.0 / (nb + 1.0)
        dp = -ns / (nb + 1.0) ** 2
        return dp * dp * (1.0 / p_off + 1.0 / (1.0 - p_off))
    dp_s0 = -ns / (nb + 1.0) ** 2
    if p.kind == ProbeKind.TMSV:
        p_00 = 1.0 / ((1.0 + ns) * (1.0 + nb))
        probs = np.array([p_00,
                          1.0 / (1.0 + nb) - p_00,
                          1.0 / (1.0 + ns) - p_00,
                          (nb / (1.0 + nb)) * (ns / (1.0 + ns))])
        deriv = np.array([0.0, dp_s0, 0.0, -dp_s0])
    else:
        ni = p.n_idler
        p_00 = 1.0 / ((1.0 + ni) * (1.0 + nb))
        dp_00 = -ns / ((nb + 1.0) ** 2 * (ni + 1.0) ** 2)
        probs = np.array([p_00,
                          1.0 / (1.0 + nb) - p_00,
                          1.0 / (1.0 + ni) - p_00,
                          (nb / (1.0 + nb)) * (ni / (1.0 + ni))])
        deriv = np.array([dp_00, dp_s0 - dp_00, -dp_00, -dp_s0 + dp_00])
    out = 0.0
    for pi, di in zip(probs, deriv):
        if pi > 0.0:
            out += di * di / pi
        elif abs(di) > 0.0:
            raise ArithmeticError("degenerate outcome with nonzero derivative")
    return out
