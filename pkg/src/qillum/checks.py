"""Cross-representation invariant suite over a standard parameter lattice.

Every check couples at least two independent computation routes (closed
form vs grid, ladder sum vs dense expansion, finite difference vs hand-coded
derivative), so a transcription slip in any one of them surfaces as a
disagreement here.  `run_invariant_suite` powers both the CLI `check`
subcommand and the acceptance tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import bargmann, detection, metrics, oracle
from .states import (ProbeKind, ProbeSpec, Scenario, build_input,
                     build_output, gaussian_number_moment, mean_photon)

KAPPAS = (0.0, 0.01, 0.1)
NS_VALUES = (0.001, 0.01, 1.0)
NB_VALUES = (0.1, 1.0, 600.0)
DS_SPLIT = 0.5


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _lattice(quick=False):
    kappas = KAPPAS[1:2] if quick else KAPPAS
    ns_vals = NS_VALUES[::2] if quick else NS_VALUES
    nb_vals = NB_VALUES[::2] if quick else NB_VALUES
    return kappas, ns_vals, nb_vals


def _probes(ns):
    return (ProbeSpec.tmsv(ns), ProbeSpec.cct(ns, ns),
            ProbeSpec.ds_from_split(ns, DS_SPLIT))


def check_state_builders(quick=False):
    """Physicality and the mean-photon identity kappa <n>_in + n_bath."""
    kappas, ns_vals, nb_vals = _lattice(quick)
    worst = 0.0
    count = 0
    for kappa in kappas + (0.5, 1.0):
        for ns in ns_vals:
            for nb in nb_vals:
                for probe in _probes(ns):
                    scn = Scenario(probe, kappa, nb)
                    state = build_output(scn)  # constructor checks physicality
                    expect = kappa * probe.n_signal + nb
                    got = mean_photon(state, 0)
                    worst = max(worst, abs(got - expect) / (1.0 + expect))
                    count += 1
    return CheckResult("state_builders",
                       worst <= 1e-12,
                       f"{count} states built; worst mean-photon error {worst:.2e}")


def check_grid_normalization(quick=False, target_tail=1e-6):
    kappas, ns_vals, nb_vals = _lattice(quick)
    worst_sum = 0.0
    worst_cert = 0.0
    count = 0
    for kappa in kappas:
        for ns in ns_vals:
            for nb in nb_vals:
                for probe in _probes(ns):
                    scn = Scenario(probe, kappa, nb)
                    grid = bargmann.prob_grid(bargmann.bargmann_of(scn), target_tail)
                    total = grid.total()
                    if total > 1.0 + 1e-11:
                        return CheckResult("grid_normalization", False,
                                           f"grid sums above 1: {total!r}")
                    # certificate: 1 - total is real tail, bounded by tail_mass
                    worst_cert = max(worst_cert, (1.0 - total) - grid.tail_mass)
                    worst_sum = max(worst_sum, abs(total + grid.tail_mass - 1.0))
                    count += 1
    ok = worst_cert <= 1e-11 and worst_sum <= 2.0 * target_tail
    return CheckResult("grid_normalization", ok,
                       f"{count} grids; worst |sum+tail-1| {worst_sum:.2e}, "
                       f"worst certificate slack {worst_cert:.2e}")


def check_onoff_grid_agreement(quick=False, target_tail=1e-8):
    """Closed-form click probabilities vs grid coarse-graining, within tail."""
    _, ns_vals, nb_vals = _lattice(quick)
    worst = 0.0
    count = 0
    for ns in ns_vals:
        for nb in nb_vals:
            for probe in _probes(ns):
                scn = Scenario(probe, 0.01, nb)
                grid = bargmann.prob_grid(bargmann.bargmann_of(scn), target_tail)
                coarse = detection.onoff_joint_from_grid(grid)
                closed = detection.onoff_stats(scn)
                for key in closed.p_joint:
                    err = abs(coarse.p_joint[key] - closed.p_joint[key])
                    slack = grid.tail_mass + 1e-12
                    worst = max(worst, err - slack)
                    count += 1
    return CheckResult("onoff_grid_agreement", worst <= 0.0,
                       f"{count} outcomes compared; worst excess {worst:.2e}")


def check_grid_moments(quick=False, target_tail=1e-12):
    """Grid-summed moments vs the Gaussian moment engine."""
    _, ns_vals, nb_vals = _lattice(quick)
    worst_mean = worst_cross = worst_var = 0.0
    for ns in ns_vals:
        for nb in nb_vals:
            for probe in _probes(ns):
                scn = Scenario(probe, 0.1, nb)
                grid = bargmann.prob_grid(bargmann.bargmann_of(scn), target_tail)
                expect = 0.1 * probe.n_signal + nb
                got = grid.mean_occupation(0)
                worst_mean = max(worst_mean, abs(got - expect) / expect)
                if probe.kind == ProbeKind.DS:
                    stats = detection.pnr_stats_single(scn)
                    p = np.exp(grid.log_probs)
                    n = np.arange(grid.dims[0] + 1, dtype=float)
                    var = float((n * n * p).sum()) - float((n * p).sum()) ** 2
                    worst_var = max(worst_var, abs(var - stats.var_obs) / stats.var_obs)
                else:
                    state_in = build_input(probe)
                    cross = grid.cross_moment()
                    expect_cross = (0.1 * gaussian_number_moment(state_in, (1, 1))
                                    + nb * gaussian_number_moment(state_in, (0, 1)))
                    if expect_cross > 0.0:
                        worst_cross = max(worst_cross,
                                          abs(cross - expect_cross) / expect_cross)
                    stats = detection.pnr_stats_joint(scn)
                    n = np.arange(grid.dims[0] + 1, dtype=float)[:, None]
                    m = np.arange(grid.dims[1] + 1, dtype=float)[None, :]
                    p = np.exp(grid.log_probs)
                    sec = float(((n * m) ** 2 * p).sum())
                    var = sec - cross * cross
                    worst_var = max(worst_var, abs(var - stats.var_obs) / stats.var_obs)
    ok = worst_mean <= 1e-6 and worst_cross <= 1e-6 and worst_var <= 1e-4
    return CheckResult("grid_moments", ok,
                       f"worst rel err: mean {worst_mean:.2e}, "
                       f"cross {worst_cross:.2e}, variance {worst_var:.2e}")


def check_oracle_equivalence(quick=False):
    """Ladder-sum extraction vs dense Taylor expansion at small parameters."""
    cases = [
        (ProbeSpec.tmsv(0.8), 0.3, 1.2, [(0, 0), (1, 1), (2, 1), (4, 3)]),
        (ProbeSpec.cct(0.5, 0.9), 0.3, 0.6, [(0, 0), (1, 2), (3, 3)]),
        (ProbeSpec.ds(0.8, 0.4, 0.5, 1.1), 0.4, 0.7, [(0,), (1,), (3,), (6,)]),
        (ProbeSpec.ds_from_split(1.0, 0.5), 0.1, 2.0, [(0,), (2,), (5,)]),
    ]
    if quick:
        cases = cases[:2]
    worst = 0.0
    for probe, kappa, nb, occs in cases:
        form = bargmann.bargmann_of(Scenario(probe, kappa, nb))
        for occ in occs:
            fast = bargmann.number_prob(form, occ)
            dense = oracle.dense_number_prob(form, occ)
            worst = max(worst, abs(fast - dense))
    return CheckResult("oracle_equivalence", worst <= 1e-9,
                       f"worst |dlog P| {worst:.2e}")


def check_fi_dual_path(quick=False):
    """Finite-difference on-off information vs hand-coded derivatives."""
    _, ns_vals, nb_vals = _lattice(quick)
    worst = 0.0
    count = 0
    for ns in ns_vals:
        for nb in nb_vals:
            if nb <= 0.0:
                continue
            for probe in _probes(ns) + (ProbeSpec.cct(ns, 1.0),):
                scn = Scenario(probe, 0.01, nb)
                fd = metrics.snr_fi(scn, "onoff").diagnostics["fisher_information"]
                an = oracle.fi_analytic_check(scn)
                worst = max(worst, abs(fd - an) / an)
                count += 1
    return CheckResult("fi_dual_path", worst <= 1e-6,
                       f"{count} points; worst rel err {worst:.2e}")


def _fi_onoff_from_tables(scenario, dims, step):
    """On-off information from coarse-grained grid tables (shared box)."""
    def outcome_probs(kappa):
        logp = bargmann.logprob_table(scenario, kappa, dims)
        p = np.exp(logp)
        if len(dims) == 1:
            return np.array([p[0], p[1:].sum()])
        p00 = p[0, 0]
        ps0 = p[0, :].sum()
        pi0 = p[:, 0].sum()
        return np.array([p00, ps0 - p00, pi0 - p00, p.sum() - ps0 - pi0 + p00])

    p0 = outcome_probs(0.0)
    d1 = (outcome_probs(step) - outcome_probs(-step)) / (2.0 * step)
    d2 = (outcome_probs(step / 2) - outcome_probs(-step / 2)) / step
    dr = (4.0 * d2 - d1) / 3.0
    mask = p0 > 0.0
    return float((dr[mask] ** 2 / p0[mask]).sum())


def check_fi_data_processing(quick=False, target_tail=1e-10):
    """Full-grid information must dominate its on-off coarse-graining."""
    _, ns_vals, nb_vals = _lattice(quick)
    worst = -math.inf
    count = 0
    for ns in ns_vals:
        for nb in nb_vals:
            for probe in _probes(ns):
                scn = Scenario(probe, 0.01, nb)
                rep = metrics.snr_fi(scn, "pnr", target_tail=target_tail)
                fi_pnr = rep.diagnostics["fisher_information"]
                dims = rep.diagnostics["dims"]
                fi_onoff = _fi_onoff_from_tables(scn, dims, rep.diagnostics["step"])
                margin = (fi_onoff - fi_pnr) / max(fi_pnr, 1e-300)
                worst = max(worst, margin)
                count += 1
    return CheckResult("fi_data_processing", worst <= 1e-9,
                       f"{count} points; worst (onoff - pnr)/pnr = {worst:.2e}")


def check_m_linearity():
    probe = ProbeSpec.tmsv(0.01)
    base = metrics.snr_cc(Scenario(probe, 0.01, 600.0, 1), "onoff").exact
    big = metrics.snr_cc(Scenario(probe, 0.01, 600.0, 1_000_000), "onoff").exact
    ok = abs(big - 1e6 * base) <= 1e-9 * big
    fi1 = metrics.snr_fi(Scenario(probe, 0.01, 600.0, 1), "onoff").exact
    fi2 = metrics.snr_fi(Scenario(probe, 0.01, 600.0, 1000), "onoff").exact
    ok = ok and abs(fi2 - 1000 * fi1) <= 1e-9 * max(fi2, 1e-300)
    return CheckResult("m_linearity", ok, "SNR scales exactly with mode count")


def check_phase_covariance():
    """Rotating the displacement by theta and the squeeze axis by 2 theta
    rotates the whole state frame; detection statistics cannot change."""
    worst = 0.0
    for theta in (0.7, 2.1, -1.3):
        p1 = ProbeSpec.ds(0.9, 0.3, 0.45, 1.0)
        p2 = ProbeSpec.ds(0.9, 0.3 + theta, 0.45, 1.0 + 2.0 * theta)
        for detector in ("onoff", "pnr"):
            s1 = metrics.snr_cc(Scenario(p1, 0.01, 600.0, 10**6), detector).exact
            s2 = metrics.snr_cc(Scenario(p2, 0.01, 600.0, 10**6), detector).exact
            worst = max(worst, abs(s1 - s2) / s1)
    return CheckResult("phase_covariance", worst <= 1e-12,
                       f"worst rel SNR change {worst:.2e}")


def check_ds_optimum_phase():
    """Click rate and SNR are maximal where the squeeze axis aligns with
    twice the displacement phase."""
    best_mean = -1.0
    best_theta = None
    ref = None
    for theta in np.linspace(-math.pi, math.pi, 49):
        probe = ProbeSpec.ds(math.sqrt(0.918), 0.0, math.asinh(math.sqrt(0.082)),
                             theta)
        scn = Scenario(probe, 0.01, 600.0, 10**6)
        mean = detection.onoff_stats(scn).mean_obs
        if theta == 0.0:
            ref = mean
        if mean > best_mean:
            best_mean, best_theta = mean, theta
    ok = ref is not None and best_mean <= ref * (1.0 + 1e-12)
    return CheckResult("ds_optimum_phase", ok,
                       f"max click rate at phase {best_theta:+.3f}")


def check_eq6_factorization():
    """At kappa = 0 the two-mode click rate factorizes into independent
    signal and idler rates."""
    worst = 0.0
    for ns in NS_VALUES:
        for nb in NB_VALUES:
            scn = Scenario(ProbeSpec.tmsv(ns), 0.0, nb)
            got = detection.onoff_stats(scn).mean_obs
            expect = (1.0 - 1.0 / (1.0 + nb)) * (1.0 - 1.0 / (1.0 + ns))
            worst = max(worst, abs(got - expect))
    return CheckResult("eq_factorization", worst <= 1e-15,
                       f"worst abs err {worst:.2e}")


ALL_CHECKS = (
    check_state_builders,
    check_grid_normalization,
    check_onoff_grid_agreement,
    check_grid_moments,
    check_oracle_equivalence,
    check_fi_dual_path,
    check_fi_data_processing,
    check_m_linearity,
    check_phase_covariance,
    check_ds_optimum_phase,
    check_eq6_factorization,
)


def run_invariant_suite(quick=False, progress=None):
    results = []
    for fn in ALL_CHECKS:
        try:
            if "quick" in fn.__code__.co_varnames[:fn.__code__.co_argcount]:
                res = fn(quick=quick)
            else:
                res = fn()
        except Exception as exc:  # a crash is a failed check, not a crash of the suite
            res = CheckResult(fn.__name__.removeprefix("check_"), False,
                              f"raised {type(exc).__name__}: {exc}")
        results.append(res)
        if progress is not None:
            progress(res)
    return results
