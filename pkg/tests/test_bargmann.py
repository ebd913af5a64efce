import math

import numpy as np
import pytest
from scipy.linalg import expm

from qillum import (GridResourceError, ProbabilityGrid, ProbeSpec, Scenario,
                    bargmann_of, mean_photon, number_prob, prob_grid)
from qillum.bargmann import BargmannForm, grid_dims, logprob_table


def thermal_logp(n, nbar):
    return n * math.log(nbar / (nbar + 1.0)) - math.log(nbar + 1.0)


def ds_pure_probs(alpha, xi, dim=150):
    a = np.diag(np.sqrt(np.arange(1, dim)), 1)
    ad = a.conj().T
    squeeze = expm(0.5 * (np.conj(xi) * a @ a - xi * ad @ ad))
    displace = expm(alpha * ad - np.conj(alpha) * a)
    psi = (displace @ squeeze)[:, 0]
    return np.abs(psi) ** 2


# ---------------------------------------------------------------------
# kernel coefficients
# ---------------------------------------------------------------------

def test_thermal_kernel_coefficients():
    nb = 2.5
    form = bargmann_of(Scenario(ProbeSpec.ds(0.0), 0.7, nb))
    assert form.log_prefactor == pytest.approx(-math.log(nb + 1.0), rel=1e-14)
    assert complex(form.quad[0, 1]).real == pytest.approx(nb / (nb + 1.0), rel=1e-14)
    assert abs(complex(form.quad[0, 0])) == 0.0
    assert np.allclose(form.lin, 0.0)
    assert form.const_term == 0.0


def test_tmsv_kernel_target_off():
    nb, ns = 1.7, 0.4
    form = bargmann_of(Scenario(ProbeSpec.tmsv(ns), 0.0, nb))
    assert complex(form.quad[0, 2]).real == pytest.approx(nb / (nb + 1.0), rel=1e-14)
    assert complex(form.quad[1, 3]).real == pytest.approx(ns / (ns + 1.0), rel=1e-14)
    assert abs(complex(form.quad[0, 1])) == 0.0  # no cross coupling at kappa=0
    assert form.log_prefactor == pytest.approx(
        -math.log((nb + 1.0) * (ns + 1.0)), rel=1e-14)


def test_cct_kernel_no_idler():
    form = bargmann_of(Scenario(ProbeSpec.cct(0.5, 0.0), 0.3, 2.0))
    assert abs(complex(form.quad[0, 3])) == 0.0  # cross coupling vanishes
    assert form.log_prefactor == pytest.approx(
        -math.log(3.0 + 0.3 * 0.5), rel=1e-14)


def test_hermiticity_enforced():
    with pytest.raises(ValueError, match="Hermitian"):
        BargmannForm(2, 0.0, np.array([[0.2j, 0.5], [0.5, 0.2j]]),
                     np.zeros(2), 0.0)
    with pytest.raises(ValueError, match="Hermitian"):
        BargmannForm(2, 0.0, np.array([[0.0, 0.5], [0.5, 0.0]]),
                     np.array([0.1, 0.3]), 0.0)


# ---------------------------------------------------------------------
# diagonal extraction
# ---------------------------------------------------------------------

def test_number_prob_thermal():
    nb = 600.0
    form = bargmann_of(Scenario(ProbeSpec.ds(0.0), 0.0, nb))
    for n in (0, 1, 7, 2000):
        assert number_prob(form, (n,)) == pytest.approx(
            thermal_logp(n, nb), rel=1e-13)


def test_number_prob_product_state():
    nb, ns = 1.5, 0.4
    form = bargmann_of(Scenario(ProbeSpec.tmsv(ns), 0.0, nb))
    for n, m in ((0, 0), (2, 1), (5, 3)):
        assert number_prob(form, (n, m)) == pytest.approx(
            thermal_logp(n, nb) + thermal_logp(m, ns), rel=1e-13)


def test_number_prob_joint_vacuum():
    form = bargmann_of(Scenario(ProbeSpec.tmsv(0.01), 0.01, 600.0))
    assert number_prob(form, (0, 0)) == pytest.approx(
        -math.log(601.0 * 1.01), rel=1e-14)
    with pytest.raises(ValueError):
        number_prob(form, (-1, 0))


def test_ds_kernel_against_pure_state_oracle():
    # kappa = 1, n_bath = 0: the kernel must reproduce |<n|psi>|^2 exactly
    cases = [(0.9, 0.3), (0.7 * np.exp(0.4j), 0.5 * np.exp(1.1j)),
             (0.0, 0.6), (1.2, 0.0),
             (0.5 * np.exp(-0.9j), 0.8 * np.exp(-2.0j))]
    for alpha, xi in cases:
        spec = ProbeSpec.ds(abs(alpha), float(np.angle(alpha)), abs(xi),
                            float(np.angle(xi)))
        form = bargmann_of(Scenario(spec, 1.0, 0.0))
        probs = ds_pure_probs(alpha, xi)
        for n in range(20):
            expect = probs[n]
            got = math.exp(number_prob(form, (n,)))
            assert got == pytest.approx(expect, abs=1e-14, rel=1e-10)


def test_tmsv_kernel_pure_schmidt():
    ns = 0.8
    form = bargmann_of(Scenario(ProbeSpec.tmsv(ns), 1.0, 0.0))
    for n in range(8):
        assert math.exp(number_prob(form, (n, n))) == pytest.approx(
            ns**n / (ns + 1.0) ** (n + 1), rel=1e-12)
    assert number_prob(form, (2, 3)) == -math.inf


def test_cct_kernel_pure_split():
    # a thermal state split on a beam splitter: joint distribution is a
    # negative binomial spread over the two arms
    ns, ni = 0.5, 0.9
    nt, tau = ns + ni, ns / (ns + ni)
    form = bargmann_of(Scenario(ProbeSpec.cct(ns, ni), 1.0, 0.0))
    for n in range(6):
        for m in range(6):
            expect = (math.comb(n + m, n) * tau**n * (1 - tau) ** m
                      * nt ** (n + m) / (nt + 1.0) ** (n + m + 1))
            assert math.exp(number_prob(form, (n, m))) == pytest.approx(
                expect, rel=1e-12)


def test_number_prob_displaced_noisy_vs_poisson():
    # pure coherent state through a lossless channel: Poisson counts
    form = bargmann_of(Scenario(ProbeSpec.coherent(1.44), 1.0, 0.0))
    for n in range(10):
        expect = math.exp(-1.44) * 1.44**n / math.factorial(n)
        assert math.exp(number_prob(form, (n,))) == pytest.approx(expect, rel=1e-12)


# ---------------------------------------------------------------------
# truncation boxes
# ---------------------------------------------------------------------

def test_grid_thermal_truncation_size():
    # geometric tail inversion: N ~ ceil(ln tail / ln(nb/(nb+1)))
    form = bargmann_of(Scenario(ProbeSpec.ds(0.0), 0.0, 600.0))
    grid = prob_grid(form, 1e-6)
    assert len(grid.dims) == 1
    assert 8200 <= grid.dims[0] <= 8400
    assert grid.tail_mass <= 1e-6
    assert grid.total() + grid.tail_mass == pytest.approx(1.0, abs=1e-11)


def test_grid_vacuum():
    form = bargmann_of(Scenario(ProbeSpec.ds(0.0), 0.0, 0.0))
    grid = prob_grid(form, 1e-6)
    assert grid.dims == (0,)
    assert grid.tail_mass == 0.0
    assert grid.total() == pytest.approx(1.0)


@pytest.mark.parametrize("probe", [
    ProbeSpec.tmsv(0.01),
    ProbeSpec.cct(0.01, 0.01),
    ProbeSpec.ds_from_split(0.01, 0.5),
])
def test_grid_normalization(probe):
    scn = Scenario(probe, 0.01, 600.0)
    grid = prob_grid(bargmann_of(scn), 1e-6)
    total = grid.total()
    assert total <= 1.0 + 1e-12
    # the certificate (1e-12 slop: float accumulation over ~3e4 entries)
    assert 1.0 - total <= grid.tail_mass + 1e-12
    assert abs(total + grid.tail_mass - 1.0) <= 2e-6


def test_grid_tight_window():
    # with a tight tail target the box must capture the mass to 1e-8
    scn = Scenario(ProbeSpec.tmsv(0.5), 0.05, 2.0)
    grid = prob_grid(bargmann_of(scn), 1e-9)
    assert 1.0 - 1e-8 <= grid.total() + grid.tail_mass <= 1.0 + 1e-8


def test_grid_squeezed_corner_certificate():
    # strong squeezing on weak noise: the asymptotic tail ratio is set by
    # the large quadrature, (V+ - 1)/(V+ + 1), and exceeds the naive
    # mean/(mean+1) envelope; the generating-function bound must still cover
    scn = Scenario(ProbeSpec.ds_from_split(1.0, 0.5), 0.1, 0.1)
    grid = prob_grid(bargmann_of(scn), 1e-30)
    assert 1.0 - grid.total() <= grid.tail_mass + 1e-12
    p = np.exp(grid.log_probs)
    ratio = p[-1] / p[-2]
    mean_ratio = 0.2 / 1.2
    mu, sig = bargmann_of(scn).state.mode_marginal(0)
    vmax = float(np.linalg.eigvalsh(sig).max())
    assert ratio > mean_ratio * 1.1
    assert ratio == pytest.approx((vmax - 1.0) / (vmax + 1.0), rel=0.02)


def test_grid_signal_marginal_is_thermal():
    scn = Scenario(ProbeSpec.tmsv(0.7), 0.1, 3.0)
    grid = prob_grid(bargmann_of(scn), 1e-9)
    marg = np.exp(grid.log_probs).sum(axis=1)
    mean = 0.1 * 0.7 + 3.0
    n = np.arange(grid.dims[0] + 1)
    expect = np.exp(n * math.log(mean / (mean + 1.0)) - math.log(mean + 1.0))
    assert np.max(np.abs(marg - expect)) < 1e-7


def test_grid_moments_match_state():
    scn = Scenario(ProbeSpec.cct(0.4, 0.8), 0.2, 1.5)
    grid = prob_grid(bargmann_of(scn), 1e-10)
    state = bargmann_of(scn).state
    assert grid.mean_occupation(0) == pytest.approx(mean_photon(state, 0), rel=1e-8)
    assert grid.mean_occupation(1) == pytest.approx(mean_photon(state, 1), rel=1e-8)


def test_grid_resource_cap():
    scn = Scenario(ProbeSpec.cct(0.01, 1e6), 0.01, 600.0)
    with pytest.raises(GridResourceError) as err:
        prob_grid(bargmann_of(scn), 1e-10, cap=10_000)
    assert err.value.achieved_tail > 0.0


def test_grid_rejects_bad_tail():
    form = bargmann_of(Scenario(ProbeSpec.tmsv(0.1), 0.01, 1.0))
    with pytest.raises(ValueError):
        prob_grid(form, 0.0)
    with pytest.raises(ValueError):
        prob_grid(form, 1.5)


def test_grid_csv_roundtrip(tmp_path):
    scn = Scenario(ProbeSpec.tmsv(0.3), 0.05, 1.2)
    grid = prob_grid(bargmann_of(scn), 1e-7)
    path = tmp_path / "grid.csv"
    grid.to_csv(path)
    back = ProbabilityGrid.from_csv(path)
    assert back.dims == grid.dims
    assert back.tail_mass == grid.tail_mass
    assert back.target_tail == grid.target_tail
    assert np.array_equal(back.log_probs, grid.log_probs)
    header = path.read_text().splitlines()
    assert header[0] == "# qillum probability grid"
    assert "n,m,log_prob" in header


def test_logprob_table_negative_kappa_continuation():
    # probabilities stay analytic in kappa: the continuation to -h must sum
    # to ~1 and drift the mean by kappa * N_S
    scn = Scenario(ProbeSpec.tmsv(0.5), 0.0, 5.0)
    dims = grid_dims(bargmann_of(scn, kappa_override=1e-4), 1e-12)[0]
    table = logprob_table(scn, -1e-4, dims)
    p = np.exp(table)
    assert p.sum() == pytest.approx(1.0, abs=1e-10)
    n = np.arange(dims[0] + 1)[:, None]
    assert float((n * p).sum()) == pytest.approx(5.0 - 1e-4 * 0.5, rel=1e-9)


def test_diagonal_reality_with_phases():
    # complex kernel coefficients, real diagonal
    spec = ProbeSpec.ds(0.8, 0.7, 0.4, 2.1)
    form = bargmann_of(Scenario(spec, 0.3, 1.0))
    grid = prob_grid(form, 1e-8)
    assert np.all(np.isfinite(grid.log_probs[:5]))
    assert grid.total() == pytest.approx(1.0, abs=1e-7)
