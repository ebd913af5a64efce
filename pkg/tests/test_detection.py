import math

import numpy as np
import pytest

from qillum import (ProbeSpec, Scenario, bargmann_of, onoff_joint_from_grid,
                    onoff_stats, pnr_stats_joint, pnr_stats_single, prob_grid)


def test_onoff_vacuum_idler_never_coincides():
    # N_S = 0: the idler arm is vacuum, the coincidence rate is exactly zero
    stats = onoff_stats(Scenario(ProbeSpec.tmsv(0.0), 0.7, 3.0))
    assert stats.mean_obs == pytest.approx(0.0, abs=1e-15)
    assert stats.p_joint["off,on"] == pytest.approx(0.0, abs=1e-15)


def test_onoff_thermal_probe():
    nb = 600.0
    stats = onoff_stats(Scenario(ProbeSpec.ds(0.0), 0.42, nb))
    assert stats.p_joint["off"] == pytest.approx(1.0 / (nb + 1.0), rel=1e-14)


def test_onoff_tmsv_value():
    stats = onoff_stats(Scenario(ProbeSpec.tmsv(0.01), 0.01, 600.0))
    expect = 1 - 1 / 601.0001 - 1 / 1.01 + 1 / (1.01 * 601)
    assert stats.mean_obs == pytest.approx(0.009884516182687618, rel=1e-13)
    assert stats.mean_obs == pytest.approx(expect, rel=1e-14)
    assert sum(stats.p_joint.values()) == pytest.approx(1.0, abs=1e-14)
    assert stats.var_obs == stats.mean_obs * (1.0 - stats.mean_obs)


def test_onoff_cct_value():
    ns, ni, kappa, nb = 0.5, 2.0, 0.3, 4.0
    stats = onoff_stats(Scenario(ProbeSpec.cct(ns, ni), kappa, nb))
    expect = (1 - 1 / (1 + nb + kappa * ns) - 1 / (1 + ni)
              + 1 / ((1 + ni) * (1 + nb) + kappa * ns))
    assert stats.mean_obs == pytest.approx(expect, rel=1e-14)


def test_onoff_kappa_override():
    scn = Scenario(ProbeSpec.tmsv(0.4), 0.3, 2.0)
    off = onoff_stats(scn, kappa_override=0.0)
    # factorizes into independent arms when the target is absent
    expect = (1 - 1 / 3.0) * (1 - 1 / 1.4)
    assert off.mean_obs == pytest.approx(expect, rel=1e-14)
    with pytest.raises(ValueError):
        onoff_stats(scn, kappa_override=-0.2)


def test_onoff_ds_phase_dependence():
    # the click rate peaks where the squeeze axis aligns with twice the
    # displacement phase
    means = []
    for theta in np.linspace(-math.pi, math.pi, 25):
        spec = ProbeSpec.ds(math.sqrt(0.918), 0.0,
                            math.asinh(math.sqrt(0.082)), theta)
        means.append(onoff_stats(Scenario(spec, 0.01, 600.0)).mean_obs)
    assert np.argmax(means) == 12  # theta = 0


def test_onoff_joint_from_grid_agrees():
    scn = Scenario(ProbeSpec.tmsv(0.3), 0.05, 2.0)
    grid = prob_grid(bargmann_of(scn), 1e-9)
    coarse = onoff_joint_from_grid(grid)
    closed = onoff_stats(scn)
    for key, val in closed.p_joint.items():
        assert coarse.p_joint[key] == pytest.approx(val, abs=grid.tail_mass + 1e-12)
    assert coarse.mean_obs == pytest.approx(closed.mean_obs, abs=2e-9)


def test_onoff_joint_from_grid_single_mode():
    scn = Scenario(ProbeSpec.ds_from_split(0.5, 0.7), 0.2, 1.0)
    grid = prob_grid(bargmann_of(scn), 1e-9)
    coarse = onoff_joint_from_grid(grid)
    closed = onoff_stats(scn)
    assert coarse.p_joint["off"] == pytest.approx(closed.p_joint["off"], abs=2e-9)


def test_onoff_joint_from_grid_tail_guard():
    scn = Scenario(ProbeSpec.tmsv(0.3), 0.05, 2.0)
    grid = prob_grid(bargmann_of(scn), 1e-4)
    with pytest.raises(ValueError, match="tail"):
        onoff_joint_from_grid(grid, max_tail=1e-9)


def test_pnr_single_target_off():
    stats = pnr_stats_single(Scenario(ProbeSpec.coherent(1.0), 0.7, 2.5),
                             kappa_override=0.0)
    assert stats.mean_obs == 2.5
    assert stats.var_obs == 2.5 * 3.5


def test_pnr_single_coherent():
    stats = pnr_stats_single(Scenario(ProbeSpec.coherent(1.0), 0.01, 600.0))
    assert stats.mean_obs == pytest.approx(600.01, rel=1e-14)
    assert stats.var_obs == pytest.approx(360612.01, rel=1e-14)


def test_pnr_single_sub_poissonian_beats_coherent():
    # at equal input photons a squeezed-light probe has smaller count noise
    coh = pnr_stats_single(Scenario(ProbeSpec.coherent(1.0), 0.01, 600.0))
    ds = pnr_stats_single(
        Scenario(ProbeSpec.ds_from_split(1.0, 0.918), 0.01, 600.0))
    assert ds.mean_obs == pytest.approx(coh.mean_obs, rel=1e-14)
    assert ds.var_obs < coh.var_obs


def test_pnr_single_wrong_probe():
    with pytest.raises(ValueError):
        pnr_stats_single(Scenario(ProbeSpec.tmsv(1.0), 0.01, 600.0))
    with pytest.raises(ValueError):
        pnr_stats_joint(Scenario(ProbeSpec.coherent(1.0), 0.01, 600.0))


def test_pnr_joint_target_off():
    ns, nb = 0.8, 3.0
    stats = pnr_stats_joint(Scenario(ProbeSpec.tmsv(ns), 0.5, nb),
                            kappa_override=0.0)
    m_i2 = 2 * ns * ns + ns
    assert stats.mean_obs == pytest.approx(nb * ns, rel=1e-13)
    assert stats.var_obs == pytest.approx(
        nb * m_i2 + nb * nb * (2 * m_i2 - ns * ns), rel=1e-13)


def test_pnr_joint_no_idler():
    stats = pnr_stats_joint(Scenario(ProbeSpec.cct(1.0, 0.0), 0.3, 5.0))
    assert stats.mean_obs == 0.0
    assert stats.var_obs == 0.0


def test_pnr_joint_matches_grid_moments():
    # cross-representation: closed-form moments vs direct grid sums
    for probe in (ProbeSpec.tmsv(0.01), ProbeSpec.cct(0.01, 0.02)):
        scn = Scenario(probe, 0.01, 600.0)
        stats = pnr_stats_joint(scn)
        grid = prob_grid(bargmann_of(scn), 1e-8)
        n = np.arange(grid.dims[0] + 1, dtype=float)[:, None]
        m = np.arange(grid.dims[1] + 1, dtype=float)[None, :]
        p = np.exp(grid.log_probs)
        mean = float((n * m * p).sum())
        var = float(((n * m) ** 2 * p).sum()) - mean * mean
        assert mean == pytest.approx(stats.mean_obs, rel=1e-4)
        assert var == pytest.approx(stats.var_obs, rel=1e-4)
