#!/usr/bin/env python3
"""Walk through the Gaussian probe states and their photon statistics.

Builds the three probe families, sends them through a noisy low-reflectivity
target, and checks the moment identities that the detection statistics rest
on.
"""

import numpy as np

from qillum import (ProbeSpec, Scenario, build_input, build_output,
                    gaussian_number_moment, mandel_q, mean_photon)

kappa, nb = 0.01, 600.0

print("=== post-target covariance matrices (kappa=0.01, N_B=600) ===")
for probe, name in [
    (ProbeSpec.coherent(1.0), "coherent  N_S=1"),
    (ProbeSpec.ds_from_split(1.0, 0.918), "displaced-squeezed N_S=1, |a|^2=0.918"),
    (ProbeSpec.tmsv(1.0), "TMSV      N_S=1"),
    (ProbeSpec.cct(1.0, 1.0), "CCT       N_S=N_I=1"),
]:
    state = build_output(Scenario(probe, kappa, nb))
    print(f"\n{name}")
    with np.printoptions(precision=5, suppress=False):
        print(state.cov)

print("\n=== mean photon numbers obey kappa <n>_in + N_B ===")
for probe in (ProbeSpec.coherent(1.0), ProbeSpec.tmsv(1.0),
              ProbeSpec.cct(1.0, 2.0)):
    out = build_output(Scenario(probe, kappa, nb))
    print(f"{probe.kind.value:5s}: signal mean = {mean_photon(out, 0):.6f}"
          f"  (expect {kappa * probe.n_signal + nb:.6f})")

print("\n=== input photon-number moments (Gaussian moment engine) ===")
tmsv_in = build_input(ProbeSpec.tmsv(1.0))
print("TMSV N_S=1:  <n_S n_I>   =", gaussian_number_moment(tmsv_in, (1, 1)),
      " (thermal-diagonal value 2N^2+N = 3)")
print("             <(n_S n_I)^2> =", gaussian_number_moment(tmsv_in, (2, 2)))

print("\n=== Mandel Q of the input signal mode ===")
print("coherent:", mandel_q(ProbeSpec.coherent(1.0)))
print("TMSV signal marginal (thermal):", mandel_q(ProbeSpec.tmsv(0.5)))
print("DS at the optimum split (sub-Poissonian):",
      mandel_q(ProbeSpec.ds_from_split(1.0, 0.918)))
