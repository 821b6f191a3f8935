"""Stopped paths and barrier detection.

Simulates the mean-reverting diffusion between two barriers and the
radial-complement process, and shows why sub-step crossing coins matter:
pure grid detection misses excursions across a barrier inside a step and
undercounts hits by O(sqrt(step)).
"""

from rarepath import (OuQuery, PathFunctional, RngStream, oracle_rejection,
                      ou_scale_ratio, simulate_bessel3_complement,
                      simulate_ou_stopped)

SEED = 1

print("One stopped mean-reverting path from 1.0 between barriers 0 and 2:")
seg = simulate_ou_stopped(RngStream(SEED), x0=1.0, step=1e-3, lower=0.0,
                          upper=2.0, detection="bridge")
print(f"  hit the {seg.hit.value!r} barrier after ~{seg.stop_time_refined:.3f} "
      f"time units ({seg.stop_index} grid steps)")

print("\nOne radial-complement path from level 2 (always reaches 0):")
seg = simulate_bessel3_complement(RngStream(SEED + 1), level=2.0, step=1e-3)
print(f"  starts at {seg.path.values[0]} exactly, reaches 0 at "
      f"t ~ {seg.stop_time_refined:.3f}")

print("\nUpward-hit probability from 1.0, barriers (0, 2):")
p_exact = ou_scale_ratio(1.0, 2.0)
print(f"  scale-function quadrature: {p_exact:.5f}")
for detection in ("grid", "bridge"):
    rep = oracle_rejection(OuQuery(level=2, functional=PathFunctional.indicator(),
                                   replicas=100_000, step=1e-3, seed=SEED,
                                   detection=detection))
    p = rep.extras["acceptance_rate"]
    se = rep.extras["acceptance_stderr"]
    print(f"  {detection:>6} detection at step 1e-3: {p:.5f} +- {se:.5f} "
          f"(bias {p - p_exact:+.5f})")
print("  the grid-mode bias is ~0.15*sqrt(step) and shrinks with refinement;")
print("  bridge coins remove it to O(step).")
