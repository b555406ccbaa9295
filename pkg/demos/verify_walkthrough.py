"""Subsolution checks for the linear reference configuration.

Evaluates the PDE residual of the shrunk scheme (1 - eta) U on the inner,
middle and outer regions, repeats at eps/2, and prints the decay-rate bound.

    python3 demos/verify_walkthrough.py
"""
import numpy as np

from rareexit import EscapeProblem, ExitDomain, SchemeParams, linear_model
from rareexit import verify as V

lin = EscapeProblem(linear_model(), ExitDomain.symmetric(1.0))
p = SchemeParams.build(lin, 0.1, 5.0, xhat=1.0, M=4)
print(f"eps={p.eps} T={p.T} M={p.M} xhat={p.xhat} delta={p.delta}")
print(f"t*={p.tstar:.4f}  z={p.z:.4f}  H={p.H:.4f}")

cert = V.certify_region_lemmas(lin, p, V.AnalysisParams(eta=0.25))
for r in cert.at_eps.regions:
    if not r.points:
        print(f"  {r.name:8s} empty (H beyond the boundary)")
        continue
    print(f"  {r.name:8s} worst {r.worst_margin:+.3e} at t={r.t:.2f}, x={r.x:+.3f}; "
          f"x{cert.shrink[r.name]:.3g} smaller at eps/2 -> "
          f"{'ok' if cert.certified[r.name] else 'FAIL'}")

# without the (1 - eta) shrink the outer region can go negative
q = SchemeParams.build(lin, 0.1, 5.0, xhat=0.2, M=4)
for eta in (0.0, 0.25):
    rep = V.check_region_lemmas(lin, q, V.AnalysisParams(eta=eta))
    print(f"xhat=0.2, eta={eta}: outer+ worst margin {rep.worst('outer+'):+.4f}")

# the decay-rate bound needs z^2 c eta >= 8 eps sbar^2, so a larger xhat
eta = 0.24
xh = V.min_xhat_for_theorem(0.13, eta, 4.0, 1.0, 1.0) * 1.0001
pb = SchemeParams.build(lin, 0.13, 5.0, xhat=xh, M=4)
tb = V.theorem_bound(lin, pb, V.AnalysisParams(eta=eta))
print(f"admissible xhat {xh:.3f}: bound {tb.bound:.3f}, I1={tb.I1:.3f}, "
      f"optimal rate 2L={2 * lin.L:.3f}")
tb1 = V.theorem_bound(lin, SchemeParams.build(lin, 0.13, 5.0, xhat=1.0, M=4),
                      V.AnalysisParams(eta=0.25), strict=False)
print(f"xhat=1 (hypotheses not met): bound {tb1.bound:.3f}")
for k, v in tb1.hypotheses.items():
    print(f"    [{'x' if v else ' '}] {k}")

# the approximation-error integral settles as T grows
lin4 = EscapeProblem(linear_model(4.0, 1.0), ExitDomain.symmetric(1.0))
for T in (10.0, 100.0, 1000.0):
    pr = SchemeParams.build(lin4, 0.05, T, xhat=0.4, M=32)
    print(f"T={T:6g}: int r = {V.r_integral(pr):.10e} "
          f"(quad {V.r_integral(pr, 'quad'):.10e})")
print("closed form vs quad agree:", np.isclose(V.r_integral(pr), V.r_integral(pr, "quad")))
