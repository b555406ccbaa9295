"""Double-well potential V(x) = (x^2 - 1)^2 / 2, escape from the left well.

Shows the linearization at the rest point, the exit level, the constants used
by the nonlinear bound, and a short estimate with its step-size sensitivity.

    python3 demos/double_well.py
"""
from rareexit import EscapeProblem, ExitDomain, SchemeParams, double_well_model
from rareexit import verify as V
from rareexit.sampler import SchemeRule, SimConfig, estimate

dw = EscapeProblem(double_well_model(), ExitDomain.two_sided(-1.4, -0.23))
print(f"c={dw.c:g} sbar={dw.sbar:g} L={dw.L:.4f}")
print(f"with level_rule=max L would be "
      f"{EscapeProblem(dw.model, dw.domain, 'max').L:.4f}")

k = V.nonlinear_constants(dw)
print(f"C0={k.C0:.4g} C1={k.C1:.4g} c*={k.c_star:.4g} sigma*^2={k.sigma_star2:g}")
print(f"eps0(H=0.1) = {V.eps0(dw, 0.1):.5f}")

rule = SchemeRule("mollified-nonlinear", xhat0=0.4, kappa=0.4)
p = rule.params(dw, 0.09, 5.0)
print(f"eps=0.09: M={p.M:.3f} t*={p.tstar:.3f} z={p.z:.4f}")
for dt in (1e-3, 5e-4):
    r = estimate(dw, SimConfig(p, rule.kind, 20_000, dt=dt, seed=3))
    print(f"  dt={dt:g}: estimate {r.estimate:.4e} +- {r.std_error:.1e}, "
          f"rel error {r.rel_error:.3g}")
# exits are checked on the time grid, so a finer step finds more of them
