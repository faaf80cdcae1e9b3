"""Show the contact (cusp) condition and the equation of motion hold
numerically: both identities are exact at integrand level, so the
residuals track pure finite-difference error and shrink like h^2.

Run:  python demos/02_contact_condition.py
"""

from deltagas.propagator import PropagatorQuery, cusp_residual, pde_residual

print("derivative-jump condition on the coincidence plane, N = 2")
q = PropagatorQuery(x=[0.5, 0.5], y=[0.0, 1.0], t=0.2, eta=0.05, c=1.0)
for h in (8e-3, 4e-3, 2e-3, 1e-3):
    print(f"  h = {h:.0e}: residual = {cusp_residual(q, h=h):.3e}")

print("\nsame condition with a spectator particle, N = 3")
q3 = PropagatorQuery(x=[-0.8, 0.3, 0.3], y=[-0.9, 0.1, 0.9], t=0.15, eta=0.08, c=1.0)
for h in (4e-3, 2e-3, 1e-3):
    print(f"  h = {h:.0e}: residual = {cusp_residual(q3, h=h):.3e}")

print("\nfree equation of motion in the interior, N = 2")
qp = PropagatorQuery(x=[0.0, 1.0], y=[-0.3, 0.8], t=0.3, eta=0.05, c=1.0)
for h in (4e-3, 2e-3, 1e-3):
    print(f"  h = {h:.0e}: residual = {pde_residual(qp, h_x=h, h_t=h):.3e}")
