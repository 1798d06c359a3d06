"""The boundedness dichotomy, measured: vertical blows up, horizontal stays flat.

On a model whose smallest end has dimension n_min = 3, the low-energy
vertical square function S_< is L^p-bounded only for p < n_min, while the
horizontal square function s_< is bounded for every p.  The witness family
f_eps = r^(-(n_min/p)(1+eps)) x (smooth cutoff) detects this: the ratio
||S_< f_eps||_p / ||f_eps||_p grows like a power of 1/eps exactly when S_< is
unbounded at that p, and plateaus otherwise.

A short scalar computation predicts the blow-up exponent.  Near the critical
p = n_min the dominant contribution is rank-one: pairing the resolvent
kernel at the hub against f_eps gives ~ k^(eps-1), so the k-integral is
int_0^1 k^(2 eps - 1) dk = 1/(2 eps) and the square root leaves eps^(-1/2).
Against ||f_eps||_p ~ eps^(-1/p) the log-log slope of the ratio is

    slope = 1/2 - 1/p    (= 1/6 at p = 3),

and at p = 2 the two eps-rates cancel exactly, so the slope is 0.
"""

from ends_sqfn.experiments import witness_sweep
from ends_sqfn.radial_model import EndProfile, build_model
from ends_sqfn.sqfn import SpectralGrid, SqfnEngine

model = build_model([EndProfile(3, 1.0, 1e9, 48), EndProfile(4, 1.0, 1e9, 48)])
grid = SpectralGrid.for_model(model, points_per_decade_k=24)
engine = SqfnEngine(model)
eps = [0.4, 0.2, 0.1, 0.05]

print("kind        M  p    slope     note")
for kind, M, p, note in [
    ("vertical", 1, 3.0, "unbounded: expect 1/2 - 1/3 = 0.167"),
    ("vertical", 1, 2.0, "bounded:   expect ~ 0"),
    ("horizontal", 2, 3.0, "bounded:   expect ~ 0"),
    ("horizontal", 2, 4.0, "bounded:   expect ~ 0"),
    ("horizontal", 2, 6.0, "bounded:   expect ~ 0"),
]:
    res = witness_sweep(model, M, p, eps, kind, engine, grid)
    print(f"{kind:<11}{M}  {p:<4g}{res.slope:+.4f}   {note}")

print("\nratios along the vertical p=3 sweep (eps -> ratio):")
res = witness_sweep(model, 1, 3.0, eps, "vertical", engine, grid)
for e, r in zip(res.eps_grid, res.ratios):
    print(f"  eps={e:<5g} ratio={r:.5f}")
