"""Are the chain's denominator atoms irreducible? Factor them in sympy."""
import time
import sympy as sp
from delta_reduce import *
from delta_reduce.systems import (BlockSystem, LowerEquation, vec_add, vec_convolve,
                                   vec_convolve_multi, vec_order, vec_sub)

reg = Registry()
b1, b2, b3, b4 = reg.free("b1", "b2", "b3", "b4")
u0, v0, w0, z0 = reg.dependent("u0", "v0", "w0", "z0")
R = RationalExpr
a = {0: R.of(b1), 2: R.ONE}
b = {0: R.of(b2), 2: R.ONE}
low = [LowerEquation(w0, dict(a), {}, {0: R.of(b3), 2: R.ONE}),
       LowerEquation(z0, dict(a), {}, {0: R.of(b4), 2: R.ONE})]
bs = BlockSystem(u0, v0, dict(a), dict(b), low)
count = [0]
def fresh(v):
    count[0] += 1
    return reg.dependent(f"t{count[0]}")

def run_until(bs, nsteps):
    step = 0
    while step < nsteps:
        zo = vec_order(bs.b)
        if zo == 0:
            step += 1
            tau = {j: bs.a[j] / bs.b[0] for j in bs.a}
            for lo in bs.lower:
                lo.c = vec_add(lo.c, vec_convolve_multi(lo.e, tau)); lo.e = {}
            first, rest = bs.lower[0], bs.lower[1:]
            bs = BlockSystem(bs.u, first.w, first.c, first.beta, list(rest))
            continue
        step += 1
        ell = bs.ell
        rho = bs.b[ell] / bs.a[ell]
        bs.b = vec_sub(bs.b, vec_convolve(bs.a, rho, 0))
        for lo in bs.lower:
            lo.e = vec_add(lo.e, vec_convolve(lo.c, rho, 0))
        bs.u = fresh(bs.u)
        for lo in bs.lower:
            hj = vec_order(lo.beta)
            if vec_order(lo.e) == hj:
                step += 1
                sg = lo.e[hj] / lo.beta[hj]
                lo.e = vec_sub(lo.e, vec_convolve(lo.beta, sg, 0)); lo.w = fresh(lo.w)
        if vec_order(bs.b) == 0:
            continue
        step += 1
        s = ell - 1
        sg = bs.a[ell] / bs.b[s]
        bs.a = vec_sub(bs.a, vec_convolve(bs.b, sg, 1))
        for lo in bs.lower:
            lo.c = vec_add(lo.c, vec_convolve(lo.e, sg, 1))
        bs.z = fresh(bs.z)
    return bs

bs = run_until(bs, 10)  # through block-2 solve
# collect all distinct atoms across top coefficients
atoms = {}
for k, v in list(bs.a.items()) + list(bs.b.items()):
    for f, e in v.denominator_factors:
        atoms[str(f)] = f
syms = {}
def to_sympy(p):
    tot = 0
    for m, c in p.terms.items():
        t = sp.Rational(c.numerator, c.denominator)
        for s, e in m.exps:
            key = str(s).replace("'", "_p")
            if key not in syms: syms[key] = sp.Symbol(key)
            t *= syms[key] ** e
        tot += t
    return tot

for name, f in sorted(atoms.items(), key=lambda t: t[1].term_count()):
    t0 = time.time()
    fl = sp.factor_list(to_sympy(f))
    nfac = sum(m for _, m in fl[1])
    irred = nfac == 1
    print(f"atom terms={f.term_count()} deg={f.degree()} factors={[(len(sp.Add.make_args(sp.expand(g))), m) for g, m in fl[1]]} irreducible={irred} ({time.time()-t0:.1f}s)", flush=True)
