"""Instrumented probe: where does the chain get slow?"""
import time

from delta_reduce import *
from delta_reduce.systems import (
    BlockSystem,
    LowerEquation,
    vec_add,
    vec_convolve,
    vec_convolve_multi,
    vec_order,
    vec_sub,
)

reg = Registry()
b1, b2, b3, b4 = reg.free("b1", "b2", "b3", "b4")
u0, v0, w0, z0 = reg.dependent("u0", "v0", "w0", "z0")
R = RationalExpr

a = {0: R.of(b1), 2: R.ONE}
b = {0: R.of(b2), 2: R.ONE}
low = [
    LowerEquation(w0, dict(a), {}, {0: R.of(b3), 2: R.ONE}),
    LowerEquation(z0, dict(a), {}, {0: R.of(b4), 2: R.ONE}),
]
bs = BlockSystem(u0, v0, dict(a), dict(b), low)

count = [0]


def fresh(var):
    count[0] += 1
    return reg.dependent(f"t{count[0]}")


def size(e):
    return (e.numerator.term_count(), sum(f.term_count() * x for f, x in e.denominator_factors))


def report(tag, bs, t0):
    tops = {k: size(v) for k, v in bs.a.items()}
    topz = {k: size(v) for k, v in bs.b.items()}
    print(f"{tag}: {time.time()-t0:.2f}s a={tops} b={topz} nlower={len(bs.lower)}")
    for lo in bs.lower:
        print("   low c:", {k: size(v) for k, v in lo.c.items()}, "e:", {k: size(v) for k, v in lo.e.items()})


t0 = time.time()
step = 0
while True:
    zo = vec_order(bs.b)
    if zo == 0:
        step += 1
        tau = {j: bs.a[j] / bs.b[0] for j in bs.a}
        for lo in bs.lower:
            lo.c = vec_add(lo.c, vec_convolve_multi(lo.e, tau))
            lo.e = {}
        if not bs.lower:
            report(f"step{step} final", bs, t0)
            break
        first, rest = bs.lower[0], bs.lower[1:]
        bs = BlockSystem(bs.u, first.w, first.c, first.beta, [lo for lo in rest])
        report(f"step{step} bsolve", bs, t0)
        continue
    step += 1
    ell = bs.ell
    rho = bs.b[ell] / bs.a[ell]
    bs.b = vec_sub(bs.b, vec_convolve(bs.a, rho, 0))
    for lo in bs.lower:
        lo.e = vec_add(lo.e, vec_convolve(lo.c, rho, 0))
    bs.u = fresh(bs.u)
    report(f"step{step} sub1", bs, t0)
    for lo in bs.lower:
        hj = vec_order(lo.beta)
        if vec_order(lo.e) == hj:
            step += 1
            sigma = lo.e[hj] / lo.beta[hj]
            lo.e = vec_sub(lo.e, vec_convolve(lo.beta, sigma, 0))
            lo.w = fresh(lo.w)
    report(f"step{step} sub2s", bs, t0)
    if vec_order(bs.b) == 0:
        continue
    step += 1
    s = ell - 1
    sigma = bs.a[ell] / bs.b[s]
    bs.a = vec_sub(bs.a, vec_convolve(bs.b, sigma, 1))
    for lo in bs.lower:
        lo.c = vec_add(lo.c, vec_convolve(lo.e, sigma, 1))
    bs.z = fresh(bs.z)
    report(f"step{step} sub3", bs, t0)

print(f"TOTAL {time.time()-t0:.2f}s steps={step}")
